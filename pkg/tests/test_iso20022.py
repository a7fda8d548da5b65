"""Codec behaviour: round trips, canonical bytes, extraction, guards."""

import random
from dataclasses import replace
from datetime import datetime, timezone
from decimal import Decimal
from fractions import Fraction

import pytest
from hypothesis import given, settings

from pacsim.iso20022 import (
    BicCode,
    CreditTransferTxInfo,
    GroupHeader,
    HopMismatch,
    InvariantViolation,
    MalformedXml,
    MissingReason,
    MultiTransactionUnsupported,
    Pacs008Message,
    PaymentStatus,
    SchemaViolation,
    advance_message,
    build_pacs002,
    build_pacs004,
    extract_debtor_instruction,
    new_pacs008,
    parse_pacs008,
    serialize_pacs002,
    serialize_pacs004,
    serialize_pacs008,
    structured_dump,
    validate_control_sum,
)
from pacsim.money import MoneyAmount

from support import EPOCH, messages, single_tx_messages


def _fixture_message(amount="100.00", currency="USD"):
    tx = CreditTransferTxInfo(
        end_to_end_id="E2E-FIX-1",
        settlement_amount=MoneyAmount(currency, Decimal(amount)),
        debtor_name="Alice Example",
        debtor_account="ACC-001",
        debtor_agent=BicCode("AAAAUS33"),
        creditor_name="Bob Example",
        creditor_account="CRD-001",
        creditor_agent=BicCode("CCCCGB2L"),
        intermediary_agents=(BicCode("BBBBDEFF"),),
    )
    return new_pacs008("MSG-FIX-1", EPOCH, BicCode("AAAAUS33"), BicCode("BBBBDEFF"), (tx,))


class TestParse:
    def test_parse_recovers_construction_inputs(self):
        msg = _fixture_message()
        parsed = parse_pacs008(serialize_pacs008(msg))
        assert parsed.transactions[0].settlement_amount == MoneyAmount("USD", Decimal("100.00"))
        assert parsed == msg

    def test_missing_amount_names_path(self):
        xml = serialize_pacs008(_fixture_message()).decode()
        xml = xml.replace('<IntrBkSttlmAmt Ccy="USD">100.00</IntrBkSttlmAmt>', "")
        with pytest.raises(SchemaViolation) as err:
            parse_pacs008(xml.encode())
        assert "CdtTrfTxInf/IntrBkSttlmAmt" in str(err.value)

    def test_control_sum_mismatch_is_invariant_violation(self):
        msg = _fixture_message()
        two = new_pacs008(
            "MSG-2", EPOCH, BicCode("AAAAUS33"), BicCode("BBBBDEFF"),
            (msg.transactions[0], replace(msg.transactions[0], end_to_end_id="E2E-FIX-2")),
        )
        bad_header = replace(two.group_header, ctrl_sum=two.group_header.ctrl_sum + Decimal("0.01"))
        xml = serialize_pacs008(two).decode().replace(
            "<CtrlSum>200.00</CtrlSum>", "<CtrlSum>200.01</CtrlSum>"
        )
        assert bad_header.ctrl_sum == Decimal("200.01")
        with pytest.raises(InvariantViolation):
            parse_pacs008(xml.encode())

    def test_not_xml(self):
        with pytest.raises(MalformedXml):
            parse_pacs008(b"this is not xml")

    def test_wrong_root(self):
        with pytest.raises(SchemaViolation):
            parse_pacs008(b"<NotADocument/>")

    def test_excess_amount_scale_is_schema_violation(self):
        xml = serialize_pacs008(_fixture_message()).decode()
        xml = xml.replace(">100.00<", ">100.001<")
        with pytest.raises(SchemaViolation):
            parse_pacs008(xml.encode())

    def test_missing_currency_attribute(self):
        xml = serialize_pacs008(_fixture_message()).decode()
        xml = xml.replace(' Ccy="USD"', "")
        with pytest.raises(SchemaViolation) as err:
            parse_pacs008(xml.encode())
        assert "@Ccy" in str(err.value)

    def test_unknown_elements_preserved_opaquely(self):
        xml = serialize_pacs008(_fixture_message()).decode()
        xml = xml.replace(
            "</GrpHdr>", "<SttlmInf><SttlmMtd>CLRG</SttlmMtd></SttlmInf></GrpHdr>"
        )
        parsed = parse_pacs008(xml.encode())
        assert ("GrpHdr", "<SttlmInf><SttlmMtd>CLRG</SttlmMtd></SttlmInf>") in parsed.extras
        again = parse_pacs008(serialize_pacs008(parsed))
        assert again == parsed

    def test_accepts_foreign_whitespace(self):
        xml = serialize_pacs008(_fixture_message()).decode()
        pretty = xml.replace("><", ">\n  <").encode()
        assert parse_pacs008(pretty) == _fixture_message()

    def test_deep_unknown_elements_survive_reserialization(self):
        xml = serialize_pacs008(_fixture_message()).decode()
        xml = xml.replace(
            "</EndToEndId></PmtId>", "</EndToEndId><InstrId>INSTR-9</InstrId></PmtId>"
        )
        xml = xml.replace(
            "<Othr><Id>ACC-001</Id></Othr>",
            "<Othr><Id>ACC-001</Id><SchmeNm><Cd>BBAN</Cd></SchmeNm></Othr>",
        )
        parsed = parse_pacs008(xml.encode())
        assert ("CdtTrfTxInf[0]/PmtId", "<InstrId>INSTR-9</InstrId>") in parsed.extras
        assert (
            "CdtTrfTxInf[0]/DbtrAcct/Id/Othr",
            "<SchmeNm><Cd>BBAN</Cd></SchmeNm>",
        ) in parsed.extras
        out = serialize_pacs008(parsed)
        assert b"<InstrId>INSTR-9</InstrId>" in out
        assert b"<SchmeNm><Cd>BBAN</Cd></SchmeNm>" in out
        assert parse_pacs008(out) == parsed
        assert serialize_pacs008(parse_pacs008(out)) == out


class TestSerialize:
    def test_three_transactions_counted(self):
        tx = _fixture_message().transactions[0]
        txs = tuple(replace(tx, end_to_end_id=f"E2E-{i}") for i in range(3))
        msg = new_pacs008("MSG-3", EPOCH, BicCode("AAAAUS33"), BicCode("BBBBDEFF"), txs)
        xml = serialize_pacs008(msg).decode()
        assert xml.count("<CdtTrfTxInf>") == 3
        assert "<NbOfTxs>3</NbOfTxs>" in xml

    def test_control_sum_text_exact(self):
        tx = _fixture_message().transactions[0]
        txs = (
            replace(tx, settlement_amount=MoneyAmount("USD", Decimal("10.00")), end_to_end_id="a"),
            replace(tx, settlement_amount=MoneyAmount("USD", Decimal("20.50")), end_to_end_id="b"),
        )
        msg = new_pacs008("MSG-S", EPOCH, BicCode("AAAAUS33"), BicCode("BBBBDEFF"), txs)
        assert "<CtrlSum>30.50</CtrlSum>" in serialize_pacs008(msg).decode()

    def test_inconsistent_header_rejected(self):
        msg = _fixture_message()
        broken = replace(msg, group_header=replace(msg.group_header, nb_of_txs=2))
        with pytest.raises(InvariantViolation):
            serialize_pacs008(broken)

    @given(messages())
    @settings(max_examples=80)
    def test_round_trip_identity(self, msg):
        assert parse_pacs008(serialize_pacs008(msg)) == msg

    @given(messages())
    @settings(max_examples=80)
    def test_canonical_fixpoint(self, msg):
        once = serialize_pacs008(msg)
        assert serialize_pacs008(parse_pacs008(once)) == once


class TestExtraction:
    def test_extraction_field_sources(self):
        tx = CreditTransferTxInfo(
            end_to_end_id="E2E-EXT",
            settlement_amount=MoneyAmount("EUR", Decimal("250.00")),
            debtor_name="Alice Example",
            debtor_account="ACC-001",
            debtor_agent=BicCode("AAAAUS33"),
            creditor_name="Bob Example",
            creditor_account="CRD-001",
            creditor_agent=BicCode("CCCCGB2L"),
        )
        msg = new_pacs008("MSG-EXT", EPOCH, BicCode("AAAAUS33"), BicCode("BBBBDEFF"), (tx,))
        xml = serialize_pacs008(msg)
        instruction = extract_debtor_instruction(xml)
        assert instruction.settlement_amount == MoneyAmount("EUR", Decimal("250.00"))
        assert instruction.debtor_agent == BicCode("AAAAUS33")
        assert instruction.debtor_account == "ACC-001"
        assert instruction.next_agent == BicCode("BBBBDEFF")
        assert instruction.iso_message == xml

    def test_embedded_message_reparses_identically(self):
        msg = _fixture_message()
        instruction = extract_debtor_instruction(serialize_pacs008(msg))
        assert parse_pacs008(instruction.iso_message) == msg

    def test_multi_transaction_rejected(self):
        tx = _fixture_message().transactions[0]
        msg = new_pacs008(
            "MSG-M", EPOCH, BicCode("AAAAUS33"), BicCode("BBBBDEFF"),
            (tx, replace(tx, end_to_end_id="E2E-OTHER")),
        )
        with pytest.raises(MultiTransactionUnsupported):
            extract_debtor_instruction(serialize_pacs008(msg))

    @given(single_tx_messages())
    @settings(max_examples=60)
    def test_extraction_parity(self, msg):
        """The five extracted fields equal the values placed at construction."""
        xml = serialize_pacs008(msg)
        instruction = extract_debtor_instruction(xml)
        tx = msg.transactions[0]
        assert instruction.settlement_amount == tx.settlement_amount
        assert instruction.debtor_agent == tx.debtor_agent
        assert instruction.debtor_account == tx.debtor_account
        assert instruction.iso_message == xml
        assert instruction.next_agent == msg.group_header.instructed_agent


class TestControlSum:
    def test_exact_match_true(self):
        assert validate_control_sum(_fixture_message()) is True

    def test_off_by_cent_false(self):
        msg = _fixture_message()
        broken = replace(
            msg, group_header=replace(msg.group_header, ctrl_sum=Decimal("100.01"))
        )
        assert validate_control_sum(broken) is False

    def test_matches_fraction_oracle_on_randomized_messages(self):
        """Independent oracle: exact rational summation via fractions."""
        rng = random.Random(20240101)
        base = _fixture_message()
        for _ in range(120):
            n = rng.randint(1, 5)
            txs = tuple(
                replace(
                    base.transactions[0],
                    end_to_end_id=f"E2E-{i}",
                    settlement_amount=MoneyAmount(
                        "USD", Decimal(rng.randint(1, 10**7)).scaleb(-2)
                    ),
                )
                for i in range(n)
            )
            ctrl = sum((t.settlement_amount.value for t in txs), Decimal(0))
            if rng.random() < 0.5:
                ctrl += Decimal(rng.randint(1, 100)).scaleb(-2)
            header = GroupHeader(
                msg_id="MSG-R",
                creation_time=EPOCH,
                nb_of_txs=n,
                ctrl_sum=ctrl,
                instructing_agent=BicCode("AAAAUS33"),
                instructed_agent=BicCode("BBBBDEFF"),
            )
            msg = Pacs008Message(group_header=header, transactions=txs)
            oracle = sum(
                (Fraction(t.settlement_amount.text()) for t in txs), Fraction(0)
            ) == Fraction(str(ctrl))
            assert validate_control_sum(msg) == oracle


class TestAdvance:
    def test_readdresses_and_keeps_payload(self):
        msg = _fixture_message()
        advanced = advance_message(msg, BicCode("BBBBDEFF"), BicCode("CCCCGB2L"))
        assert advanced.group_header.instructing_agent == BicCode("BBBBDEFF")
        assert advanced.group_header.instructed_agent == BicCode("CCCCGB2L")
        assert advanced.transactions == msg.transactions
        assert advanced.group_header.msg_id != msg.group_header.msg_id

    def test_wrong_holder_rejected(self):
        msg = _fixture_message()  # instructed agent is BBBBDEFF
        with pytest.raises(HopMismatch):
            advance_message(msg, BicCode("AAAAUS33"), BicCode("CCCCGB2L"))

    @given(single_tx_messages())
    @settings(max_examples=60)
    def test_advance_conserves_payload(self, msg):
        target = BicCode("ZZZZZZ99")
        advanced = advance_message(msg, msg.group_header.instructed_agent, target)
        assert advanced.transactions == msg.transactions
        assert advanced.group_header.ctrl_sum == msg.group_header.ctrl_sum
        assert advanced.group_header.nb_of_txs == msg.group_header.nb_of_txs

    def test_deterministic_defaults(self):
        msg = _fixture_message()
        a1 = advance_message(msg, BicCode("BBBBDEFF"), BicCode("CCCCGB2L"))
        a2 = advance_message(msg, BicCode("BBBBDEFF"), BicCode("CCCCGB2L"))
        assert serialize_pacs008(a1) == serialize_pacs008(a2)


class TestStatusAndReturn:
    def test_settled_report(self):
        report = build_pacs002(_fixture_message(), PaymentStatus.ACSC)
        assert report.original_msg_id == "MSG-FIX-1"
        assert report.original_end_to_end_id == "E2E-FIX-1"
        assert report.reason is None

    def test_rejected_report_carries_reason(self):
        report = build_pacs002(
            _fixture_message(), PaymentStatus.RJCT, "insufficient nostro funds"
        )
        assert report.reason == "insufficient nostro funds"
        assert b"insufficient nostro funds" in serialize_pacs002(report)

    def test_rjct_without_reason_rejected(self):
        with pytest.raises(MissingReason):
            build_pacs002(_fixture_message(), PaymentStatus.RJCT)

    def test_return_echoes_amount_and_ids(self):
        msg = _fixture_message(amount="250.00", currency="EUR")
        ret = build_pacs004(msg, "creditor unreachable", BicCode("BBBBDEFF"), BicCode("AAAAUS33"))
        assert ret.returned_amount == MoneyAmount("EUR", Decimal("250.00"))
        assert ret.original_end_to_end_id == msg.transactions[0].end_to_end_id
        assert b"250.00" in serialize_pacs004(ret)

    def test_return_refuses_multi_transaction(self):
        tx = _fixture_message().transactions[0]
        msg = new_pacs008(
            "MSG-M", EPOCH, BicCode("AAAAUS33"), BicCode("BBBBDEFF"),
            (tx, replace(tx, end_to_end_id="E2E-OTHER")),
        )
        with pytest.raises(MultiTransactionUnsupported):
            build_pacs004(msg, "x", BicCode("BBBBDEFF"), BicCode("AAAAUS33"))


class TestTypes:
    def test_bic_validation(self):
        for bad in ("short", "aaaaus33", "AAAAUS3", "AAA1US33", "AAAAUS33XXXX"):
            with pytest.raises(InvariantViolation):
                BicCode(bad)
        assert BicCode("AAAAUS33XXX").value == "AAAAUS33XXX"

    def test_header_requires_utc(self):
        with pytest.raises(InvariantViolation):
            GroupHeader(
                msg_id="M",
                creation_time=datetime(2024, 1, 1),  # naive
                nb_of_txs=1,
                ctrl_sum=Decimal("1.00"),
                instructing_agent=BicCode("AAAAUS33"),
                instructed_agent=BicCode("BBBBDEFF"),
            )

    def test_msg_id_length_cap(self):
        with pytest.raises(InvariantViolation):
            GroupHeader(
                msg_id="X" * 36,
                creation_time=datetime(2024, 1, 1, tzinfo=timezone.utc),
                nb_of_txs=1,
                ctrl_sum=Decimal("1.00"),
                instructing_agent=BicCode("AAAAUS33"),
                instructed_agent=BicCode("BBBBDEFF"),
            )

    def test_structured_dump_lists_fields(self):
        dump = structured_dump(_fixture_message())
        assert "msg_id: MSG-FIX-1" in dump
        assert "tx[0].settlement_amount: 100.00 USD" in dump
