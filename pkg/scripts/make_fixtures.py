#!/usr/bin/env python3
"""Regenerate the golden message corpus under tests/fixtures/messages/.

Each fixture is a canonical pacs.008 XML file with a human-readable sidecar
dump (same stem, .txt). Tests parse the XML and compare against the sidecar,
and check byte-level canonical stability against the committed XML.
"""

from __future__ import annotations

from datetime import datetime, timezone
from decimal import Decimal
from pathlib import Path

from pacsim.iso20022 import (
    BicCode,
    CreditTransferTxInfo,
    new_pacs008,
    serialize_pacs008,
    structured_dump,
)
from pacsim.money import MoneyAmount

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "messages"

EPOCH = datetime(2024, 1, 1, tzinfo=timezone.utc)


def tx(e2e, amount, currency, debtor_agent, creditor_agent, intermediaries=(), **kw):
    return CreditTransferTxInfo(
        end_to_end_id=e2e,
        settlement_amount=MoneyAmount(currency, Decimal(amount)),
        debtor_name=kw.get("debtor_name", "Alice Example"),
        debtor_account=kw.get("debtor_account", "ACC-001"),
        debtor_agent=BicCode(debtor_agent),
        creditor_name=kw.get("creditor_name", "Bob Example"),
        creditor_account=kw.get("creditor_account", "CRD-001"),
        creditor_agent=BicCode(creditor_agent),
        intermediary_agents=tuple(BicCode(b) for b in intermediaries),
    )


def fixtures():
    yield "single_usd", new_pacs008(
        "FIXTURE-001", EPOCH, BicCode("AAAAUS33"), BicCode("BBBBDEFF"),
        (tx("E2E-USD-100", "100.00", "USD", "AAAAUS33", "CCCCGB2L", ["BBBBDEFF"]),),
    )
    yield "single_eur", new_pacs008(
        "FIXTURE-002", EPOCH, BicCode("AAAAUS33"), BicCode("BBBBDEFF"),
        (tx("E2E-EUR-250", "250.00", "EUR", "AAAAUS33", "CCCCGB2L"),),
    )
    yield "single_jpy", new_pacs008(
        "FIXTURE-003", EPOCH, BicCode("EEEEJPJT"), BicCode("AAAAUS33"),
        (tx("E2E-JPY", "50000", "JPY", "EEEEJPJT", "AAAAUS33",
            debtor_name="Tanaka Trading", creditor_name="US Receiver Inc"),),
    )
    yield "multi_tx", new_pacs008(
        "FIXTURE-004", EPOCH, BicCode("AAAAUS33"), BicCode("BBBBDEFF"),
        (
            tx("E2E-A", "10.00", "USD", "AAAAUS33", "CCCCGB2L"),
            tx("E2E-B", "20.50", "USD", "AAAAUS33", "CCCCGB2L"),
            tx("E2E-C", "0.01", "USD", "AAAAUS33", "CCCCGB2L"),
        ),
    )
    yield "escaped_names", new_pacs008(
        "FIXTURE-005", EPOCH, BicCode("AAAAUS33"), BicCode("BBBBDEFF"),
        (tx("E2E-ESC", "42.42", "USD", "AAAAUS33", "CCCCGB2L",
            debtor_name="Smith & Sons <Export>", creditor_name="O'Leary GmbH"),),
    )
    yield "three_intermediaries", new_pacs008(
        "FIXTURE-006", EPOCH, BicCode("AAAAUS33"), BicCode("BBBBDEFF"),
        (tx("E2E-LONG-CHAIN", "9999999.99", "USD", "AAAAUS33", "GGGGSESS",
            ["BBBBDEFF", "CCCCGB2L", "DDDDFRPP"]),),
    )


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    for name, message in fixtures():
        xml = serialize_pacs008(message)
        (OUT / f"{name}.xml").write_bytes(xml)
        (OUT / f"{name}.txt").write_text(structured_dump(message), encoding="utf-8")
        print(f"wrote {name}.xml ({len(xml)} bytes)")


if __name__ == "__main__":
    main()
