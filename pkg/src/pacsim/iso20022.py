"""ISO 20022 payment message subset: pacs.008 codec plus pacs.002/pacs.004 builders.

The supported pacs.008 element layout is documented in ``docs/message-schema.md``.
Parsing matches elements by local name under a single default namespace on the
``Document`` root; the namespace string itself is preserved but not interpreted.
Serialization is canonical: fixed element order, UTF-8, no insignificant
whitespace, amounts printed at their currency's minor units. Elements outside
the supported subset are kept as opaque canonical snippets and re-emitted at
the end of their enclosing container, so foreign messages survive a
parse/serialize round trip.
"""

from __future__ import annotations

import hashlib
import xml.etree.ElementTree as ET
from dataclasses import dataclass, replace
from datetime import datetime, timedelta, timezone
from decimal import Decimal
from enum import Enum
from xml.sax.saxutils import escape, quoteattr

from .errors import PacsimError
from .money import (
    InvalidAmount,
    MoneyAmount,
    format_decimal,
    minor_units,
    parse_decimal,
    scale_of,
)

PACS008_NAMESPACE = "urn:iso:std:iso:20022:tech:xsd:pacs.008.001.08"
PACS002_NAMESPACE = "urn:iso:std:iso:20022:tech:xsd:pacs.002.001.10"
PACS004_NAMESPACE = "urn:iso:std:iso:20022:tech:xsd:pacs.004.001.09"

MAX_ID_LENGTH = 35


class MessageError(PacsimError):
    """Base class for codec failures."""


class MalformedXml(MessageError):
    """Input is not well-formed XML."""


class SchemaViolation(MessageError):
    """A required element path is missing or carries unusable content."""

    def __init__(self, path: str, detail: str = "") -> None:
        self.path = path
        super().__init__(f"{path}: {detail}" if detail else path)


class InvariantViolation(MessageError):
    """A message-level invariant does not hold."""


class MultiTransactionUnsupported(MessageError):
    """Operation requires a single-transaction message."""


class HopMismatch(MessageError):
    """Hop advance attempted by an agent that is not the current holder."""


class MissingReason(MessageError):
    """A rejection report requires a reason."""


def _check_id(name: str, value: str) -> None:
    if not value or len(value) > MAX_ID_LENGTH:
        raise InvariantViolation(f"{name} must be 1..{MAX_ID_LENGTH} chars, got {value!r}")


@dataclass(frozen=True)
class BicCode:
    """8 or 11 character agent identifier (BICFI)."""

    value: str

    def __post_init__(self) -> None:
        v = self.value
        ok = (
            len(v) in (8, 11)
            and v.isalnum()
            and v == v.upper()
            and v[:6].isalpha()
        )
        if not ok:
            raise InvariantViolation(f"bad BIC: {v!r}")

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class GroupHeader:
    msg_id: str
    creation_time: datetime
    nb_of_txs: int
    ctrl_sum: Decimal
    instructing_agent: BicCode
    instructed_agent: BicCode

    def __post_init__(self) -> None:
        _check_id("MsgId", self.msg_id)
        if self.nb_of_txs < 1:
            raise InvariantViolation(f"NbOfTxs must be positive, got {self.nb_of_txs}")
        t = self.creation_time
        if t.tzinfo is None or t.utcoffset() != timedelta(0):
            raise InvariantViolation("CreDtTm must be a UTC timestamp")


@dataclass(frozen=True)
class CreditTransferTxInfo:
    end_to_end_id: str
    settlement_amount: MoneyAmount
    debtor_name: str
    debtor_account: str
    debtor_agent: BicCode
    creditor_name: str
    creditor_account: str
    creditor_agent: BicCode
    intermediary_agents: tuple[BicCode, ...] = ()

    def __post_init__(self) -> None:
        _check_id("EndToEndId", self.end_to_end_id)
        if self.settlement_amount.value <= 0:
            raise InvariantViolation("settlement amount must be positive")


@dataclass(frozen=True)
class Pacs008Message:
    """Customer credit transfer message (``FIToFICstmrCdtTrf``).

    ``extras`` holds opaque (container path, canonical snippet) pairs for
    elements outside the supported subset, keyed e.g. ``"GrpHdr"`` or
    ``"CdtTrfTxInf[0]/Dbtr"``; the tuple is ordered the way the parser walks
    the document, and the serializer re-emits each snippet at the end of its
    container.
    """

    group_header: GroupHeader
    transactions: tuple[CreditTransferTxInfo, ...]
    namespace: str = PACS008_NAMESPACE
    extras: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        if not self.transactions:
            raise InvariantViolation("message must carry at least one transaction")


class PaymentStatus(Enum):
    ACSC = "ACSC"  # settled
    RJCT = "RJCT"  # rejected


@dataclass(frozen=True)
class Pacs002Report:
    original_msg_id: str
    original_end_to_end_id: str
    status_code: PaymentStatus
    reason: str | None = None

    def __post_init__(self) -> None:
        if self.status_code is PaymentStatus.RJCT and not self.reason:
            raise MissingReason("RJCT report requires a reason")


@dataclass(frozen=True)
class Pacs004Return:
    original_msg_id: str
    original_end_to_end_id: str
    returned_amount: MoneyAmount
    return_reason: str
    returning_agent: BicCode
    next_agent: BicCode


@dataclass(frozen=True)
class DebtorInstruction:
    """Contract-facing instruction extracted from a single-transaction pacs.008.

    Field agreement with the embedded message is enforced where the
    instruction is consumed, not at construction time.
    """

    settlement_amount: MoneyAmount
    debtor_agent: BicCode
    debtor_account: str
    iso_message: bytes
    next_agent: BicCode

    def __post_init__(self) -> None:
        if self.settlement_amount.value <= 0:
            raise InvariantViolation("instruction amount must be positive")


# ---------------------------------------------------------------------------
# construction helpers


def new_pacs008(
    msg_id: str,
    creation_time: datetime,
    instructing_agent: BicCode,
    instructed_agent: BicCode,
    transactions: tuple[CreditTransferTxInfo, ...] | list[CreditTransferTxInfo],
    namespace: str = PACS008_NAMESPACE,
) -> Pacs008Message:
    """Build a message with NbOfTxs and CtrlSum computed from the transactions."""
    txs = tuple(transactions)
    header = GroupHeader(
        msg_id=msg_id,
        creation_time=creation_time,
        nb_of_txs=len(txs),
        ctrl_sum=sum((t.settlement_amount.value for t in txs), Decimal(0)),
        instructing_agent=instructing_agent,
        instructed_agent=instructed_agent,
    )
    return Pacs008Message(group_header=header, transactions=txs, namespace=namespace)


def validate_control_sum(msg: Pacs008Message) -> bool:
    """True iff CtrlSum equals the exact amount sum and NbOfTxs the tx count."""
    total = sum((t.settlement_amount.value for t in msg.transactions), Decimal(0))
    return msg.group_header.ctrl_sum == total and msg.group_header.nb_of_txs == len(
        msg.transactions
    )


def _require_consistent(msg: Pacs008Message) -> None:
    if not validate_control_sum(msg):
        raise InvariantViolation(
            "group header inconsistent: "
            f"NbOfTxs={msg.group_header.nb_of_txs} CtrlSum={msg.group_header.ctrl_sum} "
            f"over {len(msg.transactions)} transaction(s)"
        )


# ---------------------------------------------------------------------------
# canonical serialization


def _fmt_time(t: datetime) -> str:
    return t.isoformat().replace("+00:00", "Z")


def _parse_time(text: str, path: str) -> datetime:
    try:
        t = datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError as exc:
        raise SchemaViolation(path, f"bad timestamp {text!r}") from exc
    if t.tzinfo is None:
        raise SchemaViolation(path, f"timestamp lacks timezone: {text!r}")
    return t.astimezone(timezone.utc)


def _el(name: str, content: str) -> str:
    return f"<{name}>{content}</{name}>"


def _agent_block(name: str, bic: BicCode, extras: str = "", fin_extras: str = "") -> str:
    return _el(name, _el("FinInstnId", _el("BICFI", escape(bic.value)) + fin_extras) + extras)


def _account_block(name: str, identifier: str, msg: "Pacs008Message", prefix: str) -> str:
    othr = _el("Id", escape(identifier)) + _extras_for(msg, f"{prefix}/Id/Othr")
    inner = _el("Othr", othr) + _extras_for(msg, f"{prefix}/Id")
    return _el(name, _el("Id", inner) + _extras_for(msg, prefix))


def _ctrl_sum_scale(msg: Pacs008Message) -> int:
    return max(minor_units(t.settlement_amount.currency) for t in msg.transactions)


def _extras_for(msg: Pacs008Message, path: str) -> str:
    return "".join(snippet for p, snippet in msg.extras if p == path)


def serialize_pacs008(msg: Pacs008Message) -> bytes:
    """Canonical UTF-8 bytes; raises InvariantViolation on inconsistent headers."""
    _require_consistent(msg)
    gh = msg.group_header

    def agent(name: str, bic: BicCode, prefix: str) -> str:
        return _agent_block(
            name,
            bic,
            extras=_extras_for(msg, prefix),
            fin_extras=_extras_for(msg, f"{prefix}/FinInstnId"),
        )

    header = (
        _el("MsgId", escape(gh.msg_id))
        + _el("CreDtTm", _fmt_time(gh.creation_time))
        + _el("NbOfTxs", str(gh.nb_of_txs))
        + _el("CtrlSum", format_decimal(gh.ctrl_sum, _ctrl_sum_scale(msg)))
        + agent("InstgAgt", gh.instructing_agent, "GrpHdr/InstgAgt")
        + agent("InstdAgt", gh.instructed_agent, "GrpHdr/InstdAgt")
        + _extras_for(msg, "GrpHdr")
    )
    blocks = [_el("GrpHdr", header)]
    for i, tx in enumerate(msg.transactions):
        amt = tx.settlement_amount
        base = f"CdtTrfTxInf[{i}]"
        inner = (
            _el(
                "PmtId",
                _el("EndToEndId", escape(tx.end_to_end_id)) + _extras_for(msg, f"{base}/PmtId"),
            )
            + f"<IntrBkSttlmAmt Ccy={quoteattr(amt.currency)}>{amt.text()}</IntrBkSttlmAmt>"
            + "".join(
                agent("IntrmyAgt", a, f"{base}/IntrmyAgt[{j}]")
                for j, a in enumerate(tx.intermediary_agents)
            )
            + _el("Dbtr", _el("Nm", escape(tx.debtor_name)) + _extras_for(msg, f"{base}/Dbtr"))
            + _account_block("DbtrAcct", tx.debtor_account, msg, f"{base}/DbtrAcct")
            + agent("DbtrAgt", tx.debtor_agent, f"{base}/DbtrAgt")
            + agent("CdtrAgt", tx.creditor_agent, f"{base}/CdtrAgt")
            + _el("Cdtr", _el("Nm", escape(tx.creditor_name)) + _extras_for(msg, f"{base}/Cdtr"))
            + _account_block("CdtrAcct", tx.creditor_account, msg, f"{base}/CdtrAcct")
            + _extras_for(msg, base)
        )
        blocks.append(_el("CdtTrfTxInf", inner))
    body = _el(
        "FIToFICstmrCdtTrf", "".join(blocks) + _extras_for(msg, "FIToFICstmrCdtTrf")
    )
    doc = (
        '<?xml version="1.0" encoding="UTF-8"?>'
        f"<Document xmlns={quoteattr(msg.namespace)}>{body}"
        f'{_extras_for(msg, "Document")}</Document>'
    )
    return doc.encode("utf-8")


# ---------------------------------------------------------------------------
# parsing


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _namespace_of(tag: str) -> str:
    return tag[1:tag.index("}")] if tag.startswith("{") else ""


def _one(elem: ET.Element, name: str, path: str) -> ET.Element:
    found = [c for c in elem if _local(c.tag) == name]
    if not found:
        raise SchemaViolation(f"{path}/{name}")
    return found[0]


def _text(elem: ET.Element, name: str, path: str) -> str:
    return (_one(elem, name, path).text or "").strip()


def _canonical_snippet(elem: ET.Element) -> str:
    """Deterministic rendering of an arbitrary subtree with namespaces stripped."""
    attrs = "".join(
        f" {_local(k)}={quoteattr(v)}" for k, v in sorted(elem.attrib.items())
    )
    text = escape((elem.text or "").strip())
    children = "".join(_canonical_snippet(c) for c in elem)
    return f"<{_local(elem.tag)}{attrs}>{text}{children}</{_local(elem.tag)}>"


def _collect_extras(
    elem: ET.Element, known: set[str], path: str, sink: list[tuple[str, str]]
) -> None:
    for child in elem:
        if _local(child.tag) not in known:
            sink.append((path, _canonical_snippet(child)))


def _parse_agent(
    block: ET.Element, path: str, sink: list[tuple[str, str]], path_key: str
) -> BicCode:
    _collect_extras(block, {"FinInstnId"}, path_key, sink)
    fin = _one(block, "FinInstnId", path)
    _collect_extras(fin, {"BICFI"}, f"{path_key}/FinInstnId", sink)
    return BicCode(_text(fin, "BICFI", f"{path}/FinInstnId"))


def _parse_account(
    tx_elem: ET.Element, name: str, path: str, sink: list[tuple[str, str]], path_key: str
) -> str:
    acct = _one(tx_elem, name, path)
    _collect_extras(acct, {"Id"}, path_key, sink)
    id_elem = _one(acct, "Id", f"{path}/{name}")
    _collect_extras(id_elem, {"Othr"}, f"{path_key}/Id", sink)
    othr = _one(id_elem, "Othr", f"{path}/{name}/Id")
    _collect_extras(othr, {"Id"}, f"{path_key}/Id/Othr", sink)
    return _text(othr, "Id", f"{path}/{name}/Id/Othr")


def _parse_amount(tx_elem: ET.Element, path: str) -> MoneyAmount:
    amt = _one(tx_elem, "IntrBkSttlmAmt", path)
    currency = amt.get("Ccy")
    if not currency:
        raise SchemaViolation(f"{path}/IntrBkSttlmAmt/@Ccy")
    text = (amt.text or "").strip()
    try:
        value = parse_decimal(text)
        if scale_of(value) > minor_units(currency):
            raise InvalidAmount(
                f"{text!r} exceeds {currency} minor units ({minor_units(currency)})"
            )
        return MoneyAmount(currency, value)
    except InvalidAmount as exc:
        raise SchemaViolation(f"{path}/IntrBkSttlmAmt", str(exc)) from exc


def parse_pacs008(xml: bytes, *, check_invariants: bool = True) -> Pacs008Message:
    """Parse canonical or foreign pacs.008 bytes into the structured form.

    With ``check_invariants=False`` the control-sum / count invariants are not
    enforced, which lets callers run ``validate_control_sum`` themselves.
    """
    try:
        root = ET.fromstring(xml)
    except ET.ParseError as exc:
        raise MalformedXml(str(exc)) from exc

    if _local(root.tag) != "Document":
        raise SchemaViolation("Document", f"root element is {_local(root.tag)!r}")
    namespace = _namespace_of(root.tag)
    extras: list[tuple[str, str]] = []
    _collect_extras(root, {"FIToFICstmrCdtTrf"}, "Document", extras)

    envelope = _one(root, "FIToFICstmrCdtTrf", "Document")
    env_path = "Document/FIToFICstmrCdtTrf"
    _collect_extras(envelope, {"GrpHdr", "CdtTrfTxInf"}, "FIToFICstmrCdtTrf", extras)

    gh_elem = _one(envelope, "GrpHdr", env_path)
    gh_path = f"{env_path}/GrpHdr"
    _collect_extras(
        gh_elem,
        {"MsgId", "CreDtTm", "NbOfTxs", "CtrlSum", "InstgAgt", "InstdAgt"},
        "GrpHdr",
        extras,
    )
    nb_text = _text(gh_elem, "NbOfTxs", gh_path)
    try:
        nb_of_txs = int(nb_text)
    except ValueError as exc:
        raise SchemaViolation(f"{gh_path}/NbOfTxs", f"not an integer: {nb_text!r}") from exc
    ctrl_text = _text(gh_elem, "CtrlSum", gh_path)
    try:
        ctrl_sum = parse_decimal(ctrl_text)
    except InvalidAmount as exc:
        raise SchemaViolation(f"{gh_path}/CtrlSum", str(exc)) from exc
    header = GroupHeader(
        msg_id=_text(gh_elem, "MsgId", gh_path),
        creation_time=_parse_time(_text(gh_elem, "CreDtTm", gh_path), f"{gh_path}/CreDtTm"),
        nb_of_txs=nb_of_txs,
        ctrl_sum=ctrl_sum,
        instructing_agent=_parse_agent(
            _one(gh_elem, "InstgAgt", gh_path), f"{gh_path}/InstgAgt", extras, "GrpHdr/InstgAgt"
        ),
        instructed_agent=_parse_agent(
            _one(gh_elem, "InstdAgt", gh_path), f"{gh_path}/InstdAgt", extras, "GrpHdr/InstdAgt"
        ),
    )

    tx_elems = [c for c in envelope if _local(c.tag) == "CdtTrfTxInf"]
    if not tx_elems:
        raise SchemaViolation(f"{env_path}/CdtTrfTxInf")
    transactions = []
    known_tx = {
        "PmtId", "IntrBkSttlmAmt", "IntrmyAgt",
        "Dbtr", "DbtrAcct", "DbtrAgt", "CdtrAgt", "Cdtr", "CdtrAcct",
    }
    for i, tx_elem in enumerate(tx_elems):
        tx_path = f"{env_path}/CdtTrfTxInf"
        base = f"CdtTrfTxInf[{i}]"
        _collect_extras(tx_elem, known_tx, base, extras)
        pmt_id = _one(tx_elem, "PmtId", tx_path)
        _collect_extras(pmt_id, {"EndToEndId"}, f"{base}/PmtId", extras)
        intermediaries = []
        for j, block in enumerate(c for c in tx_elem if _local(c.tag) == "IntrmyAgt"):
            intermediaries.append(
                _parse_agent(block, f"{tx_path}/IntrmyAgt", extras, f"{base}/IntrmyAgt[{j}]")
            )
        dbtr = _one(tx_elem, "Dbtr", tx_path)
        _collect_extras(dbtr, {"Nm"}, f"{base}/Dbtr", extras)
        debtor_account = _parse_account(tx_elem, "DbtrAcct", tx_path, extras, f"{base}/DbtrAcct")
        debtor_agent = _parse_agent(
            _one(tx_elem, "DbtrAgt", tx_path), f"{tx_path}/DbtrAgt", extras, f"{base}/DbtrAgt"
        )
        creditor_agent = _parse_agent(
            _one(tx_elem, "CdtrAgt", tx_path), f"{tx_path}/CdtrAgt", extras, f"{base}/CdtrAgt"
        )
        cdtr = _one(tx_elem, "Cdtr", tx_path)
        _collect_extras(cdtr, {"Nm"}, f"{base}/Cdtr", extras)
        creditor_account = _parse_account(tx_elem, "CdtrAcct", tx_path, extras, f"{base}/CdtrAcct")
        transactions.append(
            CreditTransferTxInfo(
                end_to_end_id=_text(pmt_id, "EndToEndId", f"{tx_path}/PmtId"),
                settlement_amount=_parse_amount(tx_elem, tx_path),
                debtor_name=_text(dbtr, "Nm", f"{tx_path}/Dbtr"),
                debtor_account=debtor_account,
                debtor_agent=debtor_agent,
                creditor_name=_text(cdtr, "Nm", f"{tx_path}/Cdtr"),
                creditor_account=creditor_account,
                creditor_agent=creditor_agent,
                intermediary_agents=tuple(intermediaries),
            )
        )

    msg = Pacs008Message(
        group_header=header,
        transactions=tuple(transactions),
        namespace=namespace,
        extras=tuple(extras),
    )
    if check_invariants:
        _require_consistent(msg)
    return msg


# ---------------------------------------------------------------------------
# derived operations


def extract_debtor_instruction(xml: bytes) -> DebtorInstruction:
    """Map a single-transaction pacs.008 onto the contract instruction struct.

    Field sources: settlement amount from ``CdtTrfTxInf/IntrBkSttlmAmt``,
    debtor agent from ``CdtTrfTxInf/DbtrAgt/FinInstnId/BICFI``, debtor account
    from ``CdtTrfTxInf/DbtrAcct/Id/Othr/Id``, the full original XML embedded
    verbatim, next agent from ``GrpHdr/InstdAgt/FinInstnId/BICFI``.
    """
    msg = parse_pacs008(xml)
    if len(msg.transactions) != 1:
        raise MultiTransactionUnsupported(
            f"instruction extraction needs exactly 1 transaction, got {len(msg.transactions)}"
        )
    tx = msg.transactions[0]
    return DebtorInstruction(
        settlement_amount=tx.settlement_amount,
        debtor_agent=tx.debtor_agent,
        debtor_account=tx.debtor_account,
        iso_message=bytes(xml),
        next_agent=msg.group_header.instructed_agent,
    )


def _derived_msg_id(msg: Pacs008Message, from_agent: BicCode, to_agent: BicCode) -> str:
    seed = f"{msg.group_header.msg_id}|{from_agent}|{to_agent}".encode()
    return "MSG" + hashlib.sha256(seed).hexdigest()[:12].upper()


def advance_message(
    msg: Pacs008Message,
    from_agent: BicCode,
    to_agent: BicCode,
    *,
    msg_id: str | None = None,
    creation_time: datetime | None = None,
) -> Pacs008Message:
    """Re-address a message for its next hop; payload fields are untouched.

    Defaults keep the result deterministic: the fresh message id is derived by
    hashing (old id, from, to) and the fresh creation time is the old one plus
    one second.
    """
    if from_agent != msg.group_header.instructed_agent:
        raise HopMismatch(
            f"{from_agent} is not the current holder "
            f"(instructed agent is {msg.group_header.instructed_agent})"
        )
    header = replace(
        msg.group_header,
        msg_id=msg_id or _derived_msg_id(msg, from_agent, to_agent),
        creation_time=creation_time or msg.group_header.creation_time + timedelta(seconds=1),
        instructing_agent=from_agent,
        instructed_agent=to_agent,
    )
    return replace(msg, group_header=header)


def build_pacs002(
    original: Pacs008Message, status: PaymentStatus, reason: str | None = None
) -> Pacs002Report:
    return Pacs002Report(
        original_msg_id=original.group_header.msg_id,
        original_end_to_end_id=original.transactions[0].end_to_end_id,
        status_code=status,
        reason=reason,
    )


def build_pacs004(
    original: Pacs008Message,
    reason: str,
    returning_agent: BicCode,
    next_agent: BicCode,
) -> Pacs004Return:
    if len(original.transactions) != 1:
        raise MultiTransactionUnsupported(
            f"returns need a single-transaction original, got {len(original.transactions)}"
        )
    return Pacs004Return(
        original_msg_id=original.group_header.msg_id,
        original_end_to_end_id=original.transactions[0].end_to_end_id,
        returned_amount=original.transactions[0].settlement_amount,
        return_reason=reason,
        returning_agent=returning_agent,
        next_agent=next_agent,
    )


def serialize_pacs002(report: Pacs002Report) -> bytes:
    reason = _el("StsRsnInf", _el("AddtlInf", escape(report.reason))) if report.reason else ""
    body = _el(
        "FIToFIPmtStsRpt",
        _el(
            "TxInfAndSts",
            _el("OrgnlMsgId", escape(report.original_msg_id))
            + _el("OrgnlEndToEndId", escape(report.original_end_to_end_id))
            + _el("TxSts", report.status_code.value)
            + reason,
        ),
    )
    doc = (
        '<?xml version="1.0" encoding="UTF-8"?>'
        f"<Document xmlns={quoteattr(PACS002_NAMESPACE)}>{body}</Document>"
    )
    return doc.encode("utf-8")


def serialize_pacs004(ret: Pacs004Return) -> bytes:
    amt = ret.returned_amount
    body = _el(
        "PmtRtr",
        _el(
            "TxInf",
            _el("OrgnlMsgId", escape(ret.original_msg_id))
            + _el("OrgnlEndToEndId", escape(ret.original_end_to_end_id))
            + f"<RtrdIntrBkSttlmAmt Ccy={quoteattr(amt.currency)}>{amt.text()}</RtrdIntrBkSttlmAmt>"
            + _el("RtrRsnInf", _el("AddtlInf", escape(ret.return_reason)))
            + _agent_block("InstgAgt", ret.returning_agent)
            + _agent_block("InstdAgt", ret.next_agent),
        ),
    )
    doc = (
        '<?xml version="1.0" encoding="UTF-8"?>'
        f"<Document xmlns={quoteattr(PACS004_NAMESPACE)}>{body}</Document>"
    )
    return doc.encode("utf-8")


def structured_dump(msg: Pacs008Message) -> str:
    """Human-readable field dump used by the golden fixture sidecars."""
    gh = msg.group_header
    lines = [
        f"namespace: {msg.namespace}",
        f"msg_id: {gh.msg_id}",
        f"creation_time: {_fmt_time(gh.creation_time)}",
        f"nb_of_txs: {gh.nb_of_txs}",
        f"ctrl_sum: {format_decimal(gh.ctrl_sum, _ctrl_sum_scale(msg))}",
        f"instructing_agent: {gh.instructing_agent}",
        f"instructed_agent: {gh.instructed_agent}",
    ]
    for i, tx in enumerate(msg.transactions):
        lines += [
            f"tx[{i}].end_to_end_id: {tx.end_to_end_id}",
            f"tx[{i}].settlement_amount: {tx.settlement_amount}",
            f"tx[{i}].debtor_name: {tx.debtor_name}",
            f"tx[{i}].debtor_account: {tx.debtor_account}",
            f"tx[{i}].debtor_agent: {tx.debtor_agent}",
            f"tx[{i}].creditor_name: {tx.creditor_name}",
            f"tx[{i}].creditor_account: {tx.creditor_account}",
            f"tx[{i}].creditor_agent: {tx.creditor_agent}",
            f"tx[{i}].intermediary_agents: "
            + (",".join(str(a) for a in tx.intermediary_agents) or "-"),
        ]
    for path, snippet in msg.extras:
        lines.append(f"extra[{path}]: {snippet}")
    return "\n".join(lines) + "\n"
