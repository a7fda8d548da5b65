"""Deterministic simulator for ISO 20022 cross-border payment settlement.

Four layers: a pacs.008/002/004 message codec, contract-style per-agent
ledgers with nostro settlement, an event-driven relay that carries a payment
across its agent chain (with rollback via payment returns), and gas-style
cost metering with report aggregation and fee arithmetic. The scenario layer
turns a declarative config into a reproducible run with an audit trail that
replays exactly.
"""

from .errors import CurrencyMismatch, PacsimError
from .iso20022 import (
    BicCode,
    CreditTransferTxInfo,
    DebtorInstruction,
    GroupHeader,
    Pacs002Report,
    Pacs004Return,
    Pacs008Message,
    PaymentStatus,
    advance_message,
    build_pacs002,
    build_pacs004,
    extract_debtor_instruction,
    new_pacs008,
    parse_pacs008,
    serialize_pacs002,
    serialize_pacs004,
    serialize_pacs008,
    validate_control_sum,
)
from .ledger import Account, AccountKind, AgentLedger, EventKind, EventRecord, Role, new_ledger
from .metering import (
    CallRecord,
    CostTable,
    GasReportRow,
    MeterSink,
    compute_fee,
    default_cost_table,
    record,
    render_report_text,
    report,
)
from .money import MoneyAmount, minor_units
from .relay import (
    AgentDirectory,
    ConversionRecord,
    DirectoryEntry,
    TransactionOutcome,
    TransactionStatus,
    convert_at_boundary,
    handle_event,
    run_transaction,
)
from .scenario import ScenarioConfig, build_world, load_scenario, replay, run

__version__ = "0.1.0"

__all__ = [
    "Account",
    "AccountKind",
    "AgentDirectory",
    "AgentLedger",
    "BicCode",
    "CallRecord",
    "ConversionRecord",
    "CostTable",
    "CreditTransferTxInfo",
    "CurrencyMismatch",
    "DebtorInstruction",
    "DirectoryEntry",
    "EventKind",
    "EventRecord",
    "GasReportRow",
    "GroupHeader",
    "MeterSink",
    "MoneyAmount",
    "Pacs002Report",
    "Pacs004Return",
    "Pacs008Message",
    "PacsimError",
    "PaymentStatus",
    "ScenarioConfig",
    "TransactionOutcome",
    "TransactionStatus",
    "advance_message",
    "build_pacs002",
    "build_pacs004",
    "build_world",
    "compute_fee",
    "convert_at_boundary",
    "default_cost_table",
    "extract_debtor_instruction",
    "handle_event",
    "load_scenario",
    "minor_units",
    "new_ledger",
    "new_pacs008",
    "parse_pacs008",
    "record",
    "render_report_text",
    "replay",
    "report",
    "run",
    "run_transaction",
    "serialize_pacs002",
    "serialize_pacs004",
    "serialize_pacs008",
    "validate_control_sum",
]
