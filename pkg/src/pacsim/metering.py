"""Unit-cost attribution for ledger operations and gas-style reporting.

Costs are calibration constants, not measurements: a cost table assigns each
meterable operation a base amount of gas units plus a per-byte surcharge on
the embedded ISO message for the two transfer operations. The report
aggregation mirrors the usual gas-report shape (min / avg / median / max /
number of calls per function).
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, localcontext

from .errors import PacsimError
from .iso20022 import BicCode

# Default base costs per operation, in gas units. These are the calibration
# constants for the simulator's cost model; they set realistic magnitudes but
# make no claim of VM-level fidelity.
DEFAULT_BASE_COSTS = {
    "create_account": 26660,
    "deposit": 30351,
    "get_balance": 921,
    "initiate_transfer": 121580,
    "make_transfer": 135213,
}

# Surcharge per byte of embedded ISO message on transfer operations.
DEFAULT_PER_BYTE_COST = 16

# Operations whose cost grows with the embedded message size.
TRANSFER_OPERATIONS = frozenset({"initiate_transfer", "make_transfer"})

# Reference fee arithmetic from the framework's public testnet deployment:
# the published transaction fee divides exactly by the published gas price,
# pinning the implied gas usage as an integer regression constant.
REFERENCE_FEE_ETH = Decimal("0.003543387976528597")
REFERENCE_GAS_PRICE_GWEI = Decimal("3.095497367")
REFERENCE_GAS_UNITS = 1144691

GWEI_PER_ETH = Decimal(10) ** 9


class UnknownOperation(PacsimError):
    """Operation name missing from the cost table."""


@dataclass(frozen=True)
class CostTable:
    base_cost: dict[str, int]
    per_byte_cost: int = DEFAULT_PER_BYTE_COST

    def __post_init__(self) -> None:
        if self.per_byte_cost < 0:
            raise ValueError(f"negative per-byte cost: {self.per_byte_cost}")
        for op, cost in self.base_cost.items():
            if cost < 0:
                raise ValueError(f"negative base cost for {op}: {cost}")


def default_cost_table() -> CostTable:
    return CostTable(base_cost=dict(DEFAULT_BASE_COSTS))


@dataclass(frozen=True)
class CallRecord:
    operation: str
    units: int
    timestamp: int
    ledger: BicCode | None = None

    def __post_init__(self) -> None:
        if self.units < 0:
            raise ValueError(f"negative units: {self.units}")


def record(
    operation: str,
    message_length: int,
    table: CostTable,
    *,
    timestamp: int = 0,
    ledger: BicCode | None = None,
) -> CallRecord:
    """Cost one call: base cost plus per-byte surcharge on the message length."""
    if operation not in table.base_cost:
        raise UnknownOperation(operation)
    units = table.base_cost[operation] + table.per_byte_cost * message_length
    return CallRecord(operation=operation, units=units, timestamp=timestamp, ledger=ledger)


class MeterSink:
    """Append-only collector of call records for one recording context."""

    def __init__(self, table: CostTable | None = None) -> None:
        self.table = table or default_cost_table()
        self.records: list[CallRecord] = []

    def record(
        self, operation: str, message_length: int = 0, ledger: BicCode | None = None
    ) -> CallRecord:
        rec = record(
            operation,
            message_length,
            self.table,
            timestamp=len(self.records),
            ledger=ledger,
        )
        self.records.append(rec)
        return rec


@dataclass(frozen=True)
class GasReportRow:
    operation: str
    min: int
    avg: int
    median: int
    max: int
    call_count: int

    def __post_init__(self) -> None:
        if not (self.min <= self.median <= self.max and self.min <= self.avg <= self.max):
            raise ValueError(f"impossible statistics row: {self}")
        if self.call_count < 1:
            raise ValueError("row must aggregate at least one call")


def report(records: list[CallRecord] | tuple[CallRecord, ...]) -> list[GasReportRow]:
    """One row per operation, sorted by name.

    Conventions: avg is the floor of the arithmetic mean; median is the
    lower-middle element for even call counts.
    """
    by_op: dict[str, list[int]] = {}
    for rec in records:
        by_op.setdefault(rec.operation, []).append(rec.units)
    rows = []
    for op in sorted(by_op):
        units = sorted(by_op[op])
        n = len(units)
        rows.append(
            GasReportRow(
                operation=op,
                min=units[0],
                avg=sum(units) // n,
                median=units[(n - 1) // 2],
                max=units[-1],
                call_count=n,
            )
        )
    return rows


REPORT_COLUMNS = ("Function Name", "min", "avg", "median", "max", "# calls")


def render_report_text(rows: list[GasReportRow]) -> str:
    """Plain-text gas table: Function Name | min | avg | median | max | # calls."""
    cells = [REPORT_COLUMNS] + [
        (r.operation, str(r.min), str(r.avg), str(r.median), str(r.max), str(r.call_count))
        for r in rows
    ]
    widths = [max(len(row[i]) for row in cells) for i in range(len(REPORT_COLUMNS))]
    lines = []
    for row in cells:
        lines.append(
            "| " + " | ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)) + " |"
        )
    lines.insert(1, "|" + "|".join("-" * (w + 2) for w in widths) + "|")
    return "\n".join(lines) + "\n"


def compute_fee(units: int, price_gwei: Decimal) -> Decimal:
    """Fee in ETH for a gas total at a Gwei unit price, exact decimal."""
    if units < 0:
        raise ValueError(f"negative units: {units}")
    if price_gwei < 0:
        raise ValueError(f"negative price: {price_gwei}")
    with localcontext() as ctx:
        ctx.prec = 60  # wide enough that unit * price * 1e-9 never rounds
        return Decimal(units) * price_gwei * Decimal(1).scaleb(-9)
