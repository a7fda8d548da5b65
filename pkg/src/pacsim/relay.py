"""Event-driven relay that carries a payment across the agent chain.

The relay plays the web-client role for every agent: it watches ledger
events, crafts the outgoing pacs.008 for the next hop (message construction
lives here, never inside a ledger), converts currency at nostro boundaries,
triggers the next ledger, and on failure drives the pacs.004 return chain
until every settled ledger is restored.

The hop chain of a transaction is carried by the message itself:
debtor agent, then the listed intermediary agents, then the creditor agent.

``run_transaction`` executes the event loop synchronously in hop order for
reproducibility; ``handle_event`` maps each event to a self-contained action
object, so an alternative (e.g. asynchronous) scheduler can drive the same
actions without touching ledger or codec logic.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from decimal import ROUND_HALF_EVEN, Decimal
from enum import Enum

from .errors import CurrencyMismatch, PacsimError
from .iso20022 import (
    BicCode,
    DebtorInstruction,
    MultiTransactionUnsupported,
    Pacs002Report,
    Pacs004Return,
    Pacs008Message,
    PaymentStatus,
    advance_message,
    build_pacs002,
    build_pacs004,
    parse_pacs008,
    serialize_pacs008,
)
from .ledger import AgentLedger, EventKind, EventRecord, LedgerError
from .money import MoneyAmount, minor_units


class RelayError(PacsimError):
    """Base class for relay failures."""


class UnknownAgent(RelayError):
    pass


class MissingNostroRelationship(RelayError):
    pass


class MissingRate(RelayError):
    pass


class PathMismatch(RelayError):
    """Declared path disagrees with the chain carried by the message."""


@dataclass
class DirectoryEntry:
    """One agent's ledger handle plus its correspondent relationships."""

    ledger: AgentLedger
    operator: str
    nostros: dict[BicCode, str]
    fx_rates: dict[tuple[str, str], Decimal]

    def nostro_account(self, counterparty: BicCode) -> str:
        number = self.nostros.get(counterparty)
        if number is None or number not in self.ledger.accounts:
            raise MissingNostroRelationship(
                f"{self.ledger.agent} holds no nostro for {counterparty}"
            )
        return number


@dataclass
class AgentDirectory:
    entries: dict[BicCode, DirectoryEntry]

    def entry(self, agent: BicCode) -> DirectoryEntry:
        try:
            return self.entries[agent]
        except KeyError:
            raise UnknownAgent(str(agent)) from None


class TransactionStatus(Enum):
    SETTLED = "Settled"
    RETURNED = "Returned"
    REJECTED = "Rejected"


@dataclass(frozen=True)
class ConversionRecord:
    """One currency conversion applied at a nostro boundary."""

    end_to_end_id: str
    agent: BicCode
    source: MoneyAmount
    result: MoneyAmount
    rate: Decimal
    event_index: int  # index into TransactionOutcome.events


@dataclass(frozen=True)
class TransactionOutcome:
    end_to_end_id: str
    status: TransactionStatus
    hops_executed: int
    final_report: Pacs002Report
    events: tuple[tuple[BicCode, EventRecord], ...]
    returns: tuple[Pacs004Return, ...] = ()
    conversions: tuple[ConversionRecord, ...] = ()
    failure_reason: str | None = None


# -- relay actions -----------------------------------------------------------


@dataclass(frozen=True)
class DeliverTransfer:
    """Invoke make_transfer on the target agent's ledger."""

    target: BicCode
    sender: BicCode
    instruction: DebtorInstruction
    final_hop: bool
    creditor_account: str | None
    conversion: ConversionRecord | None


@dataclass(frozen=True)
class DeliverStatus:
    """Deliver a payment status report toward the debtor agent."""

    target: BicCode
    report: Pacs002Report


@dataclass(frozen=True)
class ReturnHop:
    """Invoke return_transfer on the target agent's ledger."""

    target: BicCode
    ret: Pacs004Return


@dataclass(frozen=True)
class ReturnComplete:
    """Reverse chain has reached the debtor agent."""

    debtor_agent: BicCode
    reason: str


RelayAction = DeliverTransfer | DeliverStatus | ReturnHop | ReturnComplete


def hop_chain(msg: Pacs008Message) -> tuple[BicCode, ...]:
    """Debtor agent, intermediaries in order, creditor agent."""
    tx = msg.transactions[0]
    return (tx.debtor_agent,) + tx.intermediary_agents + (tx.creditor_agent,)


def convert_at_boundary(
    amount: MoneyAmount, rate: Decimal, target_currency: str
) -> MoneyAmount:
    """Amount times rate, rounded half-even to the target's minor units."""
    if rate <= 0:
        raise MissingRate(f"non-positive rate {rate}")
    quantum = Decimal(1).scaleb(-minor_units(target_currency))
    return MoneyAmount(
        target_currency, (amount.value * rate).quantize(quantum, rounding=ROUND_HALF_EVEN)
    )


def _reissue_with_amount(msg: Pacs008Message, amount: MoneyAmount) -> Pacs008Message:
    """Single-transaction copy carrying a converted settlement amount."""
    tx = replace(msg.transactions[0], settlement_amount=amount)
    header = replace(msg.group_header, ctrl_sum=amount.value)
    return replace(msg, group_header=header, transactions=(tx,))


def _prepare_delivery(
    msg: Pacs008Message, event_agent: BicCode, directory: AgentDirectory, event_index: int
) -> DeliverTransfer:
    """Build the make_transfer call for the agent the message is addressed to.

    Applies at most one currency conversion (into the currency of the nostro
    account that will be debited at the target) and, for non-final hops,
    advances the message so the emitted event already carries the instruction
    set for the agent after the target.
    """
    if len(msg.transactions) != 1:
        raise MultiTransactionUnsupported(
            f"relay carries single-transaction messages, got {len(msg.transactions)}"
        )
    target = msg.group_header.instructed_agent
    sender = msg.group_header.instructing_agent
    entry = directory.entry(target)
    nostro_account = entry.nostro_account(sender)
    nostro_currency = entry.ledger.accounts[nostro_account].currency

    amount = msg.transactions[0].settlement_amount
    conversion = None
    if amount.currency != nostro_currency:
        pair = (amount.currency, nostro_currency)
        rate = entry.fx_rates.get(pair)
        if rate is None:
            raise MissingRate(f"no rate for {pair[0]}->{pair[1]} at {target}")
        converted = convert_at_boundary(amount, rate, nostro_currency)
        conversion = ConversionRecord(
            end_to_end_id=msg.transactions[0].end_to_end_id,
            agent=target,
            source=amount,
            result=converted,
            rate=rate,
            event_index=event_index,
        )
        msg = _reissue_with_amount(msg, converted)
        amount = converted

    chain = hop_chain(msg)
    if target not in chain:
        raise PathMismatch(f"{target} is not on the message's hop chain")
    position = chain.index(target)
    final_hop = position == len(chain) - 1
    creditor_account = msg.transactions[0].creditor_account if final_hop else None
    if not final_hop:
        msg = advance_message(msg, target, chain[position + 1])

    tx = msg.transactions[0]
    instruction = DebtorInstruction(
        settlement_amount=tx.settlement_amount,
        debtor_agent=tx.debtor_agent,
        debtor_account=tx.debtor_account,
        iso_message=serialize_pacs008(msg),
        next_agent=msg.group_header.instructed_agent,
    )
    return DeliverTransfer(
        target=target,
        sender=sender,
        instruction=instruction,
        final_hop=final_hop,
        creditor_account=creditor_account,
        conversion=conversion,
    )


def handle_event(
    event: EventRecord, directory: AgentDirectory, *, event_index: int = 0
) -> RelayAction:
    """Translate one ledger event into the next relay action."""
    if event.kind in (EventKind.MAKE_TRANSFER, EventKind.PASS_ISO_MESSAGE_ALONG):
        msg = parse_pacs008(event.iso_message)
        return _prepare_delivery(msg, event.agent, directory, event_index)

    if event.kind is EventKind.CREDIT_CONFIRMED:
        msg = parse_pacs008(event.iso_message)
        report = build_pacs002(msg, PaymentStatus.ACSC)
        return DeliverStatus(target=msg.transactions[0].debtor_agent, report=report)

    # TransferReturned: walk one step back along the chain recorded on ledgers.
    entry = directory.entry(event.agent)
    record = entry.ledger.transfer_record(event.end_to_end_id)
    forward = parse_pacs008(record.iso_message)
    chain = hop_chain(forward)
    position = chain.index(event.agent)
    reason = record.return_reason or "returned"
    if position == 0:
        return ReturnComplete(debtor_agent=event.agent, reason=reason)
    previous = chain[position - 1]
    prev_record = directory.entry(previous).ledger.transfer_record(event.end_to_end_id)
    ret = build_pacs004(
        parse_pacs008(prev_record.iso_message),
        reason,
        returning_agent=event.agent,
        next_agent=previous,
    )
    return ReturnHop(target=previous, ret=ret)


def check_path(
    path: tuple[BicCode, ...] | list[BicCode], directory: AgentDirectory
) -> None:
    """Every path agent known; both nostro links exist per adjacency."""
    for agent in path:
        directory.entry(agent)
    for left, right in zip(path, path[1:]):
        directory.entry(left).nostro_account(right)
        directory.entry(right).nostro_account(left)


def run_transaction(
    initial: DebtorInstruction,
    path: tuple[BicCode, ...] | list[BicCode],
    directory: AgentDirectory,
) -> TransactionOutcome:
    """Drive one payment end to end: initiate, hop loop, status or unwind."""
    path = tuple(path)
    check_path(path, directory)
    original = parse_pacs008(initial.iso_message)
    if hop_chain(original) != path:
        raise PathMismatch(
            f"declared path {[str(a) for a in path]} disagrees with the message chain"
        )
    e2e = original.transactions[0].end_to_end_id

    events: list[tuple[BicCode, EventRecord]] = []
    conversions: list[ConversionRecord] = []

    debtor_entry = directory.entry(path[0])
    try:
        event = debtor_entry.ledger.initiate_transfer(debtor_entry.operator, initial)
    except PacsimError as exc:
        reason = f"{type(exc).__name__}: {exc}"
        return TransactionOutcome(
            end_to_end_id=e2e,
            status=TransactionStatus.REJECTED,
            hops_executed=0,
            final_report=build_pacs002(original, PaymentStatus.RJCT, reason),
            events=(),
            failure_reason=reason,
        )
    events.append((path[0], event))

    settled: list[BicCode] = [path[0]]
    while True:
        try:
            action = handle_event(event, directory, event_index=len(events))
        except RelayError as exc:
            reason = f"{type(exc).__name__}: {exc}"
            failed_at = parse_pacs008(event.iso_message).group_header.instructed_agent
            return _unwind(
                e2e, original, failed_at, settled, reason, events, conversions, directory
            )
        if isinstance(action, DeliverStatus):
            return TransactionOutcome(
                end_to_end_id=e2e,
                status=TransactionStatus.SETTLED,
                hops_executed=len(settled),
                final_report=build_pacs002(original, PaymentStatus.ACSC),
                events=tuple(events),
                conversions=tuple(conversions),
            )
        assert isinstance(action, DeliverTransfer)
        entry = directory.entry(action.target)
        try:
            event = entry.ledger.make_transfer(
                entry.operator,
                action.instruction,
                sender=action.sender,
                final_hop=action.final_hop,
                creditor_account=action.creditor_account,
            )
        except (LedgerError, CurrencyMismatch) as exc:
            reason = f"{type(exc).__name__}: {exc}"
            return _unwind(
                e2e, original, action.target, settled, reason, events, conversions, directory
            )
        if action.conversion is not None:
            conversions.append(action.conversion)
        events.append((action.target, event))
        settled.append(action.target)


def _unwind(
    e2e: str,
    original: Pacs008Message,
    failed_at: BicCode,
    settled: list[BicCode],
    reason: str,
    events: list[tuple[BicCode, EventRecord]],
    conversions: list[ConversionRecord],
    directory: AgentDirectory,
) -> TransactionOutcome:
    """Reverse every settled hop, newest first, via the pacs.004 chain."""
    returns: list[Pacs004Return] = []
    last = settled[-1]
    record = directory.entry(last).ledger.transfer_record(e2e)
    ret = build_pacs004(
        parse_pacs008(record.iso_message), reason, returning_agent=failed_at, next_agent=last
    )
    while True:
        entry = directory.entry(ret.next_agent)
        event = entry.ledger.return_transfer(entry.operator, ret)
        events.append((ret.next_agent, event))
        returns.append(ret)
        action = handle_event(event, directory, event_index=len(events))
        if isinstance(action, ReturnComplete):
            break
        assert isinstance(action, ReturnHop)
        ret = action.ret
    return TransactionOutcome(
        end_to_end_id=e2e,
        status=TransactionStatus.RETURNED,
        hops_executed=len(settled),
        final_report=build_pacs002(original, PaymentStatus.RJCT, reason),
        events=tuple(events),
        returns=tuple(returns),
        conversions=tuple(conversions),
        failure_reason=reason,
    )
