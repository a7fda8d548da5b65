"""Per-agent ledger state machine with contract-style semantics.

Each agent bank runs one ``AgentLedger``: role-based access control rooted in
the deploying principal, General and Nostro accounts with exact decimal
balances, double-entry transfer postings, and an append-only event log. Every
operation validates completely before mutating, so a raised error leaves the
ledger byte-identical to its pre-call state.

Agents are identified by BIC throughout; the directory layer maps BICs to
ledgers, so no separate address space is needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from decimal import Decimal
from enum import Enum

from .errors import CurrencyMismatch, PacsimError
from .iso20022 import (
    BicCode,
    DebtorInstruction,
    Pacs004Return,
    Pacs008Message,
    parse_pacs008,
    serialize_pacs004,
    validate_control_sum,
)
from .metering import MeterSink
from .money import MoneyAmount, format_decimal, is_currency_code, minor_units


class LedgerError(PacsimError):
    """Base class for ledger operation failures."""


class Unauthorized(LedgerError):
    pass


class DuplicateAccount(LedgerError):
    pass


class MissingCounterparty(LedgerError):
    pass


class InvalidAccount(LedgerError):
    pass


class AccountNotFound(LedgerError):
    pass


class NonPositiveAmount(LedgerError):
    pass


class WrongAgent(LedgerError):
    pass


class InsufficientFunds(LedgerError):
    pass


class InsufficientNostroFunds(InsufficientFunds):
    pass


class ControlSumMismatch(LedgerError):
    pass


class InstructionMessageMismatch(LedgerError):
    pass


class MissingNostro(LedgerError):
    pass


class UnknownTransaction(LedgerError):
    pass


class AlreadyReturned(LedgerError):
    pass


class Role(Enum):
    ADMIN = "Admin"
    OPERATOR = "Operator"


class AccountKind(Enum):
    GENERAL = "General"
    NOSTRO = "Nostro"


class EventKind(Enum):
    MAKE_TRANSFER = "MakeTransfer"
    PASS_ISO_MESSAGE_ALONG = "PassISOMessageAlong"
    CREDIT_CONFIRMED = "CreditConfirmed"
    TRANSFER_RETURNED = "TransferReturned"


# (account_number, signed balance delta) pairs applied by one operation.
Postings = tuple[tuple[str, Decimal], ...]


@dataclass
class Account:
    account_number: str
    kind: AccountKind
    currency: str
    balance: Decimal
    owner: str
    counterparty: BicCode | None = None


@dataclass(frozen=True)
class MsgInfo:
    """Group-header mirror kept per settled transaction."""

    msg_id: str
    end_to_end_id: str
    creation_time: datetime
    nb_of_txs: int
    ctrl_sum: Decimal

    @classmethod
    def from_message(cls, msg: Pacs008Message) -> "MsgInfo":
        gh = msg.group_header
        return cls(
            msg_id=gh.msg_id,
            end_to_end_id=msg.transactions[0].end_to_end_id,
            creation_time=gh.creation_time,
            nb_of_txs=gh.nb_of_txs,
            ctrl_sum=gh.ctrl_sum,
        )


@dataclass(frozen=True)
class EventRecord:
    kind: EventKind
    agent: BicCode
    sequence: int
    iso_message: bytes
    end_to_end_id: str
    timestamp: int
    postings: Postings = ()


@dataclass
class TransferRecord:
    """Forward leg bookkeeping enabling exact reversal on return."""

    end_to_end_id: str
    msg_info: MsgInfo
    iso_message: bytes
    postings: Postings
    returned: bool = False
    return_reason: str | None = None


# Minimum role sets per state-mutating operation.
_OPERATION_ROLES: dict[str, frozenset[Role]] = {
    "grant_role": frozenset({Role.ADMIN}),
    "create_account": frozenset({Role.ADMIN, Role.OPERATOR}),
    "deposit": frozenset({Role.ADMIN, Role.OPERATOR}),
    "initiate_transfer": frozenset({Role.ADMIN, Role.OPERATOR}),
    "make_transfer": frozenset({Role.ADMIN, Role.OPERATOR}),
    "return_transfer": frozenset({Role.ADMIN, Role.OPERATOR}),
}


class AgentLedger:
    """Single-writer state machine for one agent bank.

    Mutations on one ledger must be serialized by the caller; reads between
    mutations are safe from any thread. Distinct ledgers are fully independent.
    """

    def __init__(self, agent: BicCode, deployer: str, meter: MeterSink | None = None) -> None:
        self.agent = agent
        self.owner = deployer
        self.roles: dict[str, set[Role]] = {deployer: {Role.ADMIN}}
        self.accounts: dict[str, Account] = {}
        self.event_log: list[EventRecord] = []
        self.transfers: dict[str, TransferRecord] = {}
        self.meter = meter
        self._clock = 0

    # -- access control ----------------------------------------------------

    def _require_role(self, caller: str, operation: str) -> None:
        allowed = _OPERATION_ROLES[operation]
        if not (self.roles.get(caller, set()) & allowed):
            raise Unauthorized(f"{caller!r} may not call {operation} on {self.agent}")

    def grant_role(self, caller: str, grantee: str, role: Role) -> None:
        self._require_role(caller, "grant_role")
        self.roles.setdefault(grantee, set()).add(role)

    # -- account management -------------------------------------------------

    def create_account(
        self,
        caller: str,
        account_number: str,
        kind: AccountKind,
        currency: str,
        owner: str,
        counterparty: BicCode | None = None,
    ) -> Account:
        self._require_role(caller, "create_account")
        if account_number in self.accounts:
            raise DuplicateAccount(f"{account_number} already exists on {self.agent}")
        if not account_number:
            raise InvalidAccount("empty account number")
        if not is_currency_code(currency):
            raise InvalidAccount(f"bad currency code: {currency!r}")
        if kind is AccountKind.NOSTRO and counterparty is None:
            raise MissingCounterparty(f"nostro {account_number} needs a counterparty")
        if kind is AccountKind.GENERAL and counterparty is not None:
            raise InvalidAccount(f"general account {account_number} must not have a counterparty")
        account = Account(
            account_number=account_number,
            kind=kind,
            currency=currency,
            balance=Decimal(0),
            owner=owner,
            counterparty=counterparty,
        )
        self.accounts[account_number] = account
        self._tick()
        self._record_gas("create_account")
        return account

    def deposit(self, caller: str, account_number: str, amount: MoneyAmount) -> None:
        self._require_role(caller, "deposit")
        account = self._account(account_number)
        if amount.currency != account.currency:
            raise CurrencyMismatch(
                f"deposit {amount.currency} into {account.currency} account {account_number}"
            )
        if amount.value <= 0:
            raise NonPositiveAmount(f"deposit of {amount}")
        account.balance += amount.value
        self._tick()
        self._record_gas("deposit")

    def get_balance(self, account_number: str) -> MoneyAmount:
        account = self._account(account_number)
        self._record_gas("get_balance")
        return MoneyAmount(account.currency, account.balance)

    # -- transfers -----------------------------------------------------------

    def initiate_transfer(self, caller: str, instruction: DebtorInstruction) -> EventRecord:
        """Debit the debtor, credit the next agent's nostro, emit MakeTransfer."""
        self._require_role(caller, "initiate_transfer")
        if instruction.debtor_agent != self.agent:
            raise WrongAgent(
                f"instruction names debtor agent {instruction.debtor_agent}, ledger is {self.agent}"
            )
        msg = parse_pacs008(instruction.iso_message, check_invariants=False)
        if not validate_control_sum(msg):
            raise ControlSumMismatch(
                f"embedded message fails control sum check (msg_id={msg.group_header.msg_id})"
            )
        self._check_instruction_matches(instruction, msg)
        debtor = self._account(instruction.debtor_account)
        nostro = self._nostro_for(instruction.next_agent)
        amount = instruction.settlement_amount
        if debtor.currency != amount.currency or nostro.currency != amount.currency:
            raise CurrencyMismatch(
                f"transfer in {amount.currency}, debtor account in {debtor.currency}, "
                f"nostro in {nostro.currency}"
            )
        if debtor.balance < amount.value:
            raise InsufficientFunds(
                f"debtor {debtor.account_number} holds {debtor.balance}, needs {amount.value}"
            )
        postings = (
            (debtor.account_number, -amount.value),
            (nostro.account_number, amount.value),
        )
        return self._settle(EventKind.MAKE_TRANSFER, instruction, msg, postings, "initiate_transfer")

    def make_transfer(
        self,
        caller: str,
        instruction: DebtorInstruction,
        sender: BicCode,
        final_hop: bool,
        creditor_account: str | None = None,
    ) -> EventRecord:
        """Settle an incoming hop from the sender's nostro held on this ledger.

        Non-final hops credit the next agent's nostro and emit
        PassISOMessageAlong; the final hop credits the creditor account and
        emits CreditConfirmed.
        """
        self._require_role(caller, "make_transfer")
        amount = instruction.settlement_amount
        sender_nostro = self._nostro_for(sender)
        if sender_nostro.currency != amount.currency:
            raise CurrencyMismatch(
                f"transfer in {amount.currency}, nostro for {sender} in {sender_nostro.currency}"
            )
        if sender_nostro.balance < amount.value:
            raise InsufficientNostroFunds(
                f"nostro for {sender} holds {sender_nostro.balance}, needs {amount.value}"
            )
        if final_hop:
            if creditor_account is None:
                raise AccountNotFound("final hop without a creditor account")
            creditor = self._account(creditor_account)
            if creditor.currency != amount.currency:
                raise CurrencyMismatch(
                    f"transfer in {amount.currency}, creditor account in {creditor.currency}"
                )
            target = creditor
            kind = EventKind.CREDIT_CONFIRMED
        else:
            target = self._nostro_for(instruction.next_agent)
            if target.currency != amount.currency:
                raise CurrencyMismatch(
                    f"transfer in {amount.currency}, nostro for {instruction.next_agent} "
                    f"in {target.currency}"
                )
            kind = EventKind.PASS_ISO_MESSAGE_ALONG
        msg = parse_pacs008(instruction.iso_message, check_invariants=False)
        postings = (
            (sender_nostro.account_number, -amount.value),
            (target.account_number, amount.value),
        )
        return self._settle(kind, instruction, msg, postings, "make_transfer")

    def return_transfer(self, caller: str, ret: Pacs004Return) -> EventRecord:
        """Reverse this ledger's forward postings for a returned transaction."""
        self._require_role(caller, "return_transfer")
        record = self.transfers.get(ret.original_end_to_end_id)
        if record is None:
            raise UnknownTransaction(ret.original_end_to_end_id)
        if record.returned:
            raise AlreadyReturned(ret.original_end_to_end_id)
        reversal: Postings = tuple((acct, -delta) for acct, delta in record.postings)
        for acct, delta in reversal:
            if self.accounts[acct].balance + delta < 0:
                raise InsufficientFunds(
                    f"reversal would overdraw {acct} on {self.agent}"
                )
        self._apply(reversal)
        record.returned = True
        record.return_reason = ret.return_reason
        self._tick()
        return self._emit(
            EventKind.TRANSFER_RETURNED,
            serialize_pacs004(ret),
            ret.original_end_to_end_id,
            reversal,
        )

    # -- plumbing -------------------------------------------------------------

    def _settle(
        self,
        kind: EventKind,
        instruction: DebtorInstruction,
        msg: Pacs008Message,
        postings: Postings,
        metered_op: str,
    ) -> EventRecord:
        e2e = msg.transactions[0].end_to_end_id
        self._apply(postings)
        self.transfers[e2e] = TransferRecord(
            end_to_end_id=e2e,
            msg_info=MsgInfo.from_message(msg),
            iso_message=instruction.iso_message,
            postings=postings,
        )
        self._tick()
        self._record_gas(metered_op, len(instruction.iso_message))
        return self._emit(kind, instruction.iso_message, e2e, postings)

    def _apply(self, postings: Postings) -> None:
        for acct, delta in postings:
            self.accounts[acct].balance += delta

    def _emit(
        self, kind: EventKind, iso_message: bytes, end_to_end_id: str, postings: Postings
    ) -> EventRecord:
        event = EventRecord(
            kind=kind,
            agent=self.agent,
            sequence=len(self.event_log) + 1,
            iso_message=iso_message,
            end_to_end_id=end_to_end_id,
            timestamp=self._clock,
            postings=postings,
        )
        self.event_log.append(event)
        return event

    def _tick(self) -> None:
        self._clock += 1

    def _record_gas(self, operation: str, message_length: int = 0) -> None:
        if self.meter is not None:
            self.meter.record(operation, message_length, ledger=self.agent)

    def _account(self, account_number: str) -> Account:
        account = self.accounts.get(account_number)
        if account is None:
            raise AccountNotFound(f"{account_number} on {self.agent}")
        return account

    def _nostro_for(self, counterparty: BicCode) -> Account:
        matches = [
            a
            for a in self.accounts.values()
            if a.kind is AccountKind.NOSTRO and a.counterparty == counterparty
        ]
        if not matches:
            raise MissingNostro(f"no nostro for {counterparty} on {self.agent}")
        matches.sort(key=lambda a: a.account_number)
        return matches[0]

    def _check_instruction_matches(
        self, instruction: DebtorInstruction, msg: Pacs008Message
    ) -> None:
        if len(msg.transactions) != 1:
            raise InstructionMessageMismatch(
                f"embedded message carries {len(msg.transactions)} transactions"
            )
        tx = msg.transactions[0]
        mismatches = []
        if tx.settlement_amount != instruction.settlement_amount:
            mismatches.append("settlement_amount")
        if tx.debtor_agent != instruction.debtor_agent:
            mismatches.append("debtor_agent")
        if tx.debtor_account != instruction.debtor_account:
            mismatches.append("debtor_account")
        if msg.group_header.instructed_agent != instruction.next_agent:
            mismatches.append("next_agent")
        if mismatches:
            raise InstructionMessageMismatch(
                "instruction disagrees with embedded message on: " + ", ".join(mismatches)
            )

    # -- inspection ------------------------------------------------------------

    def transfer_record(self, end_to_end_id: str) -> TransferRecord:
        record = self.transfers.get(end_to_end_id)
        if record is None:
            raise UnknownTransaction(end_to_end_id)
        return record

    def snapshot(self) -> str:
        """Canonical per-ledger balance dump, one account per line."""
        lines = []
        for number in sorted(self.accounts):
            a = self.accounts[number]
            kind = a.kind.value.lower()
            if a.counterparty is not None:
                kind += f":{a.counterparty}"
            lines.append(
                f"{number}|{kind}|{a.currency}|{format_decimal(a.balance, minor_units(a.currency))}"
            )
        return "\n".join(lines) + ("\n" if lines else "")


def new_ledger(agent: BicCode, deployer: str, meter: MeterSink | None = None) -> AgentLedger:
    """Fresh ledger with the deployer as owner holding the Admin role."""
    return AgentLedger(agent=agent, deployer=deployer, meter=meter)
