"""Shared builders and hypothesis strategies for the test suite."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from decimal import Decimal

import hypothesis.strategies as st

from pacsim.iso20022 import (
    BicCode,
    CreditTransferTxInfo,
    DebtorInstruction,
    Pacs008Message,
    extract_debtor_instruction,
    new_pacs008,
    serialize_pacs008,
)
from pacsim.ledger import AccountKind, AgentLedger, new_ledger
from pacsim.metering import MeterSink
from pacsim.money import MoneyAmount, minor_units
from pacsim.relay import AgentDirectory, DirectoryEntry

EPOCH = datetime(2024, 1, 1, tzinfo=timezone.utc)

# Enough agents for a debtor, five intermediaries, and a creditor.
CHAIN_BICS = (
    "AAAAUS33", "BBBBDEFF", "CCCCGB2L", "DDDDFRPP",
    "EEEEJPJT", "FFFFCHZH", "GGGGSESS",
)

LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
ALNUM = LETTERS + "0123456789"
ID_CHARS = ALNUM + "-."


def bics() -> st.SearchStrategy[BicCode]:
    return st.builds(
        lambda head, tail: BicCode(head + tail),
        st.text(LETTERS, min_size=6, max_size=6),
        st.text(ALNUM, min_size=2, max_size=2) | st.text(ALNUM, min_size=5, max_size=5),
    )


def identifiers(max_size: int = 35) -> st.SearchStrategy[str]:
    return st.text(ID_CHARS, min_size=1, max_size=max_size)


def names() -> st.SearchStrategy[str]:
    return st.text(ALNUM + " '&<>", min_size=1, max_size=30).map(str.strip).filter(bool)


def amounts(currency: str) -> st.SearchStrategy[MoneyAmount]:
    scale = minor_units(currency)
    return st.integers(min_value=1, max_value=10**9).map(
        lambda n: MoneyAmount(currency, Decimal(n).scaleb(-scale))
    )


def money() -> st.SearchStrategy[MoneyAmount]:
    return st.sampled_from(("USD", "EUR", "GBP", "JPY")).flatmap(amounts)


def timestamps() -> st.SearchStrategy[datetime]:
    return st.integers(min_value=0, max_value=10**9).map(
        lambda s: EPOCH + timedelta(seconds=s)
    )


def tx_infos(currency: str | None = None) -> st.SearchStrategy[CreditTransferTxInfo]:
    amount = amounts(currency) if currency else money()
    return st.builds(
        CreditTransferTxInfo,
        end_to_end_id=identifiers(),
        settlement_amount=amount,
        debtor_name=names(),
        debtor_account=identifiers(20),
        debtor_agent=bics(),
        creditor_name=names(),
        creditor_account=identifiers(20),
        creditor_agent=bics(),
        intermediary_agents=st.lists(bics(), max_size=3).map(tuple),
    )


def messages(max_txs: int = 3) -> st.SearchStrategy[Pacs008Message]:
    return st.builds(
        new_pacs008,
        msg_id=identifiers(),
        creation_time=timestamps(),
        instructing_agent=bics(),
        instructed_agent=bics(),
        transactions=st.lists(tx_infos(), min_size=1, max_size=max_txs).map(tuple),
    )


def single_tx_messages(currency: str | None = None) -> st.SearchStrategy[Pacs008Message]:
    return st.builds(
        new_pacs008,
        msg_id=identifiers(),
        creation_time=timestamps(),
        instructing_agent=bics(),
        instructed_agent=bics(),
        transactions=tx_infos(currency).map(lambda tx: (tx,)),
    )


@dataclass
class World:
    """A funded agent chain ready for relay runs."""

    path: tuple[BicCode, ...]
    ledgers: dict[BicCode, AgentLedger]
    directory: AgentDirectory
    meter: MeterSink

    def operator(self, agent: BicCode) -> str:
        return self.directory.entries[agent].operator

    def snapshot(self) -> str:
        return "".join(
            f"[{bic}]\n" + self.ledgers[bic].snapshot() for bic in sorted(self.ledgers, key=str)
        )

    def full_state(self) -> dict[tuple[str, str], Decimal]:
        return {
            (bic.value, number): account.balance
            for bic, ledger in self.ledgers.items()
            for number, account in ledger.accounts.items()
        }

    def sums_by_currency(self) -> dict[str, Decimal]:
        sums: dict[str, Decimal] = {}
        for ledger in self.ledgers.values():
            for account in ledger.accounts.values():
                sums[account.currency] = sums.get(account.currency, Decimal(0)) + account.balance
        return sums


def make_chain_world(
    n_intermediaries: int = 1,
    currency: str = "USD",
    debtor_balance: Decimal = Decimal("500.00"),
    nostro_balance: Decimal = Decimal("1000.00"),
    creditor_balance: Decimal = Decimal("100.00"),
    creditor_currency: str | None = None,
    fx_rates: dict[tuple[str, str], Decimal] | None = None,
    inbound_nostro_overrides: dict[int, Decimal] | None = None,
) -> World:
    """Build a debtor → intermediaries → creditor chain with funded nostros.

    ``inbound_nostro_overrides`` maps a hop index k (1-based position in the
    chain) to the balance of the nostro account debited at that hop, which is
    how tests inject shortfalls. With ``creditor_currency`` set, the creditor
    agent's books run in that currency and conversion happens entering it.
    """
    path = tuple(BicCode(b) for b in CHAIN_BICS[: n_intermediaries + 2])
    final_currency = creditor_currency or currency
    overrides = inbound_nostro_overrides or {}
    meter = MeterSink()
    ledgers: dict[BicCode, AgentLedger] = {}
    entries: dict[BicCode, DirectoryEntry] = {}
    for i, agent in enumerate(path):
        operator = f"ops-{agent.value.lower()}"
        ledger = new_ledger(agent, operator, meter=meter)
        book_currency = final_currency if i == len(path) - 1 else currency
        nostros: dict[BicCode, str] = {}
        if i == 0:
            ledger.create_account(operator, "DBT-001", AccountKind.GENERAL, currency, "debtor")
            if debtor_balance > 0:
                ledger.deposit(operator, "DBT-001", MoneyAmount(currency, debtor_balance))
        else:
            prev = path[i - 1]
            number = f"NOS-{prev.value[:4]}"
            ledger.create_account(
                operator, number, AccountKind.NOSTRO, book_currency, operator, counterparty=prev
            )
            funding = overrides.get(i, nostro_balance)
            if funding > 0:
                ledger.deposit(operator, number, MoneyAmount(book_currency, funding))
            nostros[prev] = number
        if i < len(path) - 1:
            nxt = path[i + 1]
            number = f"NOS-{nxt.value[:4]}"
            ledger.create_account(
                operator, number, AccountKind.NOSTRO, book_currency, operator, counterparty=nxt
            )
            nostros[nxt] = number
        if i == len(path) - 1:
            ledger.create_account(operator, "CRD-001", AccountKind.GENERAL, final_currency, "creditor")
            if creditor_balance > 0:
                ledger.deposit(operator, "CRD-001", MoneyAmount(final_currency, creditor_balance))
        ledgers[agent] = ledger
        entries[agent] = DirectoryEntry(
            ledger=ledger, operator=operator, nostros=nostros, fx_rates=dict(fx_rates or {})
        )
    return World(
        path=path, ledgers=ledgers, directory=AgentDirectory(entries=entries), meter=meter
    )


def make_instruction(
    world: World,
    amount: MoneyAmount,
    e2e: str = "E2E-TEST",
    msg_id: str = "MSG-TEST",
) -> DebtorInstruction:
    """Opening instruction whose embedded message matches the world's chain."""
    path = world.path
    tx = CreditTransferTxInfo(
        end_to_end_id=e2e,
        settlement_amount=amount,
        debtor_name="Debtor Jones",
        debtor_account="DBT-001",
        debtor_agent=path[0],
        creditor_name="Creditor Smith",
        creditor_account="CRD-001",
        creditor_agent=path[-1],
        intermediary_agents=path[1:-1],
    )
    message = new_pacs008(msg_id, EPOCH, path[0], path[1], (tx,))
    return extract_debtor_instruction(serialize_pacs008(message))
