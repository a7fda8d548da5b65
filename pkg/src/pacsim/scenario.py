"""Scenario configuration, deterministic runs, audit trail, and replay.

A scenario is a TOML file declaring agents, accounts (with initial funding),
FX rates, and an ordered list of transactions; ``docs/scenario-config.md``
documents the schema. Runs are pure functions of the config bytes: all
timestamps come from a logical clock anchored at a fixed epoch, so identical
inputs produce byte-identical output directories.

The audit trail is a JSON-lines file. The first line is a header naming the
digest algorithm; each event line carries the postings applied, a digest of
the canonical ISO message, a digest of the full balance snapshot after the
event, and a running hash chained from the header, so both deletions and
field tampering are detectable. Status lines record the closing pacs.002 per
transaction and participate in the chain but carry no postings.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from decimal import Decimal
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import PacsimError
from .iso20022 import (
    BicCode,
    CreditTransferTxInfo,
    InvariantViolation,
    Pacs008Message,
    extract_debtor_instruction,
    new_pacs008,
    serialize_pacs002,
    serialize_pacs004,
    serialize_pacs008,
)
from .ledger import AccountKind, AgentLedger, new_ledger
from .metering import CallRecord, CostTable, MeterSink, default_cost_table, render_report_text, report
from .money import MoneyAmount, format_decimal, is_currency_code, minor_units, parse_decimal, scale_of
from .relay import AgentDirectory, DirectoryEntry, TransactionOutcome, TransactionStatus, run_transaction

EPOCH = datetime(2024, 1, 1, tzinfo=timezone.utc)
AUDIT_FORMAT = "pacsim-audit-v1"
DIGEST_ALGORITHM = "sha256"
SNAPSHOT_HEADER = "# pacsim balances v1"


class ScenarioError(PacsimError):
    """Base class for scenario-layer failures."""


class ConfigParseError(ScenarioError):
    """Config file is not parseable; message carries line/position."""


class ConfigValidationError(ScenarioError):
    """Config parsed but violates the schema; lists every violation."""

    def __init__(self, violations: list[str]) -> None:
        self.violations = violations
        super().__init__("\n".join(violations))


class CorruptTrail(ScenarioError):
    """Audit trail has a sequence gap, broken chain, or digest mismatch."""


@dataclass(frozen=True)
class AgentSpec:
    bic: BicCode
    deployer: str


@dataclass(frozen=True)
class AccountSpec:
    agent: BicCode
    number: str
    kind: AccountKind
    currency: str
    balance: Decimal
    counterparty: BicCode | None = None


@dataclass(frozen=True)
class FxRateSpec:
    from_currency: str
    to_currency: str
    rate: Decimal


@dataclass(frozen=True)
class TransactionSpec:
    debtor_account: str
    debtor_agent: BicCode
    creditor_account: str
    creditor_agent: BicCode
    path: tuple[BicCode, ...]
    amount: Decimal
    currency: str
    debtor_name: str = ""
    creditor_name: str = ""


@dataclass(frozen=True)
class ScenarioConfig:
    agents: tuple[AgentSpec, ...]
    accounts: tuple[AccountSpec, ...]
    fx_rates: tuple[FxRateSpec, ...]
    transactions: tuple[TransactionSpec, ...]
    seed: int = 0
    cost_table: CostTable | None = None


# ---------------------------------------------------------------------------
# config loading


def _bic_or_none(text: str, context: str, violations: list[str]) -> BicCode | None:
    try:
        return BicCode(text)
    except InvariantViolation as exc:
        violations.append(f"{context}: {exc}")
        return None


def parse_cost_table(raw: dict) -> CostTable:
    """Cost table from a mapping {per_byte: int, base: {op: int}}; partial
    base maps are merged over the defaults."""
    base = dict(default_cost_table().base_cost)
    base.update({str(k): int(v) for k, v in raw.get("base", {}).items()})
    per_byte = int(raw.get("per_byte", default_cost_table().per_byte_cost))
    return CostTable(base_cost=base, per_byte_cost=per_byte)


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Parse and fully validate a scenario file.

    Validation reports every violation it can find, not just the first.
    """
    try:
        raw = tomllib.loads(Path(path).read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigParseError(str(exc)) from exc
    return build_config(raw)


def _section(raw: dict, key: str, violations: list[str]) -> list[dict]:
    value = raw.get(key, [])
    if not isinstance(value, list) or any(not isinstance(e, dict) for e in value):
        violations.append(f"{key}: must be an array of tables")
        return []
    return value


def build_config(raw: dict) -> ScenarioConfig:
    violations: list[str] = []

    agents: list[AgentSpec] = []
    seen_bics: set[str] = set()
    for i, entry in enumerate(_section(raw, "agents", violations)):
        ctx = f"agents[{i}]"
        bic = _bic_or_none(str(entry.get("bic", "")), ctx, violations)
        deployer = str(entry.get("deployer", ""))
        if not deployer:
            violations.append(f"{ctx}: missing deployer")
        if bic is None:
            continue
        if bic.value in seen_bics:
            violations.append(f"{ctx}: duplicate agent {bic}")
            continue
        seen_bics.add(bic.value)
        agents.append(AgentSpec(bic=bic, deployer=deployer))
    if not agents:
        violations.append("no agents declared")

    accounts: list[AccountSpec] = []
    seen_accounts: set[tuple[str, str]] = set()
    nostro_pairs: set[tuple[str, str]] = set()
    for i, entry in enumerate(_section(raw, "accounts", violations)):
        ctx = f"accounts[{i}]"
        agent = _bic_or_none(str(entry.get("agent", "")), ctx, violations)
        number = str(entry.get("number", ""))
        kind_text = str(entry.get("kind", "")).lower()
        currency = str(entry.get("currency", ""))
        counterparty_text = entry.get("counterparty")
        if agent is None:
            continue
        if agent.value not in seen_bics:
            violations.append(f"{ctx}: unknown agent {agent}")
            continue
        if not number:
            violations.append(f"{ctx}: missing account number")
            continue
        if (agent.value, number) in seen_accounts:
            violations.append(f"{ctx}: duplicate account {number} on {agent}")
            continue
        seen_accounts.add((agent.value, number))
        if kind_text not in ("general", "nostro"):
            violations.append(f"{ctx}: kind must be 'general' or 'nostro', got {kind_text!r}")
            continue
        kind = AccountKind.GENERAL if kind_text == "general" else AccountKind.NOSTRO
        if not is_currency_code(currency):
            violations.append(f"{ctx}: bad currency code {currency!r}")
            continue
        try:
            balance = parse_decimal(str(entry.get("balance", "0")))
        except PacsimError as exc:
            violations.append(f"{ctx}: {exc}")
            continue
        if balance < 0 or scale_of(balance) > minor_units(currency):
            violations.append(f"{ctx}: bad balance {balance} for {currency}")
            continue
        counterparty = None
        if kind is AccountKind.NOSTRO:
            if counterparty_text is None:
                violations.append(f"{ctx}: nostro account needs a counterparty")
                continue
            counterparty = _bic_or_none(str(counterparty_text), ctx, violations)
            if counterparty is None:
                continue
            if counterparty.value not in seen_bics:
                violations.append(f"{ctx}: counterparty {counterparty} is not a declared agent")
                continue
            pair = (agent.value, counterparty.value)
            if pair in nostro_pairs:
                violations.append(
                    f"{ctx}: second nostro for {counterparty} on {agent}; one per counterparty"
                )
                continue
            nostro_pairs.add(pair)
        elif counterparty_text is not None:
            violations.append(f"{ctx}: general account must not declare a counterparty")
            continue
        accounts.append(
            AccountSpec(
                agent=agent,
                number=number,
                kind=kind,
                currency=currency,
                balance=balance,
                counterparty=counterparty,
            )
        )

    fx_rates: list[FxRateSpec] = []
    for i, entry in enumerate(_section(raw, "fx_rates", violations)):
        ctx = f"fx_rates[{i}]"
        src = str(entry.get("from", ""))
        dst = str(entry.get("to", ""))
        if not (is_currency_code(src) and is_currency_code(dst)):
            violations.append(f"{ctx}: bad currency pair {src!r}->{dst!r}")
            continue
        try:
            rate = parse_decimal(str(entry.get("rate", "")))
        except PacsimError as exc:
            violations.append(f"{ctx}: {exc}")
            continue
        if rate <= 0:
            violations.append(f"{ctx}: rate must be positive, got {rate}")
            continue
        fx_rates.append(FxRateSpec(from_currency=src, to_currency=dst, rate=rate))

    transactions: list[TransactionSpec] = []
    for i, entry in enumerate(_section(raw, "transactions", violations)):
        ctx = f"transactions[{i}]"
        debtor_agent = _bic_or_none(str(entry.get("debtor_agent", "")), ctx, violations)
        creditor_agent = _bic_or_none(str(entry.get("creditor_agent", "")), ctx, violations)
        if debtor_agent is None or creditor_agent is None:
            continue
        path: list[BicCode] = []
        path_ok = True
        for hop in entry.get("path", []):
            bic = _bic_or_none(str(hop), f"{ctx}.path", violations)
            if bic is None:
                path_ok = False
                break
            path.append(bic)
        if not path_ok:
            continue
        if len(path) < 2:
            violations.append(f"{ctx}: path needs at least two agents")
            continue
        if len({b.value for b in path}) != len(path):
            violations.append(f"{ctx}: path revisits an agent")
            continue
        if path[0] != debtor_agent or path[-1] != creditor_agent:
            violations.append(f"{ctx}: path must start at the debtor agent and end at the creditor agent")
            continue
        for bic in path:
            if bic.value not in seen_bics:
                violations.append(f"{ctx}: path agent {bic} not declared")
        for left, right in zip(path, path[1:]):
            for holder, cpty in ((left, right), (right, left)):
                if (holder.value, cpty.value) not in nostro_pairs:
                    violations.append(
                        f"{ctx}: no nostro relationship for {holder}<-{cpty} "
                        f"({holder} must hold a nostro account for {cpty})"
                    )
        currency = str(entry.get("currency", ""))
        if not is_currency_code(currency):
            violations.append(f"{ctx}: bad currency code {currency!r}")
            continue
        try:
            amount = parse_decimal(str(entry.get("amount", "")))
        except PacsimError as exc:
            violations.append(f"{ctx}: {exc}")
            continue
        if amount <= 0 or scale_of(amount) > minor_units(currency):
            violations.append(f"{ctx}: bad amount {amount} for {currency}")
            continue
        debtor_account = str(entry.get("debtor_account", ""))
        creditor_account = str(entry.get("creditor_account", ""))
        if (debtor_agent.value, debtor_account) not in seen_accounts:
            violations.append(f"{ctx}: debtor account {debtor_account!r} not declared on {debtor_agent}")
        if (creditor_agent.value, creditor_account) not in seen_accounts:
            violations.append(
                f"{ctx}: creditor account {creditor_account!r} not declared on {creditor_agent}"
            )
        transactions.append(
            TransactionSpec(
                debtor_account=debtor_account,
                debtor_agent=debtor_agent,
                creditor_account=creditor_account,
                creditor_agent=creditor_agent,
                path=tuple(path),
                amount=amount,
                currency=currency,
                debtor_name=str(entry.get("debtor_name", "")),
                creditor_name=str(entry.get("creditor_name", "")),
            )
        )

    cost_table = None
    if "cost_table" in raw:
        try:
            cost_table = parse_cost_table(raw["cost_table"])
        except (ValueError, TypeError, AttributeError) as exc:
            violations.append(f"cost_table: {exc}")

    try:
        seed = int(raw.get("seed", 0))
    except (ValueError, TypeError):
        violations.append(f"seed: must be an integer, got {raw.get('seed')!r}")
        seed = 0

    if violations:
        raise ConfigValidationError(violations)
    return ScenarioConfig(
        agents=tuple(agents),
        accounts=tuple(accounts),
        fx_rates=tuple(fx_rates),
        transactions=tuple(transactions),
        seed=seed,
        cost_table=cost_table,
    )


# ---------------------------------------------------------------------------
# world building


def build_world(
    config: ScenarioConfig, *, meter: MeterSink | None = None
) -> tuple[dict[BicCode, AgentLedger], AgentDirectory]:
    """Instantiate ledgers and the agent directory from a validated config."""
    setup_meter = meter if meter is not None else MeterSink(config.cost_table or default_cost_table())
    ledgers: dict[BicCode, AgentLedger] = {}
    operators: dict[BicCode, str] = {}
    for agent in config.agents:
        ledgers[agent.bic] = new_ledger(agent.bic, agent.deployer, meter=setup_meter)
        operators[agent.bic] = agent.deployer
    for spec in config.accounts:
        ledger = ledgers[spec.agent]
        ledger.create_account(
            caller=operators[spec.agent],
            account_number=spec.number,
            kind=spec.kind,
            currency=spec.currency,
            owner=operators[spec.agent],
            counterparty=spec.counterparty,
        )
        if spec.balance > 0:
            ledger.deposit(
                caller=operators[spec.agent],
                account_number=spec.number,
                amount=MoneyAmount(spec.currency, spec.balance),
            )
    rates = {(fx.from_currency, fx.to_currency): fx.rate for fx in config.fx_rates}
    entries = {}
    for agent in config.agents:
        nostros = {
            spec.counterparty: spec.number
            for spec in config.accounts
            if spec.agent == agent.bic and spec.kind is AccountKind.NOSTRO
        }
        entries[agent.bic] = DirectoryEntry(
            ledger=ledgers[agent.bic],
            operator=operators[agent.bic],
            nostros=nostros,
            fx_rates=dict(rates),
        )
    return ledgers, AgentDirectory(entries=entries)


def initial_message(spec: TransactionSpec, index: int) -> Pacs008Message:
    """Deterministic opening pacs.008 for the transaction at a given index."""
    tx = CreditTransferTxInfo(
        end_to_end_id=f"E2E{index:06d}",
        settlement_amount=MoneyAmount(spec.currency, spec.amount),
        debtor_name=spec.debtor_name or f"Customer {spec.debtor_account}",
        debtor_account=spec.debtor_account,
        debtor_agent=spec.debtor_agent,
        creditor_name=spec.creditor_name or f"Customer {spec.creditor_account}",
        creditor_account=spec.creditor_account,
        creditor_agent=spec.creditor_agent,
        intermediary_agents=spec.path[1:-1],
    )
    return new_pacs008(
        msg_id=f"MSG{index:06d}",
        creation_time=EPOCH + timedelta(minutes=index),
        instructing_agent=spec.path[0],
        instructed_agent=spec.path[1],
        transactions=(tx,),
    )


# ---------------------------------------------------------------------------
# snapshots

BalanceState = dict[tuple[str, str], tuple[str, Decimal]]  # (agent, acct) -> (ccy, balance)


def state_from_ledgers(ledgers: dict[BicCode, AgentLedger]) -> BalanceState:
    state: BalanceState = {}
    for bic, ledger in ledgers.items():
        for number, account in ledger.accounts.items():
            state[(bic.value, number)] = (account.currency, account.balance)
    return state


def render_snapshot(state: BalanceState, kinds: dict[tuple[str, str], str] | None = None) -> str:
    """Canonical balance dump: sorted, one account per line, fixed scale."""
    lines = [SNAPSHOT_HEADER]
    for agent, number in sorted(state):
        currency, balance = state[(agent, number)]
        kind = (kinds or {}).get((agent, number), "-")
        lines.append(
            f"{agent}|{number}|{kind}|{currency}|{format_decimal(balance, minor_units(currency))}"
        )
    return "\n".join(lines) + "\n"


def parse_snapshot(text: str) -> tuple[BalanceState, dict[tuple[str, str], str]]:
    state: BalanceState = {}
    kinds: dict[tuple[str, str], str] = {}
    lines = text.splitlines()
    if not lines or lines[0] != SNAPSHOT_HEADER:
        raise CorruptTrail(f"snapshot header missing (expected {SNAPSHOT_HEADER!r})")
    for line in lines[1:]:
        if not line:
            continue
        parts = line.split("|")
        if len(parts) != 5:
            raise CorruptTrail(f"bad snapshot line: {line!r}")
        agent, number, kind, currency, balance = parts
        state[(agent, number)] = (currency, parse_decimal(balance))
        kinds[(agent, number)] = kind
    return state, kinds


def account_kinds(ledgers: dict[BicCode, AgentLedger]) -> dict[tuple[str, str], str]:
    kinds: dict[tuple[str, str], str] = {}
    for bic, ledger in ledgers.items():
        for number, account in ledger.accounts.items():
            kind = account.kind.value.lower()
            if account.counterparty is not None:
                kind += f":{account.counterparty}"
            kinds[(bic.value, number)] = kind
    return kinds


def _digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


# ---------------------------------------------------------------------------
# audit trail


def _format_delta(delta: Decimal, currency: str) -> str:
    return format_decimal(delta, minor_units(currency))


def build_audit_trail(
    initial_state: BalanceState,
    kinds: dict[tuple[str, str], str],
    outcomes: list[TransactionOutcome],
) -> tuple[list[str], BalanceState]:
    """Audit lines (header first) plus the reconstructed final state.

    Balance digests are computed by applying postings over the initial state
    in canonical order, which makes them independent of execution
    interleaving and gives replay an exact target.
    """
    total_records = sum(len(o.events) for o in outcomes) + len(outcomes)
    header = json.dumps(
        {
            "rec": "header",
            "format": AUDIT_FORMAT,
            "digest_alg": DIGEST_ALGORITHM,
            "records": total_records,
        },
        separators=(",", ":"),
    )
    lines = [header]
    chain = _digest(header.encode())
    state: BalanceState = dict(initial_state)
    seq = 0
    for outcome in outcomes:
        conversions = {c.event_index: c for c in outcome.conversions}
        for index, (agent, event) in enumerate(outcome.events):
            seq += 1
            postings_json = []
            for account, delta in event.postings:
                currency, balance = state[(agent.value, account)]
                state[(agent.value, account)] = (currency, balance + delta)
                postings_json.append([account, currency, _format_delta(delta, currency)])
            conversion = conversions.get(index)
            body = {
                "rec": "event",
                "seq": seq,
                "e2e": event.end_to_end_id,
                "agent": agent.value,
                "kind": event.kind.value,
                "postings": postings_json,
                "msg_sha256": _digest(event.iso_message),
                "balances_sha256": _digest(render_snapshot(state, kinds).encode()),
                "conversion": None
                if conversion is None
                else {
                    "agent": conversion.agent.value,
                    "from": str(conversion.source),
                    "to": str(conversion.result),
                    "rate": str(conversion.rate),
                },
            }
            chain = _digest((chain + json.dumps(body, separators=(",", ":"))).encode())
            body["chain"] = chain
            lines.append(json.dumps(body, separators=(",", ":")))
        status_body = {
            "rec": "status",
            "e2e": outcome.end_to_end_id,
            "status": outcome.final_report.status_code.value,
            "reason": outcome.final_report.reason,
            "msg_sha256": _digest(serialize_pacs002(outcome.final_report)),
        }
        chain = _digest((chain + json.dumps(status_body, separators=(",", ":"))).encode())
        status_body["chain"] = chain
        lines.append(json.dumps(status_body, separators=(",", ":")))
    return lines, state


def replay(trail_text: str, snapshot_text: str) -> str:
    """Rebuild the final snapshot from the audit trail and initial snapshot.

    Raises CorruptTrail on a sequence gap, a broken hash chain, an unknown
    account, or any balance digest that disagrees with the reconstruction.
    """
    lines = [line for line in trail_text.splitlines() if line]
    if not lines:
        raise CorruptTrail("empty trail")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise CorruptTrail(f"bad header line: {exc}") from exc
    if header.get("rec") != "header" or header.get("format") != AUDIT_FORMAT:
        raise CorruptTrail("missing or foreign trail header")
    if header.get("digest_alg") != DIGEST_ALGORITHM:
        raise CorruptTrail(f"unsupported digest algorithm {header.get('digest_alg')!r}")

    state, kinds = parse_snapshot(snapshot_text)
    chain = _digest(lines[0].encode())
    expected_seq = 0
    processed = 0
    for line in lines[1:]:
        try:
            entry = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorruptTrail(f"bad trail line: {exc}") from exc
        recorded_chain = entry.pop("chain", None)
        chain = _digest((chain + json.dumps(entry, separators=(",", ":"))).encode())
        if recorded_chain != chain:
            raise CorruptTrail(f"hash chain mismatch at {entry.get('rec')}/{entry.get('seq')}")
        processed += 1
        if entry.get("rec") == "status":
            continue
        if entry.get("rec") != "event":
            raise CorruptTrail(f"unknown record type {entry.get('rec')!r}")
        expected_seq += 1
        if entry.get("seq") != expected_seq:
            raise CorruptTrail(f"sequence gap: expected {expected_seq}, got {entry.get('seq')}")
        agent = entry["agent"]
        for account, currency, delta in entry["postings"]:
            key = (agent, account)
            if key not in state:
                raise CorruptTrail(f"posting to unknown account {agent}/{account}")
            held_currency, balance = state[key]
            if held_currency != currency:
                raise CorruptTrail(f"currency mismatch on {agent}/{account}")
            state[key] = (held_currency, balance + parse_decimal(delta))
        if entry["balances_sha256"] != _digest(render_snapshot(state, kinds).encode()):
            raise CorruptTrail(f"balance digest mismatch at seq {expected_seq}")
    if processed != header.get("records"):
        raise CorruptTrail(
            f"trail truncated: header declares {header.get('records')} records, found {processed}"
        )
    return render_snapshot(state, kinds)


# ---------------------------------------------------------------------------
# running


@dataclass
class RunResult:
    outcomes: list[TransactionOutcome]
    exit_code: int
    out_dir: Path


def _disjoint_waves(specs: tuple[TransactionSpec, ...]) -> list[list[int]]:
    """Group transaction indices into waves with pairwise-disjoint ledgers.

    Waves run sequentially, so a transaction must land strictly after the
    last earlier wave that shares any of its ledgers; this keeps conflicting
    transactions in declaration order.
    """
    waves: list[list[int]] = []
    footprints: list[set[str]] = []
    for index, spec in enumerate(specs):
        footprint = {b.value for b in spec.path}
        last_conflict = -1
        for w, used in enumerate(footprints):
            if used & footprint:
                last_conflict = w
        for w in range(last_conflict + 1, len(waves)):
            if not (footprints[w] & footprint):
                waves[w].append(index)
                footprints[w] |= footprint
                break
        else:
            waves.append([index])
            footprints.append(set(footprint))
    return waves


def run(config: ScenarioConfig, out_dir: str | Path, *, parallel: bool = False) -> RunResult:
    """Execute every transaction in order and persist all artifacts.

    Artifacts: ``audit.jsonl``, ``snapshot_initial.txt``, ``snapshot_final.txt``,
    ``gas_records.jsonl``, ``gas_report.txt``, ``gas_report.json``,
    ``outcomes.json``, and per-transaction pacs.002/pacs.004 XML under
    ``messages/``. Identical configs produce byte-identical directories.
    """
    out = Path(out_dir)
    (out / "messages").mkdir(parents=True, exist_ok=True)

    table = config.cost_table or default_cost_table()
    setup_meter = MeterSink(table)
    ledgers, directory = build_world(config, meter=setup_meter)
    kinds = account_kinds(ledgers)
    initial_state = state_from_ledgers(ledgers)
    initial_snapshot = render_snapshot(initial_state, kinds)

    tx_meters = [MeterSink(table) for _ in config.transactions]
    outcomes: list[TransactionOutcome | None] = [None] * len(config.transactions)

    def execute(index: int) -> None:
        spec = config.transactions[index]
        message = initial_message(spec, index)
        instruction = extract_debtor_instruction(serialize_pacs008(message))
        for agent in spec.path:
            ledgers[agent].meter = tx_meters[index]
        outcomes[index] = run_transaction(instruction, spec.path, directory)

    if parallel:
        for wave in _disjoint_waves(config.transactions):
            if len(wave) == 1:
                execute(wave[0])
                continue
            with ThreadPoolExecutor(max_workers=len(wave)) as pool:
                list(pool.map(execute, wave))
    else:
        for index in range(len(config.transactions)):
            execute(index)
    for ledger in ledgers.values():
        ledger.meter = setup_meter

    done = [o for o in outcomes if o is not None]
    assert len(done) == len(config.transactions)
    trail_lines, final_state = build_audit_trail(initial_state, kinds, done)
    live_state = state_from_ledgers(ledgers)
    assert final_state == live_state, "audit reconstruction diverged from live ledgers"

    records: list[CallRecord] = list(setup_meter.records)
    for sink in tx_meters:
        records.extend(sink.records)

    _write(out / "audit.jsonl", "\n".join(trail_lines) + "\n")
    _write(out / "snapshot_initial.txt", initial_snapshot)
    _write(out / "snapshot_final.txt", render_snapshot(live_state, kinds))
    _write(
        out / "gas_records.jsonl",
        "".join(
            json.dumps(
                {
                    "operation": r.operation,
                    "units": r.units,
                    "timestamp": r.timestamp,
                    "ledger": r.ledger.value if r.ledger else None,
                },
                separators=(",", ":"),
            )
            + "\n"
            for r in records
        ),
    )
    rows = report(records)
    _write(out / "gas_report.txt", render_report_text(rows))
    _write(
        out / "gas_report.json",
        json.dumps(
            [
                {
                    "operation": r.operation,
                    "min": r.min,
                    "avg": r.avg,
                    "median": r.median,
                    "max": r.max,
                    "calls": r.call_count,
                }
                for r in rows
            ],
            indent=2,
        )
        + "\n",
    )
    _write(out / "outcomes.json", _render_outcomes(done))
    for outcome in done:
        _write(
            out / "messages" / f"pacs002_{outcome.end_to_end_id}.xml",
            serialize_pacs002(outcome.final_report).decode(),
        )
        for i, ret in enumerate(outcome.returns):
            _write(
                out / "messages" / f"pacs004_{outcome.end_to_end_id}_{i}.xml",
                serialize_pacs004(ret).decode(),
            )

    exit_code = 1 if any(o.status is TransactionStatus.REJECTED for o in done) else 0
    return RunResult(outcomes=done, exit_code=exit_code, out_dir=out)


def _render_outcomes(outcomes: list[TransactionOutcome]) -> str:
    payload = []
    for outcome in outcomes:
        payload.append(
            {
                "end_to_end_id": outcome.end_to_end_id,
                "status": outcome.status.value,
                "hops_executed": outcome.hops_executed,
                "failure_reason": outcome.failure_reason,
                "events": [
                    {"agent": agent.value, "kind": event.kind.value, "sequence": event.sequence}
                    for agent, event in outcome.events
                ],
                "returns": len(outcome.returns),
                "conversions": [
                    {
                        "agent": c.agent.value,
                        "from": str(c.source),
                        "to": str(c.result),
                        "rate": str(c.rate),
                    }
                    for c in outcome.conversions
                ],
            }
        )
    return json.dumps(payload, indent=2) + "\n"


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8", newline="\n")


def load_call_records(path: str | Path) -> list[CallRecord]:
    """Read a gas_records.jsonl file back into call records."""
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line:
            continue
        raw = json.loads(line)
        records.append(
            CallRecord(
                operation=raw["operation"],
                units=int(raw["units"]),
                timestamp=int(raw["timestamp"]),
                ledger=BicCode(raw["ledger"]) if raw.get("ledger") else None,
            )
        )
    return records
