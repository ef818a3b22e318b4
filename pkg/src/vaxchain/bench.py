"""Repeated scenario runs with per-operation latency medians and cost totals."""

from __future__ import annotations

import csv
import io
import json
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .contracts import OperationKind, VaccinationCycle
from .costmodel import CostReport, GasKind, scenario_cost
from .errors import ConfigurationError, ContractError, TransactionRejected
from .ledger import Chain, NetworkProfile, default_profile
from .scenario import Scenario

CSV_COLUMNS = ("scenario", "profile", "op", "trial", "latency_ms")
FULL_CYCLE_OPS = (OperationKind.CHECKIN, OperationKind.CONFIRM_RELEASE, OperationKind.PARTNER_CHECKOUT)
FULL_CYCLE = "full_cycle"


def median(values: Sequence[float]) -> float:
    """Middle order statistic; mean of the two middle ones for even counts."""
    if not values:
        raise ValueError("median of an empty sample")
    ordered = sorted(values)
    mid = len(ordered) // 2
    if len(ordered) % 2:
        return float(ordered[mid])
    return (ordered[mid - 1] + ordered[mid]) / 2


@dataclass
class TrialOutcome:
    trial: int
    seed: int
    ok: bool
    latencies_ms: dict[str, int] = field(default_factory=dict)
    gas_counts: dict[str, int] = field(default_factory=dict)
    full_cycle_ms: int | None = None
    error: str | None = None
    failed_step: int | None = None

    def to_dict(self) -> dict:
        return {
            "trial": self.trial,
            "seed": self.seed,
            "ok": self.ok,
            "latencies_ms": dict(self.latencies_ms),
            "gas_counts": dict(self.gas_counts),
            "full_cycle_ms": self.full_cycle_ms,
            "error": self.error,
            "failed_step": self.failed_step,
        }


CYCLE_OPS = frozenset({
    OperationKind.ISSUE_RELEASE_QR,
    OperationKind.CONFIRM_RELEASE,
    OperationKind.PARTNER_CHECKOUT,
    OperationKind.CLIENT_CHECKOUT,
    OperationKind.CANCEL_CYCLE,
})


def _shown_nonce(chain: Chain, op: OperationKind, cycle_id) -> str | None:
    # the QR code the counterparty currently displays, if any
    try:
        cycle = chain.contracts.cycle(cycle_id)
    except ContractError:
        return None
    nonce = cycle.release_nonce if op is OperationKind.CONFIRM_RELEASE else cycle.checkout_nonce
    return nonce.hex if nonce is not None else None


def _payload(step, addresses: dict, chain: Chain, last_cycle: int | None) -> dict:
    """Translate scenario step arguments into contract call keywords."""
    args = dict(step.args)
    op = step.op
    if op is OperationKind.CHECKIN:
        return {
            "member_id": args.get("member", 0),
            "partner": addresses[args["partner"]],
            "vaccine_id": args["vaccine"],
            "payment_mode": args.get("payment_mode", "full_price"),
        }
    if op in CYCLE_OPS:
        out = {"cycle_id": args.get("cycle", last_cycle)}
        if op in (OperationKind.CONFIRM_RELEASE, OperationKind.CLIENT_CHECKOUT):
            nonce = args.get("nonce")
            out["nonce"] = nonce if nonce is not None else _shown_nonce(chain, op, out["cycle_id"])
        return out
    return args


def run_trial(scenario: Scenario, profile: NetworkProfile, trial: int) -> TrialOutcome:
    """Execute the script once on a fresh chain seeded with ``seed + trial``."""
    seed = scenario.trial_seed(trial)
    chain = Chain(profile, seed)
    addresses = {a.id: chain.create_account(balance_wei=a.balance_wei) for a in scenario.actors}
    outcome = TrialOutcome(trial, seed, ok=True)
    gas: Counter[str] = Counter()
    full_cycle: dict[OperationKind, int] = {}
    last_cycle = None
    for index, (label, step) in enumerate(zip(scenario.labels(), scenario.script)):
        sender = addresses[step.actor]
        try:
            payload = _payload(step, addresses, chain, last_cycle)
            if step.op.on_chain:
                receipt, result = chain.execute(sender, step.op, payload)
                ms = round(receipt.latency * 1000)
                outcome.latencies_ms[label] = ms
                gas[step.op.gas_kind.value] += 1
                if step.op in FULL_CYCLE_OPS and step.op not in full_cycle:
                    full_cycle[step.op] = ms
            else:
                result = chain.call(sender, step.op, payload)
        except (TransactionRejected, ContractError) as exc:
            outcome.ok = False
            outcome.error = f"{step.op.value}: {exc}"
            outcome.failed_step = index
            break
        if isinstance(result, VaccinationCycle):
            last_cycle = result.cycle_id
    outcome.gas_counts = dict(sorted(gas.items()))
    if outcome.ok and len(full_cycle) == len(FULL_CYCLE_OPS):
        outcome.full_cycle_ms = sum(full_cycle.values())
    return outcome


@dataclass
class BenchReport:
    scenario: str
    profile: str
    seed: int
    repetitions: int
    ops: list[str]
    per_op_samples: dict[str, list[int]]
    per_op_median: dict[str, float]
    full_cycle_samples: list[int]
    full_cycle_median: float | None
    successful_trials: list[int]
    failed_trials: list[dict]
    cost: CostReport

    @property
    def ok(self) -> bool:
        return not self.failed_trials

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "profile": self.profile,
            "seed": self.seed,
            "repetitions": self.repetitions,
            "ops": list(self.ops),
            "per_op_samples": {k: list(v) for k, v in self.per_op_samples.items()},
            "per_op_median": dict(self.per_op_median),
            "full_cycle_samples": list(self.full_cycle_samples),
            "full_cycle_median": self.full_cycle_median,
            "successful_trials": list(self.successful_trials),
            "failed_trials": list(self.failed_trials),
            "cost": self.cost.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "BenchReport":
        fcm = data.get("full_cycle_median")
        return cls(
            scenario=data["scenario"],
            profile=data["profile"],
            seed=int(data["seed"]),
            repetitions=int(data["repetitions"]),
            ops=list(data["ops"]),
            per_op_samples={k: list(v) for k, v in data["per_op_samples"].items()},
            per_op_median={k: float(v) for k, v in data["per_op_median"].items()},
            full_cycle_samples=list(data["full_cycle_samples"]),
            full_cycle_median=None if fcm is None else float(fcm),
            successful_trials=[int(t) for t in data["successful_trials"]],
            failed_trials=list(data["failed_trials"]),
            cost=CostReport.from_dict(data["cost"]),
        )


def _profile_for(scenario: Scenario, profile) -> NetworkProfile:
    if isinstance(profile, NetworkProfile):
        return profile
    return default_profile(profile or scenario.profile)


def build_report(scenario: Scenario, profile: NetworkProfile, outcomes: Iterable[TrialOutcome]) -> BenchReport:
    """Reduce trial outcomes, in trial order, to a report."""
    outcomes = sorted(outcomes, key=lambda o: o.trial)
    on_chain = [label for label, s in zip(scenario.labels(), scenario.script) if s.op.on_chain]
    good = [o for o in outcomes if o.ok]
    samples = {label: [o.latencies_ms[label] for o in good] for label in on_chain}
    medians = {label: median(v) for label, v in samples.items() if v}
    cycles = [o.full_cycle_ms for o in good if o.full_cycle_ms is not None]
    counts: Counter[GasKind] = Counter()
    if good:
        counts.update({GasKind(k): n for k, n in good[0].gas_counts.items()})
    return BenchReport(
        scenario=scenario.name,
        profile=profile.name.value.lower(),
        seed=scenario.seed,
        repetitions=scenario.repetitions,
        ops=on_chain,
        per_op_samples=samples,
        per_op_median=medians,
        full_cycle_samples=cycles,
        full_cycle_median=median(cycles) if cycles else None,
        successful_trials=[o.trial for o in good],
        failed_trials=[o.to_dict() for o in outcomes if not o.ok],
        cost=scenario_cost(counts, profile.name.value),
    )


def _trial_job(args):
    return run_trial(*args)


def run(scenario: Scenario, profile: NetworkProfile | str | None = None, workers: int = 1) -> BenchReport:
    """Run every repetition of ``scenario`` and summarise.

    Trials are independent chains, so ``workers > 1`` farms them out to a
    process pool; the report does not depend on completion order.
    """
    net = _profile_for(scenario, profile)
    jobs = [(scenario, net, t) for t in range(scenario.repetitions)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_trial_job, jobs))
    else:
        outcomes = [run_trial(*job) for job in jobs]
    return build_report(scenario, net, outcomes)


# -- comparison ---------------------------------------------------------


@dataclass(frozen=True)
class ComparisonRow:
    op: str
    median_a: float
    median_b: float

    @property
    def ratio(self) -> float:
        return self.median_b / self.median_a

    @property
    def percent_diff(self) -> float:
        return (self.median_b - self.median_a) / self.median_a * 100


@dataclass
class ComparisonTable:
    profile_a: str
    profile_b: str
    rows: list[ComparisonRow]

    def row(self, op: str) -> ComparisonRow:
        for r in self.rows:
            if r.op == op:
                return r
        raise KeyError(op)

    def format(self) -> str:
        header = f"{'op':<24} {self.profile_a + ' ms':>14} {self.profile_b + ' ms':>14} {'ratio':>8} {'diff %':>9}"
        lines = [header, "-" * len(header)]
        for r in self.rows:
            lines.append(f"{r.op:<24} {r.median_a:>14.1f} {r.median_b:>14.1f} {r.ratio:>8.2f} {r.percent_diff:>+9.1f}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["op", f"median_ms_{self.profile_a}", f"median_ms_{self.profile_b}", "ratio", "percent_diff"])
        for r in self.rows:
            w.writerow([r.op, r.median_a, r.median_b, f"{r.ratio:.6f}", f"{r.percent_diff:.6f}"])
        return buf.getvalue()


def compare_medians(a: Mapping[str, float], b: Mapping[str, float], profile_a: str = "a",
                    profile_b: str = "b") -> ComparisonTable:
    if list(a) != list(b):
        raise ConfigurationError(f"cannot compare different scripts: {list(a)} vs {list(b)}")
    return ComparisonTable(profile_a, profile_b, [ComparisonRow(op, a[op], b[op]) for op in a])


def compare(report_a: BenchReport, report_b: BenchReport) -> ComparisonTable:
    """Per-op median ratio and percent difference of ``b`` relative to ``a``."""
    if report_a.ops != report_b.ops:
        raise ConfigurationError(f"cannot compare different scripts: {report_a.ops} vs {report_b.ops}")
    a = {op: report_a.per_op_median[op] for op in report_a.ops if op in report_a.per_op_median}
    b = {op: report_b.per_op_median[op] for op in report_b.ops if op in report_b.per_op_median}
    if report_a.full_cycle_median is not None and report_b.full_cycle_median is not None:
        a[FULL_CYCLE] = report_a.full_cycle_median
        b[FULL_CYCLE] = report_b.full_cycle_median
    return compare_medians(a, b, report_a.profile, report_b.profile)


# -- export -------------------------------------------------------------


def to_csv(report: BenchReport) -> str:
    rows = [
        (report.scenario, report.profile, op, trial, ms)
        for op, samples in report.per_op_samples.items()
        for trial, ms in zip(report.successful_trials, samples)
    ]
    rows.sort(key=lambda r: (r[2], r[3]))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    w.writerows(rows)
    return buf.getvalue()


def to_structured(report: BenchReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"


def from_structured(text: str) -> BenchReport:
    return BenchReport.from_dict(json.loads(text))


def export(report: BenchReport, format: str = "structured") -> str:
    if format == "csv":
        return to_csv(report)
    if format == "structured":
        return to_structured(report)
    raise ConfigurationError(f"unknown export format {format!r}")


def report_paths(report: BenchReport, output_dir: str | Path) -> tuple[Path, Path]:
    base = Path(output_dir) / f"{report.scenario}-{report.profile}"
    return base.with_suffix(".csv"), base.with_suffix(".report")


def write_report(report: BenchReport, output_dir: str | Path) -> tuple[Path, Path]:
    csv_path, report_path = report_paths(report, output_dir)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    csv_path.write_text(to_csv(report), encoding="utf-8")
    report_path.write_text(to_structured(report), encoding="utf-8")
    return csv_path, report_path
