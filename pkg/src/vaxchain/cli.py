"""Command-line entry point.

Exit codes: 0 success, 1 contract or scenario violation, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from decimal import Decimal, InvalidOperation
from pathlib import Path

from . import bench
from .contracts import VaccineSchedule
from .costmodel import (
    DEFAULT_QUOTE,
    EthQuote,
    GasKind,
    InfraCost,
    default_calibration,
    format_cost_table,
    format_eth,
    format_usd,
    scenario_cost,
)
from .errors import ConfigurationError, ScenarioParseError, TransactionRejected
from .ledger import Chain, default_profile
from .scenario import Scenario, load_scenario

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2
OUTPUT_DIR_ENV = "VAXCHAIN_OUTPUT_DIR"
FORMATS = ("table", "csv", "structured")


class ScenarioViolation(Exception):
    """Scenario parsed but describes an impossible workload."""


@dataclass
class CliConfig:
    command: str
    scenario_path: Path | None = None
    profile: str | None = None
    seed: int | None = None
    output_dir: Path = Path(".")
    format: str = "table"
    stamp: bool = False


def _emit(text: str, stamp: bool) -> None:
    if stamp:
        print(f"# generated {datetime.now(timezone.utc).isoformat(timespec='seconds')}")
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _load(config: CliConfig) -> Scenario:
    path = config.scenario_path
    if path is None or not path.is_file():
        raise FileNotFoundError(f"scenario not found: {path}")
    try:
        scenario = load_scenario(path)
    except ScenarioParseError:
        raise
    except ConfigurationError as exc:
        raise ScenarioViolation(str(exc)) from None
    if config.seed is not None:
        scenario.seed = config.seed
    if config.profile:
        scenario.profile = config.profile.lower()
    return scenario


def _summary(report: bench.BenchReport) -> str:
    lines = [f"scenario {report.scenario} on {report.profile}: "
             f"{len(report.successful_trials)}/{report.repetitions} trials ok"]
    for op in report.ops:
        if op in report.per_op_median:
            lines.append(f"  {op:<24} median {report.per_op_median[op]:>12.1f} ms")
    if report.full_cycle_median is not None:
        lines.append(f"  {'full_cycle':<24} median {report.full_cycle_median:>12.1f} ms")
    for failed in report.failed_trials:
        lines.append(f"  trial {failed['trial']} failed: {failed['error']}")
    return "\n".join(lines) + "\n"


def cmd_run(config: CliConfig, workers: int = 1) -> int:
    scenario = _load(config)
    report = bench.run(scenario, workers=workers)
    bench.write_report(report, config.output_dir)
    text = {"table": _summary, "csv": bench.to_csv, "structured": bench.to_structured}[config.format](report)
    _emit(text, config.stamp)
    if report.failed_trials:
        print(f"error: {len(report.failed_trials)} trial(s) hit a contract error", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_cost(config: CliConfig, eth_usd: str | None = None, nodes: int = 5, node_usd: str = "24.75") -> int:
    quote = EthQuote(Decimal(eth_usd), "") if eth_usd is not None else DEFAULT_QUOTE
    infra = InfraCost(nodes, Decimal(node_usd))
    schedule = default_calibration()
    profiles = (config.profile.lower(),) if config.profile else ("main", "private")
    for p in profiles:
        default_profile(p)
    if config.format == "table":
        text = format_cost_table(schedule, quote, infra, profiles)
    elif config.format == "structured":
        docs = [scenario_cost({}, p, schedule, quote, infra).to_dict() for p in profiles]
        text = json.dumps(docs[0] if len(docs) == 1 else docs, indent=2, sort_keys=True) + "\n"
    else:
        rows = ["profile,op,eth,usd"]
        for p in profiles:
            report = scenario_cost({}, p, schedule, quote, infra)
            for kind in GasKind:
                c = report.per_op[kind]
                rows.append(f"{p},{kind.value},{format_eth(c.wei)},{format_usd(c.micro_usd)}")
            rows.append(f"{p},full_cycle,{format_eth(report.full_cycle.wei)},{format_usd(report.full_cycle.micro_usd)}")
            rows.append(f"{p},infra_monthly,,{report.infra_monthly_usd:.2f}")
        text = "\n".join(rows) + "\n"
    _emit(text, config.stamp)
    return EXIT_OK


def cmd_compare(config: CliConfig, profiles: tuple[str, str], workers: int = 1) -> int:
    scenario = _load(config)
    reports = [bench.run(scenario, p, workers=workers) for p in profiles]
    table = bench.compare(*reports)
    if config.format == "csv":
        text = table.to_csv()
    elif config.format == "structured":
        text = json.dumps(
            {
                "profile_a": table.profile_a,
                "profile_b": table.profile_b,
                "rows": [
                    {"op": r.op, "median_a": r.median_a, "median_b": r.median_b,
                     "ratio": r.ratio, "percent_diff": r.percent_diff}
                    for r in table.rows
                ],
            },
            indent=2,
        ) + "\n"
    else:
        text = table.format()
    _emit(text, config.stamp)
    return EXIT_VIOLATION if any(r.failed_trials for r in reports) else EXIT_OK


def demo_transcript(profile: str = "private", seed: int = 42) -> list[str]:
    """Walk the whole workflow once and describe each step."""
    chain = Chain(default_profile(profile), seed)
    client = chain.create_account(balance_wei=10**18)
    pharmacy = chain.create_account(balance_wei=10**18)
    tokens = chain.contracts.tokens
    lines = []

    def step(n: int, what: str, receipt=None) -> None:
        when = f"({receipt.latency * 1000:>6.0f} ms, block {receipt.block_height}) " if receipt else " " * 21
        lines.append(f"[{n}] {when}{what}")

    r, _ = chain.execute(client, "register_client", {"personal_data": "Maria"})
    step(1, f"Flow 1   client {client} creates an account", r)
    r, member = chain.execute(client, "add_member", {
        "name": "Joao", "imported_vaccines": [{"vaccine_id": "bcg", "applied_at": 0}],
    })
    step(2, f"Flow 1   adds member {member.member_id} ({member.name}) with {len(member.vaccine_history)} imported vaccine", r)
    offer = {"vaccine_id": "flu", "price_eth": "0.01", "stock": 10, "bonus_tokens": 50, "token_discount_price": 40}
    r, _ = chain.execute(pharmacy, "register_partner", {"business_data": "Pharmacy", "offers": [offer]})
    step(3, f"Flow 2   partner {pharmacy} registers and offers flu (stock 10, bonus 50)", r)
    r, balance = chain.execute(pharmacy, "purchase_tokens", {"amount": 1000})
    step(4, f"Flow 2.1 partner buys tokens, balance {balance}", r)
    due = chain.contracts.list_due_vaccines(client, 1, VaccineSchedule({"bcg": None, "flu": 365 * 86400.0}), chain.clock)
    step(5, f"Flow 1   due vaccines for member 1: {', '.join(due)}")
    r, cycle = chain.execute(client, "checkin", {
        "member_id": 1, "partner": pharmacy, "vaccine_id": "flu", "payment_mode": "full_price",
    })
    step(6, f"Flow 1.1 checkin opens cycle {cycle.cycle_id}, stock now {chain.contracts.offer(pharmacy, 'flu').stock}", r)
    nonce = chain.call(pharmacy, "issue_release_qr", {"cycle_id": cycle.cycle_id})
    step(7, f"Flow 2.2 partner shows release QR {nonce.hex[:8]}...")
    r, _ = chain.execute(client, "confirm_release", {"cycle_id": cycle.cycle_id, "nonce": nonce.hex})
    step(8, "Flow 1.2 client scans the QR and confirms the release", r)
    r, state = chain.execute(pharmacy, "partner_checkout", {"cycle_id": cycle.cycle_id})
    held = tokens.balance(client) + tokens.balance(pharmacy)
    step(9, f"Flow 3   partner checkout pays bonus: client {tokens.balance(client)}, partner "
            f"{tokens.balance(pharmacy)} (sum {held} of {tokens.total_minted} minted) -> cycle "
            f"{state.value.replace('_', ' ').capitalize()}", r)
    return lines


def cmd_demo(config: CliConfig) -> int:
    lines = demo_transcript(config.profile or "private", 42 if config.seed is None else config.seed)
    _emit("\n".join(lines) + "\n", config.stamp)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vaxchain", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scenario: bool):
        if scenario:
            p.add_argument("--scenario", type=Path, required=True, help="scenario JSON file")
        p.add_argument("--profile", help="main, ropsten or private")
        p.add_argument("--seed", type=int, help="base seed (default: scenario seed, 42)")
        p.add_argument("--format", choices=FORMATS, default="table")
        p.add_argument("--output-dir", type=Path,
                       default=Path(os.environ.get(OUTPUT_DIR_ENV, ".")))
        p.add_argument("--stamp", action="store_true", help="prefix output with a UTC timestamp")

    p_run = sub.add_parser("run", help="run a scenario and write <scenario>-<profile>.{csv,report}")
    common(p_run, True)
    p_run.add_argument("--workers", type=int, default=1)

    p_cost = sub.add_parser("cost", help="print the per-operation cost table")
    common(p_cost, False)
    p_cost.add_argument("--eth-usd", help="USD per ETH (default 167)")
    p_cost.add_argument("--nodes", type=int, default=5)
    p_cost.add_argument("--node-usd", default="24.75", help="USD per node per month")

    p_cmp = sub.add_parser("compare", help="median latency comparison between two profiles")
    common(p_cmp, True)
    p_cmp.add_argument("--profiles", default="private,ropsten", help="two comma-separated profiles")
    p_cmp.add_argument("--workers", type=int, default=1)

    p_demo = sub.add_parser("demo", help="narrated walk through one full cycle")
    common(p_demo, False)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    config = CliConfig(
        command=args.command,
        scenario_path=getattr(args, "scenario", None),
        profile=args.profile,
        seed=args.seed,
        output_dir=args.output_dir,
        format=args.format,
        stamp=args.stamp,
    )
    try:
        if args.command == "run":
            return cmd_run(config, args.workers)
        if args.command == "cost":
            return cmd_cost(config, args.eth_usd, args.nodes, args.node_usd)
        if args.command == "compare":
            profiles = tuple(p.strip() for p in args.profiles.split(","))
            if len(profiles) != 2:
                return _fail(EXIT_USAGE, "--profiles takes exactly two names")
            return cmd_compare(config, profiles, args.workers)
        return cmd_demo(config)
    except FileNotFoundError as exc:
        return _fail(EXIT_USAGE, str(exc))
    except ScenarioViolation as exc:
        return _fail(EXIT_VIOLATION, f"invalid scenario: {exc}")
    except ScenarioParseError as exc:
        return _fail(EXIT_USAGE, f"parse error: {exc}")
    except (ConfigurationError, InvalidOperation) as exc:
        return _fail(EXIT_USAGE, str(exc) or "invalid number")
    except TransactionRejected as exc:
        return _fail(EXIT_VIOLATION, str(exc))
    except OSError as exc:
        return _fail(EXIT_USAGE, str(exc))


if __name__ == "__main__":
    sys.exit(main())
