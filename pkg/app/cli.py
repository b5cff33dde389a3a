# app/cli.py
"""
Command-line front end.

    python -m app.cli design --model normal --psi1 0.415 --k0 1/20 --k1 20
    python -m app.cli tables --table 2 --reps 100000 --seed 7
    python -m app.cli simulate astray --k 20 --m0 10 --m 100 --reps 200000
    python -m app.cli monitor --data events.csv --psi1 0.415 --k0 1/20 --k1 20
    python -m app.cli misleading curve --kind tepee --k 8
    python -m app.cli serve

Exit codes: 0 success, 2 usage or configuration error, 3 data error.
Logs go to stderr; stdout carries only report bytes.
"""
import argparse
import logging
import sys
import time
from fractions import Fraction
from typing import Iterator, List, Optional, Sequence

from pydantic import ValidationError

from app.core.config import settings
from app.core.exceptions import EvidenceError, IngestionError
from app.schemas.design import HypothesisIndex, NormalDesign, PoissonDesign
from app.schemas.evidence import EvidenceThresholds, Hypotheses
from app.schemas.misleading import AstrayTable, EvidenceScale, LookWindow
from app.schemas.monitor import RemainingUnit
from app.schemas.simulation import BayesDesign, SimConfig, SurvivalSimModel
from app.schemas.tables import DesignTable
from app.services import design_normal, design_poisson, misleading, monitor, reports, simulation
from app.services.ingestion import decode_text, iter_records
from app.services.tables import reproduce_table

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3


def parse_ratio(text: str) -> float:
    """Decimal or p/q fraction; 1/20 is converted exactly once"""
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number or p/q fraction: {text!r}")
    return float(value)


# Argument groups shared across subcommands
def _add_output(parser: argparse.ArgumentParser, formats=("json", "table", "csv")) -> None:
    parser.add_argument("--format", choices=formats, default=formats[0])
    parser.add_argument("--output", help="write the report to this file instead of stdout")


def _add_thresholds(parser: argparse.ArgumentParser, required: bool = True) -> None:
    parser.add_argument("--k0", type=parse_ratio, required=required)
    parser.add_argument("--k1", type=parse_ratio, required=required)


def _add_sim(parser: argparse.ArgumentParser, burn_in: int = 1) -> None:
    parser.add_argument("--reps", type=int, default=settings.DEFAULT_REPLICATES)
    parser.add_argument("--seed", type=int, default=settings.EVIDENCE_SEED)
    parser.add_argument("--cap", type=int, default=None, help="maximum number of events")
    parser.add_argument("--burn-in", type=int, default=burn_in)
    parser.add_argument("--workers", type=int, default=settings.SIM_WORKERS)


def _add_survival_model(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--psi-true", type=parse_ratio, default=1.0)
    parser.add_argument("--lambda-c", type=parse_ratio, default=0.25)
    parser.add_argument("--accrual", type=float, default=2.4)
    parser.add_argument("--followup", type=float, default=4.5)
    parser.add_argument("--per-group", type=int, default=50)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="evidence", description="Likelihood evidence toolkit")
    parser.add_argument("-v", "--verbose", action="store_true")
    commands = parser.add_subparsers(dest="command", required=True)

    design = commands.add_parser("design", help="operating characteristics and sample size")
    design.add_argument("--model", choices=("normal", "poisson"), default="normal")
    design.add_argument("--psi1", type=parse_ratio, required=True)
    design.add_argument("--psi0", type=parse_ratio, default=1.0)
    _add_thresholds(design)
    design.add_argument("--g", type=parse_ratio, default=1.0)
    design.add_argument("--lambda-c", type=parse_ratio, default=None)
    design.add_argument("--rho", type=float, default=None)
    design.add_argument("--event-prob", type=parse_ratio, default=None)
    design.add_argument("--allocation", type=parse_ratio, default=1.0)
    design.add_argument("--gamma", type=parse_ratio, default=0.8)
    _add_output(design, ("json", "table"))

    tables = commands.add_parser("tables", help="regenerate a reference table")
    tables.add_argument("--table", type=int, required=True)
    tables.add_argument("--reps", type=int, default=None)
    tables.add_argument("--seed", type=int, default=settings.EVIDENCE_SEED)
    _add_output(tables)

    simulate = commands.add_parser("simulate", help="Monte Carlo runs")
    kinds = simulate.add_subparsers(dest="kind", required=True)

    walk = kinds.add_parser("walk")
    walk.add_argument("--model", choices=("normal", "poisson"), default="normal")
    walk.add_argument("--psi1", type=parse_ratio, default=0.415)
    walk.add_argument("--psi0", type=parse_ratio, default=1.0)
    walk.add_argument("--g", type=parse_ratio, default=1.0)
    _add_thresholds(walk)
    walk.add_argument("--truth", choices=("null", "alt"), default="null")
    _add_sim(walk)
    _add_output(walk)

    survival = kinds.add_parser("survival")
    survival.add_argument("--psi1", type=parse_ratio, default=0.415)
    survival.add_argument("--k", type=parse_ratio, default=None, help="symmetric thresholds 1/k, k")
    _add_thresholds(survival, required=False)
    _add_survival_model(survival)
    _add_sim(survival, burn_in=10)
    _add_output(survival)

    astray = kinds.add_parser("astray")
    astray.add_argument("--k", type=parse_ratio, required=True)
    astray.add_argument("--m0", type=int, default=1)
    astray.add_argument("--m", type=int, required=True)
    astray.add_argument("--reps", type=int, default=settings.DEFAULT_REPLICATES)
    astray.add_argument("--seed", type=int, default=settings.EVIDENCE_SEED)
    astray.add_argument("--workers", type=int, default=settings.SIM_WORKERS)
    _add_output(astray)

    bayes = kinds.add_parser("bayes")
    bayes.add_argument("--prior-mean", type=float, default=0.0)
    bayes.add_argument("--prior-sd", type=float, default=0.5606)
    bayes.add_argument("--upper", type=parse_ratio, default=0.95)
    bayes.add_argument("--lower", type=parse_ratio, default=None)
    _add_survival_model(bayes)
    _add_sim(bayes, burn_in=10)
    _add_output(bayes)

    watch = commands.add_parser("monitor", help="sequential monitoring of an event file")
    watch.add_argument("--data", required=True)
    hypothesis = watch.add_mutually_exclusive_group(required=True)
    hypothesis.add_argument("--theta1", type=float)
    hypothesis.add_argument("--psi1", type=parse_ratio)
    watch.add_argument("--theta0", type=float, default=0.0)
    _add_thresholds(watch)
    watch.add_argument("--burn-in", type=int, default=1)
    watch.add_argument("--max-events", type=int, default=None)
    watch.add_argument("--project-to", type=parse_ratio, default=None)
    watch.add_argument("--remaining", type=float, default=None)
    watch.add_argument("--remaining-unit", choices=[u.value for u in RemainingUnit], default="events")
    watch.add_argument("--event-prob", type=parse_ratio, default=None)
    watch.add_argument("--watch", action="store_true", help="keep reading appended records")
    watch.add_argument("--poll", type=float, default=1.0)

    bounds = commands.add_parser("misleading", help="closed-form misleading-evidence probabilities")
    functions = bounds.add_subparsers(dest="function", required=True)
    universal = functions.add_parser("universal")
    universal.add_argument("--k", type=parse_ratio, required=True)
    bump = functions.add_parser("bump")
    bump.add_argument("--delta", type=float, required=True)
    bump.add_argument("--n", type=float, required=True)
    bump.add_argument("--k", type=parse_ratio, required=True)
    bumpmax = functions.add_parser("bumpmax")
    bumpmax.add_argument("--k", type=parse_ratio, required=True)
    extended = functions.add_parser("extended")
    extended.add_argument("--delta", type=float, required=True)
    extended.add_argument("--m0", type=int, default=1)
    extended.add_argument("--m", type=float, default=None)
    extended.add_argument("--k", type=parse_ratio, required=True)
    extended.add_argument("--rho", type=float, default=settings.RHO_NORMAL)
    tepee = functions.add_parser("tepee")
    tepee.add_argument("--delta", type=float, required=True)
    tepee.add_argument("--k", type=parse_ratio, required=True)
    tepee.add_argument("--rho", type=float, default=settings.RHO_NORMAL)
    led = functions.add_parser("astray")
    led.add_argument("--k", type=parse_ratio, required=True)
    led.add_argument("--m0", type=int, default=1)
    led.add_argument("--m", type=float, default=None)
    led.add_argument("--two-sided", action="store_true")
    curve = functions.add_parser("curve")
    curve.add_argument("--kind", choices=("bump", "extended", "tepee"), required=True)
    curve.add_argument("--k", type=parse_ratio, default=8.0)
    curve.add_argument("--n", type=float, default=3.0)
    curve.add_argument("--m0", type=int, default=3)
    curve.add_argument("--m", type=float, default=15.0)
    curve.add_argument("--rho", type=float, default=settings.RHO_NORMAL)
    curve.add_argument("--max-delta", type=float, default=3.0)
    curve.add_argument("--points", type=int, default=121)
    for sub in (universal, bump, bumpmax, extended, tepee, led):
        _add_output(sub, ("json", "table"))
    curve.add_argument("--output")

    serve = commands.add_parser("serve", help="run the HTTP API")
    serve.add_argument("--host", default=settings.HOST)
    serve.add_argument("--port", type=int, default=settings.PORT)
    serve.add_argument("--reload", action="store_true")
    return parser


# Rendering
def _key_value_table(pairs: List[List[str]], manifest) -> str:
    return reports.to_table(["quantity", "value"], pairs, manifest)


def _render_summary(summary, args, manifest) -> str:
    rows = [
        ["P(stop efficacy)", reports.probability(summary.prob_stop_efficacy),
         reports.probability(summary.se_stop_efficacy)],
        ["P(stop inefficacy)", reports.probability(summary.prob_stop_inefficacy),
         reports.probability(summary.se_stop_inefficacy)],
        ["P(non-stop)", reports.probability(summary.prob_non_stop),
         reports.probability(summary.se_non_stop)],
        ["E[D]", reports.events(summary.mean_events), ""],
    ]
    rows += [[f"{level}%", reports.number(value), ""] for level, value in summary.quantiles.items()]
    rows.append(["100%", reports.number(summary.max_events), ""])
    headers = ["quantity", "value", "mc_se"]
    if args.format == "csv":
        return reports.to_csv(headers, rows)
    return reports.to_table(headers, rows, manifest)


def _render_estimate(estimate, args, manifest) -> str:
    rows = [[reports.probability(estimate.probability), reports.probability(estimate.standard_error),
             str(estimate.replicates)]]
    headers = ["probability", "mc_se", "replicates"]
    if args.format == "csv":
        return reports.to_csv(headers, rows)
    return reports.to_table(headers, rows, manifest)


def _render_astray_table(table: AstrayTable, args, manifest) -> str:
    headers = ["k"] + [f"{r:g}" for r in table.ratios]
    rows = [[f"{k:g}"] + [reports.probability(c) for c in cells] for k, cells in zip(table.ks, table.cells)]
    if args.format == "csv":
        return reports.to_csv(headers, rows)
    return reports.to_table(headers, rows, manifest)


def _render_design_table(table: DesignTable, args, manifest) -> str:
    levels = [str(level) for level in table.quantile_levels]
    headers = ["k0", "k1", "truth", "oc", "E[D]"] + [f"{q}%" for q in levels]
    if table.model == "survival":
        headers += ["100%", "non-stop"]
    rows = []
    for row in table.rows:
        for truth, oc, expected, simulated in (
            ("null", row.alpha_l, row.e_events_null, row.null),
            ("alt", row.power_l, row.e_events_alt, row.alt),
        ):
            if expected is None and simulated is not None:
                expected = simulated.mean_events
            cells = [reports.ratio(row.k0), reports.ratio(row.k1), truth,
                     f"{oc:.3f}", reports.events(expected)]
            cells += [reports.number(simulated.quantiles[q]) if simulated else "" for q in levels]
            if table.model == "survival":
                cells += [reports.number(simulated.max_events), reports.probability(simulated.prob_non_stop)]
            rows.append(cells)
    if args.format == "csv":
        return reports.to_csv(headers, rows)
    return reports.to_table(headers, rows, manifest)


def _render_design(report, manifest) -> str:
    oc = report.characteristics
    pairs = [
        ["alpha_l", reports.probability(oc.alpha_l)],
        ["power_l", reports.probability(oc.power_l)],
        ["E0[D]", reports.events(oc.e_events_null)],
        ["E1[D]", reports.events(oc.e_events_alt)],
    ]
    if getattr(report, "subjects_null", None) is not None:
        pairs += [["n (null)", str(report.subjects_null)], ["n (alt)", str(report.subjects_alt)]]
    for projection in getattr(report, "projections", []):
        label = "mean" if projection.gamma is None else f"gamma={projection.gamma:g}"
        pairs.append([f"t_c {projection.under.name.lower()} ({label})", f"{projection.t_c:.4f}"])
    text = _key_value_table(pairs, manifest)
    return text + "".join(f"# note: {note}\n" for note in report.notes)


# Commands
def cmd_design(args, argv) -> str:
    thresholds = EvidenceThresholds(k0=args.k0, k1=args.k1)
    manifest = reports.build_manifest(argv)
    if args.model == "normal":
        options = {} if args.rho is None else {"rho": args.rho}
        design = NormalDesign(
            hyps=Hypotheses.from_hazard_ratios(args.psi1, args.psi0),
            thresholds=thresholds,
            allocation=args.allocation,
            **options,
        )
        report = design_normal.design_report(design, args.event_prob)
    else:
        options = {} if args.rho is None else {"rho": args.rho}
        design = PoissonDesign(
            psi1=args.psi1, psi0=args.psi0, g=args.g, lambda_c=args.lambda_c,
            thresholds=thresholds, **options,
        )
        report = design_poisson.poisson_design_report(design, args.gamma)
    if args.format == "table":
        return _render_design(report, manifest)
    return reports.to_json(report, manifest)


def cmd_tables(args, argv) -> str:
    table = reproduce_table(args.table, args.reps, args.seed)
    manifest = reports.build_manifest(argv, seed=args.seed if args.reps else None)
    if args.format == "json":
        return reports.to_json(table, manifest)
    if isinstance(table, AstrayTable):
        return _render_astray_table(table, args, manifest)
    return _render_design_table(table, args, manifest)


def _sim_config(args, truth: HypothesisIndex = HypothesisIndex.NULL) -> SimConfig:
    return SimConfig(
        replicates=args.reps,
        seed=args.seed,
        max_events=getattr(args, "cap", None),
        burn_in_events=getattr(args, "burn_in", 1),
        truth=truth,
        workers=args.workers,
    )


def _survival_model(args) -> SurvivalSimModel:
    return SurvivalSimModel(
        lambda_c=args.lambda_c,
        psi_true=args.psi_true,
        accrual_years=args.accrual,
        followup_years=args.followup,
        subjects_per_group=args.per_group,
    )


def cmd_simulate(args, argv) -> str:
    manifest = reports.build_manifest(argv, seed=args.seed)
    if args.kind == "walk":
        thresholds = EvidenceThresholds(k0=args.k0, k1=args.k1)
        if args.model == "poisson":
            design = design_poisson.orient_hypotheses(
                PoissonDesign(psi1=args.psi1, psi0=args.psi0, g=args.g, thresholds=thresholds)
            )
        else:
            design = NormalDesign(hyps=Hypotheses.from_hazard_ratios(args.psi1, args.psi0), thresholds=thresholds)
        truth = HypothesisIndex.ALT if args.truth == "alt" else HypothesisIndex.NULL
        result = simulation.simulate_walk_design(design, _sim_config(args, truth))
    elif args.kind == "survival":
        if args.k is not None:
            thresholds = EvidenceThresholds.symmetric(args.k)
        elif args.k0 is not None and args.k1 is not None:
            thresholds = EvidenceThresholds(k0=args.k0, k1=args.k1)
        else:
            raise EvidenceError("give --k or both --k0 and --k1")
        design = NormalDesign(hyps=Hypotheses.from_hazard_ratios(args.psi1), thresholds=thresholds)
        result = simulation.simulate_survival_trial(design, _survival_model(args), _sim_config(args))
    elif args.kind == "astray":
        config = SimConfig(replicates=args.reps, seed=args.seed, workers=args.workers)
        result = simulation.simulate_led_astray(args.k, LookWindow(m0=args.m0, m=args.m), config)
    else:
        bayes = BayesDesign(
            prior_mean=args.prior_mean,
            prior_sd=args.prior_sd,
            upper_posterior_stop=args.upper,
            lower_posterior_stop=args.lower,
        )
        result = simulation.simulate_bayes_design(bayes, _survival_model(args), _sim_config(args))

    if args.format == "json":
        return reports.to_json(result, manifest)
    if args.kind == "astray":
        return _render_estimate(result, args, manifest)
    return _render_summary(result, args, manifest)


def cmd_misleading(args, argv) -> str:
    if args.function == "curve":
        deltas = misleading.default_deltas(args.max_delta, args.points)
        if args.kind == "bump":
            points = misleading.bump_curve(deltas, args.n, args.k)
        elif args.kind == "extended":
            points = misleading.extended_bump_curve(deltas, LookWindow(m0=args.m0, m=args.m), args.k, args.rho)
        else:
            points = misleading.tepee_curve(deltas, args.k, args.rho)
        return reports.to_csv(["delta", "probability"], [[repr(p.delta), repr(p.probability)] for p in points])

    if args.function == "universal":
        result = {"k": args.k, "bound": misleading.universal_bound(args.k)}
    elif args.function == "bump":
        scale = EvidenceScale(delta=args.delta, rho=0.0)
        result = {"k": args.k, "n": args.n, "probability": misleading.bump(scale, args.n, args.k)}
    elif args.function == "bumpmax":
        best = misleading.bump_max(args.k)
        result = {"k": args.k, "probability": best.probability, "distance": best.distance}
    elif args.function == "extended":
        scale = EvidenceScale(delta=args.delta, rho=args.rho)
        window = LookWindow(m0=args.m0, m=args.m)
        result = {"k": args.k, "probability": misleading.extended_bump(scale, window, args.k)}
    elif args.function == "tepee":
        scale = EvidenceScale(delta=args.delta, rho=args.rho)
        result = {"k": args.k, "probability": misleading.tepee(scale, args.k)}
    elif args.m is None:
        result = {"k": args.k, "fixed_design": misleading.astray_fixed(args.k, args.two_sided)}
    else:
        result = misleading.astray_report(LookWindow(m0=args.m0, m=args.m), args.k).model_dump()

    manifest = reports.build_manifest(argv)
    if args.format == "table":
        pairs = [[key, reports.number(value)] for key, value in result.items()]
        return _key_value_table(pairs, manifest)
    return reports.to_json(result, manifest)


def _follow(path: str, poll: float) -> Iterator[str]:
    """Yield complete lines, waiting for appended data at end of file"""
    with open(path, "rb") as handle:
        pending = b""
        while True:
            chunk = handle.readline()
            if not chunk:
                time.sleep(poll)
                continue
            pending += chunk
            if pending.endswith(b"\n"):
                yield decode_text(pending)
                pending = b""


def cmd_monitor(args, argv, out) -> None:
    if args.theta1 is not None:
        hyps = Hypotheses(theta0=args.theta0, theta1=args.theta1)
    else:
        hyps = Hypotheses.from_hazard_ratios(args.psi1)
    thresholds = EvidenceThresholds(k0=args.k0, k1=args.k1)
    state = monitor.new_trial(
        NormalDesign(hyps=hyps, thresholds=thresholds),
        burn_in_events=args.burn_in,
        max_events=args.max_events,
    )
    options = {
        "project_to": args.project_to,
        "remaining": args.remaining,
        "unit": RemainingUnit(args.remaining_unit),
        "event_probability": args.event_prob,
    }

    if args.watch:
        lines = _follow(args.data, args.poll)
        inputs = None
    else:
        with open(args.data, "rb") as handle:
            content = handle.read()
        inputs = {args.data: content}
        lines = iter(decode_text(content).splitlines(keepends=True))

    manifest = reports.build_manifest(argv, inputs=inputs)
    out.write(reports.manifest_line(manifest) + "\n")
    for line in monitor.decision_stream(state, iter_records(lines), **options):
        out.write(reports.json_line(line) + "\n")
        out.flush()


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        with open(output, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else settings.LOG_LEVEL,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[logging.StreamHandler(sys.stderr)],
    )
    invocation = ["evidence"] + argv

    try:
        if args.command == "serve":
            import uvicorn

            uvicorn.run("app.main:app", host=args.host, port=args.port, reload=args.reload)
            return EXIT_OK
        if args.command == "monitor":
            cmd_monitor(args, invocation, sys.stdout)
            return EXIT_OK
        handlers = {"design": cmd_design, "tables": cmd_tables, "simulate": cmd_simulate,
                    "misleading": cmd_misleading}
        _emit(handlers[args.command](args, invocation), getattr(args, "output", None))
        return EXIT_OK
    except IngestionError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"])
        print(f"error: invalid {location or 'input'}: {first['msg']}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except KeyboardInterrupt:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
