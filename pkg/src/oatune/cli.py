"""``oat``: plan, run, analyze and confirm an orthogonal-array tuning run.

One subcommand per tuning step::

    oat plan    --config tune.json          # steps 1-2: table + array -> runs/<plan_id>/
    oat run     --run-dir runs/<plan_id>    # step 3: execute (resumes if interrupted)
    oat analyze --run-dir runs/<plan_id>    # step 4: range analysis -> report.txt/.doc
    oat confirm --run-dir runs/<plan_id>    # step 5: run the composed optimum
    oat compare --config tune.json          # OATM vs grid vs random
    oat tables  [FILTER]                    # list available arrays

Exit codes: 0 ok, 2 config error, 3 objective failure, 4 incomplete data,
5 budget exceeded.
"""
import argparse
import dataclasses
import hashlib
import json
import logging
from pathlib import Path
import sys

from . import arrays
from .analysis import analyze, predicted_vs_confirmed, render_report
from .baselines import DEFAULT_BUDGET, compare, load_external_rows
from .design import TrialPlan, canonical_json, load_config, make_plan, savings_fraction
from .errors import OATError, PlanMismatch, SchemaError
from .runner import CommandObjective, TrialLog, resume_plan, run_single

CONSTRUCTIBLE_LEVELS = (2, 3, 4, 5, 7, 8, 9)


def _listing():
    seen = {}
    for name, a in sorted(arrays.catalog().items(), key=lambda kv: (kv[1].levels, kv[1].rows)):
        seen[name] = (a, "catalog")
    for h in CONSTRUCTIBLE_LEVELS:
        for t in (2, 3):
            if h**t > 125:
                continue
            k = arrays.max_factors(h, t)
            name = f"L{h**t}({h}^{k})"
            seen.setdefault(name, (None, "constructed"))
    out = []
    for name, (a, source) in seen.items():
        n, h, k = arrays.parse_name(name)
        grid = h**k
        grid_text = f"{grid}" if grid < 10**7 else f"{grid:.2e}"
        line = f"{name:<12} {source:<11} saves {_percent(savings_fraction(n, h, k))} vs {grid_text}-run grid"
        out.append((h, n, line))
    return [line for *_, line in sorted(out)]


def _percent(x):
    # widen until the figure no longer rounds up to 100%
    for digits in range(1, 5):
        text = f"{x:.{digits}%}"
        if not text.startswith("100"):
            return text
    return ">99.9999%"


def cmd_tables(args):
    pattern = (args.filter or "").lower()
    for line in _listing():
        if pattern in line.lower():
            print(line)
    return 0


def _load_run(run_dir):
    run_dir = Path(run_dir)
    try:
        config = load_config(run_dir / "config.json")
        plan = TrialPlan.from_dict(json.loads((run_dir / "plan.json").read_text(encoding="utf-8")))
    except FileNotFoundError as exc:
        raise SchemaError(f"{run_dir} is not a planned run directory ({exc.filename} missing)") from None
    return config, plan


def _objective(config):
    if not config.command:
        raise SchemaError("config has no 'command' for the objective")
    return CommandObjective(config.command)


def cmd_plan(args):
    config = load_config(args.config)
    if args.repetitions:
        config = dataclasses.replace(config, repetitions=args.repetitions)
    plan = make_plan(config.table, config.run_settings())
    run_dir = Path(args.run_dir or Path("runs") / plan.plan_id)
    plan_file = run_dir / "plan.json"
    if plan_file.exists():
        old = json.loads(plan_file.read_text(encoding="utf-8"))
        if old.get("plan_id") != plan.plan_id:
            raise PlanMismatch(f"{run_dir} already holds plan {old.get('plan_id')}, not {plan.plan_id}")
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "config.json").write_text(json.dumps(config.to_dict(), ensure_ascii=False, indent=1) + "\n",
                                         encoding="utf-8")
    plan_file.write_text(json.dumps(plan.to_dict(), ensure_ascii=False, indent=1) + "\n", encoding="utf-8")
    print(f"plan {plan.plan_id}: {plan.array.name}, {plan.rows} trials x {config.repetitions} repetitions")
    for i, a in enumerate(plan.assignments, start=1):
        print(f"  {i:>3}  " + ", ".join(f"{k}={v}" for k, v in a.items()))
    print(f"run dir: {run_dir}")
    return 0


def cmd_run(args):
    config, plan = _load_run(args.run_dir)
    records = resume_plan(plan, TrialLog(args.run_dir), _objective(config), config.repetitions,
                          args.parallelism, timeout=config.timeout, aggregate=config.aggregate)
    print(f"{len(records)} of {plan.rows} trials complete in {args.run_dir}")
    return 0


def _analysis(args):
    config, plan = _load_run(args.run_dir)
    report = analyze(plan, TrialLog(args.run_dir).records(), getattr(args, "metric", None))
    return config, plan, report


def _write_report(run_dir, report, confirmed=None):
    rendered = render_report(report, confirmed)
    (Path(run_dir) / "report.txt").write_text(rendered.text, encoding="utf-8")
    (Path(run_dir) / "report.doc").write_text(rendered.document, encoding="utf-8")
    return rendered


def cmd_analyze(args):
    _, _, report = _analysis(args)
    rendered = _write_report(args.run_dir, report)
    print(rendered.text, end="")
    print(f"\nnext: oat confirm --run-dir {args.run_dir}")
    return 0


def cmd_confirm(args):
    config, plan, report = _analysis(args)
    record = run_single(report.optimal_assignment, _objective(config), config.repetitions,
                        plan_id=plan.plan_id, metric=report.metric, timeout=config.timeout,
                        aggregate=config.aggregate, log=TrialLog(args.run_dir, "confirm"))
    summary = predicted_vs_confirmed(report, record)
    _write_report(args.run_dir, report, summary.confirmed)
    print(summary.message)
    return 0


def cmd_compare(args):
    config = load_config(args.config)
    repetitions = args.repetitions or config.repetitions
    budget = args.budget or config.budget or DEFAULT_BUDGET
    external = load_external_rows(args.external, config.table.metric) if args.external else None
    key = canonical_json({"config": config.to_dict(), "seed": args.seed, "repetitions": repetitions})
    run_dir = Path(args.run_dir or Path("runs") / ("compare-" + hashlib.sha256(key.encode()).hexdigest()[:16]))
    report = compare(config.table, _objective(config), repetitions, args.seed, external, budget=budget,
                     parallelism=args.parallelism, run_dir=run_dir, timeout=config.timeout,
                     aggregate=config.aggregate)
    print(report.text(), end="")
    print(f"\nreport: {run_dir / 'report.txt'}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="oat", description="Orthogonal-array hyperparameter tuning.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tables", help="list catalog and constructible arrays")
    p.add_argument("filter", nargs="?", default="")
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("plan", help="build the trial plan from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--run-dir")
    p.add_argument("--repetitions", type=int)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("run", help="execute (or resume) the planned trials")
    p.add_argument("--run-dir", required=True)
    p.add_argument("--parallelism", type=int, default=1)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("analyze", help="range analysis of completed trials")
    p.add_argument("--run-dir", required=True)
    p.add_argument("--metric")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("confirm", help="run the composed optimum once")
    p.add_argument("--run-dir", required=True)
    p.set_defaults(func=cmd_confirm)

    p = sub.add_parser("compare", help="compare with grid and random search")
    p.add_argument("--config", required=True)
    p.add_argument("--run-dir")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int)
    p.add_argument("--repetitions", type=int)
    p.add_argument("--parallelism", type=int, default=1)
    p.add_argument("--external", help="JSON file of extra comparison rows (e.g. a BO run)")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "parallelism", 1) < 1 or (getattr(args, "repetitions", None) or 1) < 1:
        print("oat: --parallelism and --repetitions must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except OATError as exc:
        print(f"oat: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
