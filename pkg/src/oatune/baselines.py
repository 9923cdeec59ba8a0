"""Grid and random search over a factor-level table, and a side-by-side
comparison with orthogonal-array tuning.

Grid search walks all ``h**k`` combinations in lexicographic level order.
Random search draws ``m`` distinct combinations uniformly without
replacement.  Both reuse the trial runner, so they honour the same
objective protocol, repetitions and logging as a planned run.

Wall time in a comparison row is the summed wall time of every objective
call the method made.  Bayesian optimisation is not run here; results
obtained elsewhere can be merged in as external rows.
"""
from dataclasses import dataclass, field
import hashlib
import json
from pathlib import Path

import numpy as np

from .analysis import analyze, fmt3, fmt_level
from .arrays import full_factorial
from .design import (
    assignment_from_json,
    assignment_to_json,
    canonical_json,
    make_plan,
)
from .errors import BudgetExceeded, InvalidSampleCount, SchemaError
from .runner import TrialLog, resume_plan, run_single

DEFAULT_BUDGET = 10_000
REPORT_SCHEMA_VERSION = 1


@dataclass(frozen=True, eq=False)
class SearchPlan:
    """A list of level combinations to evaluate, shaped like a TrialPlan for the runner."""

    method: str
    table: object
    level_rows: tuple
    settings: dict | None = None
    plan_id: str = field(init=False)
    assignments: tuple = field(init=False)

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in r) for r in self.level_rows)
        object.__setattr__(self, "level_rows", rows)
        object.__setattr__(self, "assignments", tuple(self.table.assignment(r) for r in rows))
        doc = {"method": self.method, "table": self.table.to_dict(), "rows": rows, "settings": self.settings}
        object.__setattr__(self, "plan_id", hashlib.sha256(canonical_json(doc).encode()).hexdigest()[:16])

    @property
    def rows(self):
        return len(self.level_rows)


@dataclass
class ComparisonRow:
    method: str
    optimal_assignment: dict
    runnings: int
    wall_time_seconds: float
    metrics: dict

    def to_dict(self):
        return {
            "method": self.method,
            "optimal_assignment": assignment_to_json(self.optimal_assignment),
            "runnings": self.runnings,
            "wall_time_seconds": self.wall_time_seconds,
            "metrics": self.metrics,
        }

    @classmethod
    def from_dict(cls, doc, metric=None):
        try:
            row = cls(
                method=str(doc["method"]),
                optimal_assignment=assignment_from_json(doc["optimal_assignment"]),
                runnings=doc["runnings"],
                wall_time_seconds=float(doc["wall_time_seconds"]),
                metrics={k: float(v) for k, v in doc["metrics"].items()},
            )
        except (KeyError, TypeError, AttributeError, ValueError) as exc:
            raise SchemaError(f"malformed comparison row: {exc!r}") from None
        if not isinstance(row.runnings, int) or isinstance(row.runnings, bool) or row.runnings < 1:
            raise SchemaError(f"row {row.method!r}: runnings must be a positive integer")
        if metric is not None and metric not in row.metrics:
            raise SchemaError(f"row {row.method!r} lacks the objective metric {metric!r}")
        return row


@dataclass
class SearchResult:
    row: ComparisonRow
    records: list
    plan: object = None
    report: object = None
    confirmation: object = None


def _total_wall(records):
    return sum(r.wall_time_seconds or 0.0 for r in records)


def _best_record(records, metric, direction):
    """First record with the best aggregated metric, in evaluation order."""
    best = None
    for rec in records:
        y = rec.aggregated[metric]
        if best is None or (y > best.aggregated[metric] if direction == "maximize" else y < best.aggregated[metric]):
            best = rec
    return best


def _sub_log(run_dir, name, stem="trials"):
    return None if run_dir is None else TrialLog(Path(run_dir) / name, stem)


def _search(method, plan, objective, repetitions, parallelism, log, timeout, aggregate):
    table = plan.table
    records = resume_plan(plan, log, objective, repetitions, parallelism, metric=table.metric,
                          timeout=timeout, aggregate=aggregate)
    best = _best_record(records, table.metric, table.direction)
    row = ComparisonRow(method, dict(best.assignment), len(records), _total_wall(records), dict(best.aggregated))
    return SearchResult(row, records, plan)


def grid_plan(table, budget=DEFAULT_BUDGET):
    total = table.levels ** len(table)
    if budget is not None and total > budget:
        raise BudgetExceeded(f"grid search needs {total} runs, budget is {budget}")
    return SearchPlan("grid", table, full_factorial(table.levels, len(table)).entries)


def grid_search(table, objective, repetitions=1, *, budget=DEFAULT_BUDGET, parallelism=1,
                log=None, timeout=None, aggregate="mean"):
    """Evaluate every combination; the row reports the best one."""
    plan = grid_plan(table, budget)
    return _search("Grid", plan, objective, repetitions, parallelism, log, timeout, aggregate)


def _decode(index, h, k):
    digits = []
    for _ in range(k):
        index, d = divmod(index, h)
        digits.append(d + 1)
    return tuple(reversed(digits))


def random_plan(table, m, seed):
    h, k = table.levels, len(table)
    total = h**k
    if not 1 <= m <= total:
        raise InvalidSampleCount(f"sample count {m} not within 1..{total}")
    rng = np.random.default_rng(seed)
    picks = rng.choice(total, size=m, replace=False)
    return SearchPlan("random", table, [_decode(int(i), h, k) for i in picks], {"seed": int(seed)})


def random_search(table, objective, repetitions=1, m=9, seed=0, *, parallelism=1, log=None,
                  timeout=None, aggregate="mean"):
    """Evaluate ``m`` distinct combinations drawn with ``seed``."""
    plan = random_plan(table, m, seed)
    return _search("Random", plan, objective, repetitions, parallelism, log, timeout, aggregate)


def oat_search(table, objective, repetitions=1, *, parallelism=1, run_dir=None, timeout=None,
               aggregate="mean", plan=None):
    """Planned orthogonal-array run, range analysis, then one confirmation run."""
    plan = plan or make_plan(table)
    records = resume_plan(plan, _sub_log(run_dir, "oat"), objective, repetitions, parallelism,
                          metric=table.metric, timeout=timeout, aggregate=aggregate)
    report = analyze(plan, records)
    confirmation = run_single(report.optimal_assignment, objective, repetitions, plan_id=plan.plan_id,
                              metric=table.metric, timeout=timeout, aggregate=aggregate,
                              log=_sub_log(run_dir, "oat", "confirm"))
    row = ComparisonRow("OATM", dict(report.optimal_assignment), plan.rows + 1,
                        _total_wall(records) + (confirmation.wall_time_seconds or 0.0),
                        dict(confirmation.aggregated))
    return SearchResult(row, records, plan, report, confirmation)


@dataclass
class ComparisonReport:
    factors: list
    metric: str
    direction: str
    rows: list
    details: dict = field(default_factory=dict, repr=False)

    def row(self, method):
        for r in self.rows:
            if r.method == method:
                return r
        raise KeyError(method)

    def to_dict(self):
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "kind": "comparison",
            "factors": self.factors,
            "metric": self.metric,
            "direction": self.direction,
            "rows": [r.to_dict() for r in self.rows],
        }

    @classmethod
    def from_dict(cls, doc):
        return cls(doc["factors"], doc["metric"], doc["direction"],
                   [ComparisonRow.from_dict(r) for r in doc["rows"]])

    def document(self):
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=1, allow_nan=False) + "\n"

    def text(self):
        metric_names = [self.metric] + sorted({m for r in self.rows for m in r.metrics} - {self.metric})
        header = ["Method"] + self.factors + ["#-Runnings", "Time (s)"] + metric_names
        body = []
        for r in self.rows:
            body.append(
                [r.method]
                + [fmt_level(r.optimal_assignment[f]) if f in r.optimal_assignment else "-" for f in self.factors]
                + [str(r.runnings), f"{r.wall_time_seconds:.1f}"]
                + [fmt3(r.metrics[m]) if m in r.metrics else "-" for m in metric_names]
            )
        widths = [max(len(x[c]) for x in [header] + body) for c in range(len(header))]

        def line(cells):
            return "  ".join(c.rjust(w) if j else c.ljust(w) for j, (c, w) in enumerate(zip(cells, widths)))

        rule = "-" * (sum(widths) + 2 * (len(widths) - 1))
        return "\n".join([line(header), rule] + [line(b) for b in body]) + "\n"


def compare(table, objective, repetitions=1, seed=0, external_rows=None, *, budget=DEFAULT_BUDGET,
            parallelism=1, run_dir=None, timeout=None, aggregate="mean"):
    """Run OATM (array rows + confirmation), grid search and random search with ``m = N``.

    ``external_rows`` (ComparisonRow objects or their dict form) are appended
    unchanged.  With ``run_dir`` every method logs under its own
    subdirectory, so an interrupted comparison resumes, and the report is
    written to ``report.txt`` / ``report.doc``.
    """
    kw = dict(parallelism=parallelism, timeout=timeout, aggregate=aggregate)
    grid_plan(table, budget)  # fail on budget before spending any evaluations
    oat = oat_search(table, objective, repetitions, run_dir=run_dir, **kw)
    grid = grid_search(table, objective, repetitions, budget=budget, log=_sub_log(run_dir, "grid"), **kw)
    rand = random_search(table, objective, repetitions, m=oat.plan.rows, seed=seed,
                         log=_sub_log(run_dir, "random"), **kw)
    extra = [r if isinstance(r, ComparisonRow) else ComparisonRow.from_dict(r, table.metric)
             for r in (external_rows or [])]
    report = ComparisonReport(
        table.names, table.metric, table.direction,
        [grid.row, rand.row] + extra + [oat.row],
        {"OATM": oat, "Grid": grid, "Random": rand},
    )
    if run_dir is not None:
        run_dir = Path(run_dir)
        run_dir.mkdir(parents=True, exist_ok=True)
        (run_dir / "report.txt").write_text(report.text(), encoding="utf-8")
        (run_dir / "report.doc").write_text(report.document(), encoding="utf-8")
    return report


def load_external_rows(path, metric=None):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if isinstance(doc, dict):
        doc = doc.get("rows", [])
    if not isinstance(doc, list):
        raise SchemaError("external rows must be a JSON list of rows")
    return [ComparisonRow.from_dict(r, metric) for r in doc]
