"""Range analysis of orthogonal-array trial results.

For each factor ``f`` and level ``i``:

* ``level_sums[f][i]`` (R) is the sum of the objective over the rows where
  ``f`` sits at level ``i``;
* ``level_means[f][i]`` (A) divides that sum by the number of such rows,
  ``N / h``.  For ``L9(3^4)`` this equals dividing by ``h``; for larger
  arrays only ``N / h`` gives a mean;
* ``ranges[f]`` is ``max(A) - min(A)``; factors are ranked by it;
* the best level maximises (or minimises) ``A``.

The composed optimum takes every factor's best level independently, so it
need not be one of the tested rows.

Ties are resolved deterministically: values within a relative ``1e-9`` of
each other count as equal, equal means resolve to the lowest level index,
and equal ranges keep declaration order.  All arithmetic is at full
precision; rounding (3 decimals, half to even) happens only when rendering.
"""
from dataclasses import asdict, dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
import json
import math
from typing import NamedTuple

from .design import assignment_from_json, assignment_to_json, level_to_json, normalize_level
from .errors import AssignmentMismatch, MissingRows, UnknownMetric

TIE_RTOL = 1e-9
REFERENCE_TOL = 1e-3
REPORT_SCHEMA_VERSION = 1


def _close(a, b):
    return abs(a - b) <= TIE_RTOL * max(1.0, abs(a), abs(b))


@dataclass
class RangeAnalysisReport:
    factors: list
    levels: list
    entries: list
    values: list
    metric: str
    direction: str
    level_sums: list
    level_means: list
    lowest: list
    highest: list
    ranges: list
    importance: list
    best_level: list
    optimal_assignment: dict
    plan_id: str | None = None
    discrepancies: list = field(default_factory=list)

    def _index(self, factor):
        return self.factors.index(factor)

    def sums(self, factor):
        return self.level_sums[self._index(factor)]

    def means(self, factor):
        return self.level_means[self._index(factor)]

    def range_of(self, factor):
        return self.ranges[self._index(factor)]

    @property
    def grand_mean(self):
        return math.fsum(self.values) / len(self.values)

    @property
    def predicted_optimum(self):
        """Main-effects prediction at the composed optimum."""
        mu = self.grand_mean
        return mu + math.fsum(means[b - 1] - mu for means, b in zip(self.level_means, self.best_level))

    def best_row(self):
        """1-based index of the best tested row (first on ties)."""
        pick = max if self.direction == "maximize" else min
        best = pick(self.values)
        return next(i for i, v in enumerate(self.values, start=1) if _close(v, best))

    def to_dict(self):
        doc = asdict(self)
        doc["levels"] = [[level_to_json(v) for v in lv] for lv in self.levels]
        doc["optimal_assignment"] = assignment_to_json(self.optimal_assignment)
        return {"schema_version": REPORT_SCHEMA_VERSION, "kind": "range-analysis", **doc}

    @classmethod
    def from_dict(cls, doc):
        doc = dict(doc)
        doc.pop("schema_version", None)
        doc.pop("kind", None)
        doc["levels"] = [[normalize_level(v) for v in lv] for lv in doc["levels"]]
        doc["optimal_assignment"] = assignment_from_json(doc["optimal_assignment"])
        return cls(**doc)


def _best_index(means, direction):
    target = max(means) if direction == "maximize" else min(means)
    return next(i for i, m in enumerate(means) if _close(m, target))


def _rank(names, ranges):
    remaining = list(range(len(names)))
    order = []
    while remaining:
        top = max(ranges[i] for i in remaining)
        pick = next(i for i in remaining if _close(ranges[i], top))
        order.append(pick)
        remaining.remove(pick)
    return [names[i] for i in order]


def range_analysis(table, entries, values, metric="acc", plan_id=None, reference=None):
    """Core computation from level indices and one objective value per row."""
    entries = [[int(v) for v in row] for row in entries]
    values = [float(v) for v in values]
    n, k, h = len(entries), len(table), table.levels
    if len(values) != n:
        raise ValueError(f"{len(values)} values for {n} rows")
    if n % h:
        raise ValueError(f"{n} rows cannot be balanced over {h} levels")
    per_level = n // h
    sums, means = [], []
    for f in range(k):
        buckets = [[] for _ in range(h)]
        for row, y in zip(entries, values):
            buckets[row[f] - 1].append(y)
        if any(len(b) != per_level for b in buckets):
            raise ValueError(f"column {f + 1} is not balanced")
        r = [math.fsum(b) for b in buckets]
        sums.append(r)
        means.append([x / per_level for x in r])
    lowest = [min(a) for a in means]
    highest = [max(a) for a in means]
    ranges = [hi - lo for hi, lo in zip(highest, lowest)]
    best = [_best_index(a, table.direction) + 1 for a in means]
    report = RangeAnalysisReport(
        factors=table.names,
        levels=[list(f.levels) for f in table.factors],
        entries=entries,
        values=values,
        metric=metric,
        direction=table.direction,
        level_sums=sums,
        level_means=means,
        lowest=lowest,
        highest=highest,
        ranges=ranges,
        importance=_rank(table.names, ranges),
        best_level=best,
        optimal_assignment=table.assignment(best),
        plan_id=plan_id,
    )
    if reference is not None:
        report.discrepancies = check_reference(report, reference)
    return report


def analyze(plan, records, metric=None, reference=None):
    """Range analysis of one ok record per plan row.

    Raises :class:`MissingRows` if a row has no ok record and
    :class:`UnknownMetric` if ``metric`` is absent from a record.
    """
    metric = metric or plan.table.metric
    by_row = {}
    for rec in records:
        if rec.ok and rec.plan_id == plan.plan_id:
            by_row[rec.row_index] = rec
    missing = [r for r in range(1, plan.rows + 1) if r not in by_row]
    if missing:
        raise MissingRows(f"plan {plan.plan_id}: no completed trial for rows {missing}")
    values = []
    for r in range(1, plan.rows + 1):
        agg = by_row[r].aggregated
        if metric not in agg:
            raise UnknownMetric(f"row {r} has no metric {metric!r} (has {sorted(agg)})")
        values.append(agg[metric])
    return range_analysis(plan.table, plan.array.entries, values, metric, plan.plan_id, reference)


def analyze_values(plan, values, metric=None, reference=None):
    """Range analysis from a bare list of per-row objective values."""
    return range_analysis(plan.table, plan.array.entries, values, metric or plan.table.metric,
                          plan.plan_id, reference)


def check_reference(report, reference, tol=REFERENCE_TOL):
    """Compare a report with published 3-decimal values; return discrepancy notes.

    ``reference`` may hold any of ``level_sums``, ``level_means``, ``lowest``,
    ``highest``, ``ranges`` (per factor, in declaration order),
    ``importance`` (factor names) and ``best_level`` (1-based).  Published
    numbers are usually derived from already-rounded intermediates, so
    agreement means within one unit of the third decimal.
    """
    notes = []
    for key in ("level_sums", "level_means"):
        for f, rows in enumerate(reference.get(key, [])):
            for i, ref in enumerate(rows):
                got = getattr(report, key)[f][i]
                if abs(got - ref) > tol + 1e-12:
                    label = "R" if key == "level_sums" else "A"
                    notes.append(f"{report.factors[f]}: {label}_level{i + 1} computed {fmt3(got)}, "
                                 f"reference {ref:.3f}")
    for key in ("lowest", "highest", "ranges"):
        for f, ref in enumerate(reference.get(key, [])):
            got = getattr(report, key)[f]
            if abs(got - ref) > tol + 1e-12:
                notes.append(f"{report.factors[f]}: {key} computed {fmt3(got)}, reference {ref:.3f}")
    if "importance" in reference and list(reference["importance"]) != report.importance:
        notes.append(f"importance computed {' > '.join(report.importance)}, "
                     f"reference {' > '.join(reference['importance'])}")
    for f, ref in enumerate(reference.get("best_level", [])):
        if report.best_level[f] != ref:
            notes.append(f"{report.factors[f]}: best level computed {report.best_level[f]}, reference {ref}")
    return notes


def fmt3(x):
    """Three decimals, half to even on the shortest decimal repr of ``x``."""
    return str(Decimal(repr(float(x))).quantize(Decimal("0.001"), rounding=ROUND_HALF_EVEN))


def fmt_level(v):
    if isinstance(v, tuple):
        return "[" + ",".join(str(x) for x in v) + "]"
    return str(v)


class RenderedReport(NamedTuple):
    text: str
    document: str


def report_text(report, confirmed=None):
    """Human table laid out like a classic range-analysis sheet."""
    metric = report.metric
    header = ["Row No."] + report.factors + [metric]
    body = []
    for i, (row, y) in enumerate(zip(report.entries, report.values), start=1):
        body.append([str(i)] + [fmt_level(report.levels[f][lvl - 1]) for f, lvl in enumerate(row)] + [fmt3(y)])
    h = len(report.levels[0])
    stats = []
    for i in range(h):
        stats.append([f"R_level{i + 1}"] + [fmt3(s[i]) for s in report.level_sums] + [""])
    for i in range(h):
        stats.append([f"A_level{i + 1}"] + [fmt3(a[i]) for a in report.level_means] + [""])
    stats.append([f"Lowest {metric}"] + [fmt3(x) for x in report.lowest] + [""])
    stats.append([f"Highest {metric}"] + [fmt3(x) for x in report.highest] + [""])
    stats.append(["Range"] + [fmt3(x) for x in report.ranges] + [""])
    tail = [
        ["Best Level"] + [f"Level {b}" for b in report.best_level] + [""],
        ["Optimal Value"] + [fmt_level(report.optimal_assignment[f]) for f in report.factors]
        + [fmt3(confirmed) if confirmed is not None else ""],
    ]
    widths = [max(len(r[c]) for r in [header] + body + stats + tail) for c in range(len(header))]

    def line(cells):
        return "  ".join(c.rjust(w) if j else c.ljust(w) for j, (c, w) in enumerate(zip(cells, widths))).rstrip()

    rule = "-" * (sum(widths) + 2 * (len(widths) - 1))
    out = [line(header), rule] + [line(r) for r in body] + [rule] + [line(r) for r in stats]
    out.append(f"{'Importance'.ljust(widths[0])}  {' > '.join(report.importance)}")
    out += [rule] + [line(r) for r in tail]
    if report.discrepancies:
        out += ["", "Disagreements with the reference table:"] + [f"  - {d}" for d in report.discrepancies]
    return "\n".join(out) + "\n"


def report_document(report):
    return json.dumps(report.to_dict(), ensure_ascii=False, indent=1, allow_nan=False) + "\n"


def parse_report(document):
    return RangeAnalysisReport.from_dict(json.loads(document))


def render_report(report, confirmed=None):
    """Return the human table and the machine-readable JSON document."""
    return RenderedReport(report_text(report, confirmed), report_document(report))


@dataclass(frozen=True)
class ConfirmationSummary:
    metric: str
    direction: str
    confirmed: float
    predicted: float
    best_in_array: float
    best_row: int

    @property
    def exceeds(self):
        """Whether the confirmation run beats every tested row."""
        if self.direction == "maximize":
            return self.confirmed > self.best_in_array
        return self.confirmed < self.best_in_array

    @property
    def message(self):
        verdict = "optimum exceeds best tabulated row" if self.exceeds else \
            "optimum does not exceed best tabulated row"
        return (f"{verdict}: confirmed {self.metric} {fmt3(self.confirmed)} vs row {self.best_row} "
                f"{fmt3(self.best_in_array)} (main-effects prediction {fmt3(self.predicted)})")


def predicted_vs_confirmed(report, confirmation):
    if dict(confirmation.assignment) != dict(report.optimal_assignment):
        raise AssignmentMismatch(
            f"confirmation ran {confirmation.assignment}, report optimum is {report.optimal_assignment}"
        )
    if not confirmation.ok:
        raise ValueError(f"confirmation run failed: {confirmation.error}")
    if report.metric not in confirmation.aggregated:
        raise UnknownMetric(f"confirmation has no metric {report.metric!r}")
    best_row = report.best_row()
    return ConfirmationSummary(
        metric=report.metric,
        direction=report.direction,
        confirmed=confirmation.aggregated[report.metric],
        predicted=report.predicted_optimum,
        best_in_array=report.values[best_row - 1],
        best_row=best_row,
    )
