"""Deterministic synthetic objectives.

They stand in for real training runs so the whole tuning pipeline can be
exercised quickly.  A spec scores an assignment as::

    offset + sum_f effects[f][level_f] + matching interaction bonuses (+ noise)

unless the assignment's level indices appear in ``lookup``, which then
gives the value verbatim.  Noise is drawn from a generator seeded with the
trial seed, so a given (spec, assignment, seed) always scores the same.

The same specs run out-of-process through the ``oat-synth`` executable,
which speaks the trial protocol of :mod:`oatune.runner`::

    oat-synth --spec spec.json        # or OAT_SYNTH_SPEC=spec.json
    oat-synth --spec table4           # built-in fit to the RNN case study
"""
import argparse
from dataclasses import dataclass, field
import json
import math
import os
import sys

import numpy as np

from .analysis import range_analysis
from .arrays import construct_oa
from .design import FactorLevelTable, FactorSpec, level_to_json, load_table
from .errors import SchemaError, UnknownLevel

KINDS = ("additive", "additive-plus-interaction", "noisy")


@dataclass(frozen=True)
class Interaction:
    factors: tuple
    levels: tuple
    bonus: float


@dataclass(frozen=True)
class SyntheticSpec:
    table: FactorLevelTable
    effects: tuple
    kind: str = "additive"
    interactions: tuple = ()
    noise_sigma: float = 0.0
    offset: float = 0.0
    lookup: dict = field(default_factory=dict)
    metric: str = "acc"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"kind must be one of {KINDS}, got {self.kind!r}")
        effects = tuple(tuple(float(x) for x in e) for e in self.effects)
        if len(effects) != len(self.table) or any(len(e) != self.table.levels for e in effects):
            raise SchemaError("effects need one value per level of every factor")
        object.__setattr__(self, "effects", effects)
        if self.interactions and self.kind == "additive":
            raise SchemaError("additive specs cannot carry interaction terms")
        if self.noise_sigma < 0 or (self.noise_sigma and self.kind != "noisy"):
            raise SchemaError("noise_sigma must be >= 0 and is only used by noisy specs")
        names = self.table.names
        for term in self.interactions:
            if len(term.factors) != 2 or any(f not in names for f in term.factors):
                raise SchemaError(f"interaction {term} must name two known factors")

    def level_indices(self, assignment):
        out = []
        for f in self.table.factors:
            if f.name not in assignment:
                raise UnknownLevel(f"assignment has no value for factor {f.name!r}")
            try:
                idx = f.index_of(assignment[f.name])
            except SchemaError:
                idx = None
            if idx is None:
                raise UnknownLevel(f"{assignment[f.name]!r} is not a level of {f.name!r}")
            out.append(idx)
        return tuple(out)

    def mean_value(self, levels):
        """Noise-free value at 1-based level indices."""
        if levels in self.lookup:
            return self.lookup[levels]
        total = [self.offset] + [e[i - 1] for e, i in zip(self.effects, levels)]
        names = self.table.names
        for term in self.interactions:
            a, b = (names.index(f) for f in term.factors)
            if (levels[a], levels[b]) == tuple(term.levels):
                total.append(term.bonus)
        return math.fsum(total)

    def argbest(self):
        """Per-factor best levels of the additive part and the value there."""
        pick = np.argmax if self.table.direction == "maximize" else np.argmin
        levels = tuple(int(pick(e)) + 1 for e in self.effects)
        return levels, self.mean_value(levels)

    def to_dict(self):
        doc = {
            "kind": self.kind,
            "metric": self.metric,
            "offset": self.offset,
            "factors": [
                {"name": f.name, "levels": [level_to_json(v) for v in f.levels], "effects": list(e)}
                for f, e in zip(self.table.factors, self.effects)
            ],
            "direction": self.table.direction,
        }
        if self.interactions:
            doc["interactions"] = [{"factors": list(t.factors), "levels": list(t.levels), "bonus": t.bonus}
                                   for t in self.interactions]
        if self.noise_sigma:
            doc["noise_sigma"] = self.noise_sigma
        if self.lookup:
            doc["lookup"] = [{"levels": list(k), "value": v} for k, v in self.lookup.items()]
        return doc

    @classmethod
    def from_dict(cls, doc):
        try:
            table = FactorLevelTable(
                tuple(FactorSpec(f["name"], tuple(f["levels"])) for f in doc["factors"]),
                doc.get("direction", "maximize"),
                doc.get("metric", "acc"),
            )
            return cls(
                table=table,
                effects=tuple(f["effects"] for f in doc["factors"]),
                kind=doc.get("kind", "additive"),
                interactions=tuple(Interaction(tuple(t["factors"]), tuple(t["levels"]), float(t["bonus"]))
                                   for t in doc.get("interactions", [])),
                noise_sigma=float(doc.get("noise_sigma", 0.0)),
                offset=float(doc.get("offset", 0.0)),
                lookup={tuple(e["levels"]): float(e["value"]) for e in doc.get("lookup", [])},
                metric=doc.get("metric", "acc"),
            )
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"malformed synthetic spec: {exc!r}") from None


def eval_synthetic(spec, assignment, seed=None):
    """Score ``assignment``; returns ``{spec.metric: value}``."""
    value = spec.mean_value(spec.level_indices(assignment))
    if spec.kind == "noisy" and spec.noise_sigma > 0:
        if seed is None:
            raise ValueError("noisy synthetic objectives need a seed")
        value += float(np.random.default_rng(seed).normal(0.0, spec.noise_sigma))
    return {spec.metric: value}


class SyntheticObjective:
    """In-process objective: ``objective(request) -> metrics``."""

    def __init__(self, spec):
        self.spec = spec
        self.calls = 0

    def __call__(self, request):
        self.calls += 1
        return eval_synthetic(self.spec, request.assignment, request.seed)


def random_additive_spec(table, rng, low=0.0, high=1.0):
    """Additive spec with effects drawn uniformly from ``[low, high)``."""
    effects = rng.uniform(low, high, size=(len(table), table.levels))
    return SyntheticSpec(table, tuple(map(tuple, effects)))


def fit_to_table4():
    """Lookup objective reproducing the nine RNN case-study accuracies.

    The nine L9(3^4) rows return the measured accuracies exactly.  Every other
    combination gets the additive main-effects fit ``mean + sum_f (A_f - mean)``
    built from the range-analysis level means; those values are synthetic
    extrapolations and can leave [0, 1].
    """
    from .casestudy import RNN_ACCURACY, RNN_TABLE

    array = construct_oa(RNN_TABLE.levels, len(RNN_TABLE))
    report = range_analysis(RNN_TABLE, array.entries, RNN_ACCURACY)
    mu = report.grand_mean
    effects = tuple(tuple(a - mu for a in means) for means in report.level_means)
    lookup = {tuple(int(v) for v in row): y for row, y in zip(array.entries, RNN_ACCURACY)}
    return SyntheticSpec(RNN_TABLE, effects, offset=mu, lookup=lookup)


BUILTIN_SPECS = {"table4": fit_to_table4}


def load_spec(source):
    """A built-in name, a path to a JSON spec, or a JSON string."""
    if source in BUILTIN_SPECS:
        return BUILTIN_SPECS[source]()
    if source.lstrip().startswith("{"):
        return SyntheticSpec.from_dict(json.loads(source))
    with open(source, encoding="utf-8") as fh:
        return SyntheticSpec.from_dict(json.load(fh))


def main(argv=None):
    parser = argparse.ArgumentParser(prog="oat-synth", description="Synthetic objective child process.")
    parser.add_argument("--spec", default=os.environ.get("OAT_SYNTH_SPEC"),
                        help="built-in name (table4), JSON file, or inline JSON; default $OAT_SYNTH_SPEC")
    args = parser.parse_args(argv)
    if not args.spec:
        parser.error("no spec given (use --spec or OAT_SYNTH_SPEC)")
    from .runner import TrialRequest

    try:
        spec = load_spec(args.spec)
        line = sys.stdin.readline()
        request = TrialRequest.from_json(line)
        metrics = eval_synthetic(spec, request.assignment, request.seed)
    except (SchemaError, UnknownLevel, ValueError, KeyError, OSError) as exc:
        print(f"oat-synth: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(metrics))
    return 0


if __name__ == "__main__":
    sys.exit(main())
