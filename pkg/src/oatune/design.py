"""Factor-level tables and trial plans.

A :class:`FactorLevelTable` names the hyperparameters and lists the candidate
values of each; :func:`make_plan` binds it to an orthogonal array so that
every array row becomes one concrete assignment to try.

Config documents are JSON::

    {
      "schema_version": 1,
      "factors": [{"name": "lr", "levels": [0.005, 0.01, 0.015]}, ...],
      "objective": {"metric": "acc", "direction": "maximize"},
      "repetitions": 5,
      "command": ["oat-synth", "--spec", "table4"],
      "timeout": 600,
      "aggregate": "mean",
      "budget": 1000
    }

Only ``schema_version`` and ``factors`` are required.  Level values may be
reals, integers, strings, or integer pairs such as ``[1, 6]`` (held as
tuples in memory).
"""
from dataclasses import dataclass, field
import hashlib
import json
import math
import os
import shlex

import numpy as np

from .arrays import OrthogonalArray, construct_oa
from .errors import DuplicateFactorName, InvalidCount, SchemaError, UnequalLevelCounts

SCHEMA_VERSION = 1
DIRECTIONS = ("maximize", "minimize")
AGGREGATORS = ("mean", "median")


def normalize_level(value):
    """Validate one level value and return its in-memory form."""
    if isinstance(value, bool):
        raise SchemaError(f"boolean level values are not supported: {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            raise SchemaError(f"level value must be finite: {value!r}")
        return value
    if isinstance(value, str):
        if not value:
            raise SchemaError("string level values must be non-empty")
        return value
    if isinstance(value, (list, tuple)):
        if len(value) == 2 and all(isinstance(v, int) and not isinstance(v, bool) for v in value):
            return tuple(value)
    raise SchemaError(f"unsupported level value {value!r}")


def level_to_json(value):
    return list(value) if isinstance(value, tuple) else value


def assignment_to_json(assignment):
    return {k: level_to_json(v) for k, v in assignment.items()}


def assignment_from_json(doc):
    return {k: normalize_level(v) for k, v in doc.items()}


def canonical_json(doc):
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False)


@dataclass(frozen=True)
class FactorSpec:
    name: str
    levels: tuple

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name.strip():
            raise SchemaError("factor names must be non-empty strings")
        levels = tuple(normalize_level(v) for v in self.levels)
        for i, a in enumerate(levels):
            for b in levels[i + 1:]:
                if a == b:
                    raise SchemaError(f"factor {self.name!r} repeats level value {a!r}")
        object.__setattr__(self, "levels", levels)

    def index_of(self, value):
        """1-based level index of ``value``, or ``None``."""
        value = normalize_level(value)
        for i, v in enumerate(self.levels, start=1):
            if v == value:
                return i
        return None


@dataclass(frozen=True)
class FactorLevelTable:
    factors: tuple
    direction: str = "maximize"
    metric: str = "acc"

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise SchemaError("a factor-level table needs at least one factor")
        names = [f.name for f in factors]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise DuplicateFactorName(f"duplicate factor names: {', '.join(dupes)}")
        counts = {f.name: len(f.levels) for f in factors}
        if len(set(counts.values())) != 1:
            raise UnequalLevelCounts(f"all factors need the same number of levels, got {counts}")
        if len(factors[0].levels) < 2:
            raise SchemaError("factors need at least two levels")
        if self.direction not in DIRECTIONS:
            raise SchemaError(f"direction must be one of {DIRECTIONS}, got {self.direction!r}")
        if not isinstance(self.metric, str) or not self.metric:
            raise SchemaError("objective metric must be a non-empty string")
        object.__setattr__(self, "factors", factors)

    @property
    def levels(self):
        return len(self.factors[0].levels)

    @property
    def names(self):
        return [f.name for f in self.factors]

    def __len__(self):
        return len(self.factors)

    def factor(self, name):
        for f in self.factors:
            if f.name == name:
                return f
        raise KeyError(name)

    def assignment(self, level_indices):
        """Map 1-based level indices (one per factor) to concrete values."""
        return {f.name: f.levels[int(i) - 1] for f, i in zip(self.factors, level_indices)}

    def level_indices(self, assignment):
        out = []
        for f in self.factors:
            if f.name not in assignment:
                raise KeyError(f"assignment has no value for factor {f.name!r}")
            idx = f.index_of(assignment[f.name])
            if idx is None:
                raise ValueError(f"{assignment[f.name]!r} is not a level of {f.name!r}")
            out.append(idx)
        return tuple(out)

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "factors": [{"name": f.name, "levels": [level_to_json(v) for v in f.levels]} for f in self.factors],
            "objective": {"metric": self.metric, "direction": self.direction},
        }


@dataclass(frozen=True)
class TuningConfig:
    """A parsed config document: the table plus run settings."""

    table: FactorLevelTable
    repetitions: int = 1
    command: tuple | None = None
    timeout: float | None = None
    aggregate: str = "mean"
    budget: int | None = None

    def to_dict(self):
        doc = self.table.to_dict()
        doc["repetitions"] = self.repetitions
        if self.command is not None:
            doc["command"] = list(self.command)
        if self.timeout is not None:
            doc["timeout"] = self.timeout
        doc["aggregate"] = self.aggregate
        if self.budget is not None:
            doc["budget"] = self.budget
        return doc

    def run_settings(self):
        """Settings that change what a trial log means, for the plan hash."""
        return {"repetitions": self.repetitions, "aggregate": self.aggregate,
                "command": list(self.command) if self.command else None}


def _require(cond, msg):
    if not cond:
        raise SchemaError(msg)


def _positive_int(doc, key, default):
    value = doc.get(key, default)
    if value is None:
        return None
    _require(isinstance(value, int) and not isinstance(value, bool) and value >= 1,
             f"{key!r} must be a positive integer, got {value!r}")
    return value


def load_config(config):
    """Parse a config document (mapping, JSON text, or path) into a :class:`TuningConfig`."""
    text = None
    if isinstance(config, str) and config.lstrip().startswith("{"):
        text = config
    elif isinstance(config, (str, os.PathLike)):
        with open(config, encoding="utf-8") as fh:
            text = fh.read()
    if text is not None:
        try:
            config = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"config is not valid JSON: {exc}") from None
    _require(isinstance(config, dict), "config must be a JSON object")
    known = {"schema_version", "factors", "objective", "repetitions", "command",
             "timeout", "aggregate", "budget"}
    extra = sorted(set(config) - known)
    _require(not extra, f"unknown config fields: {', '.join(extra)}")
    _require(config.get("schema_version") == SCHEMA_VERSION,
             f"schema_version must be {SCHEMA_VERSION}, got {config.get('schema_version')!r}")

    factors = config.get("factors")
    _require(isinstance(factors, list) and factors, "'factors' must be a non-empty list")
    specs = []
    for i, f in enumerate(factors):
        _require(isinstance(f, dict) and set(f) == {"name", "levels"},
                 f"factor #{i + 1} must have exactly 'name' and 'levels'")
        _require(isinstance(f["levels"], list), f"factor #{i + 1}: 'levels' must be a list")
        specs.append(FactorSpec(f["name"], tuple(f["levels"])))

    objective = config.get("objective", {})
    _require(isinstance(objective, dict) and set(objective) <= {"metric", "direction"},
             "'objective' must be an object with 'metric' and/or 'direction'")
    table = FactorLevelTable(tuple(specs), objective.get("direction", "maximize"),
                             objective.get("metric", "acc"))

    command = config.get("command")
    if isinstance(command, str):
        command = shlex.split(command)
    if command is not None:
        _require(isinstance(command, list) and command and all(isinstance(c, str) for c in command),
                 "'command' must be a non-empty list of strings or a shell-style string")
        command = tuple(command)
    timeout = config.get("timeout")
    if timeout is not None:
        _require(isinstance(timeout, (int, float)) and not isinstance(timeout, bool) and timeout > 0,
                 f"'timeout' must be a positive number, got {timeout!r}")
    aggregate = config.get("aggregate", "mean")
    _require(aggregate in AGGREGATORS, f"'aggregate' must be one of {AGGREGATORS}")
    return TuningConfig(
        table=table,
        repetitions=_positive_int(config, "repetitions", 1),
        command=command,
        timeout=timeout,
        aggregate=aggregate,
        budget=_positive_int(config, "budget", None),
    )


def load_table(config):
    return load_config(config).table


@dataclass(frozen=True, eq=False)
class TrialPlan:
    """An orthogonal array bound to a factor-level table.

    ``assignments[r]`` is the concrete hyperparameter setting for array row
    ``r + 1``.  ``plan_id`` hashes the canonical table, the array entries and
    any run settings, so a trial log can be matched to the plan it came from.
    """

    array: OrthogonalArray
    table: FactorLevelTable
    settings: dict | None = None
    plan_id: str = field(init=False)
    assignments: tuple = field(init=False)

    def __post_init__(self):
        if self.array.factors != len(self.table):
            raise ValueError(f"array has {self.array.factors} columns for {len(self.table)} factors")
        if self.array.levels != self.table.levels:
            raise ValueError(f"array has {self.array.levels} levels, table has {self.table.levels}")
        object.__setattr__(self, "assignments",
                           tuple(self.table.assignment(row) for row in self.array.entries))
        object.__setattr__(self, "plan_id", compute_plan_id(self.table, self.array.entries, self.settings))

    @property
    def rows(self):
        return self.array.rows

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "plan_id": self.plan_id,
            "table": self.table.to_dict(),
            "settings": self.settings,
            "array": {"name": self.array.name, "levels": self.array.levels,
                      "entries": self.array.entries.tolist()},
            "assignments": [assignment_to_json(a) for a in self.assignments],
        }

    @classmethod
    def from_dict(cls, doc):
        table = load_table(doc["table"])
        array = OrthogonalArray(np.array(doc["array"]["entries"]), doc["array"]["levels"])
        plan = cls(array, table, doc.get("settings"))
        if doc.get("plan_id") not in (None, plan.plan_id):
            raise SchemaError(f"plan file is corrupt: stored id {doc['plan_id']} != {plan.plan_id}")
        return plan


def compute_plan_id(table, entries, settings=None):
    doc = {"table": table.to_dict(), "entries": np.asarray(entries).tolist(), "settings": settings}
    return hashlib.sha256(canonical_json(doc).encode("utf-8")).hexdigest()[:16]


def make_plan(table, settings=None, array=None):
    """Bind ``table`` to ``L_{h^2}(h^k)`` (or the smallest larger construction).

    Pass ``array`` to use a specific orthogonal array instead, e.g. a catalog
    entry restricted to ``k`` columns.
    """
    if array is None:
        array = construct_oa(table.levels, len(table))
    return TrialPlan(array, table, settings)


def savings_fraction(n, h, k):
    """Fraction of the full ``h**k`` grid that an ``n``-run design skips."""
    total = h**k
    if n < 1 or n > total:
        raise InvalidCount(f"{n} runs is not within 1..{total} = {h}^{k}")
    return 1.0 - n / total
