"""Execute planned trials against a black-box objective.

Objective protocol
------------------
A command objective is started once per (row, repetition).  It receives one
UTF-8 JSON line on stdin::

    {"assignment": {...}, "row_index": 4, "repetition_index": 2, "seed": 123}

and the same values in ``OAT_ROW``, ``OAT_REP`` and ``OAT_SEED``.  The last
non-empty line it prints must be a JSON object of metric name -> number.
Exit status 0 means success.

Any Python callable taking a :class:`TrialRequest` and returning such a
mapping can stand in for a command, which is how the synthetic objectives
run in-process.

Trial log
---------
``<run-dir>/trials.log`` is append-only, one JSON record per line, written
in row order by a single writer.  It holds only deterministic content, so
replaying a deterministic objective reproduces it byte for byte.  Wall
times live next to it in ``trials.timings.log``, keyed by a digest of the
record line they belong to.
"""
from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from dataclasses import dataclass, field
import hashlib
import json
import logging
import math
import os
from pathlib import Path
import statistics
import subprocess
import time

from .design import assignment_from_json, assignment_to_json
from .errors import (
    ObjectiveError,
    ObjectiveFailure,
    ObjectiveProtocolError,
    PlanMismatch,
    TrialTimeout,
)

logger = logging.getLogger(__name__)

CONFIRM_ROW = 0


def trial_seed(plan_id, row_index, repetition_index):
    """Stable 64-bit seed for one repetition of one row."""
    digest = hashlib.sha256(f"{plan_id}:{row_index}:{repetition_index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class TrialRequest:
    assignment: dict
    row_index: int
    repetition_index: int
    seed: int

    def to_json(self):
        return json.dumps(
            {
                "assignment": assignment_to_json(self.assignment),
                "row_index": self.row_index,
                "repetition_index": self.repetition_index,
                "seed": self.seed,
            },
            ensure_ascii=False,
            separators=(",", ":"),
        )

    @classmethod
    def from_json(cls, line):
        doc = json.loads(line)
        return cls(assignment_from_json(doc["assignment"]), int(doc["row_index"]),
                   int(doc["repetition_index"]), int(doc["seed"]))


def _where(request):
    return f"row {request.row_index}, repetition {request.repetition_index}"


def check_metrics(raw, metric, request):
    """Validate an objective's output mapping and return it as floats."""
    if not isinstance(raw, dict) or not raw:
        raise ObjectiveProtocolError(f"{_where(request)}: expected a non-empty metric object, got {raw!r}")
    out = {}
    for name, value in raw.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ObjectiveProtocolError(f"{_where(request)}: metric {name!r} is not numeric: {value!r}")
        value = float(value)
        if not math.isfinite(value):
            raise ObjectiveProtocolError(f"{_where(request)}: metric {name!r} is not finite: {value!r}")
        out[str(name)] = value
    if metric is not None and metric not in out:
        raise ObjectiveProtocolError(f"{_where(request)}: objective metric {metric!r} missing from {sorted(out)}")
    return out


class CommandObjective:
    """Run an external command per trial repetition (see module docstring)."""

    accepts_timeout = True

    def __init__(self, command, env=None, cwd=None):
        if isinstance(command, str):
            command = [command]
        self.command = list(command)
        self.env = dict(env or {})
        self.cwd = cwd

    def __call__(self, request, timeout=None):
        env = dict(os.environ)
        env.update(self.env)
        env.update(OAT_SEED=str(request.seed), OAT_ROW=str(request.row_index),
                   OAT_REP=str(request.repetition_index))
        try:
            proc = subprocess.run(
                self.command,
                input=request.to_json() + "\n",
                capture_output=True,
                encoding="utf-8",
                env=env,
                cwd=self.cwd,
                timeout=timeout,
            )
        except subprocess.TimeoutExpired:
            raise TrialTimeout(f"{_where(request)}: objective exceeded {timeout:.3g} s") from None
        except OSError as exc:
            raise ObjectiveFailure(f"{_where(request)}: cannot start {self.command[0]!r}: {exc}") from None
        if proc.returncode != 0:
            tail = proc.stderr.strip().splitlines()[-3:]
            raise ObjectiveFailure(
                f"{_where(request)}: objective exited with status {proc.returncode}"
                + (": " + " | ".join(tail) if tail else "")
            )
        lines = [ln for ln in proc.stdout.splitlines() if ln.strip()]
        if not lines:
            raise ObjectiveProtocolError(f"{_where(request)}: objective printed nothing")
        try:
            return json.loads(lines[-1])
        except json.JSONDecodeError:
            raise ObjectiveProtocolError(
                f"{_where(request)}: last output line is not JSON: {lines[-1][:200]!r}"
            ) from None

    def __repr__(self):
        return f"CommandObjective({self.command!r})"


@dataclass
class TrialRecord:
    plan_id: str
    row_index: int
    assignment: dict
    repetitions: list
    aggregated: dict
    wall_time_seconds: float | None = None
    status: str = "ok"
    error: str | None = None

    @property
    def ok(self):
        return self.status == "ok"

    def value(self, metric):
        return self.aggregated[metric]

    def to_line(self):
        """The deterministic part of the record as one JSON line (no newline)."""
        doc = {
            "plan_id": self.plan_id,
            "row_index": self.row_index,
            "status": self.status,
            "assignment": assignment_to_json(self.assignment),
            "repetitions": self.repetitions,
            "aggregated": self.aggregated,
        }
        if self.error is not None:
            doc["error"] = self.error
        return json.dumps(doc, ensure_ascii=False, separators=(",", ":"), allow_nan=False)

    @classmethod
    def from_line(cls, line, wall_time_seconds=None):
        doc = json.loads(line)
        return cls(
            plan_id=doc["plan_id"],
            row_index=doc["row_index"],
            assignment=assignment_from_json(doc["assignment"]),
            repetitions=doc["repetitions"],
            aggregated=doc["aggregated"],
            wall_time_seconds=wall_time_seconds,
            status=doc["status"],
            error=doc.get("error"),
        )


def aggregate_metrics(repetitions, how="mean"):
    """Combine per-repetition metric maps; only metrics present in every repetition survive."""
    if not repetitions:
        return {}
    names = [m for m in repetitions[0] if all(m in r for r in repetitions)]
    if how == "mean":
        return {m: math.fsum(r[m] for r in repetitions) / len(repetitions) for m in names}
    if how == "median":
        return {m: float(statistics.median(r[m] for r in repetitions)) for m in names}
    raise ValueError(f"unknown aggregator {how!r}")


def _line_digest(line):
    return hashlib.sha256(line.encode("utf-8")).hexdigest()[:16]


class TrialLog:
    """Append-only record file plus its wall-time sidecar inside ``directory``."""

    def __init__(self, directory, stem="trials"):
        self.directory = Path(directory)
        self.path = self.directory / f"{stem}.log"
        self.timings_path = self.directory / f"{stem}.timings.log"

    @staticmethod
    def _complete_lines(path):
        if not path.exists():
            return []
        data = path.read_bytes().decode("utf-8")
        lines = data.split("\n")
        # a trailing fragment without newline is a torn write
        return [ln for ln in lines[:-1] if ln.strip()]

    @staticmethod
    def _repair(path):
        if path.exists():
            data = path.read_bytes()
            if data and not data.endswith(b"\n"):
                with open(path, "r+b") as fh:
                    fh.truncate(data.rfind(b"\n") + 1)

    def lines(self):
        return self._complete_lines(self.path)

    def records(self):
        timings = {}
        for ln in self._complete_lines(self.timings_path):
            doc = json.loads(ln)
            timings.setdefault(doc["digest"], []).append(doc["wall_time_seconds"])
        out = []
        for ln in self.lines():
            queue = timings.get(_line_digest(ln))
            out.append(TrialRecord.from_line(ln, queue.pop(0) if queue else None))
        return out

    def append(self, record):
        self.directory.mkdir(parents=True, exist_ok=True)
        self._repair(self.path)
        self._repair(self.timings_path)
        line = record.to_line()
        for path, text in (
            (self.path, line),
            (self.timings_path, json.dumps({"row_index": record.row_index, "digest": _line_digest(line),
                                            "wall_time_seconds": record.wall_time_seconds})),
        ):
            with open(path, "a", encoding="utf-8", newline="\n") as fh:
                fh.write(text + "\n")
                fh.flush()
                os.fsync(fh.fileno())

    def __len__(self):
        return len(self.lines())


def _as_log(log):
    if log is None or isinstance(log, TrialLog):
        return log
    return TrialLog(log)


@dataclass
class Executor:
    """Runs trials for one plan id; shared by plan, confirmation and baseline runs."""

    plan_id: str
    objective: object
    repetitions: int = 1
    parallelism: int = 1
    metric: str | None = None
    timeout: float | None = None
    aggregate: str = "mean"
    log: TrialLog | None = None
    executed: list = field(default_factory=list)

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")

    def _call(self, request, remaining):
        if getattr(self.objective, "accepts_timeout", False):
            return self.objective(request, timeout=remaining)
        raw = self.objective(request)
        if remaining is not None and remaining < 0:
            raise TrialTimeout(f"{_where(request)}: trial exceeded its {self.timeout:.3g} s limit")
        return raw

    def execute(self, row_index, assignment):
        """Run every repetition of one trial; returns ``(record, error)``."""
        reps, wall = [], 0.0
        start = time.perf_counter()
        for rep in range(1, self.repetitions + 1):
            request = TrialRequest(assignment, row_index, rep, trial_seed(self.plan_id, row_index, rep))
            t0 = time.perf_counter()
            try:
                remaining = None if self.timeout is None else self.timeout - (t0 - start)
                if remaining is not None and remaining <= 0:
                    raise TrialTimeout(f"{_where(request)}: trial exceeded its {self.timeout:.3g} s limit")
                raw = self._call(request, remaining)
                if remaining is not None and time.perf_counter() - start > self.timeout:
                    raise TrialTimeout(f"{_where(request)}: trial exceeded its {self.timeout:.3g} s limit")
                reps.append(check_metrics(raw, self.metric, request))
            except ObjectiveError as exc:
                wall += time.perf_counter() - t0
                return self._record(row_index, assignment, reps, wall, exc), exc
            except Exception as exc:
                wall += time.perf_counter() - t0
                err = ObjectiveFailure(f"{_where(request)}: objective raised {type(exc).__name__}: {exc}")
                return self._record(row_index, assignment, reps, wall, err), err
            wall += time.perf_counter() - t0
        return self._record(row_index, assignment, reps, wall, None), None

    def _record(self, row_index, assignment, reps, wall, error):
        record = TrialRecord(
            plan_id=self.plan_id,
            row_index=row_index,
            assignment=dict(assignment),
            repetitions=reps,
            aggregated=aggregate_metrics(reps, self.aggregate) if error is None else {},
            wall_time_seconds=wall,
            status="ok" if error is None else "failed",
            error=None if error is None else str(error),
        )
        if error is not None:
            error.record = record
        return record

    def run(self, todo):
        """Execute ``(row_index, assignment)`` pairs; records come back in input order.

        Workers run up to ``parallelism`` trials at once.  This thread is the
        only writer and appends records to the log strictly in input order, so
        the log never depends on completion order.  The first failure stops
        new submissions; trials already running finish and are logged, then
        the failure is raised.
        """
        todo = list(todo)
        results = {}
        written = 0
        error = None

        def flush(upto):
            nonlocal written
            while written < upto and written in results:
                if self.log is not None:
                    self.log.append(results[written])
                written += 1

        with ThreadPoolExecutor(max_workers=self.parallelism) as pool:
            pending = {}
            queue = iter(enumerate(todo))

            def submit():
                nxt = next(queue, None)
                if nxt is not None:
                    pos, (row, assignment) = nxt
                    pending[pool.submit(self.execute, row, assignment)] = pos

            for _ in range(self.parallelism):
                submit()
            while pending:
                done, _ = wait(pending, return_when=FIRST_COMPLETED)
                for fut in done:
                    pos = pending.pop(fut)
                    record, exc = fut.result()
                    results[pos] = record
                    self.executed.append(record.row_index)
                    if exc is not None and error is None:
                        error = exc
                        logger.warning("trial failed: %s", exc)
                    if error is None:
                        submit()
                flush(len(todo))
        if error is not None:
            # write what finished, in order, skipping the gaps left by unsubmitted rows
            for pos in sorted(results):
                if pos >= written and self.log is not None:
                    self.log.append(results[pos])
            raise error
        return [results[i] for i in range(len(todo))]


def _settings(plan, repetitions, aggregate):
    settings = getattr(plan, "settings", None) or {}
    return settings.get("repetitions", repetitions), settings.get("aggregate", aggregate)


def resume_plan(plan, log, objective, repetitions=None, parallelism=1, *, metric=None,
                timeout=None, aggregate=None):
    """Run only the rows of ``plan`` that lack an ok record in ``log``.

    Returns one ok record per plan row, ordered by row.  ``log`` is a
    :class:`TrialLog` or a run directory.  ``repetitions`` and ``aggregate``
    default to the values frozen into the plan's settings, else 1 and mean.
    """
    log = _as_log(log)
    reps_default, agg_default = _settings(plan, 1, "mean")
    repetitions = repetitions or reps_default
    aggregate = aggregate or agg_default
    done = {}
    if log is not None:
        for record in log.records():
            if record.plan_id != plan.plan_id:
                raise PlanMismatch(f"{log.path} belongs to plan {record.plan_id}, not {plan.plan_id}")
            if record.ok:
                done.setdefault(record.row_index, record)
    todo = [(r, a) for r, a in enumerate(plan.assignments, start=1) if r not in done]
    if done:
        logger.info("resuming plan %s: %d of %d rows already complete", plan.plan_id, len(done), len(plan.assignments))
    runner = Executor(
        plan_id=plan.plan_id,
        objective=objective,
        repetitions=repetitions,
        parallelism=parallelism,
        metric=metric if metric is not None else getattr(getattr(plan, "table", None), "metric", None),
        timeout=timeout,
        aggregate=aggregate,
        log=log,
    )
    for record in runner.run(todo):
        done[record.row_index] = record
    return [done[r] for r in range(1, len(plan.assignments) + 1)]


def run_plan(plan, objective, repetitions=None, parallelism=1, *, log=None, metric=None,
             timeout=None, aggregate=None):
    """Run every row of ``plan``; with ``log`` the records are persisted as they finish."""
    log = _as_log(log)
    if log is not None and len(log):
        raise ValueError(f"{log.path} already has records; use resume_plan to continue it")
    return resume_plan(plan, log, objective, repetitions, parallelism, metric=metric,
                       timeout=timeout, aggregate=aggregate)


def run_single(assignment, objective, repetitions=1, *, plan_id="confirm", metric=None,
               timeout=None, aggregate="mean", log=None):
    """Evaluate one assignment (row index 0), e.g. the confirmation run.

    Raises the objective error on failure; the failed record is on ``exc.record``.
    With ``log``, an earlier ok record for the same plan id and assignment is
    returned instead of running again.
    """
    log = _as_log(log)
    if log is not None:
        for record in reversed(log.records()):
            if (record.ok and record.plan_id == plan_id and record.row_index == CONFIRM_ROW
                    and record.assignment == dict(assignment)):
                return record
    runner = Executor(plan_id=plan_id, objective=objective, repetitions=repetitions, metric=metric,
                      timeout=timeout, aggregate=aggregate, log=log)
    return runner.run([(CONFIRM_ROW, assignment)])[0]
