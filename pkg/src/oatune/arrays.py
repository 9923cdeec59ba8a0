"""Strength-2 orthogonal arrays: construction, verification and a catalog.

Construction (Rao-Hamming)
--------------------------
For a prime power ``h`` and ``t >= 2`` the rows are all vectors ``u`` of
GF(h)^t, enumerated lexicographically with the first coordinate varying
slowest.  Each column belongs to one projective point ``w`` of GF(h)^t and
holds ``u . w``.  Representatives are normalised so that their last nonzero
coordinate equals 1, and columns are ordered lexicographically on the
representative read from the last coordinate to the first.  For ``t = 2``
that is ``a, b, a+b, 2a+b, ...`` and for ``h = 2, t = 3`` it gives the usual
``a, b, a+b, c, a+c, b+c, a+b+c`` layout of L8(2^7); L9(3^4) comes out in
the familiar Taguchi row order.

Field elements are 0-based; array entries are level indices ``1 .. h``.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from itertools import combinations, product
import re

import numpy as np

from .errors import TooManyFactors, UnknownTable, UnsupportedLevels
from .gf import build_field, is_prime_power

MAX_RUNS = 1 << 20

_NAME_RE = re.compile(r"^L(\d+)\((\d+)\^(\d+)\)$")


@dataclass(frozen=True, eq=False)
class OrthogonalArray:
    """An ``N x k`` matrix of 1-based level indices over ``h`` levels."""

    entries: np.ndarray
    levels: int
    strength: int = 2

    def __post_init__(self):
        entries = np.array(self.entries, dtype=np.int64)
        if entries.ndim != 2:
            raise ValueError("entries must be a 2-d matrix")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def rows(self):
        return self.entries.shape[0]

    @property
    def factors(self):
        return self.entries.shape[1]

    @property
    def index_lambda(self):
        return self.rows // self.levels**2

    @property
    def name(self):
        return f"L{self.rows}({self.levels}^{self.factors})"

    def columns(self, k):
        """The array restricted to its first ``k`` columns."""
        return OrthogonalArray(self.entries[:, :k], self.levels, self.strength)

    def canonical(self):
        """Rows sorted lexicographically; equal for row-permuted arrays."""
        order = np.lexsort(self.entries.T[::-1])
        return self.entries[order]

    def __eq__(self, other):
        if not isinstance(other, OrthogonalArray):
            return NotImplemented
        return (
            self.levels == other.levels
            and self.strength == other.strength
            and np.array_equal(self.entries, other.entries)
        )

    def __hash__(self):
        return hash((self.levels, self.entries.tobytes(), self.entries.shape))

    def __repr__(self):
        return f"<OrthogonalArray {self.name}>"


def max_factors(h, t):
    """Number of columns of the full Rao-Hamming array with ``h**t`` rows."""
    return (h**t - 1) // (h - 1)


def projective_points(h, t):
    """Column representatives in construction order (see module docstring)."""
    points = []
    for last in range(t):
        # coordinates before `last` are free; earlier coordinates vary fastest
        for free in product(range(h), repeat=last):
            points.append(tuple(reversed(free)) + (1,) + (0,) * (t - last - 1))
    return points


def rao_hamming(h, t, k=None):
    """Full (or ``k``-column prefix of the) Rao-Hamming array ``OA(h^t, k, h, 2)``."""
    gf = build_field(h)
    points = projective_points(h, t)
    if k is not None:
        points = points[:k]
    rows = np.array(list(product(range(h), repeat=t)), dtype=np.int64)
    w = np.array(points, dtype=np.int64).T
    # accumulate u.w column by column through the field tables
    acc = np.zeros((rows.shape[0], w.shape[1]), dtype=np.int64)
    for i in range(t):
        acc = gf.add_table[acc, gf.mul_table[rows[:, i][:, None], w[i][None, :]]]
    return OrthogonalArray(acc + 1, h)


def construct_oa(h, k, max_runs=MAX_RUNS):
    """Strength-2 array with ``k`` columns over ``h`` levels.

    Prime-power ``h`` uses the Rao-Hamming construction with the smallest
    ``t >= 2`` that fits ``k`` columns, so ``k <= h + 1`` gives ``h**2`` rows.
    Other ``h`` fall back to the smallest catalog entry with enough columns.
    """
    if h < 2 or k < 1:
        raise ValueError(f"need h >= 2 and k >= 1, got h={h}, k={k}")
    if not is_prime_power(h):
        candidates = [a for a in catalog().values() if a.levels == h and a.factors >= k]
        if not candidates:
            if any(a.levels == h for a in catalog().values()):
                raise TooManyFactors(f"no catalog array over {h} levels has {k} columns")
            raise UnsupportedLevels(f"{h} levels: not a prime power and not in the catalog")
        best = min(candidates, key=lambda a: (a.rows, a.factors))
        return best.columns(k)
    t = 2
    while max_factors(h, t) < k:
        t += 1
    if h**t > max_runs:
        raise TooManyFactors(f"{k} factors over {h} levels needs {h**t} runs (cap {max_runs})")
    return rao_hamming(h, t, k)


def full_factorial(h, k):
    """All ``h**k`` level combinations, last factor varying fastest."""
    return OrthogonalArray(np.array(list(product(range(1, h + 1), repeat=k))), h)


@dataclass
class Verification:
    """Outcome of :func:`verify_oa`.

    ``pair_counts[(i, j)]`` is an ``h x h`` matrix whose ``[a-1, b-1]`` entry
    counts rows with level ``a`` in column ``i`` and level ``b`` in column ``j``.
    """

    passed: bool
    rows: int
    levels: int
    column_counts: dict = field(default_factory=dict)
    pair_counts: dict = field(default_factory=dict)
    first_violation: str | None = None
    violating_columns: tuple | None = None

    @property
    def index_lambda(self):
        return self.rows // self.levels**2

    def __bool__(self):
        return self.passed


def verify_oa(array):
    """Check level ranges, column balance and pairwise balance exhaustively."""
    a = array.entries
    h = array.levels
    n, k = a.shape
    report = Verification(passed=True, rows=n, levels=h)

    def fail(msg, cols=None):
        if report.passed:
            report.passed = False
            report.first_violation = msg
            report.violating_columns = cols

    if a.size and (a.min() < 1 or a.max() > h):
        bad = np.argwhere((a < 1) | (a > h))[0]
        fail(f"entry ({bad[0] + 1}, {bad[1] + 1}) = {a[tuple(bad)]} outside 1..{h}", (int(bad[1]),))
        return report
    if n % (h * h):
        fail(f"{n} rows is not a multiple of {h}^2")

    expected = n // (h * h)
    for i, j in combinations(range(k), 2):
        counts = np.bincount((a[:, i] - 1) * h + (a[:, j] - 1), minlength=h * h).reshape(h, h)
        report.pair_counts[(i, j)] = counts
        if n % (h * h) == 0 and not np.all(counts == expected):
            x, y = (int(v) for v in np.argwhere(counts != expected)[0])
            fail(
                f"columns ({i + 1}, {j + 1}): pair ({x + 1}, {y + 1}) appears "
                f"{counts[x, y]} times, expected {expected}",
                (i, j),
            )

    # implied by pairwise balance when k >= 2, so checked last
    for j in range(k):
        counts = np.bincount(a[:, j] - 1, minlength=h)
        report.column_counts[j] = counts
        if not np.all(counts == n // h):
            lvl = int(np.argmax(counts != n // h)) + 1
            fail(f"column {j + 1}: level {lvl} appears {counts[lvl - 1]} times, expected {n // h}", (j,))
    return report


def parse_name(name):
    """``"L9(3^4)"`` -> ``(9, 3, 4)``."""
    m = _NAME_RE.match(name.strip())
    if not m:
        raise ValueError(f"not an array name: {name!r}")
    return tuple(int(g) for g in m.groups())


def format_array(array):
    lines = [array.name]
    lines += [" ".join(str(int(v)) for v in row) for row in array.entries]
    return "\n".join(lines) + "\n"


def parse_array(text):
    """Parse the catalog text format: ``L<N>(<h>^<k>)`` header, then rows."""
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ValueError("empty array file")
    n, h, k = parse_name(lines[0])
    rows = [[int(v) for v in ln.split()] for ln in lines[1:]]
    entries = np.array(rows, dtype=np.int64).reshape(len(rows), -1) if rows else np.zeros((0, k))
    if entries.shape != (n, k):
        raise ValueError(f"{lines[0]}: body has shape {entries.shape}")
    return OrthogonalArray(entries, h)


def save_array(array, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_array(array))


def load_array(path):
    with open(path, encoding="utf-8") as fh:
        return parse_array(fh.read())


@lru_cache(maxsize=None)
def _load_catalog():
    out = {}
    for entry in sorted(resources.files("oatune").joinpath("catalog", "v1").iterdir(), key=lambda p: p.name):
        if not entry.name.endswith(".txt"):
            continue
        array = parse_array(entry.read_text(encoding="utf-8"))
        check = verify_oa(array)
        if not check:
            raise RuntimeError(f"catalog entry {array.name} is corrupt: {check.first_violation}")
        out[array.name] = array
    return out


def catalog():
    """All shipped arrays keyed by name, each verified on first load."""
    return dict(_load_catalog())


def catalog_lookup(name):
    try:
        return _load_catalog()[name.strip()]
    except KeyError:
        raise UnknownTable(f"no catalog table named {name!r}") from None
