"""Bratteli diagrams stored as a finite list of incidence matrices.

Matrix ``k`` (1-based) has shape ``n(k) x n(k-1)``; entry ``[i][j]`` counts the
edges from vertex ``j`` at level ``k-1`` to vertex ``i`` at level ``k``.  Level 0
is the single root.  A stationary diagram repeats its last matrix forever.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .certificate import (
    FAILS,
    HOLDS,
    INCONCLUSIVE,
    Certificate,
    DiagramError,
    LevelError,
)

Matrix = tuple[tuple[int, ...], ...]


def matmul(a: Matrix, b: Matrix) -> Matrix:
    """Exact product ``a @ b`` of integer matrices given as row tuples."""
    cols = list(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in cols) for row in a)


def matvec(a: Matrix, v: Sequence[int]) -> tuple[int, ...]:
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def identity(n: int) -> Matrix:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def _as_matrix(m: Iterable[Iterable[int]]) -> Matrix:
    rows = []
    for row in m:
        r = []
        for x in row:
            if isinstance(x, bool) or not isinstance(x, int):
                if isinstance(x, float) and x.is_integer():
                    x = int(x)
                else:
                    raise DiagramError(f"incidence entries must be integers, got {x!r}")
            r.append(x)
        rows.append(tuple(r))
    return tuple(rows)


class Diagram:
    """An immutable Bratteli diagram prefix, optionally with a stationary tail."""

    def __init__(self, levels: Iterable[Iterable[Iterable[int]]], stationary: bool = False):
        mats = tuple(_as_matrix(m) for m in levels)
        if not mats or not mats[0] or len(mats[0][0]) != 1:
            raise DiagramError("n(0) must be 1: the level-1 matrix must be a single column")
        prev = 1
        for k, m in enumerate(mats, start=1):
            if not m:
                raise DiagramError(f"level {k}: matrix has no rows (n({k}) must be >= 1)")
            for row in m:
                if len(row) != prev:
                    raise DiagramError(
                        f"level {k}: every row must have n({k - 1}) = {prev} entries"
                    )
                if any(x < 0 for x in row):
                    raise DiagramError(f"level {k}: incidence entries must be nonnegative")
                if not any(row):
                    raise DiagramError(f"level {k}: all-zero row (a vertex without incoming edges)")
            for j, col in enumerate(zip(*m)):
                if not any(col):
                    raise DiagramError(
                        f"level {k}: all-zero column {j + 1} (vertex at level {k - 1} "
                        "without outgoing edges)"
                    )
            prev = len(m)
        if stationary and len(mats[-1]) != len(mats[-1][0]):
            raise DiagramError("stationary tail requires a square last matrix")
        self._levels = mats
        self._stationary = bool(stationary)
        self._heights: list[tuple[int, ...]] = [(1,)]

    # -- structure -----------------------------------------------------------

    @property
    def levels(self) -> tuple[Matrix, ...]:
        return self._levels

    @property
    def stationary(self) -> bool:
        return self._stationary

    @property
    def stored_depth(self) -> int:
        return len(self._levels)

    @property
    def depth(self) -> int | None:
        """Number of available levels; ``None`` when the tail repeats forever."""
        return None if self._stationary else len(self._levels)

    def has_level(self, k: int) -> bool:
        return k >= 0 and (self._stationary or k <= len(self._levels))

    def check_level(self, k: int, lowest: int = 0) -> None:
        if k < lowest or not self.has_level(k):
            bound = "inf" if self._stationary else str(len(self._levels))
            raise LevelError(f"level {k} outside stored range [{lowest}, {bound}]")

    def matrix(self, k: int) -> Matrix:
        self.check_level(k, lowest=1)
        if k <= len(self._levels):
            return self._levels[k - 1]
        return self._levels[-1]

    def n(self, k: int) -> int:
        """Number of vertices at level ``k``."""
        if k == 0:
            return 1
        return len(self.matrix(k))

    def truncate(self, depth: int) -> Diagram:
        """The finite prefix with levels ``1..depth``."""
        self.check_level(depth, lowest=1)
        return Diagram([self.matrix(k) for k in range(1, depth + 1)])

    def heights(self, k: int) -> tuple[int, ...]:
        """Number of root-to-vertex paths for every vertex of level ``k``."""
        self.check_level(k)
        while len(self._heights) <= k:
            j = len(self._heights)
            self._heights.append(matvec(self.matrix(j), self._heights[-1]))
        return self._heights[k]

    def path_counts(self, lo: int, hi: int) -> Matrix:
        """``A_hi ... A_{lo+1}``: entry ``[i][j]`` counts paths from ``v_j^lo`` to ``v_i^hi``."""
        if hi < lo:
            raise LevelError(f"path_counts needs lo <= hi, got {lo} > {hi}")
        self.check_level(hi)
        p = identity(self.n(lo))
        for k in range(lo + 1, hi + 1):
            p = matmul(self.matrix(k), p)
        return p

    def resolve_depth(self, depth: int | None, default: int) -> int:
        if depth is None:
            return self.stored_depth if not self._stationary else max(default, self.stored_depth)
        self.check_level(depth)
        return depth

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Diagram):
            return NotImplemented
        return self._levels == other._levels and self._stationary == other._stationary

    def __hash__(self) -> int:
        return hash((self._levels, self._stationary))

    def __repr__(self) -> str:
        tail = ", stationary=True" if self._stationary else ""
        return f"Diagram({[list(map(list, m)) for m in self._levels]}{tail})"


def odometer(bases: Sequence[int], depth: int | None = None) -> Diagram:
    """Single-vertex diagram with ``bases[k-1]`` edges into level ``k``.

    With ``depth`` given, the bases repeat cyclically up to that depth.
    """
    if not bases:
        raise DiagramError("odometer needs at least one base")
    if depth is None:
        depth = len(bases)
    return Diagram([[[bases[(k - 1) % len(bases)]]] for k in range(1, depth + 1)])


def stationary_diagram(root: Sequence[int], matrix: Sequence[Sequence[int]]) -> Diagram:
    """Root column followed by a square matrix repeated at every level."""
    return Diagram([[[x] for x in root], matrix], stationary=True)


# -- operations ------------------------------------------------------------------


@dataclass(frozen=True)
class HeightVector:
    level: int
    counts: tuple[int, ...]


@dataclass(frozen=True)
class TelescopePlan:
    cut_levels: tuple[int, ...]

    def __post_init__(self) -> None:
        cuts = tuple(int(c) for c in self.cut_levels)
        object.__setattr__(self, "cut_levels", cuts)
        if not cuts or cuts[0] != 0:
            raise DiagramError("telescope plan must start at level 0")
        if any(b <= a for a, b in zip(cuts, cuts[1:])):
            raise DiagramError("telescope plan must be strictly increasing")

    @property
    def gaps(self) -> tuple[int, ...]:
        return tuple(b - a for a, b in zip(self.cut_levels, self.cut_levels[1:]))


def heights(d: Diagram, k: int) -> HeightVector:
    d.check_level(k, lowest=1)
    return HeightVector(k, d.heights(k))


def gcd_condition(d: Diagram, max_level: int) -> Certificate:
    """Check ``gcd(h^k) == 1`` for every level ``1..max_level``.

    Holding at every level is equivalent to a trivial rational subgroup.
    """
    d.check_level(max_level)
    gcds = []
    for k in range(1, max_level + 1):
        g = math.gcd(*d.heights(k))
        gcds.append(g)
        if g != 1:
            return Certificate(
                "gcd_condition",
                FAILS,
                params={"max_level": max_level},
                witness={"level": k, "gcd": g, "heights": list(d.heights(k)), "gcds": gcds},
                message=f"gcd of heights at level {k} is {g}",
            )
    return Certificate(
        "gcd_condition",
        HOLDS,
        params={"max_level": max_level},
        witness={"gcds": gcds},
        message=f"gcd of heights is 1 at every level <= {max_level}",
    )


def telescope(d: Diagram, plan: TelescopePlan | Sequence[int]) -> Diagram:
    if not isinstance(plan, TelescopePlan):
        plan = TelescopePlan(tuple(plan))
    cuts = plan.cut_levels
    if len(cuts) < 2:
        raise DiagramError("telescope plan needs at least one level beyond the root")
    d.check_level(cuts[-1])
    return Diagram([d.path_counts(a, b) for a, b in zip(cuts, cuts[1:])])


def _positive(m: Matrix) -> bool:
    return all(x > 0 for row in m for x in row)


def simplicity_check(d: Diagram, window: int, depth: int | None = None) -> Certificate:
    """Look for a telescoping of levels ``0..depth`` into strictly positive blocks.

    Each block spans at most ``window`` levels and the plan must end exactly at
    ``depth``.  The lexicographically smallest such plan is reported.
    """
    if window < 1:
        raise DiagramError("window must be a positive integer")
    depth = d.resolve_depth(depth, d.stored_depth + 2 * window)
    dead: set[int] = set()

    def search(c: int) -> list[int] | None:
        if c == depth:
            return [c]
        if c in dead:
            return None
        p = identity(d.n(c))
        for nxt in range(c + 1, min(c + window, depth) + 1):
            p = matmul(d.matrix(nxt), p)
            if _positive(p):
                rest = search(nxt)
                if rest is not None:
                    return [c] + rest
        dead.add(c)
        return None

    plan = search(0)
    params = {"window": window, "depth": depth}
    if plan is None:
        return Certificate(
            "simplicity_check",
            INCONCLUSIVE,
            params=params,
            message=f"no telescoping with gaps <= {window} has positive blocks up to level {depth}",
        )
    return Certificate(
        "simplicity_check",
        HOLDS,
        params=params,
        witness={"plan": plan},
        message=f"positive blocks along cuts {plan}",
    )
