"""Telescoping and ordering a Bratteli diagram into a weakly mixing Vershik system.

Pipeline: solve ``l*h_1 + 1 = sum_j x_j*h_j`` at candidate levels (a coin
problem over the tower heights), telescope until the block from one cut to the
next has enough edges into ``v_1`` to realise that identity, then order the
edges into ``v_1`` so that the minimal path's cylinder returns to itself after
both ``l*h_1`` and ``l*h_1 + 1`` steps.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Sequence

from .certificate import Certificate, DiagramError, GuardError, InconclusiveError
from .diagram import Diagram, TelescopePlan, gcd_condition, identity, matmul, telescope
from .dynamics import EdgeOrdering, ProperOrderCertificate, check_c47, incoming_edges, proper_order_check


# -- coin problem ----------------------------------------------------------------------


@lru_cache(maxsize=4096)
def _residue_table(gens: tuple[int, ...]) -> tuple[int, ...]:
    """Smallest representable number in each residue class mod ``min(gens)``.

    ``gens`` must be sorted with gcd 1; unreachable classes hold -1.
    """
    a = gens[0]
    dist = [-1] * a
    dist[0] = 0
    heap = [(0, 0)]
    while heap:
        w, r = heapq.heappop(heap)
        if w != dist[r]:
            continue
        for g in gens[1:]:
            nw = w + g
            nr = nw % a
            if dist[nr] == -1 or nw < dist[nr]:
                dist[nr] = nw
                heapq.heappush(heap, (nw, nr))
    return tuple(dist)


@lru_cache(maxsize=4096)
def _normalized(gens: tuple[int, ...]) -> tuple[int, tuple[int, ...], int]:
    g = math.gcd(*gens)
    red = tuple(sorted({x // g for x in gens}))
    inv = pow(red[1], -1, red[0]) if len(red) == 2 and red[0] > 1 else 0
    return g, red, inv


def _representable(m: int, gens: Sequence[int]) -> bool:
    if m < 0:
        return False
    if not gens:
        return m == 0
    g, gens, inv = _normalized(tuple(gens))
    if m % g:
        return False
    m //= g
    if gens[0] == 1 or m == 0:
        return True
    if len(gens) == 2:
        a, b = gens
        return b * (m * inv % a) <= m
    w = _residue_table(gens)[m % gens[0]]
    return w != -1 and w <= m


def _lex_solve(h: tuple[int, ...], m: int) -> tuple[int, ...] | None:
    first = h[0]
    if len(h) == 1:
        return (m // first,) if m % first == 0 else None
    rest = h[1:]
    g = math.gcd(*rest)
    gg = math.gcd(first, g)
    if m % gg:
        return None
    step = g // gg
    x1 = (m // gg) * pow(first // gg, -1, step) % step if step > 1 else 0
    while x1 * first <= m:
        if _representable(m - x1 * first, rest):
            tail = _lex_solve(rest, m - x1 * first)
            if tail is not None:
                return (x1,) + tail
        x1 += step
    return None


def frobenius_representable(h: Sequence[int], m: int) -> tuple[int, ...] | None:
    """Lexicographically smallest ``x >= 0`` with ``sum(x_j*h_j) == m``, or ``None``.

    ``h`` must consist of positive integers with gcd 1.  Every ``m`` larger than
    ``(min(h)-1)*(max(h)-1)`` is representable.
    """
    h = tuple(int(v) for v in h)
    if not h or any(v <= 0 for v in h):
        raise DiagramError("coin values must be positive integers")
    if math.gcd(*h) != 1:
        raise GuardError(f"coin values {list(h)} have gcd {math.gcd(*h)} != 1")
    if m < 0:
        return None
    return _lex_solve(h, int(m))


def brauer_bound(h: Sequence[int]) -> int:
    """``(min(h)-1)*(max(h)-1)``; every larger integer is representable."""
    return (min(h) - 1) * (max(h) - 1)


@dataclass(frozen=True)
class CoinSolution:
    level: int
    ell: int
    x: tuple[int, ...]
    heights: tuple[int, ...]

    def __post_init__(self) -> None:
        lhs = self.ell * self.heights[0] + 1
        rhs = sum(a * b for a, b in zip(self.x, self.heights))
        if lhs != rhs or any(v < 0 for v in self.x):
            raise AssertionError(f"invalid coin solution at level {self.level}: {lhs} != {rhs}")

    @property
    def witness(self) -> int:
        """Return lag ``l * h_1`` predicted for the level-k minimal cylinder."""
        return self.ell * self.heights[0]

    def to_dict(self) -> dict:
        return {"level": self.level, "ell": self.ell, "x": list(self.x), "heights": list(self.heights)}


def _smallest_one_mod(h: tuple[int, ...]) -> int:
    """Smallest representable number congruent to 1 mod ``h[0]`` (Dijkstra, early exit)."""
    a = h[0]
    if a == 1:
        return 1
    target = 1 % a
    dist = {0: 0}
    heap = [(0, 0)]
    while heap:
        w, r = heapq.heappop(heap)
        if r == target:
            return w
        if w != dist[r]:
            continue
        for g in h[1:]:
            nw = w + g
            nr = nw % a
            if nr not in dist or nw < dist[nr]:
                dist[nr] = nw
                heapq.heappush(heap, (nw, nr))
    raise GuardError("residue 1 unreachable: heights do not have gcd 1")


def coin_solve(d: Diagram, k: int, min_ell: int = 1, min_x1: int = 0) -> CoinSolution:
    """Smallest ``l >= min_ell`` with ``l*h_1 + 1 = sum_j x_j*h_j``, ``x >= 0``, ``x_1 >= min_x1``.

    ``x`` is the lexicographically smallest representation meeting the bound.
    """
    d.check_level(k, lowest=1)
    h = d.heights(k)
    g = math.gcd(*h)
    if g != 1:
        err = GuardError(f"gcd of heights at level {k} is {g}; the coin problem has no solution")
        err.level = k
        raise err
    w = _smallest_one_mod(h)
    ell = max(min_ell, (w - 1) // h[0] + min_x1)
    rest = frobenius_representable(h, (ell - min_x1) * h[0] + 1)
    assert rest is not None
    x = (rest[0] + min_x1,) + rest[1:]
    return CoinSolution(k, ell, x, h)


# -- telescoping -------------------------------------------------------------------------


def _block_ok(p, sol: CoinSolution, require_positive: bool) -> bool:
    row = p[0]
    if row[0] <= sol.ell + sol.x[0]:
        return False
    if any(row[j] <= sol.x[j] for j in range(1, len(row))):
        return False
    return not require_positive or all(v > 0 for r in p for v in r)


def _plan(
    d: Diagram,
    levels: int,
    solutions: Mapping[int, CoinSolution] | None,
    max_gap: int,
    require_positive: bool,
) -> tuple[TelescopePlan, dict[int, CoinSolution]]:
    if levels < 1:
        raise DiagramError("need at least one telescoped level")
    d.check_level(1)
    cuts = [0, 1]
    used: dict[int, CoinSolution] = {}
    while len(cuts) - 1 < levels:
        k = cuts[-1]
        sol = (solutions or {}).get(k) or coin_solve(d, k, min_x1=1)
        used[k] = sol
        p = identity(d.n(k))
        for nxt in range(k + 1, k + max_gap + 1):
            if not d.has_level(nxt):
                raise InconclusiveError(
                    f"inconclusive-at-depth: stored depth {d.stored_depth} exhausted while "
                    f"extending the block from level {k}"
                )
            p = matmul(d.matrix(nxt), p)
            if _block_ok(p, sol, require_positive):
                cuts.append(nxt)
                break
        else:
            raise InconclusiveError(
                f"inconclusive-at-depth: no block of length <= {max_gap} from level {k} "
                "satisfies the edge-count inequalities"
            )
    return TelescopePlan(tuple(cuts)), used


def plan_telescoping(
    d: Diagram,
    levels: int,
    solutions: Mapping[int, CoinSolution] | None = None,
    max_gap: int = 64,
    require_positive: bool = True,
) -> TelescopePlan:
    """Greedy cuts ``0, 1 = k_1 < k_2 < ...`` giving ``levels`` telescoped levels.

    Each next cut is the smallest level whose block of path counts from the
    previous cut has more than ``l + x_1`` paths ``v_1 -> v_1`` and more than
    ``x_j`` paths ``v_j -> v_1``.  With ``require_positive`` the block must also
    be strictly positive, which makes the resulting order proper.
    """
    return _plan(d, levels, solutions, max_gap, require_positive)[0]


# -- the ordering --------------------------------------------------------------------------


def interleaved_listing(block_row: Sequence[int], sol: CoinSolution) -> list[tuple[int, int]]:
    """Order of the edges into ``v_1`` given path counts ``block_row`` from each source."""
    n = len(block_row)
    first = [sol.ell + sol.x[0]] + [sol.x[i] for i in range(1, n)]
    out = []
    for i in range(n):
        out.extend((i, c) for c in range(first[i]))
    for i in range(n):
        out.extend((i, c) for c in range(first[i], block_row[i]))
    return out


def weakmix_ordering(d: Diagram, solutions: Mapping[int, CoinSolution]) -> EdgeOrdering:
    """Ordering of an already-telescoped diagram; ``solutions[k]`` drives level ``k+1``."""
    depth = d.stored_depth
    order = []
    for k in range(1, depth + 1):
        per_vertex = [incoming_edges(d, k, v) for v in range(d.n(k))]
        if k >= 2:
            per_vertex[0] = interleaved_listing(d.matrix(k)[0], solutions[k - 1])
        order.append(per_vertex)
    return EdgeOrdering(d, order)


@dataclass
class OrderedSystem:
    diagram: Diagram
    ordering: EdgeOrdering
    plan: TelescopePlan
    solutions: dict[int, CoinSolution]
    proper: ProperOrderCertificate | None = None
    c47: Certificate | None = None
    extra: dict = field(default_factory=dict)

    def predicted_witnesses(self) -> dict[int, int]:
        return {k: s.witness for k, s in self.solutions.items()}

    def to_dict(self) -> dict:
        out = {
            "plan": list(self.plan.cut_levels),
            "solutions": {str(k): s.to_dict() for k, s in sorted(self.solutions.items())},
        }
        if self.proper is not None:
            out["proper_order_check"] = self.proper.to_dict()
        if self.c47 is not None:
            out["check_C47"] = self.c47.to_dict()
        return out


def build_weakmix_order(
    d: Diagram,
    depth: int,
    verify: bool = True,
    budget: int = 10**6,
    max_gap: int = 64,
) -> OrderedSystem:
    """Telescope ``d`` to ``depth`` levels and order it so the Vershik map mixes weakly.

    With ``verify`` the result carries a proper-order check and a consecutive-return-lag check
    for levels ``k <= depth - 4`` at depth ``depth``, with the predicted witness
    ``l_k * h_1^k`` reported at every level.
    """
    try:
        plan, used = _plan(d, depth, None, max_gap, require_positive=True)
    except GuardError as e:
        k = getattr(e, "level", None)
        if k is not None:
            g = gcd_condition(d, k)
            if not g.holds:
                raise GuardError(
                    f"gcd condition fails at level {g.witness['level']} (gcd {g.witness['gcd']})"
                ) from e
        raise
    last = plan.cut_levels[-1]
    gcd = gcd_condition(d, last)
    if not gcd.holds:
        raise GuardError(
            f"gcd condition fails at level {gcd.witness['level']} (gcd {gcd.witness['gcd']})"
        )
    if max(d.heights(last)) == 1:
        raise GuardError("degenerate diagram: every tower has height 1 (finite path space)")
    t = telescope(d, plan)
    sols = {}
    for m, k in enumerate(plan.cut_levels[1:], start=1):
        if k in used:
            s = used[k]
            sols[m] = CoinSolution(m, s.ell, s.x, s.heights)
    ordering = weakmix_ordering(t, sols)
    system = OrderedSystem(t, ordering, plan, sols)
    if verify:
        system.proper = proper_order_check(ordering)
        kmax = max(0, depth - 4)
        system.c47 = check_c47(
            ordering,
            kmax,
            depth=depth,
            budget=budget,
            predicted={k: sols[k].witness for k in range(1, kmax + 1)},
        )
    return system
