"""Ordered Bratteli diagrams and the Vershik map on finite truncations.

Edges are identified by ``(source, copy)`` with 0-based indices: the edge into
vertex ``v`` of level ``k`` numbered ``copy`` among the ``A_k[v][source]``
parallel edges coming from ``source`` at level ``k-1``.

Orbits are simulated from the minimal path.  At depth ``m`` the segment
``T^0 x_min, ..., T^{H-1} x_min`` (``H`` the height of the minimal path's level-m
vertex) is exactly the Kakutani-Rokhlin tower over that vertex, so return times
to level-k cylinders are read off the ordered concatenation of level-k towers
("passes") instead of stepping the map ``H`` times.  ``orbit_of_min`` keeps the
literal successor iteration.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .certificate import (
    FAILS,
    HOLDS,
    INCONCLUSIVE,
    Certificate,
    DiagramError,
    GuardError,
    LevelError,
)
from .diagram import Diagram

Edge = tuple[int, int]

DEFAULT_BUDGET = 10**7


class _MaxAtDepth:
    """Returned by :func:`successor` when every edge of the prefix is maximal."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "MAX_AT_DEPTH"

    def __bool__(self) -> bool:
        return False


MAX_AT_DEPTH = _MaxAtDepth()


@dataclass(frozen=True)
class PathPrefix:
    """Finite path from the root; ``edges[i]`` is the edge into level ``i+1``."""

    edges: tuple[Edge, ...]
    end: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "edges", tuple((int(s), int(c)) for s, c in self.edges))

    @property
    def level(self) -> int:
        return len(self.edges)

    def vertex(self, i: int) -> int:
        """Vertex visited at level ``i`` (0 is the root)."""
        if i == self.level:
            return self.end
        return self.edges[i][0]

    def truncate(self, j: int) -> PathPrefix:
        if not 0 <= j <= self.level:
            raise LevelError(f"cannot truncate a level-{self.level} path to level {j}")
        return PathPrefix(self.edges[:j], self.vertex(j))

    def validate(self, d: Diagram) -> None:
        for i, (s, c) in enumerate(self.edges, start=1):
            r = self.vertex(i)
            if not d.has_level(i) or not 0 <= r < d.n(i):
                raise DiagramError(f"path prefix: vertex {r} does not exist at level {i}")
            row = d.matrix(i)[r]
            if not 0 <= s < len(row) or not 0 <= c < row[s]:
                raise DiagramError(f"path prefix: no edge ({s}, {c}) into vertex {r} at level {i}")
        if self.level == 0 and self.end != 0:
            raise DiagramError("the empty path ends at the root (vertex 0)")


def incoming_edges(d: Diagram, k: int, v: int) -> list[Edge]:
    """Incoming edges of ``v`` at level ``k`` in left-to-right order."""
    return [(s, c) for s, mult in enumerate(d.matrix(k)[v]) for c in range(mult)]


class EdgeOrdering:
    """Linear orders on incoming edges for levels ``1..depth`` of a diagram."""

    def __init__(self, diagram: Diagram, order: Sequence[Sequence[Sequence[Edge]]]):
        depth = len(order)
        if depth < 1:
            raise DiagramError("an ordering needs at least one level")
        diagram.check_level(depth)
        self.diagram = diagram
        self._order: list[list[tuple[Edge, ...]]] = []
        self._rank: list[list[dict[Edge, int]]] = []
        self._offsets: list[list[list[int]]] = []
        for k, per_level in enumerate(order, start=1):
            n = diagram.n(k)
            if len(per_level) != n:
                raise DiagramError(f"ordering level {k}: expected {n} vertices, got {len(per_level)}")
            below = diagram.heights(k - 1)
            lv, rk, of = [], [], []
            for v, listing in enumerate(per_level):
                edges = tuple((int(s), int(c)) for s, c in listing)
                if sorted(edges) != incoming_edges(diagram, k, v):
                    raise DiagramError(
                        f"ordering level {k}, vertex {v + 1}: listing is not a permutation "
                        "of the incoming edges"
                    )
                lv.append(edges)
                rk.append({e: i for i, e in enumerate(edges)})
                acc = [0]
                for s, _ in edges:
                    acc.append(acc[-1] + below[s])
                of.append(acc)
            self._order.append(lv)
            self._rank.append(rk)
            self._offsets.append(of)

    @classmethod
    def left_to_right(cls, diagram: Diagram, depth: int | None = None) -> EdgeOrdering:
        """Edges sorted by (source, copy) ascending at every vertex."""
        depth = diagram.resolve_depth(depth, diagram.stored_depth)
        order = [
            [incoming_edges(diagram, k, v) for v in range(diagram.n(k))]
            for k in range(1, depth + 1)
        ]
        return cls(diagram, order)

    @property
    def depth(self) -> int:
        return len(self._order)

    def listing(self, k: int, v: int) -> tuple[Edge, ...]:
        if not 1 <= k <= self.depth:
            raise LevelError(f"ordering has levels 1..{self.depth}, asked for {k}")
        return self._order[k - 1][v]

    def levels(self) -> list[list[tuple[Edge, ...]]]:
        return [list(lv) for lv in self._order]

    def min_edge(self, k: int, v: int) -> Edge:
        return self.listing(k, v)[0]

    def max_edge(self, k: int, v: int) -> Edge:
        return self.listing(k, v)[-1]

    def rank(self, k: int, v: int, e: Edge) -> int:
        try:
            return self._rank[k - 1][v][e]
        except KeyError:
            raise DiagramError(f"no edge {e} into vertex {v} at level {k}") from None

    def min_path(self, k: int, v: int) -> PathPrefix:
        """The all-minimal path from the root into ``v`` at level ``k``."""
        edges = []
        w = v
        for i in range(k, 0, -1):
            e = self.min_edge(i, w)
            edges.append(e)
            w = e[0]
        return PathPrefix(tuple(reversed(edges)), v)

    def max_path(self, k: int, v: int) -> PathPrefix:
        edges = []
        w = v
        for i in range(k, 0, -1):
            e = self.max_edge(i, w)
            edges.append(e)
            w = e[0]
        return PathPrefix(tuple(reversed(edges)), v)

    def floor(self, p: PathPrefix) -> int:
        """Position of ``p`` among the paths into ``p.end`` in the induced order."""
        total = 0
        for i in range(1, p.level + 1):
            r = p.vertex(i)
            total += self._offsets[i - 1][r][self.rank(i, r, p.edges[i - 1])]
        return total

    def path_at_floor(self, k: int, v: int, j: int) -> PathPrefix:
        """Inverse of :meth:`floor`: the ``j``-th path into ``v`` at level ``k``."""
        h = self.diagram.heights(k)[v]
        if not 0 <= j < h:
            raise LevelError(f"floor {j} outside [0, {h}) for vertex {v} at level {k}")
        edges = []
        w = v
        for i in range(k, 0, -1):
            acc = self._offsets[i - 1][w]
            pos = bisect.bisect_right(acc, j) - 1
            j -= acc[pos]
            e = self._order[i - 1][w][pos]
            edges.append(e)
            w = e[0]
        return PathPrefix(tuple(reversed(edges)), v)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EdgeOrdering):
            return NotImplemented
        return self.diagram == other.diagram and self._order == other._order


# -- the successor map -------------------------------------------------------------


def successor(p: PathPrefix, ordering: EdgeOrdering) -> PathPrefix | _MaxAtDepth:
    """Vershik successor of a finite prefix, or ``MAX_AT_DEPTH``."""
    if p.level > ordering.depth:
        raise LevelError(f"prefix of level {p.level} exceeds ordering depth {ordering.depth}")
    p.validate(ordering.diagram)
    for i in range(1, p.level + 1):
        r = p.vertex(i)
        listing = ordering.listing(i, r)
        pos = ordering.rank(i, r, p.edges[i - 1])
        if pos + 1 < len(listing):
            f = listing[pos + 1]
            below = ordering.min_path(i - 1, f[0]).edges
            return PathPrefix(below + (f,) + p.edges[i:], p.end)
    return MAX_AT_DEPTH


# -- minimal / maximal paths ---------------------------------------------------------


@dataclass
class ProperOrderCertificate:
    """Visible count of infinite min/max paths, by eventual images of predecessor maps.

    ``min_candidates[k-1]`` lists the level-k vertices that some all-minimal chain
    from the deepest checked level passes through.  ``min_count`` is the size of
    that set at the middle level ``ceil(depth/2)``: every vertex there has at
    least half the checked depth of history below it.
    """

    depth: int
    min_count: int
    max_count: int
    min_candidates: list[list[int]] = field(default_factory=list)
    max_candidates: list[list[int]] = field(default_factory=list)

    @property
    def proper(self) -> bool:
        return self.min_count == 1 and self.max_count == 1

    @property
    def min_chain(self) -> list[int | None]:
        return [c[0] if len(c) == 1 else None for c in self.min_candidates]

    @property
    def max_chain(self) -> list[int | None]:
        return [c[0] if len(c) == 1 else None for c in self.max_candidates]

    def to_dict(self) -> dict:
        return {
            "check": "proper_order_check",
            "depth": self.depth,
            "min_count": self.min_count,
            "max_count": self.max_count,
            "proper_as_far_as_visible": self.proper,
            "min_chain": [None if v is None else v + 1 for v in self.min_chain],
            "max_chain": [None if v is None else v + 1 for v in self.max_chain],
        }


def _eventual_images(ordering: EdgeOrdering, depth: int, pick_max: bool) -> list[list[int]]:
    d = ordering.diagram
    image = list(range(d.n(depth)))
    out = [image]
    for k in range(depth, 1, -1):
        pick = ordering.max_edge if pick_max else ordering.min_edge
        image = sorted({pick(k, v)[0] for v in image})
        out.append(image)
    out.reverse()
    return out


def proper_order_check(ordering: EdgeOrdering, depth: int | None = None) -> ProperOrderCertificate:
    depth = ordering.depth if depth is None else depth
    if not 1 <= depth <= ordering.depth:
        raise LevelError(f"depth {depth} outside ordering range 1..{ordering.depth}")
    mins = _eventual_images(ordering, depth, pick_max=False)
    maxs = _eventual_images(ordering, depth, pick_max=True)
    mid = (depth + 1) // 2
    return ProperOrderCertificate(depth, len(mins[mid - 1]), len(maxs[mid - 1]), mins, maxs)


def min_path_endpoints(ordering: EdgeOrdering, depth: int) -> list[int]:
    """Vertices of the infinite minimal path at levels ``0..depth``.

    Levels strictly above the ordering's deepest level must be determined by the
    eventual images; at the deepest level itself nothing deeper is visible and the
    lowest-index candidate is taken.
    """
    if not 1 <= depth <= ordering.depth:
        raise LevelError(f"depth {depth} outside ordering range 1..{ordering.depth}")
    images = _eventual_images(ordering, ordering.depth, pick_max=False)
    chain = [0]
    for k in range(1, depth + 1):
        cand = images[k - 1]
        if len(cand) != 1 and k < ordering.depth:
            raise GuardError(
                f"min path not unique at depth {depth}: level {k} has candidates "
                f"{[v + 1 for v in cand]}"
            )
        chain.append(cand[0])
    return chain


def min_prefix(ordering: EdgeOrdering, depth: int) -> PathPrefix:
    """The minimal path truncated to ``depth``."""
    w = min_path_endpoints(ordering, depth)[-1]
    return ordering.min_path(depth, w)


# -- orbits ----------------------------------------------------------------------------


def iterate_orbit(start: PathPrefix, ordering: EdgeOrdering, budget: int) -> Iterator[PathPrefix]:
    p: PathPrefix | _MaxAtDepth = start
    steps = 0
    while p is not MAX_AT_DEPTH and steps < budget:
        yield p
        steps += 1
        p = successor(p, ordering)


def orbit_of_min(
    ordering: EdgeOrdering, depth: int, budget: int = DEFAULT_BUDGET
) -> list[PathPrefix]:
    """``T^0 x_min, ..., T^{H-1} x_min`` truncated to ``depth`` (at most ``budget`` points)."""
    return list(iterate_orbit(min_prefix(ordering, depth), ordering, budget))


@dataclass
class OrbitTowers:
    """Level-k tower passes of the minimal orbit segment at depth ``m``.

    ``vertices[i]`` is the level-k vertex whose tower is traversed starting at
    time ``starts[i]``; the time window is ``[0, horizon)`` with
    ``horizon = min(H, budget)``.
    """

    level: int
    depth: int
    full_length: int
    horizon: int
    vertices: np.ndarray
    starts: np.ndarray
    heights: tuple[int, ...]

    @property
    def truncated(self) -> bool:
        return self.horizon < self.full_length

    def times_at(self, v: int, floor: int) -> np.ndarray:
        t = self.starts[self.vertices == v] + floor
        return t[t < self.horizon]

    def visited_vertices(self) -> list[int]:
        return sorted({int(v) for v in np.unique(self.vertices)})


def orbit_towers(
    ordering: EdgeOrdering, k: int, depth: int, budget: int = DEFAULT_BUDGET
) -> OrbitTowers:
    if not 0 <= k <= depth:
        raise LevelError(f"cylinder level {k} must lie in [0, {depth}]")
    if budget < 1:
        raise GuardError("step budget must be positive")
    d = ordering.diagram
    chain = min_path_endpoints(ordering, depth)
    top = chain[depth]
    full = d.heights(depth)[top]
    horizon = min(full, budget)
    hk = d.heights(k)
    clamp = np.array([min(h, horizon) for h in hk], dtype=np.int64)

    current = [np.array([v], dtype=np.int32) for v in range(d.n(k))]
    for lev in range(k + 1, depth + 1):
        below = d.heights(lev - 1)
        nxt = []
        for v in range(d.n(lev)):
            if lev == depth and v != top:
                nxt.append(None)
                continue
            parts, t = [], 0
            for s, _ in ordering.listing(lev, v):
                parts.append(current[s])
                t += below[s]
                if t >= horizon:
                    break
            nxt.append(np.concatenate(parts))
        current = nxt
    verts = current[top]
    starts = np.zeros(len(verts), dtype=np.int64)
    if len(verts) > 1:
        np.cumsum(clamp[verts[:-1]], out=starts[1:])
    keep = starts < horizon
    return OrbitTowers(k, depth, full, horizon, verts[keep], starts[keep], hk)


def return_times(
    ordering: EdgeOrdering,
    target: PathPrefix,
    depth: int,
    budget: int = DEFAULT_BUDGET,
) -> list[int]:
    """Sorted times ``n < min(H, budget)`` with ``prefix_k(T^n x_min) == target``."""
    target.validate(ordering.diagram)
    if target.level > depth:
        raise LevelError(f"target level {target.level} exceeds depth {depth}")
    towers = orbit_towers(ordering, target.level, depth, budget)
    return towers.times_at(target.end, ordering.floor(target)).tolist()


# -- lag sets --------------------------------------------------------------------------


def _bits(times: np.ndarray, length: int) -> int:
    arr = np.zeros(length, dtype=np.uint8)
    arr[times] = 1
    return int.from_bytes(np.packbits(arr, bitorder="little").tobytes(), "little")


def _unbits(x: int, length: int) -> np.ndarray:
    raw = np.frombuffer(x.to_bytes((length + 7) // 8, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:length].astype(bool)


def forward_lags(ru: np.ndarray, rv: np.ndarray, length: int) -> int:
    """Bitset of ``{b - a >= 0 : a in ru, b in rv}``; all times must be ``< length``."""
    if len(ru) == 0 or len(rv) == 0:
        return 0
    acc = 0
    if len(ru) <= len(rv):
        bv = _bits(rv, length)
        for a in ru.tolist():
            acc |= bv >> a
    else:
        rev = _bits(length - 1 - ru, length)
        for b in rv.tolist():
            acc |= rev >> (length - 1 - b)
    return acc


def visible_lags(
    ordering: EdgeOrdering,
    u: PathPrefix,
    v: PathPrefix,
    depth: int,
    budget: int = DEFAULT_BUDGET,
) -> list[int]:
    """Elements of ``N(U, V)`` witnessed by the minimal orbit segment at ``depth``."""
    ru = np.array(return_times(ordering, u, depth, budget), dtype=np.int64)
    rv = np.array(return_times(ordering, v, depth, budget), dtype=np.int64)
    length = int(max(ru.max(initial=-1), rv.max(initial=-1))) + 1
    pos = _unbits(forward_lags(ru, rv, length), length)
    neg = _unbits(forward_lags(rv, ru, length), length)
    out = sorted({-int(n) for n in np.flatnonzero(neg)} | {int(n) for n in np.flatnonzero(pos)})
    return out


def _first_pair(acc: int) -> int | None:
    pairs = (acc & (acc >> 1)) >> 1
    if not pairs:
        return None
    return ((pairs & -pairs).bit_length() - 1) + 1


def _has_pair_at(acc: int, n: int) -> bool:
    return n >= 0 and (acc >> n) & 3 == 3


def check_c47(
    ordering: EdgeOrdering,
    k_max: int,
    depth: int | None = None,
    budget: int = 10**6,
    predicted: dict[int, int] | None = None,
) -> Certificate:
    """For each ``k <= k_max`` find the least ``n >= 1`` with ``n, n+1`` in ``N(C(e^k), C(e^k))``.

    ``e^k`` is the minimal path truncated to level ``k``.  Lags are read from the
    minimal orbit segment at ``depth``; the window doubles until a pair appears or
    the whole segment (capped by ``budget``) is used.  ``predicted`` maps levels to
    an expected witness whose visibility is reported as well.
    """
    m = ordering.depth if depth is None else depth
    params = {"k_max": k_max, "depth": m, "budget": budget}
    if k_max < 0 or k_max > m:
        raise LevelError(f"k_max must lie in [0, {m}]")
    if k_max == 0:
        return Certificate("check_C47", HOLDS, params=params, message="vacuous for k_max = 0")
    chain = min_path_endpoints(ordering, m)
    hypothesis = all(v == 0 for v in chain[1:])
    levels = {}
    all_found = True
    for k in range(1, k_max + 1):
        towers = orbit_towers(ordering, k, m, budget)
        target = ordering.min_path(k, chain[k])
        r = towers.times_at(target.end, 0)
        pred = (predicted or {}).get(k)
        window = min(towers.horizon, max(64, 4 * towers.heights[chain[k]] + 4))
        if pred is not None:
            window = min(towers.horizon, max(window, 2 * pred + 4))
        while True:
            acc = forward_lags(r[r < window], r[r < window], window)
            n = _first_pair(acc)
            if n is not None or window >= towers.horizon:
                break
            window = min(2 * window, towers.horizon)
        entry = {
            "witness": n,
            "window": window,
            "returns_seen": int((r < window).sum()),
            "horizon": towers.horizon,
            "truncated": towers.truncated,
        }
        if pred is not None:
            entry["predicted"] = pred
            entry["predicted_visible"] = _has_pair_at(acc, pred)
        if n is None:
            all_found = False
            entry["note"] = f"not found at depth {m}"
        levels[k] = entry
    witness = {
        "levels": levels,
        "min_chain": [v + 1 for v in chain[1:]],
        "hypothesis_min_through_v1": hypothesis,
    }
    if all_found:
        msg = "consecutive return lags found for every level"
        if not hypothesis:
            msg += " (minimal path leaves v_1: sufficiency hypothesis not met)"
        return Certificate("check_C47", HOLDS, params=params, witness=witness, message=msg)
    missing = [k for k, e in levels.items() if e["witness"] is None]
    return Certificate(
        "check_C47",
        FAILS,
        params=params,
        witness=witness,
        message=f"no consecutive pair at levels {missing} within depth {m}",
    )


def _runs(mask: np.ndarray, length: int) -> np.ndarray:
    """Start indices of runs of ``length`` consecutive True values."""
    if length <= 0 or len(mask) < length:
        return np.array([], dtype=np.int64)
    c = np.concatenate([[0], np.cumsum(mask.astype(np.int64))])
    return np.flatnonzero(c[length:] - c[:-length] == length)


def truncation_factor_check(
    ordering: EdgeOrdering,
    k: int,
    depth: int | None = None,
    run_length: int = 2,
    budget: int = 10**6,
    vertices: Iterable[int] | None = None,
    max_cylinders: int = 256,
) -> Certificate:
    """Sample thickness of ``N(U, V)`` for level-k cylinders visited by the orbit.

    For every ordered pair of visited cylinders (optionally restricted to those
    ending at ``vertices``) the visible lag set must contain ``run_length``
    consecutive integers.
    """
    m = ordering.depth if depth is None else depth
    towers = orbit_towers(ordering, k, m, budget)
    ends = towers.visited_vertices()
    if vertices is not None:
        wanted = set(vertices)
        ends = [v for v in ends if v in wanted]
    cyls = [(v, j) for v in ends for j in range(towers.heights[v])]
    if len(cyls) > max_cylinders:
        raise GuardError(f"{len(cyls)} cylinders at level {k} exceed max_cylinders={max_cylinders}")
    horizon = towers.horizon
    times = {c: towers.times_at(*c) for c in cyls}
    cyls = [c for c in cyls if len(times[c])]
    results = []
    ok = True
    for cu in cyls:
        for cv in cyls:
            pos = _unbits(forward_lags(times[cu], times[cv], horizon), horizon)
            neg = _unbits(forward_lags(times[cv], times[cu], horizon), horizon)
            full = np.concatenate([neg[:0:-1], pos])
            starts = _runs(full, run_length)
            found = len(starts) > 0
            ok &= found
            results.append(
                {
                    "u": [cu[0] + 1, cu[1]],
                    "v": [cv[0] + 1, cv[1]],
                    "run_start": int(starts[0]) - (horizon - 1) if found else None,
                }
            )
    params = {"level": k, "depth": m, "run_length": run_length, "budget": budget}
    witness = {"pairs": results, "horizon": horizon, "truncated": towers.truncated}
    if not results:
        return Certificate(
            "truncation_factor_check", INCONCLUSIVE, params, witness, "no cylinders visited"
        )
    failing = sum(1 for r in results if r["run_start"] is None)
    if ok:
        return Certificate(
            "truncation_factor_check",
            HOLDS,
            params,
            witness,
            f"all {len(results)} pairs contain {run_length} consecutive lags",
        )
    return Certificate(
        "truncation_factor_check",
        FAILS,
        params,
        witness,
        f"{failing} of {len(results)} pairs lack {run_length} consecutive lags",
    )
