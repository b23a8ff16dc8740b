"""Rational eigenvalues, their classes in the dimension group, and coboundary tests.

A set ``U`` is given as a union of same-level cylinders (``PathPrefix`` objects
of one level).  Along the simulated orbit of the minimal path, membership in a
level-k cylinder is read from the level-k tower passes, so a time ``t`` sits in
cylinder ``(v, floor)`` when it falls ``floor`` steps into a pass over ``v``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .certificate import FAILS, HOLDS, INCONCLUSIVE, Certificate, DiagramError, GuardError, LevelError
from .diagram import Diagram
from .dimgroup import GroupElement, TraceInterval, basis, push, trace_interval, unit
from .dynamics import EdgeOrdering, OrbitTowers, PathPrefix, orbit_towers

MAX_TABLE = 10**7


def _fraction(x) -> Fraction:
    if isinstance(x, str):
        x = x.strip()
    return Fraction(x)


# -- odometers -----------------------------------------------------------------------


def odometer_spectrum(bases: Sequence[int], denominator_bound: int) -> list[Fraction]:
    """Eigenvalue angles ``p/q`` in ``[0, 1)`` with ``q`` dividing a partial product ``<= D``.

    ``bases`` repeat cyclically; divisors of earlier partial products divide
    later ones, so the largest product within the bound determines the set.
    """
    if not bases or any(int(a) < 2 for a in bases):
        raise DiagramError("odometer bases must be integers >= 2")
    if denominator_bound < 1:
        raise DiagramError("denominator bound must be positive")
    prod, i = 1, 0
    while prod * bases[i % len(bases)] <= denominator_bound:
        prod *= bases[i % len(bases)]
        i += 1
    return sorted({Fraction(j, prod) for j in range(prod)})


# -- orbit labels ----------------------------------------------------------------------


def _labels(towers: OrbitTowers) -> tuple[np.ndarray, np.ndarray]:
    """Level-k vertex and floor of every time in ``[0, horizon)``."""
    t = np.arange(towers.horizon, dtype=np.int64)
    idx = np.searchsorted(towers.starts, t, side="right") - 1
    return towers.vertices[idx].astype(np.int64), t - towers.starts[idx]


def _cylinder_level(cylinders: Sequence[PathPrefix]) -> int:
    levels = {c.level for c in cylinders}
    if len(levels) != 1:
        raise DiagramError("a cylinder union must use cylinders of a single level")
    return levels.pop()


def _table(d: Diagram, k: int, entries: Mapping[tuple[int, int], int]) -> np.ndarray:
    h = d.heights(k)
    if max(h) > MAX_TABLE:
        raise GuardError(f"level-{k} towers are too tall ({max(h)} floors) for a lookup table")
    tab = np.zeros((len(h), max(h)), dtype=np.int64)
    for (v, f), c in entries.items():
        if not 0 <= v < len(h) or not 0 <= f < h[v]:
            raise DiagramError(f"no cylinder at vertex {v}, floor {f} of level {k}")
        tab[v, f] = c
    return tab


# -- eigenfunctions ---------------------------------------------------------------------


def verify_rational_eigenvalue(
    ordering: EdgeOrdering,
    theta: Fraction | str,
    cylinders: Sequence[PathPrefix],
    depth: int,
    samples: int = 1000,
    budget: int = 10**6,
) -> Certificate:
    """Check that ``F = sum_j (j p/q) 1_{T^j U}`` is an exact phase function for ``theta = p/q``.

    ``U, TU, ..., T^{q-1}U`` must tile the simulated orbit: consecutive visits to
    ``U`` exactly ``q`` apart, with at most ``q-1`` uncovered steps at either end.
    Phases live in ``(1/q)Z mod 1`` and are compared exactly.
    """
    theta = _fraction(theta)
    if not 0 <= theta < 1:
        raise DiagramError("theta must lie in [0, 1)")
    p, q = theta.numerator, theta.denominator
    params = {"theta": str(theta), "depth": depth, "samples": samples, "budget": budget}
    if q == 1:
        return Certificate("verify_rational_eigenvalue", HOLDS, params, {"phase": "0"}, "theta = 0: F = 0")
    if not cylinders:
        raise DiagramError("an empty set cannot carry an eigenfunction")
    d = ordering.diagram
    k = _cylinder_level(cylinders)
    for c in cylinders:
        c.validate(d)
    params["cylinders"] = [f"{c.end + 1}@{ordering.floor(c)}" for c in cylinders]
    towers = orbit_towers(ordering, k, depth, budget)
    tab = _table(d, k, {(c.end, ordering.floor(c)): 1 for c in cylinders})
    verts, floors = _labels(towers)
    visits = np.flatnonzero(tab[verts, floors])
    horizon = towers.horizon
    params["horizon"] = horizon

    def fail(msg: str, **w) -> Certificate:
        return Certificate("verify_rational_eigenvalue", FAILS, params, w, msg)

    if len(visits) == 0:
        return fail("U is never visited", time=None)
    if visits[0] > q - 1:
        return fail(f"time {q - 1} is not covered by U, ..., T^{q - 1}U", time=q - 1)
    gaps = np.diff(visits)
    if np.any(gaps < q):
        i = int(np.argmax(gaps < q))
        return fail(f"U and T^{int(gaps[i])}U intersect at time {int(visits[i + 1])}", time=int(visits[i + 1]))
    if np.any(gaps > q):
        i = int(np.argmax(gaps > q))
        t = int(visits[i]) + q
        return fail(f"time {t} is not covered by U, ..., T^{q - 1}U", time=t)
    if not towers.truncated and horizon - 1 - visits[-1] > q - 1:
        t = int(visits[-1]) + q
        return fail(f"time {t} is not covered by U, ..., T^{q - 1}U", time=t)

    # F at time t is (t - last visit) * theta mod 1
    first = int(visits[0])
    last_t = horizon - 2
    if last_t < first:
        return Certificate("verify_rational_eigenvalue", INCONCLUSIVE, params, {}, "orbit segment too short")
    pts = np.unique(np.linspace(first, last_t, num=min(samples, last_t - first + 1)).astype(np.int64))
    mask = tab[verts, floors].astype(bool)

    def phase(t: int) -> Fraction:
        j = int(t - visits[np.searchsorted(visits, t, side="right") - 1])
        return (j * Fraction(p, q)) % 1

    for t in pts.tolist():
        inc = (phase(t + 1) - phase(t)) % 1
        if inc != theta:
            return fail(f"phase increment {inc} != {theta} at time {t}", time=t)
    density = Fraction(int(mask.sum()), horizon)
    return Certificate(
        "verify_rational_eigenvalue",
        HOLDS,
        params,
        {"visits": int(len(visits)), "checked": int(len(pts)), "density": str(density), "first_visit": first},
        f"F(Tx) - F(x) = {theta} at {len(pts)} sampled times",
    )


# -- measures and classes ---------------------------------------------------------------


def cylinder_class(d: Diagram, cylinders: Sequence[PathPrefix]) -> GroupElement:
    """``[1_U]`` for a union of distinct same-level cylinders."""
    k = _cylinder_level(cylinders)
    if len(set(cylinders)) != len(cylinders):
        raise DiagramError("cylinders in a union must be distinct")
    vec = [0] * d.n(k)
    for c in cylinders:
        c.validate(d)
        vec[c.end] += 1
    return GroupElement(k, tuple(vec))


def measure_interval_of_cylinder(d: Diagram, cylinders: PathPrefix | Sequence[PathPrefix], level: int) -> TraceInterval:
    """Range of ``mu(U)`` over the level-``level`` state simplex."""
    if isinstance(cylinders, PathPrefix):
        cylinders = [cylinders]
    g = cylinder_class(d, cylinders)
    if level < g.level:
        raise LevelError(f"level {level} is below the cylinder level {g.level}")
    return trace_interval(d, g, level)


@dataclass(frozen=True)
class ThetaImage:
    theta: Fraction
    element: GroupElement
    counts: tuple[int, ...] = field(default=())

    def to_dict(self) -> dict:
        return {"theta": str(self.theta), "element": self.element.to_dict(), "counts": list(self.counts)}


def find_theta_witness(d: Diagram, frac: Fraction, max_level: int = 4, max_count: int = 64) -> tuple[int, tuple[int, ...]] | None:
    """Lowest level ``k <= max_level`` where ``frac * h^k`` is integral, with the counts per vertex.

    Taking that many cylinders over each vertex gives a union whose class has
    the constant image ``frac``.
    """
    for k in range(0, max_level + 1):
        if not d.has_level(k):
            break
        h = d.heights(k)
        c = [frac * x for x in h]
        if all(x.denominator == 1 for x in c):
            counts = tuple(int(x) for x in c)
            if sum(counts) <= max_count:
                return k, counts
    return None


def theta_map(
    d: Diagram,
    theta: Fraction | str | int,
    cylinders: Sequence[PathPrefix] | None = None,
    max_level: int = 4,
    max_count: int = 64,
) -> ThetaImage:
    """``floor(theta) u + [1_U]`` where ``U`` has measure ``theta - floor(theta)`` for every trace."""
    theta = _fraction(theta)
    fl = math.floor(theta)
    frac = theta - fl
    if frac == 0:
        return ThetaImage(theta, fl * unit(d, 0), ())
    if cylinders:
        g = cylinder_class(d, cylinders)
        iv = trace_interval(d, g, g.level)
        if iv.lower != frac or iv.upper != frac:
            raise GuardError(f"U has measure range [{iv.lower}, {iv.upper}], not {{theta}} = {frac}")
        counts = g.vector
        k = g.level
    else:
        found = find_theta_witness(d, frac, max_level, max_count)
        if found is None:
            raise GuardError(
                f"no cylinder union of measure {frac} up to level {max_level} with at most {max_count} cylinders"
            )
        k, counts = found
    g = GroupElement(k, counts)
    return ThetaImage(theta, fl * unit(d, k) + g, counts)


def theta_relation_holds(d: Diagram, image: ThetaImage, depth: int | None = None) -> bool:
    """``q * Theta(p/q) == p * u``, compared after pushing to a common level."""
    p, q = image.theta.numerator, image.theta.denominator
    lvl = image.element.level if depth is None else max(depth, image.element.level)
    return push(d, q * image.element, lvl) == push(d, p * unit(d, 0), lvl)


# -- coboundaries ------------------------------------------------------------------------


@dataclass(frozen=True)
class CylinderFunction:
    """Integer combination of level-``level`` cylinders keyed by ``(vertex, floor)``."""

    level: int
    coeffs: Mapping[tuple[int, int], int]

    @classmethod
    def indicator(cls, ordering: EdgeOrdering, cylinders: Sequence[PathPrefix]) -> CylinderFunction:
        k = _cylinder_level(cylinders)
        return cls(k, {(c.end, ordering.floor(c)): 1 for c in cylinders})


def integer_coboundary_check(
    ordering: EdgeOrdering,
    f: CylinderFunction,
    g: CylinderFunction,
    depth: int,
    horizon: int = 10**6,
    factor: int = 50,
) -> Certificate:
    """Bounded Birkhoff sums of ``f - g`` along the minimal orbit, up to ``horizon`` steps."""
    if f.level != g.level:
        raise DiagramError(f"shape mismatch: f uses level {f.level}, g uses level {g.level}")
    k = f.level
    diff: dict[tuple[int, int], int] = dict(f.coeffs)
    for key, c in g.coeffs.items():
        diff[key] = diff.get(key, 0) - c
    d = ordering.diagram
    tab = _table(d, k, diff)
    sup = int(np.abs(tab).max()) if tab.size else 0
    threshold = factor * sup
    towers = orbit_towers(ordering, k, depth, horizon)
    verts, floors = _labels(towers)
    sums = np.cumsum(tab[verts, floors])
    peak = int(np.abs(sums).max()) if len(sums) else 0
    params = {"level": k, "depth": depth, "horizon": towers.horizon, "threshold": threshold, "factor": factor}
    witness = {"max_abs_partial_sum": peak, "sup_abs_difference": sup, "final_sum": int(sums[-1]) if len(sums) else 0}
    if peak <= threshold:
        witness["verdict"] = "consistent-with-coboundary"
        return Certificate("integer_coboundary_check", HOLDS, params, witness, f"partial sums stay within {peak}")
    t = int(np.argmax(np.abs(sums) > threshold))
    witness["verdict"] = "diverging-witness"
    witness["time"] = t + 1
    return Certificate(
        "integer_coboundary_check", FAILS, params, witness, f"partial sum exceeds {threshold} after {t + 1} steps"
    )
