"""The dimension group of a Bratteli diagram as a direct limit of ``Z^n(k)``.

Elements are vectors at a level; the connecting maps are the incidence matrices.
Traces are read off through finite-level state simplices: at level ``N`` a
normalized trace is a probability vector weighting ``g_i / h_i``, so the exact
range of ``g`` over those states is ``[min_i g_i/h_i, max_i g_i/h_i]``.  All
arithmetic is exact (``int`` and ``Fraction``).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .certificate import FAILS, HOLDS, INCONCLUSIVE, Certificate, DiagramError, GuardError, LevelError
from .diagram import Diagram, gcd_condition, matvec


class NonSimpleWarning(UserWarning):
    """The stored prefix does not look simple, so trace intervals may not shrink."""


@dataclass(frozen=True)
class GroupElement:
    level: int
    vector: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.level < 0:
            raise LevelError("group elements live at levels >= 0")
        object.__setattr__(self, "vector", tuple(int(x) for x in self.vector))

    def __add__(self, other: GroupElement) -> GroupElement:
        if other.level != self.level:
            raise LevelError("push both elements to a common level before adding")
        return GroupElement(self.level, tuple(a + b for a, b in zip(self.vector, other.vector)))

    def __neg__(self) -> GroupElement:
        return GroupElement(self.level, tuple(-a for a in self.vector))

    def __sub__(self, other: GroupElement) -> GroupElement:
        return self + (-other)

    def __rmul__(self, c: int) -> GroupElement:
        return GroupElement(self.level, tuple(c * a for a in self.vector))

    def is_zero(self) -> bool:
        return not any(self.vector)

    def to_dict(self) -> dict:
        return {"level": self.level, "vector": list(self.vector)}


def element(d: Diagram, level: int, vector: Sequence[int]) -> GroupElement:
    """Validated constructor: ``vector`` must have ``n(level)`` entries."""
    d.check_level(level)
    if len(vector) != d.n(level):
        raise DiagramError(f"level {level} elements have n({level}) = {d.n(level)} entries")
    return GroupElement(level, tuple(vector))


def unit(d: Diagram, level: int = 0) -> GroupElement:
    """The order unit ``u`` at ``level``, i.e. the height vector."""
    d.check_level(level)
    return GroupElement(level, d.heights(level))


def basis(d: Diagram, level: int, v: int) -> GroupElement:
    """Class of any cylinder ending at vertex ``v`` of ``level``."""
    n = d.n(level)
    if not 0 <= v < n:
        raise DiagramError(f"vertex {v} does not exist at level {level}")
    return GroupElement(level, tuple(int(i == v) for i in range(n)))


def push(d: Diagram, g: GroupElement, to_level: int) -> GroupElement:
    if to_level < g.level:
        raise LevelError(f"cannot push a level-{g.level} element down to level {to_level}")
    d.check_level(to_level)
    if len(g.vector) != d.n(g.level):
        raise DiagramError(f"element has {len(g.vector)} entries but n({g.level}) = {d.n(g.level)}")
    v = g.vector
    for k in range(g.level + 1, to_level + 1):
        v = matvec(d.matrix(k), v)
    return GroupElement(to_level, v)


def align(d: Diagram, *gs: GroupElement) -> list[GroupElement]:
    top = max(g.level for g in gs)
    return [push(d, g, top) for g in gs]


def equal_in_limit(d: Diagram, a: GroupElement, b: GroupElement, depth: int | None = None) -> bool:
    """True when ``a`` and ``b`` agree at some level ``<= depth`` (default: their common level)."""
    a, b = align(d, a, b)
    depth = a.level if depth is None else depth
    for k in range(a.level, depth + 1):
        if push(d, a, k) == push(d, b, k):
            return True
    return False


# -- traces --------------------------------------------------------------------------


@dataclass(frozen=True)
class TraceInterval:
    level: int
    lower: Fraction
    upper: Fraction

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    @property
    def midpoint(self) -> Fraction:
        return (self.lower + self.upper) / 2

    def contains(self, other: TraceInterval) -> bool:
        return self.lower <= other.lower and other.upper <= self.upper

    def to_dict(self) -> dict:
        return {"level": self.level, "lower": str(self.lower), "upper": str(self.upper)}


def _looks_simple(d: Diagram, n: int) -> bool:
    if n <= 1:
        return True
    return all(x > 0 for row in d.path_counts(1, n) for x in row)


def trace_interval(d: Diagram, g: GroupElement, level: int) -> TraceInterval:
    """Exact range of ``g`` over the level-``level`` state simplex."""
    if not _looks_simple(d, level):
        warnings.warn(
            f"path counts from level 1 to {level} are not all positive; the prefix may not be simple",
            NonSimpleWarning,
            stacklevel=2,
        )
    p = push(d, g, level)
    h = d.heights(level)
    ratios = [Fraction(a, b) for a, b in zip(p.vector, h)]
    return TraceInterval(level, min(ratios), max(ratios))


def trace_intervals(d: Diagram, g: GroupElement, lo: int, hi: int) -> list[TraceInterval]:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonSimpleWarning)
        return [trace_interval(d, g, n) for n in range(max(lo, g.level), hi + 1)]


def column_sums(d: Diagram) -> list[int] | None:
    """Common column sum ``c_l`` of every stored matrix, or ``None`` if some matrix has unequal sums."""
    out = []
    for m in d.levels:
        sums = {sum(col) for col in zip(*m)}
        if len(sums) != 1:
            return None
        out.append(sums.pop())
    return out


def _column_sum(cs: list[int], l: int) -> int:
    return cs[l - 1] if l <= len(cs) else cs[-1]


def rational_trace(d: Diagram, g: GroupElement) -> Fraction:
    """``tau([a, k]) = sum(a) / (c_1 ... c_k)`` on diagrams with equal column sums."""
    cs = column_sums(d)
    if cs is None:
        raise GuardError("no equal-column-sum structure: some incidence matrix has unequal column sums")
    d.check_level(g.level)
    denom = math.prod(_column_sum(cs, l) for l in range(1, g.level + 1))
    return Fraction(sum(g.vector), denom)


# -- rational subgroup -------------------------------------------------------------


def rational_subgroup_probe(d: Diagram, g: GroupElement, bound: int, depth: int) -> Certificate:
    """All ``(p, n)`` with ``1 <= |p|, n <= bound`` and ``p*g = n*u`` at some level ``<= depth``.

    Equality at a level persists upward, so testing at ``depth`` decides the
    bounded question exactly; the status is ``holds`` iff a hit exists.
    """
    if bound < 1:
        raise DiagramError("bound must be positive")
    top = max(depth, g.level)
    gv = push(d, g, top).vector
    h = d.heights(top)
    hits: list[tuple[int, int]] = []
    ratio = None
    if any(gv):
        r = Fraction(gv[0], h[0])
        if all(Fraction(a, b) == r for a, b in zip(gv, h)) and r != 0:
            ratio = r
            # p*g = n*u  <=>  n/p = r
            p0, n0 = (r.denominator, r.numerator) if r > 0 else (-r.denominator, -r.numerator)
            m = 1
            while abs(p0) * m <= bound and n0 * m <= bound:
                hits.append((p0 * m, n0 * m))
                m += 1
    gcd_ok = gcd_condition(d, top).holds if top >= 1 else True
    nonintegral = [(p, n) for p, n in hits if n % p]
    params = {"bound": bound, "depth": top}
    witness = {
        "hits": [list(x) for x in hits],
        "ratio": None if ratio is None else str(ratio),
        "gcd_condition": gcd_ok,
        "nonintegral_hits": [list(x) for x in nonintegral],
        "consistent_with_gcd": not (gcd_ok and nonintegral),
    }
    if hits:
        return Certificate("rational_subgroup_probe", HOLDS, params, witness, f"g = {ratio} u at level {top}")
    return Certificate("rational_subgroup_probe", FAILS, params, witness, "no relation p g = n u within bounds")


def unit_divisors(d: Diagram, bound: int, depth: int) -> Certificate:
    """Every ``p`` in ``2..bound`` for which ``p*g = u`` has a solution at some level ``<= depth``.

    At level ``L`` a solution exists iff ``p`` divides every height; those gcds
    divide each other upward, so level ``depth`` decides.
    """
    d.check_level(depth)
    g = math.gcd(*d.heights(depth))
    ps = [p for p in range(2, bound + 1) if g % p == 0]
    params = {"bound": bound, "depth": depth}
    witness = {"divisors": ps, "gcd": g}
    if ps:
        return Certificate("unit_divisors", HOLDS, params, witness, f"u is divisible by {ps} at level {depth}")
    return Certificate("unit_divisors", FAILS, params, witness, f"u has no divisor p in [2, {bound}] up to level {depth}")


# -- constant image ------------------------------------------------------------------


def constant_image_test(d: Diagram, g: GroupElement, level: int, tol: Fraction | int = 0) -> Certificate:
    """Flag ``g`` as a candidate for constant image when its level-``level`` interval is narrow.

    Finite data can neither prove nor refute constancy, so the only verdicts are
    ``candidate-member-of-J`` and ``inconclusive``.
    """
    tol = Fraction(tol)
    ivs = trace_intervals(d, g, g.level, level)
    last = ivs[-1]
    params = {"level": level, "tol": str(tol)}
    witness = {
        "widths": [str(iv.width) for iv in ivs],
        "interval": last.to_dict(),
        "phi_estimate": str(last.midpoint),
    }
    if last.width <= tol:
        witness["verdict"] = "candidate-member-of-J"
        return Certificate("constant_image_test", HOLDS, params, witness, f"interval width {last.width} <= {tol}")
    witness["verdict"] = "inconclusive"
    return Certificate("constant_image_test", INCONCLUSIVE, params, witness, f"interval width {last.width} > {tol}")


# -- miscibility ---------------------------------------------------------------------


@dataclass
class MiscibilityCertificate:
    verdict: str
    reason: str | None
    witness: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "reason": self.reason, "witness": self.witness}


def rank_criterion(n: int, r: int, fg: bool) -> bool:
    """Whether declared ``n`` pure traces and ``rank G/Inf = r`` force irrational miscibility."""
    return n > 1 and (r == n or (r == n + 1 and fg))


def miscibility_certificate(
    d: Diagram | None = None,
    n: int | None = None,
    r: int | None = None,
    fg: bool = False,
    level: int = 8,
    tol: Fraction | int = Fraction(1, 1000),
) -> MiscibilityCertificate:
    if d is not None:
        cs = column_sums(d)
        if cs is not None:
            return MiscibilityCertificate("miscible", "rational-trace", {"column_sums": cs})
    if n is not None and r is not None:
        if r < n:
            return MiscibilityCertificate(
                "inconclusive", None, {"n": n, "r": r, "fg": fg, "note": "rank below the number of pure traces"}
            )
        if rank_criterion(n, r, fg):
            return MiscibilityCertificate("miscible", "rank-criterion", {"n": n, "r": r, "fg": fg})
    evidence = []
    if d is not None:
        top = min(level, d.stored_depth) if not d.stationary else level
        for v in range(d.n(1)):
            c = constant_image_test(d, basis(d, 1, v), top, tol)
            evidence.append({"vertex": v + 1, "verdict": c.witness["verdict"], **c.witness["interval"]})
    return MiscibilityCertificate("inconclusive", None, {"n": n, "r": r, "fg": fg, "evidence": evidence})


def spectral_rank_bound(rank_k0: int, n_ergodic: int, fg: bool = False) -> int:
    """Largest rank of the eigenvalue group allowed by ``rank K0`` and ``n`` ergodic measures."""
    if rank_k0 < 1 or n_ergodic < 1:
        raise DiagramError("ranks and measure counts must be >= 1")
    return max(1, rank_k0 - n_ergodic + (0 if fg else 1))
