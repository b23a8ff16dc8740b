import random
import warnings
from fractions import Fraction as F

import pytest

from adic_lab import (
    FAILS,
    HOLDS,
    INCONCLUSIVE,
    Diagram,
    GroupElement,
    GuardError,
    LevelError,
    basis,
    constant_image_test,
    equal_in_limit,
    miscibility_certificate,
    odometer,
    push,
    rational_subgroup_probe,
    rational_trace,
    spectral_rank_bound,
    stationary_diagram,
    trace_interval,
    unit,
    unit_divisors,
)
from adic_lab.dimgroup import NonSimpleWarning, column_sums, rank_criterion, trace_intervals


def test_push_examples(running):
    assert push(running, unit(running, 1), 2).vector == (4, 5)
    assert push(running, GroupElement(1, (0, 0)), 6).is_zero()
    assert push(running, basis(running, 1, 0), 2).vector == (2, 1)
    with pytest.raises(LevelError):
        push(running, unit(running, 3), 2)


def test_push_functorial(running):
    g = GroupElement(1, (3, -7))
    assert push(running, push(running, g, 3), 6) == push(running, g, 6)


def test_trace_interval_examples(running):
    iv = trace_interval(running, basis(running, 1, 0), 3)
    assert (iv.lower, iv.upper) == (F(4, 14), F(5, 13))
    for n in range(1, 6):
        iv = trace_interval(running, unit(running, 1), n)
        assert iv.lower == iv.upper == 1


def test_trace_intervals_nest(running):
    g = GroupElement(1, (2, -1))
    ivs = trace_intervals(running, g, 1, 12)
    assert all(a.contains(b) for a, b in zip(ivs, ivs[1:]))


def test_infinitesimal_shrinks_to_zero(running):
    # u at level 1 pushed is (4,5); e_1 - e_2 at level 2 has trace 0 for the unique measure
    g = GroupElement(2, (1, -1))
    ivs = trace_intervals(running, g, 2, 14)
    assert ivs[-1].lower <= 0 <= ivs[-1].upper
    assert ivs[-1].width < F(1, 10**5)


def test_non_simple_warning(running):
    d = Diagram([[[1], [1]], [[1, 0], [0, 1]], [[1, 0], [0, 1]]])
    with pytest.warns(NonSimpleWarning):
        trace_interval(d, basis(d, 1, 0), 3)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        trace_interval(running, basis(running, 1, 0), 3)


def test_rational_trace_examples(running):
    assert rational_trace(running, unit(running, 2)) == 1
    assert rational_trace(running, basis(running, 2, 0)) == F(1, 9)
    with pytest.raises(GuardError):
        rational_trace(stationary_diagram([1, 2], [[2, 1], [0, 2]]), unit(running, 1))


def test_rational_trace_is_unit_normalized_everywhere():
    rng = random.Random(3)
    for _ in range(10):
        a, b = rng.randint(1, 5), rng.randint(1, 5)
        r1, r2 = rng.randint(1, 4), rng.randint(1, 4)
        d = stationary_diagram([r1, r2], [[a, b], [b, a]])
        for k in range(0, 9):
            assert rational_trace(d, unit(d, k)) == 1


def test_rational_trace_agrees_with_trace_interval(running):
    g = basis(running, 1, 0)
    iv = trace_interval(running, g, 14)
    t = rational_trace(running, g)
    assert iv.lower <= t <= iv.upper


def test_probe_odometer():
    d = odometer([3], depth=6)
    c = rational_subgroup_probe(d, basis(d, 1, 0), 10, 3)
    assert c.status == HOLDS
    assert [3, 1] in c.witness["hits"]
    assert c.witness["ratio"] == "1/3"


def test_probe_running_example(running):
    c = rational_subgroup_probe(running, basis(running, 1, 0), 20, 8)
    assert c.status == FAILS and c.witness["hits"] == []
    c = rational_subgroup_probe(running, unit(running, 1), 20, 8)
    assert [1, 1] in c.witness["hits"]
    assert c.witness["consistent_with_gcd"]


def test_probe_matches_partial_products():
    bases = [2, 3, 5]
    d = odometer(bases, depth=6)
    for level in range(0, 4):
        h = d.heights(level)[0]
        for num in range(1, 2 * h):
            g = GroupElement(level, (num,))
            c = rational_subgroup_probe(d, g, 50, 6)
            r = F(num, h)
            expected = [[r.denominator * m, r.numerator * m] for m in range(1, 51) if r.denominator * m <= 50 and r.numerator * m <= 50]
            assert c.witness["hits"] == expected


def test_unit_divisors(running):
    assert unit_divisors(running, 50, 10).status == FAILS
    c = unit_divisors(odometer([2, 3], depth=4), 10, 3)
    assert c.witness["divisors"] == [2, 3, 4, 6]


def test_constant_image():
    d = odometer([2], depth=6)
    c = constant_image_test(d, 2 * unit(d, 1), 4)
    assert c.status == HOLDS and c.witness["verdict"] == "candidate-member-of-J"
    assert c.witness["phi_estimate"] == "2"
    bad = Diagram([[[1], [1]]] + [[[1, 0], [0, 1]]] * 4)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        c = constant_image_test(bad, basis(bad, 1, 0), 5, F(1, 100))
    assert c.status == INCONCLUSIVE and c.witness["verdict"] == "inconclusive"


def test_equal_in_limit():
    d = Diagram([[[1]], [[2]], [[2]]])
    assert equal_in_limit(d, GroupElement(1, (2,)), GroupElement(2, (4,)))
    assert not equal_in_limit(d, GroupElement(1, (2,)), GroupElement(2, (3,)))


def test_miscibility_examples(running):
    m = miscibility_certificate(running)
    assert (m.verdict, m.reason) == ("miscible", "rational-trace")
    assert miscibility_certificate(n=2, r=2).reason == "rank-criterion"
    assert miscibility_certificate(n=2, r=4, fg=False).verdict == "inconclusive"
    assert column_sums(stationary_diagram([1, 2], [[2, 1], [1, 3]])) is None


def test_rank_criterion_table():
    for n in range(1, 5):
        for r in range(1, 7):
            for fg in (False, True):
                expected = n > 1 and (r == n or (r == n + 1 and fg))
                assert rank_criterion(n, r, fg) == expected
                v = miscibility_certificate(n=n, r=r, fg=fg).verdict
                assert (v == "miscible") == expected


def test_spectral_rank_bound():
    assert spectral_rank_bound(2, 2, False) == 1
    assert spectral_rank_bound(5, 3, True) == 2
    assert spectral_rank_bound(1, 1, False) == 1
