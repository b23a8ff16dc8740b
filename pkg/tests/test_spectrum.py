import random
from fractions import Fraction as F

import pytest

from adic_lab import (
    FAILS,
    HOLDS,
    CylinderFunction,
    DiagramError,
    EdgeOrdering,
    GroupElement,
    GuardError,
    build_weakmix_order,
    equal_in_limit,
    integer_coboundary_check,
    measure_interval_of_cylinder,
    odometer,
    odometer_spectrum,
    rational_subgroup_probe,
    stationary_diagram,
    theta_map,
    unit,
    verify_rational_eigenvalue,
)
from adic_lab.dimgroup import push
from adic_lab.spectrum import theta_relation_holds


def test_odometer_spectrum_examples():
    s = odometer_spectrum([2], 8)
    assert s == [F(j, 8) for j in range(8)]
    s = odometer_spectrum([2, 3], 6)
    assert {x.denominator for x in s} == {1, 2, 3, 6}
    assert odometer_spectrum([2, 3], 1) == [0]
    with pytest.raises(DiagramError):
        odometer_spectrum([1, 2], 5)


def test_every_odometer_eigenvalue_verifies():
    o = EdgeOrdering.left_to_right(odometer([2, 3], depth=8))
    for theta in odometer_spectrum([2, 3], 36):
        if theta == 0:
            continue
        q = theta.denominator
        level = next(k for k in range(9) if o.diagram.heights(k)[0] % q == 0)
        h = o.diagram.heights(level)[0]
        cyl = [o.path_at_floor(level, 0, f) for f in range(0, h, q)]
        c = verify_rational_eigenvalue(o, theta, cyl, 8)
        assert c.status == HOLDS, (theta, c.message)
        assert F(c.witness["density"]) == F(1, q)


def test_three_odometer_phase():
    o = EdgeOrdering.left_to_right(odometer([3], depth=5))
    c = verify_rational_eigenvalue(o, "1/3", [o.min_path(1, 0)], 5, samples=3**5)
    assert c.status == HOLDS
    assert verify_rational_eigenvalue(o, 0, [], 5).status == HOLDS


def test_wrong_witness_fails():
    o = EdgeOrdering.left_to_right(odometer([2, 3], depth=6))
    c = verify_rational_eigenvalue(o, "1/3", [o.path_at_floor(2, 0, 0)], 6)
    assert c.status == FAILS and c.witness["time"] is not None
    c = verify_rational_eigenvalue(o, "1/3", [o.path_at_floor(1, 0, 0)], 6)
    assert c.status == FAILS


def test_weakmix_order_has_no_rational_eigenfunction():
    system = build_weakmix_order(stationary_diagram([1, 2], [[2, 1], [1, 2]]), 6)
    o = system.ordering
    for k in range(1, 3):
        h = o.diagram.heights(k)
        cyls = [o.path_at_floor(k, v, f) for v in range(len(h)) for f in range(h[v])]
        for u in cyls:
            assert verify_rational_eigenvalue(o, "1/2", [u], 6).status == FAILS


def test_measure_interval():
    o = EdgeOrdering.left_to_right(odometer([3], depth=3))
    iv = measure_interval_of_cylinder(o.diagram, o.min_path(1, 0), 3)
    assert iv.lower == iv.upper == F(1, 3)
    d = stationary_diagram([1, 2], [[2, 1], [1, 2]])
    o = EdgeOrdering.left_to_right(d.truncate(6))
    ivs = [measure_interval_of_cylinder(d, o.min_path(1, 0), n) for n in range(1, 7)]
    assert all(a.contains(b) for a, b in zip(ivs, ivs[1:]))
    root = measure_interval_of_cylinder(d, o.min_path(0, 0), 4)
    assert root.lower == root.upper == 1


def test_theta_examples():
    d = odometer([3], depth=4)
    o = EdgeOrdering.left_to_right(d)
    img = theta_map(d, F(1, 3), [o.min_path(1, 0)])
    assert push(d, 3 * img.element, 1) == unit(d, 1)
    assert theta_map(d, 2).element == 2 * unit(d, 0)
    d = odometer([2, 3], depth=4)
    o = EdgeOrdering.left_to_right(d)
    img = theta_map(d, F(5, 6), [o.path_at_floor(2, 0, f) for f in range(5)])
    assert theta_relation_holds(d, img)
    assert img.element.vector == (5,)


def test_theta_guards():
    d = odometer([2, 3], depth=4)
    o = EdgeOrdering.left_to_right(d)
    with pytest.raises(GuardError):
        theta_map(d, F(1, 3), [o.path_at_floor(2, 0, 0)])
    with pytest.raises(GuardError):
        theta_map(d, F(1, 5))


def test_theta_negative_uses_floor():
    d = odometer([2, 3], depth=4)
    img = theta_map(d, F(-7, 6))
    # -7/6 = -2 + 5/6
    assert theta_relation_holds(d, img)
    assert push(d, img.element, 2).vector == (-12 + 5,)


def test_theta_additive_with_carry():
    d = odometer([2, 3], depth=6)
    rng = random.Random(0)
    carries = 0
    for _ in range(50):
        a = F(rng.randint(-12, 12), 36)
        b = F(rng.randint(-12, 12), 36)
        carries += (a % 1) + (b % 1) >= 1
        lhs = theta_map(d, a + b, max_level=6, max_count=10**4).element
        rhs_a = theta_map(d, a, max_level=6, max_count=10**4).element
        rhs_b = theta_map(d, b, max_level=6, max_count=10**4).element
        x, y = push(d, rhs_a, 6), push(d, rhs_b, 6)
        assert equal_in_limit(d, lhs, x + y, 6)
    assert carries > 0


def test_theta_lands_in_rational_subgroup():
    d = odometer([2, 3], depth=6)
    img = theta_map(d, F(7, 12), max_count=100)
    c = rational_subgroup_probe(d, img.element, 50, 6)
    assert [12, 7] in c.witness["hits"]


def test_coboundary_examples():
    o = EdgeOrdering.left_to_right(odometer([2], depth=15))
    f = CylinderFunction(1, {(0, 0): 1})
    g = CylinderFunction(1, {(0, 1): 1})
    c = integer_coboundary_check(o, f, g, 15)
    assert c.status == HOLDS and c.witness["max_abs_partial_sum"] == 1
    assert integer_coboundary_check(o, f, f, 15).witness["max_abs_partial_sum"] == 0
    c = integer_coboundary_check(o, f, CylinderFunction(1, {}), 15)
    assert c.status == FAILS and c.witness["verdict"] == "diverging-witness"
    with pytest.raises(DiagramError):
        integer_coboundary_check(o, f, CylinderFunction(2, {}), 15)


def test_cylinder_function_indicator():
    o = EdgeOrdering.left_to_right(odometer([2], depth=3))
    f = CylinderFunction.indicator(o, [o.path_at_floor(2, 0, 3)])
    assert dict(f.coeffs) == {(0, 3): 1} and f.level == 2
    assert isinstance(GroupElement(0, (1,)), GroupElement)
