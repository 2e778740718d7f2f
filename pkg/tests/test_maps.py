import math

import numpy as np
import pytest

from treepressure import (
    MapDomainError,
    PeriodCapError,
    TentConjugacy,
    chebyshev,
    cycle_orbits,
    logistic,
    map_from_spec,
    periodic_points,
    polynomial_map,
)


def test_chebyshev_eval_examples():
    m = chebyshev()
    assert m.eval(0.5) == 1.0
    assert m.eval(0.0) == 0.0
    assert m.eval(1.0) == 0.0
    assert m.eval(0.25) == 0.75
    # 3/4 is a fixed point: root of 4x(1-x) = x
    assert math.isclose(m.eval(0.75), 0.75, rel_tol=0, abs_tol=1e-15)
    assert m.deriv(0.0) == 4.0
    assert m.deriv(0.5) == 0.0
    assert m.deriv(0.75) == -2.0


def test_domain_errors():
    m = chebyshev()
    with pytest.raises(MapDomainError):
        m.eval(1.5)
    with pytest.raises(MapDomainError):
        m.deriv(-0.2)


def test_critical_point_data():
    m = chebyshev()
    (c,) = m.critical_points
    assert c.location == 0.5 and c.order == 2 and c.in_julia
    assert abs(m.deriv(c.location)) < 1e-13

    lg = logistic(4.5)
    (c,) = lg.critical_points
    assert c.location == 0.5 and not c.in_julia


def test_logistic_parameter_gate():
    logistic(4.4)  # boundary accepted
    with pytest.raises(ValueError):
        logistic(4.2)


def test_logistic_examples():
    lg = logistic(4.5)
    assert math.isclose(lg.eval(0.5), 1.125)
    assert lg.deriv(0.0) == 4.5


def test_iterate_orbits():
    m = chebyshev()
    orb = m.iterate(0.5, 3)
    assert orb.points == (0.5, 1.0, 0.0, 0.0)
    assert not orb.escaped()

    orb = m.iterate(0.75, 5)
    assert all(abs(p - 0.75) < 1e-12 for p in orb.points)

    lg = logistic(4.5)
    orb = lg.iterate(0.5, 2)
    assert orb.escape_index == 1
    assert math.isclose(orb.points[1], 1.125)


def test_periodic_points_period_one():
    m = chebyshev()
    pts = [p for p, _ in periodic_points(m, 1)]
    assert len(pts) == 2
    assert abs(pts[0] - 0.0) < 1e-12
    assert abs(pts[1] - 0.75) < 1e-12

    lg = logistic(4.5)
    pts = [p for p, _ in periodic_points(lg, 1)]
    # roots of 4.5x(1-x) = x are 0 and 7/9
    assert len(pts) == 2
    assert abs(pts[0] - 0.0) < 1e-12
    assert abs(pts[1] - 7.0 / 9.0) < 1e-12


def test_periodic_point_counts_full_map():
    m = chebyshev()
    for n in (1, 2, 3, 6, 10):
        assert len(periodic_points(m, n)) == 2 ** n
    assert all(flag for _, flag in periodic_points(m, 5))


def test_periodic_point_counts_repeller():
    lg = logistic(4.5)
    for n in (1, 2, 3, 8):
        assert len(periodic_points(lg, n)) == 2 ** n


def test_periodic_cap():
    with pytest.raises(PeriodCapError):
        periodic_points(chebyshev(), 17)


def test_periodic_residuals():
    for m, n_max in ((chebyshev(), 10), (logistic(4.5), 10)):
        for n in (1, 4, n_max):
            for p, _ in periodic_points(m, n):
                v = p
                for _ in range(n):
                    v = m._eval_raw(v)
                assert abs(v - p) < 1e-9


def test_repelling_periodic_points():
    # class requirement: every cycle has derivative modulus above 1
    for m in (chebyshev(), logistic(4.5)):
        for n in range(1, 9):
            for p, _ in periodic_points(m, n):
                v, dv = p, 1.0
                for _ in range(n):
                    dv *= m._deriv_raw(v)
                    v = m._eval_raw(v)
                assert abs(dv) > 1.0 + 1e-6


def test_branch_partition_covers_domain():
    rng = np.random.default_rng(42)
    for m in (chebyshev(), logistic(4.5)):
        lo, hi = m.domain
        for x in rng.uniform(lo, hi, 10_000):
            hits = [i for i, b in enumerate(m.branches) if b.lo <= x <= b.hi]
            assert len(hits) >= 1
            assert m.branch_containing(x) == hits[0]


def test_branch_monotonicity():
    for m in (chebyshev(), logistic(4.5)):
        for b in m.branches:
            xs = np.linspace(b.lo, b.hi, 1002)[1:-1]
            signs = np.sign(m.deriv_array(xs))
            assert np.all(signs == (1.0 if b.increasing else -1.0))


def test_branch_inverse_roundtrip():
    m = chebyshev()
    rng = np.random.default_rng(7)
    for b in m.branches:
        for y in rng.uniform(b.image_lo, b.image_hi, 200):
            x = b.inverse(y)
            assert b.lo - 1e-12 <= x <= b.hi + 1e-12
            assert abs(m.eval(x) - y) < 1e-12


def test_tent_conjugacy_consistency():
    m = chebyshev()
    conj = m.conjugacy
    rng = np.random.default_rng(3)
    for theta in rng.uniform(0.0, 1.0, 1000):
        lhs = m.eval(conj.to_interval(theta))
        rhs = conj.to_interval(TentConjugacy.tent(theta))
        assert abs(lhs - rhs) < 1e-12


def test_cycle_orbits_dedupes_across_periods():
    m = chebyshev()
    cycles = cycle_orbits(m, 2)
    # fixed points 0 and 3/4, plus one genuine 2-cycle {(5-sqrt5)/8, (5+sqrt5)/8}
    assert len(cycles) == 3
    flat = sorted(v for cyc in cycles for v in cyc)
    expected = sorted([0.0, 0.75, (5 - math.sqrt(5)) / 8, (5 + math.sqrt(5)) / 8])
    assert np.allclose(flat, expected, atol=1e-9)


def test_map_from_spec():
    m = map_from_spec({"family": "chebyshev"})
    assert m.family == "chebyshev" and m.class_a_certified

    lg = map_from_spec({"family": "logistic", "a": 4.5})
    assert lg.params["a"] == 4.5

    with pytest.raises(ValueError):
        map_from_spec({"family": "logistic"})
    with pytest.raises(ValueError):
        map_from_spec({"family": "unknown"})
    with pytest.raises(ValueError):
        map_from_spec({})


def test_polynomial_map_unverified():
    # a cubic self-map of [0, 1] with two interior critical points
    pm = map_from_spec({
        "family": "polynomial",
        # 0.5 + 3.4*x^2*(1-x)*... keep it simple: scaled logistic as cubic-coefficient form
        "coeffs": [0.0, 3.9, -3.9, 0.0],
        "domain": [0.0, 1.0],
    })
    assert not pm.class_a_certified
    assert len(pm.branches) >= 2
    x = 0.3
    assert math.isclose(pm.eval(x), 3.9 * x - 3.9 * x * x, rel_tol=1e-12)
    # numeric branch inverses invert within residual tolerance
    b = pm.branches[0]
    y = 0.5 * (b.image_lo + b.image_hi)
    assert abs(pm.eval(b.inverse(y)) - y) < 1e-10
