import math

import numpy as np
import pytest

from treepressure import (
    ConvergenceError,
    NEG_INFINITY,
    PreconditionError,
    chebyshev,
    constant_potential,
    default_pressure_oracle,
    enumerate_preimage_level,
    geometric_potential,
    grid_function,
    hyperbolicity_check,
    logistic,
    lower_bound_diagnostic,
    periodic_orbit_pressure,
    polynomial_potential,
    preimage_point,
    transfer_apply,
    tree_pressure,
    ulam_pressure,
)

CHEB = chebyshev()
LOGI = logistic(4.5)
LOG2 = math.log(2.0)


# -- tree pressure -------------------------------------------------------------


def test_tree_pressure_trivial_potential_is_exact():
    ests = tree_pressure(CHEB, constant_potential(0.0), 0.3, 12)
    assert len(ests) == 12
    for est in ests:
        assert abs(est.value - LOG2) < 1e-12
        assert est.diagnostics.leaf_count == 2 ** est.n
    assert ests[0].increment is None
    assert all(e.increment < 1e-12 for e in ests[1:])


def test_tree_pressure_at_critical_value_approaches_from_below():
    # brute-force counting oracle: the estimate must equal log(#level)/n
    ests = tree_pressure(CHEB, constant_potential(0.0), 0.0, 12)
    for est in ests:
        count = len(enumerate_preimage_level(CHEB, 0.0, est.n))
        assert est.diagnostics.leaf_count == count
        assert math.isclose(est.value, math.log(count) / est.n, rel_tol=1e-12)
        if est.n >= 2:  # the tree loses one branch at the critical value
            assert est.value < LOG2
    assert ests[-1].value > ests[1].value  # increasing back toward log 2


def test_tree_pressure_repeller_full_binary():
    ests = tree_pressure(LOGI, constant_potential(0.0), 0.3, 12)
    assert all(abs(e.value - LOG2) < 1e-12 for e in ests)
    assert ests[-1].diagnostics.leaf_count == 4096


def test_tree_pressure_truncates_on_all_pole_depth():
    G = geometric_potential(CHEB, -0.5)
    ests = tree_pressure(CHEB, G, 1.0, 8)
    # the only depth-1 preimage of 1 is the pole itself
    assert len(ests) == 1
    assert ests[0].value == NEG_INFINITY


# -- transfer operator ---------------------------------------------------------


def test_transfer_apply_examples():
    one = lambda y: 1.0
    assert transfer_apply(CHEB, constant_potential(0.0), one, 0.3) == 2.0
    assert transfer_apply(CHEB, constant_potential(0.0), one, 1.0) == 1.0
    got = transfer_apply(CHEB, geometric_potential(CHEB, -1.0), one, 0.0)
    assert math.isclose(got, 8.0, rel_tol=1e-12)


def test_transfer_apply_grid_function():
    xs = np.linspace(0.0, 1.0, 101)
    psi = grid_function(xs, xs)  # identity sampled on a grid
    got = transfer_apply(CHEB, constant_potential(0.0), psi, 0.0)
    assert math.isclose(got, 0.0 + 1.0, rel_tol=1e-9)


# -- ulam oracle ---------------------------------------------------------------


def test_ulam_trivial_weight_gives_entropy():
    est = ulam_pressure(CHEB, constant_potential(0.0), 1024)
    assert abs(est.value - LOG2) < 1e-2
    # row sums are exactly 2, so the estimate is in fact exact
    assert abs(est.value - LOG2) < 1e-12


def test_ulam_constant_shift_covariance():
    base = ulam_pressure(CHEB, constant_potential(0.0), 512)
    shifted = ulam_pressure(CHEB, constant_potential(0.7), 512)
    assert abs(shifted.value - base.value - 0.7) < 1e-3
    assert abs(shifted.value - (LOG2 + 0.7)) < 1e-2


def test_ulam_bin_gate_and_structure_gate():
    with pytest.raises(ValueError):
        ulam_pressure(CHEB, constant_potential(0.0), 32)
    with pytest.raises(ValueError):
        ulam_pressure(LOGI, constant_potential(0.0), 1024)


def test_ulam_geometric_matches_closed_form():
    # every invariant measure not charging the fixed point 0 has Lyapunov
    # exponent log 2 (tent conjugacy), so the pressure of s*log|Df| on the
    # full quadratic map is (1+s)*log 2 for 0 <= s <= 1
    G = geometric_potential(CHEB, -0.5)
    est = ulam_pressure(CHEB, G, 4096)
    assert abs(est.value - 1.5 * LOG2) < 1e-2


# -- periodic-orbit oracle -----------------------------------------------------


def test_periodic_pressure_trivial_weight():
    est = periodic_orbit_pressure(CHEB, constant_potential(0.0), 10)
    assert math.isclose(est.value, math.log(1024.0) / 10.0, rel_tol=1e-15)
    assert est.diagnostics["cycle_points"] == 1024


def test_periodic_pressure_constant_shift_exact():
    base = periodic_orbit_pressure(CHEB, constant_potential(0.0), 10)
    shifted = periodic_orbit_pressure(CHEB, constant_potential(0.7), 10)
    assert abs(shifted.value - base.value - 0.7) < 1e-9


def test_periodic_pressure_geometric_trace_formula():
    # cycle derivatives of the full quadratic map: |Df^n| = 2^n at every
    # periodic point except the endpoint fixed point, where it is 4^n; the
    # weighted sum for s = 1/2 is therefore (2^n - 1)*2^(n/2) + 2^n
    G = geometric_potential(CHEB, -0.5)
    for n in (6, 10, 14):
        expected = math.log((2.0 ** n - 1.0) * 2.0 ** (n / 2.0) + 2.0 ** n) / n
        est = periodic_orbit_pressure(CHEB, G, n)
        assert abs(est.value - expected) < 1e-9
    est = periodic_orbit_pressure(CHEB, G, 14)
    assert abs(est.value - 1.5 * LOG2) < 1e-2


def test_periodic_pressure_repeller_values():
    est = periodic_orbit_pressure(LOGI, constant_potential(0.0), 8)
    assert math.isclose(est.value, LOG2, rel_tol=1e-12)
    shifted = periodic_orbit_pressure(LOGI, constant_potential(-1.2), 8)
    assert abs(shifted.value - (LOG2 - 1.2)) < 1e-9


# -- estimator cross-agreement ------------------------------------------------


def test_constant_shift_covariance_tree():
    base = tree_pressure(CHEB, constant_potential(0.0), 0.3, 10)[-1]
    shifted = tree_pressure(CHEB, constant_potential(0.7), 0.3, 10)[-1]
    assert abs(shifted.value - base.value - 0.7) < 1e-9


def test_oracle_agreement_hoelder():
    G = polynomial_potential([0.0, 0.5])
    tree = tree_pressure(CHEB, G, 0.3, 14)[-1]
    ulam = ulam_pressure(CHEB, G, 2048)
    assert abs(tree.value - ulam.value) <= 1e-2


def test_upper_bound_direction_against_oracle():
    # one-sided: tree estimates do not exceed the spectral oracle by more
    # than the numerical slack, for the non-exceptional built-ins
    for G in (constant_potential(0.0), polynomial_potential([0.0, 0.5])):
        tree = tree_pressure(CHEB, G, 0.3, 14)[-1]
        ulam = ulam_pressure(CHEB, G, 2048)
        assert tree.value <= ulam.value + 2e-2


def test_monotone_leaf_accounting():
    for x in (0.3, 0.0, 1.0):
        ests = tree_pressure(CHEB, constant_potential(0.0), x, 10)
        leaves = [e.diagnostics.leaf_count for e in ests]
        for a, b in zip(leaves, leaves[1:]):
            assert b <= 2 * a


# -- hyperbolicity and the lower-bound diagnostic -------------------------------


def test_hyperbolicity_trivial_potential():
    oracle = ulam_pressure(CHEB, constant_potential(0.0), 1024)
    rep = hyperbolicity_check(CHEB, constant_potential(0.0), 5, 256, oracle)
    assert rep.verdict == "hyperbolic"
    assert abs(rep.margin - LOG2) < 1e-2
    assert rep.sup_estimate == 0.0


def test_hyperbolicity_constant_shift_invariance():
    G = constant_potential(LOG2)
    oracle = ulam_pressure(CHEB, G, 1024)
    rep = hyperbolicity_check(CHEB, G, 5, 256, oracle)
    assert rep.verdict == "hyperbolic"
    assert abs(rep.margin - LOG2) < 1e-2


def test_hyperbolicity_inconclusive_verdict():
    # a fake oracle below the sup makes the margin negative
    from treepressure import PressureEstimate

    fake = PressureEstimate("exact", 0.0, 0, "chebyshev", "constant(0)")
    rep = hyperbolicity_check(CHEB, constant_potential(0.0), 3, 128, fake)
    assert rep.verdict == "inconclusive"


def test_lower_bound_diagnostic_closed_form():
    oracle = ulam_pressure(CHEB, constant_potential(0.0), 1024)
    for n in (8, 12, 16):
        d = lower_bound_diagnostic(
            CHEB, constant_potential(0.0), 1, 0.3, n, 0.1, oracle
        )
        assert d.holds
        assert d.bound_constant == 0.0
        assert abs(d.lhs_log - n * LOG2) < 1e-9
        assert abs(d.rhs_log - n * (LOG2 - 0.1)) < 1e-9


def test_lower_bound_diagnostic_hoelder():
    G = polynomial_potential([0.0, 0.5])
    oracle = ulam_pressure(CHEB, G, 1024)
    d = lower_bound_diagnostic(CHEB, G, 1, 0.3, 16, 0.05, oracle)
    assert d.holds


def test_lower_bound_rejects_pole_on_orbit():
    G = geometric_potential(CHEB, -0.5)
    oracle = periodic_orbit_pressure(CHEB, G, 10)
    with pytest.raises(PreconditionError):
        lower_bound_diagnostic(CHEB, G, 1, 0.5, 8, 0.1, oracle)


def test_default_pressure_oracle_dispatch():
    assert default_pressure_oracle(CHEB, constant_potential(0.0)).method == "ulam"
    assert default_pressure_oracle(LOGI, constant_potential(0.0)).method == "periodic"
