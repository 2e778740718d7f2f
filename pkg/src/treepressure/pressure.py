"""Pressure estimators: preimage-tree limits and their independent oracles.

The tree estimator evaluates (1/n) * log sum over n-th preimages of
exp(Birkhoff sum); for admissible configurations it converges to the
topological pressure.  Two independent oracles cross-check it: the
leading eigenvalue of a weighted transfer matrix on interval bins
(full-interval maps) and weighted periodic-orbit sums (all built-ins).
None of the three shares code with the others past the map itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .errors import ConvergenceError, DepthCapError, PeriodCapError, PreconditionError
from .maps import (
    CANTOR_REPELLER,
    FULL_INTERVAL,
    SmoothIntervalMap,
    TentConjugacy,
    periodic_points,
)
from .potentials import NEG_INFINITY, POLE_SNAP_TOL, AveragedPotential, sup_birkhoff_average
from .preimage import DEFAULT_DEPTH_CAP, preimage_tree_fold, preimages

MIN_ULAM_BINS = 64
POWER_ITERATION_TOL = 1e-10


@dataclass(frozen=True)
class PressureEstimate:
    """One pressure estimate with its method, size parameter and diagnostics."""

    method: str            # "tree" | "ulam" | "periodic" | "exact"
    value: float
    n: int                 # tree/periodic depth, or bin count for ulam
    map_id: str
    potential_id: str
    diagnostics: object = None
    increment: float | None = None   # |P_n - P_{n-1}| for tree sequences


@dataclass(frozen=True)
class HyperbolicityReport:
    sup_estimate: float
    pressure_value: float
    pressure_method: str
    n: int                 # window achieving the smallest sup estimate
    margin: float
    verdict: str           # "hyperbolic" | "inconclusive"
    slack: float


@dataclass(frozen=True)
class LowerBoundDiagnostic:
    """Both sides of the iterated-transfer lower bound at one point."""

    holds: bool
    lhs_log: float
    rhs_log: float
    bound_constant: float
    pressure_value: float
    window: int
    epsilon: float
    fold: object


def _logsumexp(terms) -> float:
    finite = [t for t in terms if t != NEG_INFINITY]
    if not finite:
        return NEG_INFINITY
    top = max(finite)
    return top + math.log(math.fsum(math.exp(t - top) for t in finite))


def tree_pressure(
    m: SmoothIntervalMap,
    G,
    x: float,
    n_max: int,
    mode: str = "serial",
    depth_cap: int = DEFAULT_DEPTH_CAP,
) -> list[PressureEstimate]:
    """The sequence P_n = (1/n) * log_sum of depth-n tree folds, n = 1..n_max.

    Each estimate carries its fold diagnostics and the Cauchy increment
    |P_n - P_{n-1}|.  If every path dies at a pole at some depth the -inf
    estimate is recorded and the sequence is truncated there.
    """
    if n_max > depth_cap:
        raise DepthCapError(f"depth {n_max} exceeds cap {depth_cap}")
    estimates: list[PressureEstimate] = []
    prev: float | None = None
    for n in range(1, n_max + 1):
        fold = preimage_tree_fold(m, G, x, n, mode=mode, depth_cap=depth_cap)
        value = fold.log_sum / n if fold.log_sum != NEG_INFINITY else NEG_INFINITY
        inc = abs(value - prev) if prev is not None and math.isfinite(value) else None
        estimates.append(
            PressureEstimate(
                "tree", value, n, m.describe(), G.describe(),
                diagnostics=fold, increment=inc,
            )
        )
        if value == NEG_INFINITY:
            break
        prev = value
    return estimates


def transfer_apply(m: SmoothIntervalMap, G, psi, x: float) -> float:
    """One application of the weighted preimage-sum operator to psi at x."""
    total = 0.0
    for y in preimages(m, x):
        g = G.value(y)
        if g == NEG_INFINITY:
            continue
        total += math.exp(g) * psi(y)
    return total


def grid_function(xs, vals):
    """Linear interpolant through (xs, vals), for grid-sampled test functions."""
    xs = np.asarray(xs, dtype=float)
    vals = np.asarray(vals, dtype=float)

    def psi(x: float) -> float:
        return float(np.interp(x, xs, vals))

    return psi


def _ulam_matrix(m: SmoothIntervalMap, G, bins: int) -> sp.csr_matrix:
    """Projection of the weighted preimage-sum operator onto bin indicators.

    Entry (i, j) integrates the weight exp(G) over the part of cell j that
    f carries into cell i; the integral is taken in image coordinates
    (which absorbs the Jacobian exactly) with Gauss-Legendre quadrature on
    each branch piece, 64 points for cells containing a pole, 32 otherwise.
    """
    lo, hi = m.domain
    edges = np.linspace(lo, hi, bins + 1)
    delta = (hi - lo) / bins
    n32, w32 = np.polynomial.legendre.leggauss(32)
    n64, w64 = np.polynomial.legendre.leggauss(64)
    poles = G.singular_points

    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    for b in m.branches:
        j_start = max(int(np.searchsorted(edges, b.lo, side="right")) - 1, 0)
        j_end = min(int(np.searchsorted(edges, b.hi, side="left")), bins)
        for j in range(j_start, j_end):
            ylo = max(edges[j], b.lo)
            yhi = min(edges[j + 1], b.hi)
            if yhi - ylo <= 1e-15:
                continue
            fa = m._eval_raw(ylo)
            fb = m._eval_raw(yhi)
            c, d = (fa, fb) if fa <= fb else (fb, fa)
            c = max(c, lo)
            d = min(d, hi)
            if d - c <= 1e-15:
                continue
            nodes, weights = n32, w32
            if any(ylo - delta <= p <= yhi + delta for p in poles):
                nodes, weights = n64, w64
            i0 = max(int(np.searchsorted(edges, c, side="right")) - 1, 0)
            i1 = min(int(np.searchsorted(edges, d, side="left")) - 1, bins - 1)
            for i in range(i0, i1 + 1):
                xlo = max(c, edges[i])
                xhi = min(d, edges[i + 1])
                if xhi - xlo <= 1e-15:
                    continue
                mid = 0.5 * (xlo + xhi)
                half = 0.5 * (xhi - xlo)
                xs = mid + half * nodes
                if b.inverse_array is not None:
                    ys = b.inverse_array(xs)
                else:
                    ys = np.array([b.inverse(t) for t in xs])
                integral = half * float(weights @ G.weight_array(ys))
                rows.append(i)
                cols.append(j)
                vals.append(integral / delta)
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(bins, bins))
    return mat.tocsr()


def ulam_pressure(
    m: SmoothIntervalMap,
    G,
    bins: int,
    iters: int = 5000,
    tol: float = POWER_ITERATION_TOL,
) -> PressureEstimate:
    """Log of the leading eigenvalue of the weighted bin-transfer matrix.

    Valid for full-interval maps only: on a repeller the invariant set has
    measure zero and bins carry no dynamical mass.  The weight exp(G) is
    continuous (it vanishes at the poles), so plain Gauss quadrature is
    adequate; convergence of the leading eigenvalue is heuristic, not
    certified, which is why this estimator is used for cross-agreement
    rather than as ground truth.
    """
    if m.julia_structure == CANTOR_REPELLER:
        raise ValueError("bin discretization is unavailable on a Cantor repeller")
    if bins < MIN_ULAM_BINS:
        raise ValueError(f"bins={bins} below minimum {MIN_ULAM_BINS}")
    mat = _ulam_matrix(m, G, bins)
    v = np.full(bins, 1.0 / bins)
    lam_prev = None
    for _ in range(iters):
        w = mat @ v
        s = float(w.sum())
        if not (s > 0.0) or not math.isfinite(s):
            raise ConvergenceError("transfer matrix annihilated the test vector")
        v = w / s
        if lam_prev is not None and abs(s - lam_prev) < tol:
            return PressureEstimate(
                "ulam", math.log(s), bins, m.describe(), G.describe(),
                diagnostics={"eigenvalue": s, "residual": abs(s - lam_prev)},
            )
        lam_prev = s
    raise ConvergenceError(f"power iteration did not converge in {iters} steps")


def _chebyshev_cycle_terms(m: SmoothIntervalMap, G, n: int):
    """Birkhoff sums over all period-n points via exact rational angles.

    The angle orbit is computed in exact arithmetic, so orbit points carry
    no iteration drift; each is mapped through the conjugacy only once.
    """
    conj = m.conjugacy
    terms = []
    annihilated = 0
    for theta in TentConjugacy.periodic_angles(n):
        s = 0.0
        ok = True
        t = theta
        for _ in range(n):
            g = G.value(conj.to_interval(t))
            if g == NEG_INFINITY:
                ok = False
                break
            s += g
            t = TentConjugacy.tent(t)
        if ok:
            terms.append(s)
        else:
            annihilated += 1
    return terms, annihilated


def _repeller_cycle_terms(m: SmoothIntervalMap, G, n: int):
    """Birkhoff sums over all period-n points of the two-branch repeller.

    Every branch itinerary of length n carries exactly one periodic
    point, found by iterating the composed inverse contraction; orbit
    points are looked up from rotated itineraries so they share no
    iteration drift either.
    """
    inverses = [b.inverse for b in m.branches]
    point_of: dict[tuple[int, ...], float] = {}
    for code in range(2 ** n):
        itin = tuple((code >> k) & 1 for k in range(n))
        y = 0.5
        for _ in range(200):
            y_new = y
            for s in reversed(itin):
                y_new = inverses[s](y_new)
            if abs(y_new - y) < 1e-15:
                y = y_new
                break
            y = y_new
        point_of[itin] = y
    terms = []
    annihilated = 0
    for itin, p in point_of.items():
        s = 0.0
        ok = True
        for j in range(n):
            rotated = itin[j:] + itin[:j]
            g = G.value(point_of[rotated])
            if g == NEG_INFINITY:
                ok = False
                break
            s += g
        if ok:
            terms.append(s)
        else:
            annihilated += 1
    return terms, annihilated


def periodic_orbit_pressure(
    m: SmoothIntervalMap, G, n: int, cap: int = 16
) -> PressureEstimate:
    """(1/n) * log sum over period-n points of exp(Birkhoff sum).

    Pole-hitting cycles contribute zero and are counted; an error is
    raised when no periodic points survive at all.
    """
    if n < 1:
        raise ValueError("period must be >= 1")
    if n > cap:
        raise PeriodCapError(f"period {n} exceeds cap {cap}")
    if m.conjugacy is not None:
        terms, annihilated = _chebyshev_cycle_terms(m, G, n)
    elif m.family == "logistic":
        terms, annihilated = _repeller_cycle_terms(m, G, n)
    else:
        pts = periodic_points(m, n, cap=cap)
        terms = []
        annihilated = 0
        for p, _ in pts:
            s = 0.0
            ok = True
            v = p
            for _ in range(n):
                g = G.value(v)
                if g == NEG_INFINITY:
                    ok = False
                    break
                s += g
                v = m._eval_raw(v)
            if ok:
                terms.append(s)
            else:
                annihilated += 1
    if not terms:
        raise ConvergenceError("no periodic points with finite weight found")
    value = _logsumexp(terms) / n
    return PressureEstimate(
        "periodic", value, n, m.describe(), G.describe(),
        diagnostics={"cycle_points": len(terms), "annihilated": annihilated},
    )


def default_pressure_oracle(
    m: SmoothIntervalMap, G, bins: int = 1024, periodic_n: int = 10
) -> PressureEstimate:
    """The standard oracle for a map: bin-spectral when the whole interval
    is active, periodic-orbit sums on a repeller."""
    if m.julia_structure == FULL_INTERVAL:
        return ulam_pressure(m, G, bins)
    return periodic_orbit_pressure(m, G, periodic_n)


def hyperbolicity_check(
    m: SmoothIntervalMap,
    G,
    n: int,
    grid_size: int,
    pressure_estimate: PressureEstimate,
    slack: float = 1e-2,
) -> HyperbolicityReport:
    """Compare the best normalized Birkhoff sup against a pressure oracle.

    The verdict is "hyperbolic" only when the margin exceeds the declared
    slack; the strict inequality of the definition is not numerically
    decidable, so "inconclusive" is a valid outcome, not an error.
    """
    best = None
    for k in range(1, n + 1):
        est = sup_birkhoff_average(G, m, k, grid_size)
        if est.value == NEG_INFINITY:
            continue
        if best is None or est.value < best.value:
            best = est
    if best is None:
        raise PreconditionError("no finite Birkhoff averages found on the grid")
    margin = pressure_estimate.value - best.value
    verdict = "hyperbolic" if margin > slack else "inconclusive"
    return HyperbolicityReport(
        best.value, pressure_estimate.value, pressure_estimate.method,
        best.n, margin, verdict, slack,
    )


def lower_bound_diagnostic(
    m: SmoothIntervalMap,
    G,
    N: int,
    x: float,
    n: int,
    epsilon: float,
    pressure_estimate: PressureEstimate | None = None,
    grid_size: int = 512,
    mode: str = "serial",
    depth_cap: int = DEFAULT_DEPTH_CAP,
) -> LowerBoundDiagnostic:
    """Test the iterated-operator lower bound at x for the window average.

    The left side is the depth-n tree fold of the window-averaged
    potential; the right side is exp(C) * exp(n * (P - epsilon)) with C
    the sup-bound constant over the orbit of x.  Requires the potential to
    be hyperbolic at window N against the supplied pressure oracle.
    """
    if pressure_estimate is None:
        pressure_estimate = default_pressure_oracle(m, G)
    sup_n = sup_birkhoff_average(G, m, N, grid_size)
    if not sup_n.value < pressure_estimate.value:
        raise PreconditionError(
            f"potential not hyperbolic at window {N}: "
            f"sup={sup_n.value!r} >= pressure={pressure_estimate.value!r}"
        )
    orbit = m.iterate(x, n + N)
    if orbit.escaped():
        raise PreconditionError(f"orbit of x={x!r} escapes the domain")
    lam = G.singular_points
    for p in orbit.points:
        if any(abs(p - c) < POLE_SNAP_TOL for c in lam):
            raise PreconditionError(f"pole on the orbit of x={x!r}")
    gvals = [G.value(p) for p in orbit.points]
    bound_constant = (N - 1) * (max(gvals) - min(gvals))

    averaged = AveragedPotential(G, m, N)
    fold = preimage_tree_fold(m, averaged, x, n, mode=mode, depth_cap=depth_cap)
    lhs_log = fold.log_sum
    rhs_log = bound_constant + n * (pressure_estimate.value - epsilon)
    return LowerBoundDiagnostic(
        holds=bool(lhs_log >= rhs_log),
        lhs_log=lhs_log,
        rhs_log=rhs_log,
        bound_constant=bound_constant,
        pressure_value=pressure_estimate.value,
        window=N,
        epsilon=epsilon,
        fold=fold,
    )
