"""Log-singular potentials, Birkhoff sums and the averaged-potential calculus.

A potential is a Hoelder part plus nonnegatively weighted logarithmic
singularities at dynamically active critical points:

    G(x) = g(x) + sum_c b_c * log|x - c|,   b_c >= 0.

Values live in R union {-inf}; exp(-inf) = 0 in every weight computation,
so exp(G) extends continuously by zero across each pole.  The extended
real -inf is represented by the ordinary float ``-inf``; the coboundary
term h (which is formally +inf at weighted poles) propagates a poisoned
NaN marker instead of signed infinities so that identity checks can
filter rather than evaluate inf - inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OrbitEscapeError, PreconditionError, VerificationError
from .maps import SmoothIntervalMap, julia_base_point, CANTOR_REPELLER

NEG_INFINITY = float("-inf")
POLE = float("nan")
POLE_SNAP_TOL = 1e-12

# Samples whose inspected orbit segment passes closer than this to a pole
# are excluded from coboundary identity checks (the identities hold
# pointwise off the poles only).
IDENTITY_FILTER_DIST = 1e-6

# Orbit-level proximity cutoff for the sup-bound check: the bound constant
# is formed from sup/inf over a compact set that must stay clear of the
# poles, so samples whose orbit grazes a pole are excluded.
SNBOUND_ORBIT_CUTOFF = 1e-2


def is_pole_marker(v: float) -> bool:
    return isinstance(v, float) and math.isnan(v)


# -- Hoelder parts -------------------------------------------------------------


@dataclass(frozen=True)
class ConstantPart:
    value_const: float

    def value(self, x: float) -> float:
        return self.value_const

    def value_array(self, xs: np.ndarray) -> np.ndarray:
        return np.full_like(np.asarray(xs, dtype=float), self.value_const)

    def describe(self) -> str:
        return f"constant({self.value_const:g})"


@dataclass(frozen=True)
class PolynomialPart:
    """Polynomial in ascending coefficient order: c0 + c1*x + c2*x^2 + ..."""

    coeffs: tuple[float, ...]

    def value(self, x: float) -> float:
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def value_array(self, xs: np.ndarray) -> np.ndarray:
        return np.polynomial.polynomial.polyval(np.asarray(xs, dtype=float), self.coeffs)

    def describe(self) -> str:
        return "poly(" + ",".join(f"{c:g}" for c in self.coeffs) + ")"


@dataclass(frozen=True)
class LogDerivPart:
    """scale * log|Df(x)| evaluated directly; smooth on the repeller, where
    the derivative is bounded away from zero."""

    map: SmoothIntervalMap
    scale: float

    def value(self, x: float) -> float:
        d = abs(self.map._deriv_raw(x))
        if d == 0.0:
            return NEG_INFINITY
        return self.scale * math.log(d)

    def value_array(self, xs: np.ndarray) -> np.ndarray:
        d = np.abs(self.map.deriv_array(np.asarray(xs, dtype=float)))
        with np.errstate(divide="ignore"):
            return self.scale * np.log(d)

    def describe(self) -> str:
        return f"{self.scale:g}*log|Df|"


# -- potentials ----------------------------------------------------------------


@dataclass(frozen=True)
class SingularPotential:
    """An element of the admissible potential class.

    ``singular_terms`` holds (location, weight) pairs with weight > 0;
    zero-weight terms are dropped at construction.  Use the factory
    functions (``geometric_potential``, ``singular_potential``,
    ``potential_from_spec``) so locations are checked against the map's
    dynamically active critical points.
    """

    hoelder: object
    singular_terms: tuple[tuple[float, float], ...] = ()
    provenance: str = "user"

    def __post_init__(self):
        for c, b in self.singular_terms:
            if b < 0:
                raise ValueError(
                    f"singular weight b={b!r} at c={c!r} is negative: "
                    "outside the admissible potential class"
                )

    @property
    def singular_points(self) -> tuple[float, ...]:
        return tuple(c for c, b in self.singular_terms if b > 0)

    def value(self, x: float) -> float:
        """G(x) in extended-real arithmetic (pole snap below 1e-12)."""
        total = self.hoelder.value(x)
        for c, b in self.singular_terms:
            d = abs(x - c)
            if d < POLE_SNAP_TOL:
                return NEG_INFINITY
            total += b * math.log(d)
        return total

    def value_array(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        total = np.asarray(self.hoelder.value_array(xs), dtype=float)
        for c, b in self.singular_terms:
            d = np.abs(xs - c)
            with np.errstate(divide="ignore"):
                term = b * np.log(d)
            term = np.where(d < POLE_SNAP_TOL, NEG_INFINITY, term)
            total = total + term
        return total

    def weight(self, x: float) -> float:
        return math.exp(self.value(x))

    def weight_array(self, xs: np.ndarray) -> np.ndarray:
        return np.exp(self.value_array(xs))

    def describe(self) -> str:
        if self.provenance.startswith("geometric"):
            return self.provenance
        if not self.singular_terms:
            return self.hoelder.describe()
        terms = "+".join(f"{b:g}*log|x-{c:g}|" for c, b in self.singular_terms)
        return f"{self.hoelder.describe()}+{terms}"

    def to_spec(self) -> dict:
        if self.provenance.startswith("geometric(t="):
            t = float(self.provenance[len("geometric(t="):-1])
            return {"kind": "geometric", "t": t}
        if isinstance(self.hoelder, ConstantPart) and not self.singular_terms:
            return {"kind": "constant", "value": self.hoelder.value_const}
        if isinstance(self.hoelder, PolynomialPart) and not self.singular_terms:
            return {"kind": "polynomial", "coeffs": list(self.hoelder.coeffs)}
        hoelder: dict
        if isinstance(self.hoelder, ConstantPart):
            hoelder = {"kind": "constant", "value": self.hoelder.value_const}
        elif isinstance(self.hoelder, PolynomialPart):
            hoelder = {"kind": "polynomial", "coeffs": list(self.hoelder.coeffs)}
        else:
            hoelder = {"kind": "named", "name": self.hoelder.describe()}
        return {
            "kind": "custom",
            "hoelder": hoelder,
            "singular": [{"c": c, "b": b} for c, b in self.singular_terms],
        }


@dataclass(frozen=True)
class AveragedPotential:
    """The window average (1/N) * (G + G.f + ... + G.f^(N-1)).

    Its pole set is the union of the first N backward images of the base
    pole set; it is never enumerated, poles surface lazily through value().
    ``singular_points`` reports the base pole set, which is what fold
    diagnostics track distances against.
    """

    base: SingularPotential
    map: SmoothIntervalMap
    window: int

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("averaging window must be >= 1")

    @property
    def singular_points(self) -> tuple[float, ...]:
        return self.base.singular_points

    def value(self, x: float) -> float:
        return birkhoff_sum(self.base, self.map, x, self.window) / self.window

    def describe(self) -> str:
        return f"avg[{self.window}]({self.base.describe()})"


def constant_potential(value: float) -> SingularPotential:
    return SingularPotential(ConstantPart(float(value)))


def polynomial_potential(coeffs) -> SingularPotential:
    return SingularPotential(PolynomialPart(tuple(float(c) for c in coeffs)))


def singular_potential(
    m: SmoothIntervalMap,
    hoelder,
    singular_terms,
    provenance: str = "user",
) -> SingularPotential:
    """Factory enforcing the admissibility gate: every pole location must
    be a critical point of ``m`` flagged as dynamically active."""
    kept = []
    for c, b in singular_terms:
        c, b = float(c), float(b)
        if b < 0:
            raise ValueError(f"singular weight b={b!r} must be >= 0")
        if b == 0.0:
            continue
        ok = any(
            abs(c - cp.location) < 1e-9 and cp.in_julia
            for cp in m.critical_points
        )
        if not ok:
            raise ValueError(
                f"pole location c={c!r} is not a dynamically active critical "
                "point of the map"
            )
        kept.append((c, b))
    return SingularPotential(hoelder, tuple(kept), provenance)


def geometric_potential(m: SmoothIntervalMap, t: float) -> SingularPotential:
    """-t * log|Df| for t <= 0 on a built-in quadratic-family map.

    |Df(x)| = 2a|x - 1/2| decomposes exactly into a constant Hoelder part
    -t*log(2a) plus the singular term (1/2, -t).  When the critical point
    escapes (Cantor repeller) the term list is empty and the potential is
    kept as a smooth rule on the repeller.
    """
    if m.family not in ("chebyshev", "logistic"):
        raise ValueError("geometric potential requires a built-in quadratic-family map")
    if t > 0:
        raise ValueError(
            f"t={t!r} > 0 would need a negative singular weight, "
            "outside the admissible class"
        )
    t = float(t)
    provenance = f"geometric(t={t:g})"
    a = m.params["a"]
    crit = m.critical_points[0]
    if t == 0.0:
        return SingularPotential(ConstantPart(0.0), (), provenance)
    if crit.in_julia:
        const = -t * math.log(2.0 * a)
        return SingularPotential(ConstantPart(const), ((crit.location, -t),), provenance)
    return SingularPotential(LogDerivPart(m, -t), (), provenance)


def potential_from_spec(m: SmoothIntervalMap, spec: dict) -> SingularPotential:
    """Construct a potential from its JSON description.

    Accepted forms: {"kind": "constant", "value": v} |
    {"kind": "polynomial", "coeffs": [...]} | {"kind": "geometric", "t": t} |
    {"kind": "custom", "hoelder": {...}, "singular": [{"c":, "b":}, ...]}.
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError('potential spec must be an object with a "kind" field')
    kind = spec["kind"]
    if kind == "constant":
        if "value" not in spec:
            raise ValueError('constant potential spec requires field "value"')
        return constant_potential(spec["value"])
    if kind == "polynomial":
        if "coeffs" not in spec:
            raise ValueError('polynomial potential spec requires field "coeffs"')
        return polynomial_potential(spec["coeffs"])
    if kind == "geometric":
        if "t" not in spec:
            raise ValueError('geometric potential spec requires field "t"')
        return geometric_potential(m, spec["t"])
    if kind == "custom":
        for key in ("hoelder", "singular"):
            if key not in spec:
                raise ValueError(f'custom potential spec requires field "{key}"')
        h = spec["hoelder"]
        if h.get("kind") == "constant":
            part = ConstantPart(float(h["value"]))
        elif h.get("kind") == "polynomial":
            part = PolynomialPart(tuple(float(c) for c in h["coeffs"]))
        else:
            raise ValueError("custom hoelder part must be constant or polynomial")
        terms = [(term["c"], term["b"]) for term in spec["singular"]]
        return singular_potential(m, part, terms)
    raise ValueError(f"unknown potential kind {kind!r}")


# -- module operations ---------------------------------------------------------


def eval_potential(G: SingularPotential, x: float) -> float:
    """G(x) with -inf at (and within snap tolerance of) each pole."""
    return G.value(x)


def singular_set(G: SingularPotential) -> list[float]:
    """Pole locations with positive weight, sorted ascending."""
    return sorted(G.singular_points)


def _orbit_or_raise(m: SmoothIntervalMap, x: float, n: int) -> tuple[float, ...]:
    orbit = m.iterate(x, n)
    if orbit.escaped() and orbit.escape_index <= n - 1:
        raise OrbitEscapeError(
            f"orbit of x={x!r} escaped the domain at step {orbit.escape_index}"
        )
    return orbit.points


def birkhoff_sum(G: SingularPotential, m: SmoothIntervalMap, x: float, n: int) -> float:
    """S_n at x: the sum of G along the first n orbit points.

    Returns -inf as soon as an orbit point is a pole; raises
    OrbitEscapeError when the orbit leaves the domain too early.
    """
    if n < 1:
        raise ValueError("birkhoff sum needs n >= 1")
    pts = _orbit_or_raise(m, x, n - 1)
    total = 0.0
    for p in pts:
        g = G.value(p)
        if g == NEG_INFINITY:
            return NEG_INFINITY
        total += g
    return total


def coboundary_h(G: SingularPotential, m: SmoothIntervalMap, N: int, x: float) -> float:
    """The transfer function h = -(1/N) * sum_{j<N} (N-1-j) * G(f^j(x)).

    h is formally +inf where a positively weighted orbit term hits a pole;
    those points return the poisoned NaN marker, which propagates through
    arithmetic so identity checks can filter them.
    """
    if N < 1:
        raise ValueError("averaging window must be >= 1")
    if N == 1:
        return 0.0
    pts = _orbit_or_raise(m, x, N - 2)
    total = 0.0
    for j, p in enumerate(pts):
        g = G.value(p)
        if g == NEG_INFINITY:
            return POLE
        total += (N - 1 - j) * g
    return -total / N


def averaged_potential_eval(
    G: SingularPotential, m: SmoothIntervalMap, N: int, x: float
) -> float:
    """(1/N) * S_N at x; -inf when the window touches a pole."""
    return birkhoff_sum(G, m, x, N) / N


def _grid_avoiding(points: np.ndarray, avoid: tuple[float, ...], margin: float) -> np.ndarray:
    if not avoid:
        return points
    keep = np.ones(len(points), dtype=bool)
    for c in avoid:
        keep &= np.abs(points - c) > margin
    return points[keep]


def default_sample_points(m: SmoothIntervalMap, count: int = 100) -> list[float]:
    """Deterministic sample points of the dynamically active set.

    Full-interval maps: an interior grid with an irrational offset so no
    sample lands exactly on a special algebraic point.  Repellers: branch
    itineraries of the fixed point, whose preimages have orbits that never
    escape (they land on the fixed point and stay).
    """
    if m.julia_structure != CANTOR_REPELLER:
        lo, hi = m.domain
        pad = (hi - lo) * 0.011
        return list(np.linspace(lo + pad, hi - pad, count) + (hi - lo) * 1.1e-4)
    base = julia_base_point(m)
    depth = 26
    out = []
    for i in range(count):
        # deterministic pseudo-random itinerary from a small LCG
        state = 2654435761 * (i + 1) % (2 ** 32)
        y = base
        for _ in range(depth):
            state = (1103515245 * state + 12345) % (2 ** 31)
            branch = m.branches[state % len(m.branches)]
            y = branch.inverse(y)
        out.append(y)
    return sorted(out)


def verify_cohomology(
    G: SingularPotential,
    m: SmoothIntervalMap,
    N: int,
    sample_points,
) -> float:
    """Max residual of the identity avg = G + h - h.f over filtered samples.

    Samples whose first N orbit points pass within 1e-6 of a pole are
    dropped (all three terms are only defined off the backward pole set).
    Raises VerificationError when every sample is filtered out.
    """
    lam = G.singular_points
    worst = 0.0
    used = 0
    for x in sample_points:
        try:
            pts = _orbit_or_raise(m, x, N)
        except OrbitEscapeError:
            continue
        if lam and any(
            abs(p - c) < IDENTITY_FILTER_DIST for p in pts[: N] for c in lam
        ):
            continue
        gtilde = averaged_potential_eval(G, m, N, x)
        rhs = G.value(x) + coboundary_h(G, m, N, x) - coboundary_h(G, m, N, pts[1])
        if not (math.isfinite(gtilde) and math.isfinite(rhs)):
            continue
        worst = max(worst, abs(gtilde - rhs))
        used += 1
    if used == 0:
        raise VerificationError("all cohomology samples were filtered out")
    return worst


@dataclass(frozen=True)
class SnBoundResult:
    """Sampled sup-bound comparison for the window-averaged potential."""

    lhs: float                    # sampled sup over K of |S_n(G) - S_n(avg)|
    bound: float                  # (N-1) * (sup_K G - inf_K G), sampled
    telescoping_residual: float   # max |S_n(avg) - S_n(G) - h.f^n + h|
    samples_used: int
    samples_filtered: int


def verify_snbound(
    G: SingularPotential,
    m: SmoothIntervalMap,
    N: int,
    K: list[tuple[float, float]],
    n: int,
    samples_per_component: int = 50,
    sample_points=None,
    orbit_pole_cutoff: float = SNBOUND_ORBIT_CUTOFF,
) -> SnBoundResult:
    """Check |S_n(G) - S_n(avg)| <= (N-1)(sup_K G - inf_K G) on samples of K.

    The exact telescoping identity S_n(avg) = S_n(G) + h - h.f^n is
    verified at every kept sample as well (summing avg = G + h - h.f
    along the orbit collapses the middle terms).  K must stay clear of
    the poles (checked on a dense grid); samples whose inspected orbit
    segment grazes a pole are excluded, mirroring the requirement that
    the compact set carrying the bound constant stays away from the
    backward pole set.
    """
    if N < 1 or n < 1:
        raise ValueError("window and horizon must be >= 1")
    lam = G.singular_points

    comps = [(float(lo), float(hi)) for lo, hi in K]
    dense = np.concatenate([np.linspace(lo, hi, 1000) for lo, hi in comps])
    for c in lam:
        if np.any(np.abs(dense - c) < POLE_SNAP_TOL):
            raise PreconditionError(f"pole {c!r} lies inside K")
    gvals = G.value_array(dense)
    if not np.all(np.isfinite(gvals)):
        raise PreconditionError("potential is not finite on all of K")
    bound = (N - 1) * float(gvals.max() - gvals.min())

    if sample_points is None:
        sample_points = []
        for lo, hi in comps:
            pad = (hi - lo) * 1e-3
            sample_points.extend(np.linspace(lo + pad, hi - pad, samples_per_component))

    horizon = n + N - 1
    lhs = 0.0
    tele = 0.0
    used = 0
    filtered = 0
    for x in sample_points:
        try:
            pts = _orbit_or_raise(m, x, horizon)
        except OrbitEscapeError:
            filtered += 1
            continue
        if lam and any(abs(p - c) < orbit_pole_cutoff for p in pts for c in lam):
            filtered += 1
            continue
        gs = [G.value(p) for p in pts]
        if not all(math.isfinite(g) for g in gs):
            filtered += 1
            continue
        prefix = [0.0]
        for g in gs:
            prefix.append(prefix[-1] + g)
        s_n = prefix[n]
        # S_n of the window average via prefix sums of the base potential
        s_n_avg = sum(prefix[j + N] - prefix[j] for j in range(n)) / N
        h0 = coboundary_h(G, m, N, x)
        hn = coboundary_h(G, m, N, pts[n])
        if not (math.isfinite(h0) and math.isfinite(hn)):
            filtered += 1
            continue
        lhs = max(lhs, abs(s_n - s_n_avg))
        tele = max(tele, abs(s_n_avg - s_n - h0 + hn))
        used += 1
    if used == 0:
        raise VerificationError("all sup-bound samples were filtered out")
    return SnBoundResult(lhs, bound, tele, used, filtered)


@dataclass(frozen=True)
class SupBirkhoffEstimate:
    """Grid lower estimate of sup over the active set of (1/n) * S_n."""

    value: float
    n: int
    grid_points: int
    refined: bool
    argmax: float


def sup_birkhoff_average(
    G: SingularPotential,
    m: SmoothIntervalMap,
    n: int,
    grid_size: int = 512,
    grid=None,
) -> SupBirkhoffEstimate:
    """Maximize (1/n) * S_n over a grid of the dynamically active set.

    Full-interval maps use a uniform grid refined once around the top
    decile; repellers use depth-10 cylinder representatives (preimages of
    the fixed point, so orbits never escape).  Pole-valued samples are
    skipped; the result is a lower estimate of the true sup.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    refined = False
    if grid is None:
        if m.julia_structure == CANTOR_REPELLER:
            from .preimage import enumerate_preimage_level

            grid = enumerate_preimage_level(m, julia_base_point(m), 10)
        else:
            lo, hi = m.domain
            grid = list(np.linspace(lo, hi, grid_size))
    grid = list(grid)

    def averages(points):
        out = []
        for x in points:
            try:
                s = birkhoff_sum(G, m, x, n)
            except OrbitEscapeError:
                continue
            if s == NEG_INFINITY:
                continue
            out.append((s / n, x))
        return out

    vals = averages(grid)
    if not vals:
        return SupBirkhoffEstimate(NEG_INFINITY, n, len(grid), False, math.nan)
    vals.sort(reverse=True)
    best, arg = vals[0]

    if m.julia_structure != CANTOR_REPELLER and len(vals) > 10:
        refined = True
        lo, hi = m.domain
        step = (hi - lo) / max(len(grid) - 1, 1)
        top = vals[: max(len(vals) // 10, 1)]
        extra = []
        for _, x in top:
            extra.extend(np.linspace(max(lo, x - step), min(hi, x + step), 11))
        for v, x in averages(extra):
            if v > best:
                best, arg = v, x
    return SupBirkhoffEstimate(best, n, len(grid), refined, arg)
