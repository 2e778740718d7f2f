"""Smooth multimodal interval maps with explicit branch structure.

Two certified families are built in: the full quadratic map 4x(1-x) on
[0, 1] (one critical point, the whole interval is dynamically active) and
the escaping quadratic family a*x*(1-x) for a >= 4.4, whose non-escaping
set is a uniformly expanding Cantor repeller.  User-supplied polynomial
maps are accepted but carry an "unverified" flag: their branch structure
is detected numerically and nothing about hyperbolicity is certified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import MapDomainError, PeriodCapError

FULL_INTERVAL = "full_interval"
CANTOR_REPELLER = "cantor_repeller"

DOMAIN_TOL = 1e-12
ROOT_RESIDUAL_TOL = 1e-13
PERIODIC_DEDUP_TOL = 1e-9
DEFAULT_PERIOD_CAP = 16

# Parameters at or above this value certify a uniformly expanding repeller
# (safety margin over 2 + sqrt(5) ~ 4.236).
MIN_REPELLER_PARAM = 4.4


@dataclass(frozen=True)
class CriticalPoint:
    """A point where the derivative vanishes, with its local order."""

    location: float
    order: int
    in_julia: bool


@dataclass(frozen=True)
class MonotoneBranch:
    """A maximal interval of strict monotonicity, with its inverse.

    ``inverse`` maps a value in [image_lo, image_hi] back into [lo, hi];
    ``inverse_array`` is a vectorized variant when a closed form exists.
    """

    lo: float
    hi: float
    increasing: bool
    image_lo: float
    image_hi: float
    inverse: Callable[[float], float]
    inverse_array: Callable[[np.ndarray], np.ndarray] | None = None

    def contains(self, x: float, tol: float = DOMAIN_TOL) -> bool:
        return self.lo - tol <= x <= self.hi + tol

    def covers_value(self, y: float, tol: float = DOMAIN_TOL) -> bool:
        return self.image_lo - tol <= y <= self.image_hi + tol


class TentConjugacy:
    """Conjugacy h(theta) = sin^2(pi*theta/2) between the tent map and the
    full quadratic map: f(h(theta)) = h(T(theta)) with T the tent map."""

    @staticmethod
    def tent(theta):
        # Works for float and Fraction alike.
        half = Fraction(1, 2) if isinstance(theta, Fraction) else 0.5
        return 2 * theta if theta <= half else 2 * (1 - theta)

    @staticmethod
    def to_interval(theta) -> float:
        return 0.5 * (1.0 - math.cos(math.pi * float(theta)))

    @staticmethod
    def periodic_angles(n: int) -> list[Fraction]:
        """All 2^n fixed points of the n-fold tent map, ascending.

        Lap i of the n-th iterate covers [i/2^n, (i+1)/2^n] with slope
        +2^n (i even) or -2^n (i odd); each lap crosses the diagonal once.
        """
        if n < 1:
            raise ValueError("period must be >= 1")
        two_n = 2 ** n
        angles = []
        for i in range(two_n):
            if i % 2 == 0:
                angles.append(Fraction(i, two_n - 1))
            else:
                angles.append(Fraction(i + 1, two_n + 1))
        return angles


@dataclass(frozen=True)
class Orbit:
    """A forward orbit segment [x, f(x), ..., f^n(x)].

    ``escape_index`` is the index of the first point outside the domain;
    iteration stops there (escape is data, not an error).  The list is
    shorter than n + 1 exactly when escape occurred.
    """

    points: tuple[float, ...]
    escape_index: int | None = None

    def escaped(self) -> bool:
        return self.escape_index is not None


@dataclass(frozen=True)
class SmoothIntervalMap:
    """A piecewise-monotone differentiable self-map of a compact interval."""

    family: str
    domain: tuple[float, float]
    params: dict
    critical_points: tuple[CriticalPoint, ...]
    branches: tuple[MonotoneBranch, ...]
    julia_structure: str
    class_a_certified: bool
    conjugacy: TentConjugacy | None = field(default=None, compare=False)

    # -- pointwise evaluation ------------------------------------------------

    def in_domain(self, x: float, tol: float = DOMAIN_TOL) -> bool:
        lo, hi = self.domain
        return lo - tol <= x <= hi + tol

    def _check_domain(self, x: float) -> None:
        if not self.in_domain(x):
            raise MapDomainError(
                f"x={x!r} outside domain [{self.domain[0]}, {self.domain[1]}]"
            )

    def eval(self, x: float) -> float:
        """f(x).  Raises MapDomainError when x is outside the domain."""
        self._check_domain(x)
        return self._eval_raw(x)

    def _eval_raw(self, x: float) -> float:
        if self.family in ("chebyshev", "logistic"):
            return self.params["a"] * x * (1.0 - x)
        coeffs = self.params["coeffs"]
        acc = 0.0
        for c in reversed(coeffs):
            acc = acc * x + c
        return acc

    def deriv(self, x: float) -> float:
        """Df(x).  Raises MapDomainError when x is outside the domain."""
        self._check_domain(x)
        return self._deriv_raw(x)

    def _deriv_raw(self, x: float) -> float:
        if self.family in ("chebyshev", "logistic"):
            a = self.params["a"]
            return a - 2.0 * a * x
        coeffs = self.params["coeffs"]
        acc = 0.0
        for k in range(len(coeffs) - 1, 0, -1):
            acc = acc * x + k * coeffs[k]
        return acc

    def eval_array(self, xs: np.ndarray) -> np.ndarray:
        if self.family in ("chebyshev", "logistic"):
            return self.params["a"] * xs * (1.0 - xs)
        return np.polynomial.polynomial.polyval(xs, self.params["coeffs"])

    def deriv_array(self, xs: np.ndarray) -> np.ndarray:
        if self.family in ("chebyshev", "logistic"):
            a = self.params["a"]
            return a - 2.0 * a * xs
        dcoeffs = np.polynomial.polynomial.polyder(np.asarray(self.params["coeffs"]))
        return np.polynomial.polynomial.polyval(xs, dcoeffs)

    # -- orbits --------------------------------------------------------------

    def iterate(self, x: float, n: int) -> Orbit:
        """Forward orbit [x, f(x), ..., f^n(x)], truncated at first escape."""
        self._check_domain(x)
        if n < 0:
            raise ValueError("orbit length must be >= 0")
        pts = [x]
        cur = x
        for _ in range(n):
            cur = self._eval_raw(cur)
            pts.append(cur)
            if not self.in_domain(cur):
                return Orbit(tuple(pts), escape_index=len(pts) - 1)
        return Orbit(tuple(pts))

    def branch_containing(self, x: float) -> int:
        """Index of the branch whose interval contains x (lowest index wins)."""
        self._check_domain(x)
        for i, b in enumerate(self.branches):
            if b.contains(x):
                return i
        raise MapDomainError(f"no branch contains x={x!r}")

    # -- description ---------------------------------------------------------

    def describe(self) -> str:
        if self.family == "chebyshev":
            return "chebyshev"
        if self.family == "logistic":
            return f"logistic(a={self.params['a']:g})"
        return f"polynomial(deg={len(self.params['coeffs']) - 1}, unverified)"

    def to_spec(self) -> dict:
        if self.family == "chebyshev":
            return {"family": "chebyshev"}
        if self.family == "logistic":
            return {"family": "logistic", "a": self.params["a"]}
        return {
            "family": "polynomial",
            "coeffs": list(self.params["coeffs"]),
            "domain": list(self.domain),
        }


# -- built-in constructors ---------------------------------------------------


def _quadratic_branches(a: float) -> tuple[MonotoneBranch, MonotoneBranch]:
    peak = a / 4.0

    def inv_left(y: float) -> float:
        r = 1.0 - 4.0 * y / a
        if r < 0.0:
            r = 0.0
        return 0.5 * (1.0 - math.sqrt(r))

    def inv_right(y: float) -> float:
        r = 1.0 - 4.0 * y / a
        if r < 0.0:
            r = 0.0
        return 0.5 * (1.0 + math.sqrt(r))

    def inv_left_arr(ys: np.ndarray) -> np.ndarray:
        r = np.maximum(1.0 - 4.0 * ys / a, 0.0)
        return 0.5 * (1.0 - np.sqrt(r))

    def inv_right_arr(ys: np.ndarray) -> np.ndarray:
        r = np.maximum(1.0 - 4.0 * ys / a, 0.0)
        return 0.5 * (1.0 + np.sqrt(r))

    left = MonotoneBranch(0.0, 0.5, True, 0.0, peak, inv_left, inv_left_arr)
    right = MonotoneBranch(0.5, 1.0, False, 0.0, peak, inv_right, inv_right_arr)
    return left, right


def chebyshev() -> SmoothIntervalMap:
    """The full quadratic map x -> 4x(1-x) on [0, 1].

    Critical point 1/2 with order 2, degree-2 full branches with
    closed-form inverses, and the tent-map conjugacy attached.
    """
    return SmoothIntervalMap(
        family="chebyshev",
        domain=(0.0, 1.0),
        params={"a": 4.0},
        critical_points=(CriticalPoint(0.5, 2, in_julia=True),),
        branches=_quadratic_branches(4.0),
        julia_structure=FULL_INTERVAL,
        class_a_certified=True,
        conjugacy=TentConjugacy(),
    )


def logistic(a: float) -> SmoothIntervalMap:
    """The escaping quadratic map x -> a*x*(1-x) on [0, 1], a >= 4.4.

    The non-escaping set is a uniformly expanding Cantor repeller; the
    critical point 1/2 escapes and is therefore not dynamically active.
    """
    if a < MIN_REPELLER_PARAM:
        raise ValueError(
            f"logistic parameter a={a!r} below {MIN_REPELLER_PARAM}: "
            "expanding repeller not certified by this artifact"
        )
    return SmoothIntervalMap(
        family="logistic",
        domain=(0.0, 1.0),
        params={"a": float(a)},
        critical_points=(CriticalPoint(0.5, 2, in_julia=False),),
        branches=_quadratic_branches(float(a)),
        julia_structure=CANTOR_REPELLER,
        class_a_certified=True,
        conjugacy=None,
    )


def _bracketed_root(f: Callable[[float], float], lo: float, hi: float,
                    tol: float = ROOT_RESIDUAL_TOL) -> float:
    """Secant steps safeguarded by a sign-change bracket (bisection fallback)."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise ValueError("no sign change on bracket")
    x, fx = lo, flo
    for _ in range(200):
        # secant step, replaced by the midpoint when it leaves the bracket
        denom = fhi - flo
        if denom != 0.0:
            x = hi - fhi * (hi - lo) / denom
        if denom == 0.0 or not lo < x < hi:
            x = 0.5 * (lo + hi)
        fx = f(x)
        if abs(fx) < tol:
            return x
        if flo * fx < 0.0:
            hi, fhi = x, fx
        else:
            lo, flo = x, fx
        if hi - lo < 1e-16 * max(1.0, abs(x)):
            return x
    return x


def polynomial_map(coeffs: list[float], domain: tuple[float, float]) -> SmoothIntervalMap:
    """A user-supplied polynomial map with numerically detected branches.

    Class membership (complete invariance, hyperbolic periodic points,
    topological exactness) is NOT verified; the map carries
    ``class_a_certified=False`` and downstream results are exploratory.
    """
    lo, hi = float(domain[0]), float(domain[1])
    if not lo < hi:
        raise ValueError("domain must be a nondegenerate interval [lo, hi]")
    coeffs = [float(c) for c in coeffs]
    if len(coeffs) < 3:
        raise ValueError("polynomial map must have degree >= 2 (non-injective)")

    dcoeffs = np.polynomial.polynomial.polyder(np.asarray(coeffs))
    crits = []
    for r in np.polynomial.polynomial.polyroots(dcoeffs):
        if abs(r.imag) < 1e-10 and lo + 1e-12 < r.real < hi - 1e-12:
            crits.append(float(r.real))
    crits.sort()

    def f(x: float) -> float:
        acc = 0.0
        for c in reversed(coeffs):
            acc = acc * x + c
        return acc

    cuts = [lo] + crits + [hi]
    branches = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        fa, fb = f(a), f(b)
        increasing = fb > fa
        img_lo, img_hi = (fa, fb) if increasing else (fb, fa)

        def make_inverse(a=a, b=b):
            def inv(y: float) -> float:
                return _bracketed_root(lambda t: f(t) - y, a, b)
            return inv

        branches.append(
            MonotoneBranch(a, b, increasing, img_lo, img_hi, make_inverse())
        )

    critical_points = tuple(
        CriticalPoint(c, 2, in_julia=True) for c in crits
    )
    return SmoothIntervalMap(
        family="polynomial",
        domain=(lo, hi),
        params={"coeffs": coeffs},
        critical_points=critical_points,
        branches=tuple(branches),
        julia_structure=FULL_INTERVAL,
        class_a_certified=False,
        conjugacy=None,
    )


def map_from_spec(spec: dict) -> SmoothIntervalMap:
    """Construct a map from its JSON description.

    Accepted forms: {"family": "chebyshev"} | {"family": "logistic", "a": 4.5}
    | {"family": "polynomial", "coeffs": [...], "domain": [lo, hi]}.
    """
    if not isinstance(spec, dict) or "family" not in spec:
        raise ValueError('map spec must be an object with a "family" field')
    family = spec["family"]
    if family == "chebyshev":
        return chebyshev()
    if family == "logistic":
        if "a" not in spec:
            raise ValueError('logistic map spec requires field "a"')
        return logistic(float(spec["a"]))
    if family == "polynomial":
        for key in ("coeffs", "domain"):
            if key not in spec:
                raise ValueError(f'polynomial map spec requires field "{key}"')
        return polynomial_map(spec["coeffs"], tuple(spec["domain"]))
    raise ValueError(f"unknown map family {family!r}")


def julia_base_point(m: SmoothIntervalMap) -> float:
    """A convenient point of the dynamically active set.

    For the quadratic family this is the positive fixed point 1 - 1/a,
    whose preimages enumerate cylinder representatives without escape.
    """
    if m.family in ("chebyshev", "logistic"):
        return 1.0 - 1.0 / m.params["a"]
    return 0.5 * (m.domain[0] + m.domain[1])


# -- periodic points ----------------------------------------------------------


def _branch_cylinders(m: SmoothIntervalMap, depth: int) -> list[tuple[float, float]]:
    """Depth-d monotonicity intervals of the d-fold composition.

    One interval per admissible branch itinerary; the d-th iterate is
    strictly monotone on each and maps it onto a full sub-interval of the
    image, so each cylinder contains at most one solution of f^d(p) = p.
    """
    cyls = [(m.domain[0], m.domain[1])]
    for _ in range(depth):
        nxt = []
        for b in m.branches:
            for (clo, chi) in cyls:
                seg_lo = max(clo, b.image_lo)
                seg_hi = min(chi, b.image_hi)
                if seg_hi - seg_lo <= 1e-15:
                    continue
                u, v = b.inverse(seg_lo), b.inverse(seg_hi)
                if u > v:
                    u, v = v, u
                if v - u > 1e-15:
                    nxt.append((u, v))
        cyls = nxt
    cyls.sort()
    return cyls


def _iterate_raw(m: SmoothIntervalMap, x: float, n: int) -> float:
    for _ in range(n):
        x = m._eval_raw(x)
    return x


def _polish_periodic(m: SmoothIntervalMap, p: float, n: int) -> float:
    # one or two Newton steps on f^n(p) - p; the cycle derivative dominates 1
    for _ in range(2):
        v, dv = p, 1.0
        for _ in range(n):
            dv *= m._deriv_raw(v)
            v = m._eval_raw(v)
        res = v - p
        if abs(res) < 1e-14 or dv == 1.0:
            return p
        step = res / (dv - 1.0)
        q = p - step
        lo, hi = m.domain
        if lo <= q <= hi:
            p = q
    return p


def periodic_points(
    m: SmoothIntervalMap, n: int, cap: int = DEFAULT_PERIOD_CAP
) -> list[tuple[float, bool]]:
    """All solutions of f^n(p) = p in the dynamically active set.

    Returns (point, exact) pairs sorted ascending.  For the full quadratic
    map the points come from the tent conjugacy (rational angles, so the
    count is exactly 2^n and the flag is True); otherwise cylinders of the
    n-fold composition are root-isolated numerically.
    """
    if n < 1:
        raise ValueError("period must be >= 1")
    if n > cap:
        raise PeriodCapError(f"period {n} exceeds cap {cap}")

    if m.conjugacy is not None:
        pts = [(m.conjugacy.to_interval(t), True) for t in TentConjugacy.periodic_angles(n)]
        return pts

    found: list[float] = []
    for clo, chi in _branch_cylinders(m, n):
        g = lambda p: _iterate_raw(m, p, n) - p
        glo, ghi = g(clo), g(chi)
        if glo == 0.0:
            root = clo
        elif ghi == 0.0:
            root = chi
        elif glo * ghi < 0.0:
            root = _bracketed_root(g, clo, chi)
        else:
            continue
        root = _polish_periodic(m, root, n)
        found.append(root)

    found.sort()
    dedup: list[float] = []
    for p in found:
        if not dedup or p - dedup[-1] > PERIODIC_DEDUP_TOL:
            dedup.append(p)
    return [(p, False) for p in dedup]


def cycle_orbits(
    m: SmoothIntervalMap, p_max: int, cap: int = DEFAULT_PERIOD_CAP
) -> list[tuple[float, ...]]:
    """Distinct periodic cycles of period <= p_max, each as a sorted tuple.

    Cycles are deduplicated across periods (a period-k cycle reappears
    among the fixed points of every multiple of k).
    """
    seen: dict[tuple[float, ...], tuple[float, ...]] = {}
    for k in range(1, p_max + 1):
        for p, _ in periodic_points(m, k, cap=cap):
            orbit = [p]
            cur = p
            for _ in range(k - 1):
                cur = m._eval_raw(cur)
                orbit.append(cur)
            distinct = sorted(set(round(v, 9) for v in orbit))
            key = tuple(distinct)
            if key not in seen:
                seen[key] = tuple(float(v) for v in distinct)
    return [seen[key] for key in sorted(seen)]
