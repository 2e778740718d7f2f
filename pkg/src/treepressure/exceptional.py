"""Detection of finite forward-invariant sets whose extra preimages fall on poles.

A potential is exceptional when some non-empty finite forward-invariant
set absorbs all of its own preimages except those landing in the pole
set.  The detector seeds a backward-closure search with periodic cycles:
any finite forward-invariant set is a union of preperiodic orbits, so it
contains a periodic cycle, and from that seed the closure is forced --
each preimage not already accounted for must be adjoined (forward
invariance is preserved, since the map sends the new point back into the
set).  The search is complete up to its period and size bounds; a failed
search is therefore a bounded-search statement, never a proof of
non-exceptionality.  The one rigorous shortcut: an empty pole set makes
the backward condition impossible to violate from outside the set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import PreconditionError, VerificationError
from .maps import SmoothIntervalMap, cycle_orbits
from .potentials import SingularPotential, singular_set
from .preimage import preimages

POINT_SNAP_TOL = 1e-9

NON_EXCEPTIONAL_TRIVIAL = "non_exceptional_certified_trivially"
EXCEPTIONAL = "exceptional"
NO_SET_FOUND = "no_set_found"


@dataclass(frozen=True)
class ExceptionalReport:
    status: str
    sigma: tuple[float, ...] = ()
    seed_cycle: tuple[float, ...] = ()
    closure_trace: tuple[tuple[float, ...], ...] = ()  # points added per sweep
    forward_residual: float = 0.0     # max distance of f(sigma) to sigma
    escape_residual: float = 0.0      # max distance of non-sigma preimages to the pole set
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "sigma": list(self.sigma),
            "seed_cycle": list(self.seed_cycle),
            "closure_trace": [list(step) for step in self.closure_trace],
            "forward_residual": self.forward_residual,
            "escape_residual": self.escape_residual,
            "note": self.note,
        }


def _dist_to(points, y: float) -> float:
    if not points:
        return math.inf
    return min(abs(y - p) for p in points)


_EXACT_VALUES = (0.0, 0.25, 0.5, 0.75, 1.0)


def _snap_exact(m: SmoothIntervalMap, y: float) -> float:
    # match simple algebraic identities first so closures do not drift
    for v in _EXACT_VALUES + m.domain:
        if abs(y - v) < POINT_SNAP_TOL:
            return v
    return y


def _residuals(m: SmoothIntervalMap, sigma, lam) -> tuple[float, float]:
    fwd = 0.0
    esc = 0.0
    for s in sigma:
        fwd = max(fwd, _dist_to(sigma, m._eval_raw(s)))
        for y in preimages(m, s):
            if _dist_to(sigma, y) >= POINT_SNAP_TOL:
                esc = max(esc, _dist_to(lam, y))
    return fwd, esc


def _close_seed(
    m: SmoothIntervalMap, lam, seed, size_max: int
) -> ExceptionalReport:
    sigma = [float(s) for s in seed]
    trace: list[tuple[float, ...]] = []
    while True:
        added: list[float] = []
        for s in list(sigma):
            for y in preimages(m, s):
                y = _snap_exact(m, y)
                if _dist_to(sigma, y) < POINT_SNAP_TOL:
                    continue
                if _dist_to(lam, y) < POINT_SNAP_TOL:
                    continue
                if _dist_to(added, y) < POINT_SNAP_TOL:
                    continue
                added.append(y)
        if not added:
            fwd, esc = _residuals(m, sigma, lam)
            return ExceptionalReport(
                EXCEPTIONAL,
                sigma=tuple(sorted(sigma)),
                seed_cycle=tuple(seed),
                closure_trace=tuple(trace),
                forward_residual=fwd,
                escape_residual=esc,
            )
        trace.append(tuple(sorted(added)))
        sigma.extend(added)
        if len(sigma) > size_max:
            return ExceptionalReport(
                NO_SET_FOUND,
                seed_cycle=tuple(seed),
                closure_trace=tuple(trace),
                note=f"closure exceeded size bound {size_max}",
            )


def find_exceptional_sets(
    m: SmoothIntervalMap,
    lam,
    p_max: int = 8,
    size_max: int = 64,
) -> list[ExceptionalReport]:
    """Backward-closure search from every periodic cycle of period <= p_max.

    With an empty pole set the single trivial certificate is returned
    (rigorous: no preimage can escape into an empty set).  Otherwise one
    report per seed cycle, deduplicated by resulting set.
    """
    if p_max > 8:
        raise ValueError("p_max must be <= 8")
    if size_max > 64:
        raise ValueError("size_max must be <= 64")
    lam = sorted(float(c) for c in lam)
    if not lam:
        return [
            ExceptionalReport(
                NON_EXCEPTIONAL_TRIVIAL,
                note="empty pole set: backward condition cannot be met by a "
                     "non-member preimage, so no exceptional set exists",
            )
        ]
    reports: list[ExceptionalReport] = []
    seen: set = set()
    for seed in cycle_orbits(m, p_max):
        rep = _close_seed(m, lam, seed, size_max)
        key = (rep.status, tuple(round(v, 9) for v in rep.sigma))
        if rep.status == EXCEPTIONAL and key in seen:
            continue
        seen.add(key)
        reports.append(rep)
    return reports


def is_exceptional(
    m: SmoothIntervalMap,
    G: SingularPotential,
    p_max: int = 8,
    size_max: int = 64,
) -> ExceptionalReport:
    """Run the detector with the potential's own pole set.

    Returns the first exceptional report if any; otherwise an aggregate
    "no set found within search bounds" (or the rigorous trivial
    certificate when the pole set is empty).
    """
    lam = singular_set(G)
    reports = find_exceptional_sets(m, lam, p_max=p_max, size_max=size_max)
    for rep in reports:
        if rep.status == EXCEPTIONAL:
            return rep
    if reports and reports[0].status == NON_EXCEPTIONAL_TRIVIAL:
        return reports[0]
    return ExceptionalReport(
        NO_SET_FOUND,
        note=f"non-exceptional within search bounds (p_max={p_max}, "
             f"size_max={size_max}); this is not a proof",
    )


def _forward_orbit_from_index_one(m: SmoothIntervalMap, a: float) -> list[float]:
    """{f(a), f^2(a), ...} collected until the orbit revisits a member."""
    out: list[float] = []
    cur = _snap_exact(m, m._eval_raw(a))
    for _ in range(10000):
        if _dist_to(out, cur) < POINT_SNAP_TOL:
            return out
        out.append(cur)
        cur = _snap_exact(m, m._eval_raw(cur))
    raise VerificationError("forward orbit failed to close up")


def sigma_prime_construction(
    m: SmoothIntervalMap,
    G: SingularPotential,
    N: int,
    sigma_tilde,
    period_bound: int = 8,
) -> list[float]:
    """Transfer an exceptional set of the window average back to the base poles.

    For each extra preimage x of the given set, locate the last time
    j* its forward orbit visits the base pole set, collect f^{j*}(x),
    and return the forward orbit (from index 1) of that collection.  The
    result is verified to be exceptional for the base pole set before it
    is returned.
    """
    if N < 1:
        raise ValueError("window must be >= 1")
    lam = singular_set(G)
    sigma_tilde = [float(s) for s in sigma_tilde]
    if not sigma_tilde:
        raise PreconditionError("sigma_tilde must be non-empty")

    # precondition: forward invariant, and extra preimages lie in the
    # window's backward pole set (some forward image within N-1 steps
    # lands on a base pole)
    extras: list[float] = []
    for s in sigma_tilde:
        if _dist_to(sigma_tilde, m._eval_raw(s)) >= POINT_SNAP_TOL:
            raise PreconditionError(f"sigma_tilde is not forward invariant at {s!r}")
        for y in preimages(m, s):
            y = _snap_exact(m, y)
            if _dist_to(sigma_tilde, y) < POINT_SNAP_TOL:
                continue
            hits = False
            v = y
            for _ in range(N):
                if _dist_to(lam, v) < POINT_SNAP_TOL:
                    hits = True
                    break
                v = m._eval_raw(v)
            if not hits:
                raise PreconditionError(
                    f"extra preimage {y!r} never meets the pole set within the "
                    f"window: sigma_tilde is not exceptional for the average"
                )
            if _dist_to(extras, y) >= POINT_SNAP_TOL:
                extras.append(y)

    horizon = N - 1 + 2 * period_bound + N
    collected: list[float] = []
    for x in extras:
        j_star = None
        v = x
        for j in range(horizon + 1):
            if _dist_to(lam, v) < POINT_SNAP_TOL:
                j_star = j
            v = m._eval_raw(v)
        if j_star is None:
            raise PreconditionError(f"no pole visit found on the orbit of {x!r}")
        a = x
        for _ in range(j_star):
            a = m._eval_raw(a)
        a = _snap_exact(m, a)
        if _dist_to(collected, a) >= POINT_SNAP_TOL:
            collected.append(a)

    sigma_prime: list[float] = []
    for a in collected:
        for z in _forward_orbit_from_index_one(m, a):
            if _dist_to(sigma_prime, z) >= POINT_SNAP_TOL:
                sigma_prime.append(z)
    sigma_prime.sort()

    fwd, esc = _residuals(m, sigma_prime, lam)
    if fwd >= POINT_SNAP_TOL or esc >= POINT_SNAP_TOL:
        raise VerificationError(
            f"constructed set failed verification: forward residual {fwd:g}, "
            f"escape residual {esc:g}"
        )
    return sigma_prime
