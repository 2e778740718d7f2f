"""Branchwise inversion, preimage-tree folds, and pole-avoidance certificates.

The central computation folds the depth-n preimage tree of a point x:
every path (y_n, ..., y_1) with f(y_k) = y_{k-1} and y_0 = x accumulates
the weight G(y_1) + ... + G(y_n) of its leaf, and the fold combines all
leaf weights with a streaming log-sum-exp.  Paths that reach a pole of
the potential contribute exactly zero (not a tiny number) and are counted
separately, since near-pole paths dominate floating-point error.

The fold is streaming: an O(n) stack, never 2^n materialized leaves.
Leaf order is canonical (depth-first, ascending preimages at each level),
so results are reproducible run to run; the parallel-deterministic mode
folds the root subtrees concurrently and combines them in the same fixed
ascending order.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .errors import DepthCapError, MapDomainError
from .maps import SmoothIntervalMap
from .potentials import NEG_INFINITY

PREIMAGE_MERGE_TOL = 1e-12
DEFAULT_DEPTH_CAP = 24


@dataclass(frozen=True)
class TreeFoldResult:
    """Log-domain aggregation over one preimage tree.

    ``log_sum`` is log of the sum over surviving depth-n preimages of
    exp(path weight); it is -inf exactly when every path hit a pole, in
    which case ``pole_hits`` equals the total number of enumerated paths.
    ``min_pole_distance`` is the closest approach of any enumerated
    non-annihilated point to the potential's pole set (inf when there are
    no poles).
    """

    depth: int
    log_sum: float
    leaf_count: int
    pole_hits: int
    min_pole_distance: float
    elapsed: float
    mode: str = "serial"


@dataclass(frozen=True)
class NormalityCertificate:
    """Witness (or refutation) that x admits a depth-n pole-avoiding preimage path.

    When ``normal`` the witness lists [y, f(y), ..., f^{n-1}(y)] for a
    preimage y of x by the n-th iterate, every entry at distance > epsilon
    from the avoided set.  Otherwise ``blocking_depth`` is the first level
    that no path could fill.
    """

    x: float
    depth: int
    epsilon: float
    normal: bool
    witness: tuple[float, ...] | None = None
    blocking_depth: int | None = None


def preimages(m: SmoothIntervalMap, x: float) -> list[float]:
    """All solutions of f(y) = x, one per branch covering x, ascending.

    Closed-form branch inverses are used when the map provides them;
    otherwise the branch's bracketed numeric inverse.  Candidates closer
    than 1e-12 are merged (branch inverses meet at critical values).
    """
    if not m.in_domain(x):
        raise MapDomainError(f"x={x!r} outside domain")
    found: list[float] = []
    for b in m.branches:
        if not b.covers_value(x):
            continue
        y = b.inverse(min(max(x, b.image_lo), b.image_hi))
        if abs(m._eval_raw(y) - x) > 1e-10:
            continue
        found.append(y)
    found.sort()
    merged: list[float] = []
    for y in found:
        if merged and y - merged[-1] < PREIMAGE_MERGE_TOL:
            continue
        merged.append(y)
    return merged


def enumerate_preimage_level(m: SmoothIntervalMap, x: float, depth: int) -> list[float]:
    """The full set f^{-depth}(x) by breadth-first enumeration, ascending.

    Distinct parents have disjoint preimage sets, so the level size equals
    the number of surviving tree paths; useful as an independent counting
    oracle and for cylinder representatives on repellers.
    """
    level = [x]
    for _ in range(depth):
        nxt: list[float] = []
        for y in level:
            nxt.extend(preimages(m, y))
        nxt.sort()
        merged: list[float] = []
        for y in nxt:
            if merged and y - merged[-1] < PREIMAGE_MERGE_TOL:
                continue
            merged.append(y)
        level = merged
    return level


def preimage_point(m: SmoothIntervalMap, x: float, itinerary) -> float:
    """Follow a fixed branch choice backwards: the preimage of x whose
    path takes branch itinerary[k] at level k."""
    y = x
    for k in itinerary:
        b = m.branches[k]
        if not b.covers_value(y):
            raise MapDomainError(f"branch {k} does not cover {y!r}")
        y = b.inverse(min(max(y, b.image_lo), b.image_hi))
    return y


class _LogSumStream:
    """Streaming log-sum-exp with a running maximum."""

    __slots__ = ("max_w", "total")

    def __init__(self):
        self.max_w = NEG_INFINITY
        self.total = 0.0

    def add(self, w: float) -> None:
        if w <= self.max_w:
            self.total += math.exp(w - self.max_w)
        else:
            if self.max_w != NEG_INFINITY:
                self.total = self.total * math.exp(self.max_w - w) + 1.0
            else:
                self.total = 1.0
            self.max_w = w

    def result(self) -> float:
        if self.max_w == NEG_INFINITY:
            return NEG_INFINITY
        return self.max_w + math.log(self.total)


def _fold_subtree(m, G, root: float, depth: int, base_weight: float):
    """Depth-first fold of the preimage tree below one root point.

    Returns (log_sum, leaf_count, pole_hits, min_pole_distance); the root
    itself carries ``base_weight`` already accumulated.
    """
    lam = G.singular_points
    value = G.value
    acc = _LogSumStream()
    leaves = 0
    poles = 0
    min_dist = math.inf
    stack = [(root, depth, base_weight)]
    while stack:
        y, k, w = stack.pop()
        if k == 0:
            leaves += 1
            acc.add(w)
            continue
        for z in reversed(preimages(m, y)):
            g = value(z)
            if g == NEG_INFINITY:
                poles += 1
                continue
            if lam:
                d = min(abs(z - c) for c in lam)
                if d < min_dist:
                    min_dist = d
            stack.append((z, k - 1, w + g))
    return acc.result(), leaves, poles, min_dist


def _combine_logsums(parts: list[float]) -> float:
    finite = [p for p in parts if p != NEG_INFINITY]
    if not finite:
        return NEG_INFINITY
    top = max(finite)
    return top + math.log(sum(math.exp(p - top) for p in finite))


def preimage_tree_fold(
    m: SmoothIntervalMap,
    G,
    x: float,
    n: int,
    mode: str = "serial",
    depth_cap: int = DEFAULT_DEPTH_CAP,
) -> TreeFoldResult:
    """Fold the depth-n preimage tree of x with log-domain path weights.

    mode "serial" streams every leaf through one accumulator in canonical
    order; "parallel-deterministic" folds the root's subtrees concurrently
    and combines the per-subtree results in fixed ascending-preimage
    order, so both modes agree up to log-sum-exp associativity.
    """
    if not m.in_domain(x):
        raise MapDomainError(f"x={x!r} outside domain")
    if n > depth_cap:
        raise DepthCapError(f"depth {n} exceeds cap {depth_cap}")
    if n < 0:
        raise ValueError("depth must be >= 0")
    start = time.perf_counter()

    if mode == "serial" or n == 0:
        log_sum, leaves, poles, min_dist = _fold_subtree(m, G, x, n, 0.0)
        return TreeFoldResult(
            n, log_sum, leaves, poles, min_dist,
            time.perf_counter() - start, "serial",
        )
    if mode != "parallel-deterministic":
        raise ValueError(f"unknown fold mode {mode!r}")

    lam = G.singular_points
    roots = []
    pole_hits = 0
    min_dist = math.inf
    for y in preimages(m, x):
        g = G.value(y)
        if g == NEG_INFINITY:
            pole_hits += 1
            continue
        if lam:
            d = min(abs(y - c) for c in lam)
            if d < min_dist:
                min_dist = d
        roots.append((y, g))

    if not roots:
        return TreeFoldResult(
            n, NEG_INFINITY, 0, pole_hits, min_dist,
            time.perf_counter() - start, "parallel-deterministic",
        )
    with ThreadPoolExecutor(max_workers=min(len(roots), 8)) as pool:
        futures = [
            pool.submit(_fold_subtree, m, G, y, n - 1, g) for y, g in roots
        ]
        parts = [f.result() for f in futures]
    log_sum = _combine_logsums([p[0] for p in parts])
    leaves = sum(p[1] for p in parts)
    pole_hits += sum(p[2] for p in parts)
    for p in parts:
        if p[3] < min_dist:
            min_dist = p[3]
    return TreeFoldResult(
        n, log_sum, leaves, pole_hits, min_dist,
        time.perf_counter() - start, "parallel-deterministic",
    )


def lambda_normal(
    m: SmoothIntervalMap,
    avoid,
    x: float,
    n: int,
    epsilon: float,
    depth_cap: int = DEFAULT_DEPTH_CAP,
) -> NormalityCertificate:
    """Search the depth-n preimage tree of x for one pole-avoiding path.

    A path survives when every generated point keeps distance >= epsilon
    from every avoided point.  The search prunes eagerly and returns at
    the first surviving depth-n path (depth-first, ascending preimages);
    when all paths die it reports the first level no path could fill.
    """
    if not m.in_domain(x):
        raise MapDomainError(f"x={x!r} outside domain")
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    if n > depth_cap:
        raise DepthCapError(f"depth {n} exceeds cap {depth_cap}")
    avoid = tuple(avoid)

    best_depth = 0
    # stack entries: (point, depth, path-so-far); path lists y_1..y_k
    stack: list[tuple[float, int, tuple[float, ...]]] = [(x, 0, ())]
    while stack:
        y, k, path = stack.pop()
        if k > best_depth:
            best_depth = k
        if k == n:
            witness = tuple(reversed(path))  # [y, f(y), ..., f^{n-1}(y)]
            return NormalityCertificate(x, n, epsilon, True, witness, None)
        for z in reversed(preimages(m, y)):
            if avoid and min(abs(z - c) for c in avoid) < epsilon:
                continue
            stack.append((z, k + 1, path + (z,)))
    return NormalityCertificate(x, n, epsilon, False, None, best_depth + 1)
