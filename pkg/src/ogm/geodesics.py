"""True distances in the glued model space.

A geodesic between blocks crosses exactly the walls along the T0 geodesic;
the distance is the minimum over one crossing point per wall of the sum of
in-block product distances.  Each summand is convex (blocks are nonpositively
curved, walls are flats), so cyclic per-wall descent converges to the global
minimum.

Per-wall structure: in canonical wall coordinates (arclength on the parent
component, parent fibers) exactly two coordinates enter a hyperbolic factor:
index 0 (the parent-side arclength) and index perm^-1(0) (the fiber that
becomes the child-side arclength).  Those two are minimized by nested
golden-section searches with warm-started brackets; every other fiber enters
both neighbor terms as a Euclidean coordinate, and the whole free subvector
has the closed-form "unfolded straight line" optimum

    min_v sqrt(aa^2 + |v-P|^2) + sqrt(bb^2 + |v-Q|^2)
        = sqrt((aa+bb)^2 + |P-Q|^2)   at   v = P + (Q-P) aa/(aa+bb).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import hexagon as hx
from .cover import CoverComplex, CoverError, CoverPoint, Wall

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


class ConvergenceError(RuntimeError):
    pass


def block_distance(cplx: CoverComplex, p: CoverPoint, q: CoverPoint) -> float:
    """Product distance inside one block."""
    if p.block != q.block:
        raise CoverError("block_distance requires points of one block")
    h = hx.h0_distance(p.base, q.base)
    e = sum((a - b) ** 2 for a, b in zip(p.fiber, q.fiber))
    return math.sqrt(h * h + e)


def golden_min(
    f: Callable[[float], float], lo: float, hi: float, xtol: float
) -> tuple[float, float]:
    """Golden-section minimum of a convex function on [lo, hi]."""
    if hi - lo <= xtol:
        x = 0.5 * (lo + hi)
        return x, f(x)
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > xtol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


@dataclass
class ChainConfiguration:
    """Crossing points of a wall chain in canonical wall coordinates."""

    walls: list[Wall]
    upward: list[bool]
    coords: list[list[float]]  # one (arclength, fibers...) vector per wall
    x: CoverPoint
    y: CoverPoint


@dataclass
class GeodesicResult:
    distance: float
    config: ChainConfiguration
    truncated: bool
    sweeps: int


class _WallVars:
    """Bookkeeping for one wall of the chain."""

    def __init__(self, cplx: CoverComplex, wall: Wall, upward: bool):
        self.wall = wall
        self.upward = upward
        n1 = cplx.spec.n - 1
        perm = cplx.spec.edges[wall.edge_id].perm
        # side position of canonical coordinate j, for each side
        parent_pos = list(range(n1))
        child_pos = [perm(j) for j in range(n1)]
        # from-side = side of the block the traversal comes from
        self.from_pos = child_pos if upward else parent_pos
        self.to_pos = parent_pos if upward else child_pos
        self.jf = self.from_pos.index(0)  # canonical index of from-side arclength
        self.jt = self.to_pos.index(0)
        self.comp_from = cplx.wall_component(wall, child_side=upward)
        self.comp_to = cplx.wall_component(wall, child_side=not upward)
        self.win_f = cplx.model.arclength_window(self.comp_from)
        self.win_t = cplx.model.arclength_window(self.comp_to)
        self.coords = [0.0] * n1
        self.coords[self.jf] = 0.5 * (self.win_f[0] + self.win_f[1])
        self.coords[self.jt] = 0.5 * (self.win_t[0] + self.win_t[1])
        self.bracket_f = self.win_f[1] - self.win_f[0]
        self.bracket_t = self.win_t[1] - self.win_t[0]

    def side_values(self, to_side: bool) -> tuple[float, tuple[float, ...]]:
        """(arclength, fibers) of the crossing point on the given side."""
        pos = self.to_pos if to_side else self.from_pos
        vals = [0.0] * len(self.coords)
        for j, p in enumerate(pos):
            vals[p] = self.coords[j]
        return vals[0], tuple(vals[1:])


def _chain_vars(
    cplx: CoverComplex, x: CoverPoint, y: CoverPoint
) -> list[_WallVars]:
    return [_WallVars(cplx, w, up) for w, up in cplx.wall_chain(x.block, y.block)]


def _targets(point_fibers: tuple[float, ...], pos: list[int]) -> list[Optional[float]]:
    """Canonical-indexed fiber targets; None marks the arclength slot."""
    out: list[Optional[float]] = []
    for p in pos:
        out.append(None if p == 0 else point_fibers[p - 1])
    return out


def distance(
    cplx: CoverComplex,
    x: CoverPoint,
    y: CoverPoint,
    tol: float = 1e-6,
    margin: float = 1.0,
    max_sweeps: int = 10_000,
) -> GeodesicResult:
    """Distance d(x, y) with the optimal chain configuration.

    Flags TRUNCATED when any optimal crossing comes within `margin` of the
    hexagon-truncation edge of its wall window.
    """
    for p in (x, y):
        if not cplx.contains(p):
            raise CoverError("point outside the explored complex")
    x = cplx.normalize(x)
    y = cplx.normalize(y)
    chain = _chain_vars(cplx, x, y)
    cfg = ChainConfiguration(
        [wv.wall for wv in chain], [wv.upward for wv in chain], [], x, y
    )
    if not chain:
        return GeodesicResult(block_distance(cplx, x, y), cfg, False, 0)

    model = cplx.model

    def prev_anchor(i: int) -> tuple[hx.H0Point, list[Optional[float]]]:
        if i == 0:
            return x.base, _targets(x.fiber, chain[0].from_pos)
        wv = chain[i - 1]
        arc, fibers = wv.side_values(to_side=True)
        base = model.boundary_point(wv.comp_to, arc)
        return base, _targets(fibers, chain[i].from_pos)

    def next_anchor(i: int) -> tuple[hx.H0Point, list[Optional[float]]]:
        if i == len(chain) - 1:
            return y.base, _targets(y.fiber, chain[i].to_pos)
        wv = chain[i + 1]
        arc, fibers = wv.side_values(to_side=False)
        base = model.boundary_point(wv.comp_from, arc)
        return base, _targets(fibers, chain[i].to_pos)

    def optimize_wall(i: int) -> None:
        wv = chain[i]
        base_p, tf = prev_anchor(i)
        base_n, tt = next_anchor(i)
        jf, jt = wv.jf, wv.jt
        free = [j for j in range(len(wv.coords)) if j != jf and j != jt]
        d2 = sum((tf[j] - tt[j]) ** 2 for j in free)
        tf_jt = tf[jt]
        tt_jf = tt[jf]
        xtol = max(tol * 1e-2, 1e-12)

        def a_dist(a: float) -> float:
            return hx.h0_distance(base_p, model.boundary_point(wv.comp_from, a))

        def b_dist(b: float) -> float:
            return hx.h0_distance(base_n, model.boundary_point(wv.comp_to, b))

        def reduced(a: float, b: float, av: float, bv: float) -> float:
            alpha = math.hypot(av, b - tf_jt)
            beta = math.hypot(bv, a - tt_jf)
            s = alpha + beta
            return math.sqrt(s * s + d2)

        def inner(a: float, av: float) -> tuple[float, float]:
            lo = max(wv.win_t[0], wv.coords[jt] - wv.bracket_t)
            hi = min(wv.win_t[1], wv.coords[jt] + wv.bracket_t)
            return golden_min(lambda b: reduced(a, b, av, b_dist(b)), lo, hi, xtol)

        def outer(a: float) -> float:
            return inner(a, a_dist(a))[1]

        lo = max(wv.win_f[0], wv.coords[jf] - wv.bracket_f)
        hi = min(wv.win_f[1], wv.coords[jf] + wv.bracket_f)
        a_star, _ = golden_min(outer, lo, hi, xtol)
        av = a_dist(a_star)
        b_star, _ = inner(a_star, av)
        bv = b_dist(b_star)
        move_f = abs(a_star - wv.coords[jf])
        move_t = abs(b_star - wv.coords[jt])
        wv.coords[jf], wv.coords[jt] = a_star, b_star
        # free fibers: exact unfolded optimum given (a, b)
        alpha = math.hypot(av, b_star - tf_jt)
        beta = math.hypot(bv, a_star - tt_jf)
        s = alpha + beta
        for j in free:
            wv.coords[j] = tf[j] + (tt[j] - tf[j]) * (alpha / s if s > 0 else 0.5)
        # warm bracket for the next sweep; reopen if we ran into its edge
        wf = wv.win_f[1] - wv.win_f[0]
        wt = wv.win_t[1] - wv.win_t[0]
        wv.bracket_f = min(wf, max(8.0 * move_f, 64.0 * xtol))
        wv.bracket_t = min(wt, max(8.0 * move_t, 64.0 * xtol))

    def total() -> float:
        return _chain_total(model, chain, x, y)

    prev = math.inf
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        for i in range(len(chain)):
            optimize_wall(i)
        cur = total()
        if prev - cur <= tol * max(1.0, cur) and sweeps >= 2:
            prev = cur
            break
        prev = cur
    else:
        raise ConvergenceError(
            f"no convergence in {max_sweeps} sweeps (last value {prev})"
        )

    truncated = False
    for wv in chain:
        af, at = wv.coords[wv.jf], wv.coords[wv.jt]
        if af - wv.win_f[0] < margin or wv.win_f[1] - af < margin:
            truncated = True
        if at - wv.win_t[0] < margin or wv.win_t[1] - at < margin:
            truncated = True
    cfg.coords = [list(wv.coords) for wv in chain]
    return GeodesicResult(prev, cfg, truncated, sweeps)


def _chain_total(model, chain: list[_WallVars], x: CoverPoint, y: CoverPoint) -> float:
    out = 0.0
    base_prev, fib_prev = x.base, x.fiber
    for wv in chain:
        arc_f, fibers_f = wv.side_values(to_side=False)
        base_f = model.boundary_point(wv.comp_from, arc_f)
        h = hx.h0_distance(base_prev, base_f)
        e = sum((a - b) ** 2 for a, b in zip(fib_prev, fibers_f))
        out += math.sqrt(h * h + e)
        arc_t, fibers_t = wv.side_values(to_side=True)
        base_prev = model.boundary_point(wv.comp_to, arc_t)
        fib_prev = fibers_t
    h = hx.h0_distance(base_prev, y.base)
    e = sum((a - b) ** 2 for a, b in zip(fib_prev, y.fiber))
    return out + math.sqrt(h * h + e)


def evaluate_chain(
    cplx: CoverComplex, x: CoverPoint, y: CoverPoint, coords: list[list[float]]
) -> float:
    """Chain length L(z_1, ..., z_k) at an explicit crossing configuration
    (canonical wall coordinates); the function the solver minimizes."""
    x = cplx.normalize(x)
    y = cplx.normalize(y)
    chain = _chain_vars(cplx, x, y)
    if len(coords) != len(chain):
        raise CoverError("coordinate list does not match the wall chain")
    for wv, c in zip(chain, coords):
        wv.coords = list(c)
    return _chain_total(cplx.model, chain, x, y)


# ---------------------------------------------------------------------------
# brute-force oracle (chains of at most two walls)


def brute_force_distance(
    cplx: CoverComplex,
    x: CoverPoint,
    y: CoverPoint,
    grid_step: float = 0.02,
    levels: Optional[int] = None,
    npts: Optional[int] = None,
) -> float:
    """Exhaustive grid minimization over wall crossing points.

    Chains of one or two walls only.  Grids shrink around the incumbent
    minimum until the step is below grid_step; values are monotone
    non-increasing under grid refinement on a fixed window.
    """
    x = cplx.normalize(x)
    y = cplx.normalize(y)
    chain = _chain_vars(cplx, x, y)
    if len(chain) > 2:
        raise CoverError("brute-force oracle only handles chains of <= 2 walls")
    if not chain:
        return block_distance(cplx, x, y)
    model = cplx.model

    def a_profile(wv: _WallVars, base: hx.H0Point, grid: np.ndarray) -> np.ndarray:
        return np.array(
            [hx.h0_distance(base, model.boundary_point(wv.comp_from, t)) for t in grid]
        )

    def b_profile(wv: _WallVars, base: hx.H0Point, grid: np.ndarray) -> np.ndarray:
        return np.array(
            [hx.h0_distance(base, model.boundary_point(wv.comp_to, t)) for t in grid]
        )

    if len(chain) == 1:
        wv = chain[0]
        tf = _targets(x.fiber, wv.from_pos)
        tt = _targets(y.fiber, wv.to_pos)
        free = [j for j in range(cplx.spec.n - 1) if j not in (wv.jf, wv.jt)]
        d2 = sum((tf[j] - tt[j]) ** 2 for j in free)

        def value_grid(agrid: np.ndarray, bgrid: np.ndarray) -> np.ndarray:
            av = a_profile(wv, x.base, agrid)[:, None]
            bv = b_profile(wv, y.base, bgrid)[None, :]
            alpha = np.hypot(av, bgrid[None, :] - tf[wv.jt])
            beta = np.hypot(bv, agrid[:, None] - tt[wv.jf])
            return np.sqrt((alpha + beta) ** 2 + d2)

        return _refine(
            [wv.win_f, wv.win_t], value_grid, grid_step, levels, npts=npts or 33
        )

    wv1, wv2 = chain
    tf = _targets(x.fiber, wv1.from_pos)
    tt = _targets(y.fiber, wv2.to_pos)
    n1 = cplx.spec.n - 1
    # middle-block pairing: side position m of wall1's to-side matches side
    # position m of wall2's from-side
    mid_pairs = []
    for m in range(1, n1):
        j1 = wv1.to_pos.index(m)
        j2 = wv2.from_pos.index(m)
        mid_pairs.append((j1, j2))
    free1 = [j for j in range(n1) if j not in (wv1.jf, wv1.jt)]
    free2 = [j for j in range(n1) if j not in (wv2.jf, wv2.jt)]
    if free1 or free2:
        raise CoverError("two-wall oracle supports n = 3 only")
    # with n = 3: wall 1's free canonical index is its jf, wall 2's its jt
    ((j1m, j2m),) = mid_pairs
    if j1m != wv1.jf or j2m != wv2.jt:
        raise CoverError("unexpected wall coordinate pairing")

    def value_grid4(a1g, b1g, a2g, b2g):
        av = a_profile(wv1, x.base, a1g)
        bv = b_profile(wv2, y.base, b2g)
        mid = np.array(
            [
                [
                    hx.h0_distance(
                        model.boundary_point(wv1.comp_to, t1),
                        model.boundary_point(wv2.comp_from, t2),
                    )
                    for t2 in a2g
                ]
                for t1 in b1g
            ]
        )
        A = np.hypot(av[:, None], b1g[None, :] - tf[wv1.jt])  # (a1, b1)
        B = np.hypot(bv[None, :], a2g[:, None] - tt[wv2.jf])  # (a2, b2)
        M = np.sqrt(
            mid[None, :, :, None] ** 2
            + (a1g[:, None, None, None] - b2g[None, None, None, :]) ** 2
        )  # (a1, b1, a2, b2)
        return A[:, :, None, None] + M + B[None, None, :, :]

    return _refine(
        [wv1.win_f, wv1.win_t, wv2.win_f, wv2.win_t],
        value_grid4,
        grid_step,
        levels,
        npts=npts or 13,
    )


def _refine(windows, value_fn, grid_step, levels, npts):
    los = [w[0] for w in windows]
    his = [w[1] for w in windows]
    best = math.inf
    level = 0
    while True:
        grids = [np.linspace(lo, hi, npts) for lo, hi in zip(los, his)]
        vals = value_fn(*grids)
        idx = np.unravel_index(int(np.argmin(vals)), vals.shape)
        best = min(best, float(vals[idx]))
        steps = [(hi - lo) / (npts - 1) for lo, hi in zip(los, his)]
        level += 1
        if max(steps) <= grid_step or (levels is not None and level >= levels):
            return best
        centers = [g[i] for g, i in zip(grids, idx)]
        for d in range(len(windows)):
            half = max(1.5 * steps[d], grid_step * (npts - 1) / 4)
            los[d] = max(windows[d][0], centers[d] - half)
            his[d] = min(windows[d][1], centers[d] + half)
