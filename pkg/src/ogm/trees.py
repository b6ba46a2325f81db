"""Quotient trees T_c, the maps into them, and the product embedding.

For a class c of tree vertices, the piece over a block v is the dual tree
T_v when v is in c and a real line (one fiber coordinate) otherwise.  Wall
identifications glue the pieces: between two non-c blocks the relevant
coordinate transfers identically; at a c block the line parameter enters
through the boundary retraction profile, which maps arclength t to the
boundary chain's line in T_v at tree-arclength 2*rho*t.

Metric on the quotient.  Every boundary line of a c block is glued (in the
ideal, untruncated cover) to a line piece carrying the Euclidean parameter
metric, while the dual tree charges 2*rho per parameter unit along the same
line; the quotient pseudometric therefore travels chain lines at parameter
speed.  Since every T_bin edge lies on a chain line and lines may be
switched at shared vertices, the induced piece metric is the dual-tree
metric divided by 2*rho (each tree edge costs one grid unit), and with it
every gluing is isometric, so T_c is an honest metric tree.  Distances are
evaluated by profile propagation along the T0 geodesic between the owning
blocks: within a tree piece the profile moves from the entry chain line to
the exit chain line by the tree-gate projection (lines in a metric tree
either share a segment or are joined by a unique bridge).  All profile
parameters are in grid units, where the line gluings are the identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import hexagon as hx
from .cover import CoverComplex, CoverError, CoverPoint, Wall
from .manifold import Permutation

BlockId = tuple[int, ...]

PROFILE_H = 1.0 / 64.0
PROFILE_WINDOW = 24.0


def piece_scale() -> float:
    """Grid units per unit of dual-tree arclength in a c piece."""
    return 1.0 / hx.EDGE


def tree_piece_distance(a: hx.TbinPoint, b: hx.TbinPoint) -> float:
    """Distance inside a c piece (collapsed quotient metric, grid units)."""
    return hx.tbin_distance(a, b) / hx.EDGE


@dataclass(frozen=True)
class TcPoint:
    """Point of T_c: a dual-tree point when the owner block is in c, else
    the value of the coordinate the class reads off that block."""

    owner: BlockId
    tree: Optional[hx.TbinPoint] = None
    value: Optional[float] = None


@dataclass(frozen=True)
class ProductPoint:
    t0: BlockId
    coords: tuple[tuple[int, TcPoint], ...]  # (class label, T_c point), sorted

    def coord(self, label: int) -> TcPoint:
        for lab, p in self.coords:
            if lab == label:
                return p
        raise KeyError(label)


class DistanceProfile:
    """Piecewise-linear function sampled on a uniform parameter grid."""

    def __init__(self, grid: np.ndarray, values: np.ndarray):
        self.grid = grid
        self.values = values

    @property
    def breakpoints(self) -> list[tuple[float, float]]:
        return list(zip(self.grid.tolist(), self.values.tolist()))

    def evaluate(self, t: float) -> float:
        if t < self.grid[0] or t > self.grid[-1]:
            raise CoverError("profile evaluated outside its window")
        return float(np.interp(t, self.grid, self.values))

    def min(self) -> float:
        return float(self.values.min())

    def argmin(self) -> float:
        return float(self.grid[int(self.values.argmin())])

    def is_one_lipschitz(self, slack: float = 1e-9) -> bool:
        h = self.grid[1] - self.grid[0]
        return bool(np.all(np.abs(np.diff(self.values)) <= h + slack))

    def is_unimodal(self, slack: float = 1e-9) -> bool:
        d = np.diff(self.values)
        falling = d < -slack
        rising = d > slack
        if not falling.any() or not rising.any():
            return True
        return int(np.nonzero(falling)[0].max()) <= int(np.nonzero(rising)[0].min())


# ---------------------------------------------------------------------------
# line geometry inside one dual tree (all lengths in grid units)


@dataclass(frozen=True)
class LineRelation:
    """How the exit chain line sees the entry chain line."""

    kind: str  # "overlap" | "bridge"
    lam_lo: float = 0.0  # entry-line grid coordinates of the shared segment
    lam_hi: float = 0.0
    mu_lo: float = 0.0  # exit-line coordinate matching lam_lo
    mu_hi: float = 0.0  # exit-line coordinate matching lam_hi
    orient: int = 1
    lam_gate: float = 0.0  # bridge data
    mu_gate: float = 0.0
    bridge: float = 0.0


def _vertex_coord(k: int) -> float:
    # chain vertex at position k, grid units (line_lambda_of_vertex / EDGE)
    return k + 0.5


def line_relation(
    comp_in: hx.ComponentId, comp_out: hx.ComponentId, positions: int
) -> LineRelation:
    ks = range(-positions, positions + 1)
    in_addr = {hx.chain_address(comp_in, k): k for k in ks}
    shared: list[tuple[int, int]] = []
    for m in ks:
        addr = hx.chain_address(comp_out, m)
        k = in_addr.get(addr)
        if k is not None:
            shared.append((k, m))
    if shared:
        shared.sort()
        (k1, m1), (k2, m2) = shared[0], shared[-1]
        orient = 1
        if len(shared) > 1:
            orient = 1 if shared[1][1] > shared[0][1] else -1
        return LineRelation(
            "overlap",
            lam_lo=_vertex_coord(k1),
            lam_hi=_vertex_coord(k2),
            mu_lo=_vertex_coord(m1),
            mu_hi=_vertex_coord(m2),
            orient=orient,
        )
    best: Optional[tuple[int, int, int]] = None
    for k in ks:
        a = hx.chain_address(comp_in, k)
        for m in ks:
            b = hx.chain_address(comp_out, m)
            d = hx.hex_tree_edges(a, b)
            if best is None or d < best[0]:
                best = (d, k, m)
    assert best is not None
    return LineRelation(
        "bridge",
        lam_gate=_vertex_coord(best[1]),
        mu_gate=_vertex_coord(best[2]),
        bridge=float(best[0]),
    )


def gate_on_line(
    comp: hx.ComponentId, point: hx.TbinPoint, positions: int
) -> tuple[float, float]:
    """(grid coordinate of the gate on the line, piece distance to it)."""
    try:
        return hx.line_lambda_of_point(comp, point) / hx.EDGE, 0.0
    except ValueError:
        pass
    best_lam, best_d = 0.0, math.inf
    for k in range(-positions, positions + 1):
        v = hx.tbin_vertex(hx.chain_address(comp, k))
        d = tree_piece_distance(point, v)
        if d < best_d:
            best_d, best_lam = d, _vertex_coord(k)
    return best_lam, best_d


# ---------------------------------------------------------------------------
# the tree system over a frozen complex


class TreeSystem:
    def __init__(
        self,
        cplx: CoverComplex,
        h: float = PROFILE_H,
        window: float = PROFILE_WINDOW,
    ):
        self.cplx = cplx
        self.h = h
        self.window = window
        n = int(round(window / h))
        self.grid = np.linspace(-n * h, n * h, 2 * n + 1)
        self.positions = int(window) + 2  # chain-vertex window for gates
        self._rel_cache: dict[tuple, LineRelation] = {}
        # composed permutation and class label per explored block
        self.sigma: dict[BlockId, Permutation] = {}
        self.labels: dict[BlockId, int] = {}
        ident = Permutation.identity(cplx.spec.n - 1)
        for bid in cplx.block_list:
            if not bid:
                self.sigma[bid] = ident
            else:
                blk = cplx.blocks[bid]
                edge = cplx.spec.edges[blk.labels[-1]]
                self.sigma[bid] = edge.perm.after(self.sigma[bid[:-1]])
            self.labels[bid] = self.sigma[bid].inverse()(0)
        self.class_labels: tuple[int, ...] = tuple(sorted(set(self.labels.values())))
        self.representatives: dict[int, BlockId] = {}
        for bid in cplx.block_list:
            self.representatives.setdefault(self.labels[bid], bid)

    # -- maps ---------------------------------------------------------------

    def phi0(self, x: CoverPoint) -> BlockId:
        return self.cplx.normalize(x).block

    def t0_distance(self, u: BlockId, v: BlockId) -> float:
        return float(len(self.cplx.wall_chain(u, v)))

    def coordinate_index(self, label: int, bid: BlockId) -> int:
        """Block coordinate read by phi_c over a block outside c."""
        return self.sigma[bid](label)

    def phi_c(self, label: int, x: CoverPoint) -> TcPoint:
        if label not in self.representatives:
            raise CoverError(f"class {label} not present in the explored complex")
        xn = self.cplx.normalize(x)
        if self.labels[xn.block] == label:
            return TcPoint(owner=xn.block, tree=hx.retract(xn.base))
        k = self.coordinate_index(label, xn.block)
        return TcPoint(owner=xn.block, value=xn.fiber[k - 1])

    def phi(self, x: CoverPoint) -> ProductPoint:
        xn = self.cplx.normalize(x)
        return ProductPoint(
            t0=xn.block,
            coords=tuple((lab, self.phi_c(lab, xn)) for lab in self.class_labels),
        )

    # -- T_c distance ---------------------------------------------------------

    def _relation(self, comp_in, comp_out) -> LineRelation:
        key = (comp_in, comp_out)
        rel = self._rel_cache.get(key)
        if rel is None:
            rel = line_relation(comp_in, comp_out, self.positions)
            self._rel_cache[key] = rel
        return rel

    def _wall_side_comp(self, wall: Wall, bid: BlockId) -> hx.ComponentId:
        return self.cplx.wall_component(wall, child_side=(bid == wall.child))

    def _propagate_tree(
        self, values: np.ndarray, comp_in: hx.ComponentId, comp_out: hx.ComponentId
    ) -> np.ndarray:
        """Push a profile on the entry line through the tree piece onto the
        exit line; both profiles are functions of the grid coordinate."""
        rel = self._relation(comp_in, comp_out)
        t = self.grid
        if rel.kind == "bridge":
            if abs(rel.lam_gate) > self.window - 1.0 or abs(rel.mu_gate) > self.window - 1.0:
                raise CoverError("gate beyond the profile window (resolution)")
            base = float(np.interp(rel.lam_gate, t, values))
            return np.abs(t - rel.mu_gate) + rel.bridge + base
        if rel.orient == 1:
            lam_of_mu = rel.lam_lo + (t - rel.mu_lo)
        else:
            lam_of_mu = rel.lam_lo + (rel.mu_lo - t)
        inside = np.interp(np.clip(lam_of_mu, rel.lam_lo, rel.lam_hi), t, values)
        lo_mu, hi_mu = min(rel.mu_lo, rel.mu_hi), max(rel.mu_lo, rel.mu_hi)
        excess = np.maximum(lo_mu - t, 0.0) + np.maximum(t - hi_mu, 0.0)
        return inside + excess

    def tc_distance(self, label: int, a: TcPoint, b: TcPoint) -> float:
        for p in (a, b):
            if p.owner not in self.cplx.blocks:
                raise CoverError(f"owner {p.owner} not explored")
        if a.owner == b.owner:
            if a.tree is not None:
                return tree_piece_distance(a.tree, b.tree)
            return abs(a.value - b.value)
        chain = self.cplx.wall_chain(a.owner, b.owner)
        blocks = [a.owner]
        for w, up in chain:
            blocks.append(w.parent if up else w.child)
        in_c = [self.labels[bid] == label for bid in blocks]
        if not any(in_c):
            return abs(a.value - b.value)

        if in_c[0]:
            comp_exit = self._wall_side_comp(chain[0][0], blocks[0])
            lam_g, d_g = gate_on_line(comp_exit, a.tree, self.positions)
            profile = np.abs(self.grid - lam_g) + d_g
        else:
            if abs(a.value) > self.window - 2.0:
                raise CoverError("line value outside the profile window")
            profile = np.abs(self.grid - a.value)

        for i in range(1, len(blocks)):
            if not in_c[i]:
                continue
            comp_in = self._wall_side_comp(chain[i - 1][0], blocks[i])
            if i == len(blocks) - 1:
                lam_g, d_g = gate_on_line(comp_in, b.tree, self.positions)
                if abs(lam_g) > self.window - 1.0:
                    raise CoverError("gate beyond the profile window (resolution)")
                return float(np.interp(lam_g, self.grid, profile)) + d_g
            comp_out = self._wall_side_comp(chain[i][0], blocks[i])
            profile = self._propagate_tree(profile, comp_in, comp_out)

        if abs(b.value) > self.window - 2.0:
            raise CoverError("line value outside the profile window")
        return float(np.interp(b.value, self.grid, profile))

    def product_distance(self, p: ProductPoint, q: ProductPoint) -> float:
        total = self.t0_distance(p.t0, q.t0)
        for lab, pc in p.coords:
            total += self.tc_distance(lab, pc, q.coord(lab))
        return total

    # -- profile access (tests and diagnostics) ------------------------------

    def line_profile_from_point(self, a: TcPoint) -> DistanceProfile:
        if a.value is None:
            raise CoverError("line profile requires a line-piece point")
        return DistanceProfile(self.grid.copy(), np.abs(self.grid - a.value))
