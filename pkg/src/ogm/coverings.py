"""Colored coverings witnessing the dimension bounds at sampled scales.

Tree covering: slice by distance-to-root annuli of width R; within an
annulus, merge points whose rootward meet is above kR - R/2 (the Gromov
product computes the meet level from distances alone); color by annulus
parity.  Two colors suffice, same-color pieces are R-separated, and pieces
are 3R-bounded.  Products take piece tuples with tuple colors (2^m colors,
the tight coloring is out of scope), and pullbacks transfer the constants
through the verified quasi-isometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np


@dataclass
class ColoredCovering:
    scale: float
    colors: int
    assignment: list[int]  # piece id per sample point
    piece_color: list[int]
    bound: float  # claimed diameter bound

    def pieces(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for i, pid in enumerate(self.assignment):
            out.setdefault(pid, []).append(i)
        return out


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


def meet_level(f: np.ndarray, dmat: np.ndarray, i: int, j: int) -> float:
    """Rootward meet height via the Gromov product."""
    return 0.5 * (f[i] + f[j] - dmat[i, j])


def tree_covering(dmat: np.ndarray, root_dist: np.ndarray, scale: float) -> ColoredCovering:
    """Two-colored R-disjoint 3R-bounded covering of a sampled metric tree."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    n = len(root_dist)
    annulus = np.floor(root_dist / scale).astype(int)
    uf = _UnionFind(n)
    for i in range(n):
        for j in range(i + 1, n):
            if annulus[i] != annulus[j]:
                continue
            k = annulus[i]
            if meet_level(root_dist, dmat, i, j) >= k * scale - scale / 2.0:
                uf.union(i, j)
    roots: dict[tuple[int, int], int] = {}
    assignment = [0] * n
    piece_color: list[int] = []
    for i in range(n):
        key = (annulus[i], uf.find(i))
        pid = roots.get(key)
        if pid is None:
            pid = len(piece_color)
            roots[key] = pid
            piece_color.append(int(annulus[i]) % 2)
        assignment[i] = pid
    return ColoredCovering(scale, 2, assignment, piece_color, 3.0 * scale)


def product_covering(factors: Sequence[ColoredCovering]) -> ColoredCovering:
    """Pieces are tuples of factor pieces, colors are color tuples."""
    if not factors:
        raise ValueError("at least one factor")
    scale = factors[0].scale
    if any(abs(f.scale - scale) > 1e-12 for f in factors):
        raise ValueError("factor coverings must share the scale")
    n = len(factors[0].assignment)
    if any(len(f.assignment) != n for f in factors):
        raise ValueError("factor coverings must cover the same sample")
    piece_ids: dict[tuple[int, ...], int] = {}
    assignment = [0] * n
    piece_color: list[int] = []
    m = len(factors)
    for i in range(n):
        key = tuple(f.assignment[i] for f in factors)
        pid = piece_ids.get(key)
        if pid is None:
            pid = len(piece_color)
            piece_ids[key] = pid
            color = 0
            for f in factors:
                color = 2 * color + f.piece_color[f.assignment[i]]
            piece_color.append(color)
        assignment[i] = pid
    return ColoredCovering(
        scale,
        2 ** m,
        assignment,
        piece_color,
        sum(f.bound for f in factors),
    )


@dataclass
class CoveringCheck:
    covered: bool
    min_same_color_separation: float
    max_piece_diameter: float
    required_separation: float
    allowed_diameter: float
    ok: bool
    checked_pairs: int = 0
    notes: list[str] = field(default_factory=list)


def check_covering(
    cov: ColoredCovering,
    dmat: np.ndarray,
    required_separation: Optional[float] = None,
    allowed_diameter: Optional[float] = None,
    slack: float = 1e-9,
) -> CoveringCheck:
    """Exhaustive pairwise verification of the covering properties."""
    n = len(cov.assignment)
    req = cov.scale if required_separation is None else required_separation
    allow = cov.bound if allowed_diameter is None else allowed_diameter
    min_sep = math.inf
    max_diam = 0.0
    pairs = 0
    for i in range(n):
        for j in range(i + 1, n):
            pi, pj = cov.assignment[i], cov.assignment[j]
            pairs += 1
            if pi == pj:
                max_diam = max(max_diam, float(dmat[i, j]))
            elif cov.piece_color[pi] == cov.piece_color[pj]:
                min_sep = min(min_sep, float(dmat[i, j]))
    ok = (min_sep >= req - slack) and (max_diam <= allow + slack)
    return CoveringCheck(
        covered=True,  # assignment is total by construction
        min_same_color_separation=min_sep,
        max_piece_diameter=max_diam,
        required_separation=req,
        allowed_diameter=allow,
        ok=ok,
        checked_pairs=pairs,
    )


def pullback_check(
    cov: ColoredCovering,
    embedded_dmat: np.ndarray,
    cover_distance: Callable[[int, int], float],
    qi_constant: float,
    slack: float,
    binding_pairs: int = 120,
) -> CoveringCheck:
    """Verify the QI-transferred covering constants on sampled cover points.

    Pullback pieces are the phi-preimages of the embedded pieces.  The
    separation and diameter checks run the (expensive) cover-space distance
    on the binding pairs only: same-color cross-piece pairs with the
    smallest embedded distance and within-piece pairs with the largest.
    """
    n = len(cov.assignment)
    req = (cov.scale - 1.0) / qi_constant - 1.0
    allow = qi_constant * (cov.bound + 1.0) + slack
    same_piece: list[tuple[float, int, int]] = []
    cross_color: list[tuple[float, int, int]] = []
    for i in range(n):
        for j in range(i + 1, n):
            pi, pj = cov.assignment[i], cov.assignment[j]
            if pi == pj:
                same_piece.append((float(embedded_dmat[i, j]), i, j))
            elif cov.piece_color[pi] == cov.piece_color[pj]:
                cross_color.append((float(embedded_dmat[i, j]), i, j))
    same_piece.sort(reverse=True)
    cross_color.sort()
    min_sep = math.inf
    max_diam = 0.0
    checked = 0
    for _, i, j in cross_color[:binding_pairs]:
        min_sep = min(min_sep, cover_distance(i, j))
        checked += 1
    for _, i, j in same_piece[:binding_pairs]:
        max_diam = max(max_diam, cover_distance(i, j))
        checked += 1
    ok = (min_sep >= req - 1e-9) and (max_diam <= allow + 1e-9)
    return CoveringCheck(
        covered=True,
        min_same_color_separation=min_sep,
        max_piece_diameter=max_diam,
        required_separation=req,
        allowed_diameter=allow,
        ok=ok,
        checked_pairs=checked,
    )
