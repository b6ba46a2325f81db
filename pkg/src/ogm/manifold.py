"""Combinatorial data of an orthogonal graph-manifold.

The input is a finite graph with involutive oriented edges; every oriented
edge w carries a permutation of the n-1 wall coordinates {0, ..., n-2} with
perm(0) != 0 and perm(-w) = perm(w)^-1.  Coordinate 0 is the boundary
arclength ("base") coordinate; crossing a wall relabels coordinates so that
the neighbor's coordinate perm(i) reads our coordinate i.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Iterable, Optional


@dataclass(frozen=True)
class Permutation:
    """Permutation of {0, ..., n-2} stored as the image array."""

    images: tuple[int, ...]

    def __call__(self, i: int) -> int:
        return self.images[i]

    def __len__(self) -> int:
        return len(self.images)

    def after(self, other: "Permutation") -> "Permutation":
        """self composed after other: (self.after(other))(i) = self(other(i))."""
        return Permutation(tuple(self.images[j] for j in other.images))

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.images)
        for i, j in enumerate(self.images):
            inv[j] = i
        return Permutation(tuple(inv))

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.images))

    @staticmethod
    def identity(n: int) -> "Permutation":
        return Permutation(tuple(range(n)))


@dataclass(frozen=True)
class OrientedEdge:
    id: str
    frm: str
    to: str
    reverse: str
    perm: Permutation


class SpecError(ValueError):
    pass


class GraphManifoldSpec:
    """Validated-on-demand container for the gluing graph."""

    def __init__(self, n: int, vertices: list[str], edges: list[OrientedEdge]):
        self.n = n
        self.vertices = list(vertices)
        self.edges = {e.id: e for e in edges}
        self._boundary: dict[str, list[OrientedEdge]] = {v: [] for v in vertices}
        for e in edges:
            if e.frm in self._boundary:
                self._boundary[e.frm].append(e)
        for v in self._boundary:
            self._boundary[v].sort(key=lambda e: e.id)

    def boundary(self, v: str) -> list[OrientedEdge]:
        """Oriented edges out of v, canonically ordered."""
        return self._boundary[v]

    def root_vertex(self) -> str:
        return self.vertices[0]

    @staticmethod
    def from_dict(doc: dict) -> "GraphManifoldSpec":
        try:
            n = int(doc["n"])
            vertices = [str(v) for v in doc["vertices"]]
            edges = [
                OrientedEdge(
                    id=str(e["id"]),
                    frm=str(e["from"]),
                    to=str(e["to"]),
                    reverse=str(e["reverse"]),
                    perm=Permutation(tuple(int(i) for i in e["perm"])),
                )
                for e in doc["edges"]
            ]
        except (KeyError, TypeError) as exc:
            raise SpecError(f"malformed spec document: {exc}") from exc
        return GraphManifoldSpec(n, vertices, edges)

    @staticmethod
    def from_json_file(path: str) -> "GraphManifoldSpec":
        with open(path, "r", encoding="utf-8") as fh:
            return GraphManifoldSpec.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "vertices": list(self.vertices),
            "edges": [
                {
                    "id": e.id,
                    "from": e.frm,
                    "to": e.to,
                    "reverse": e.reverse,
                    "perm": list(e.perm.images),
                }
                for e in sorted(self.edges.values(), key=lambda e: e.id)
            ],
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def validate(spec: GraphManifoldSpec) -> list[str]:
    """All invariant violations, deterministically ordered; empty = valid."""
    out: list[str] = []
    if spec.n < 3:
        out.append(f"dimension n={spec.n} below 3")
    if not spec.vertices:
        out.append("no vertices")
    if len(set(spec.vertices)) != len(spec.vertices):
        out.append("duplicate vertex names")
    width = spec.n - 1
    for eid in sorted(spec.edges):
        e = spec.edges[eid]
        if e.frm not in spec._boundary or e.to not in spec._boundary:
            out.append(f"edge {eid}: endpoint not a vertex")
            continue
        imgs = e.perm.images
        if len(imgs) != width:
            out.append(f"edge {eid}: permutation length {len(imgs)} != n-1={width}")
            continue
        if sorted(imgs) != list(range(width)):
            out.append(f"edge {eid}: not a permutation of 0..{width - 1}")
            continue
        if imgs[0] == 0:
            out.append(f"edge {eid}: fixed base coordinate (perm(0) = 0)")
        rev = spec.edges.get(e.reverse)
        if rev is None:
            out.append(f"edge {eid}: reverse {e.reverse} missing")
            continue
        if rev.id == eid:
            out.append(f"edge {eid}: is its own reverse")
            continue
        if rev.reverse != eid:
            out.append(f"edge {eid}: reverse pairing not involutive")
        if rev.frm != e.to or rev.to != e.frm:
            out.append(f"edge {eid}: reverse does not swap endpoints")
        if len(rev.perm.images) == width and not rev.perm.after(e.perm).is_identity():
            out.append(f"edge {eid}: non-involutive gluing (perm(-w) != perm(w)^-1)")
    for v in sorted(set(spec.vertices)):
        if not spec._boundary.get(v):
            out.append(f"vertex {v}: no adjacent edges")
    return out


def path_permutation(spec: GraphManifoldSpec, path: Iterable[str]) -> Permutation:
    """Composition s_{w_k} o ... o s_{w_1} along a composable edge path."""
    acc = Permutation.identity(spec.n - 1)
    prev_to: Optional[str] = None
    for eid in path:
        e = spec.edges[eid]
        if prev_to is not None and e.frm != prev_to:
            raise SpecError(f"path not composable at edge {eid}")
        acc = e.perm.after(acc)
        prev_to = e.to
    return acc


# ---------------------------------------------------------------------------
# the Bass-Serre tree, combinatorially


@dataclass(frozen=True)
class T0Vertex:
    """Vertex of the (explored) tree dual to the block decomposition."""

    path: tuple[str, ...]  # oriented edge ids from the root block
    g_vertex: str

    @property
    def rank(self) -> int:
        return len(self.path)


def class_label(spec: GraphManifoldSpec, vertex: T0Vertex) -> int:
    """Index k with s_{v->root}(0) = k; two explored vertices are equivalent
    iff their labels agree (the composed permutation then fixes 0)."""
    sigma = path_permutation(spec, vertex.path)
    return sigma.inverse()(0)


def vertex_classes(
    spec: GraphManifoldSpec, explored: Iterable[T0Vertex]
) -> dict[tuple[str, ...], int]:
    """Partition explored tree vertices by the fixes-the-base relation."""
    return {v.path: class_label(spec, v) for v in explored}


def explore_t0_labels(
    spec: GraphManifoldSpec, depth: int, root: Optional[str] = None
) -> list[T0Vertex]:
    """Label-tree exploration: one child per oriented edge of the block's
    boundary (the cover realizes each label along many walls; for class
    analysis the label tree carries the same permutation data)."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    root_v = spec.root_vertex() if root is None else root
    out = [T0Vertex((), root_v)]
    frontier = [out[0]]
    for _ in range(depth):
        nxt = []
        for node in frontier:
            for e in spec.boundary(node.g_vertex):
                nxt.append(T0Vertex(node.path + (e.id,), e.to))
        out.extend(nxt)
        frontier = nxt
    return out


@dataclass(frozen=True)
class IrreducibilityReport:
    irreducible: bool
    covered: tuple[int, ...]
    witnesses: dict[int, tuple[str, ...]]
    reason: str


def check_irreducible(
    spec: GraphManifoldSpec, depth: int, root: Optional[str] = None
) -> IrreducibilityReport:
    """True iff the base coordinate reaches every index within the explored
    ball; reported as inconclusive-at-depth (never true) otherwise.

    Explores (g_vertex, composed permutation) states breadth-first with
    deduplication, so deep balls stay cheap.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    root_v = spec.root_vertex() if root is None else root
    width = spec.n - 1
    start = (root_v, Permutation.identity(width))
    seen = {(start[0], start[1].images)}
    witnesses: dict[int, tuple[str, ...]] = {0: ()}
    frontier: list[tuple[str, Permutation, tuple[str, ...]]] = [
        (root_v, start[1], ())
    ]
    for _ in range(depth):
        nxt = []
        for gv, sigma, path in frontier:
            for e in spec.boundary(gv):
                sig2 = e.perm.after(sigma)
                key = (e.to, sig2.images)
                if key in seen:
                    continue
                seen.add(key)
                p2 = path + (e.id,)
                label = sig2.inverse()(0)
                if label not in witnesses:
                    witnesses[label] = p2
                nxt.append((e.to, sig2, p2))
        frontier = nxt
    covered = tuple(sorted(witnesses))
    if len(witnesses) == width:
        return IrreducibilityReport(True, covered, witnesses, "all coordinates reached")
    missing = sorted(set(range(width)) - set(witnesses))
    return IrreducibilityReport(
        False,
        covered,
        witnesses,
        f"coordinates {missing} not reached within depth {depth} (inconclusive)",
    )
