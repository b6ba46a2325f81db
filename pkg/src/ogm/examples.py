"""Shipped example gluing graphs (also exported as JSON via the CLI tests)."""

from __future__ import annotations

from .manifold import GraphManifoldSpec


def flip_n3() -> dict:
    """One block, one geometric loop, transposition gluing (n = 3)."""
    return {
        "n": 3,
        "vertices": ["v"],
        "edges": [
            {"id": "w1", "from": "v", "to": "v", "reverse": "w2", "perm": [1, 0]},
            {"id": "w2", "from": "v", "to": "v", "reverse": "w1", "perm": [1, 0]},
        ],
    }


def cycle_n4() -> dict:
    """One block, one loop carrying the 3-cycle 0 -> 1 -> 2 -> 0 (n = 4)."""
    return {
        "n": 4,
        "vertices": ["v"],
        "edges": [
            {"id": "w1", "from": "v", "to": "v", "reverse": "w2", "perm": [1, 2, 0]},
            {"id": "w2", "from": "v", "to": "v", "reverse": "w1", "perm": [2, 0, 1]},
        ],
    }


def reducible_n4() -> dict:
    """Loop swapping only coordinates 0 and 1; coordinate 2 splits off a
    Euclidean factor, so the verifier must refuse this spec."""
    return {
        "n": 4,
        "vertices": ["v"],
        "edges": [
            {"id": "w1", "from": "v", "to": "v", "reverse": "w2", "perm": [1, 0, 2]},
            {"id": "w2", "from": "v", "to": "v", "reverse": "w1", "perm": [1, 0, 2]},
        ],
    }


def two_vertex_n5() -> dict:
    """Two blocks: a 4-cycle loop on the first plus a flip edge to the second.

    A bare two-vertex cycle gluing undoes itself along back-and-forth paths;
    the loop makes the coordinate action transitive."""
    return {
        "n": 5,
        "vertices": ["a", "b"],
        "edges": [
            {"id": "la", "from": "a", "to": "a", "reverse": "lb", "perm": [1, 2, 3, 0]},
            {"id": "lb", "from": "a", "to": "a", "reverse": "la", "perm": [3, 0, 1, 2]},
            {"id": "wa", "from": "a", "to": "b", "reverse": "wb", "perm": [1, 0, 3, 2]},
            {"id": "wb", "from": "b", "to": "a", "reverse": "wa", "perm": [1, 0, 3, 2]},
        ],
    }


SHIPPED: dict[str, dict] = {
    "flip_n3": flip_n3(),
    "cycle_n4": cycle_n4(),
    "reducible_n4": reducible_n4(),
    "two_vertex_n5": two_vertex_n5(),
}

IRREDUCIBLE_NAMES = ("flip_n3", "cycle_n4", "two_vertex_n5")


def load(name: str) -> GraphManifoldSpec:
    return GraphManifoldSpec.from_dict(SHIPPED[name])
