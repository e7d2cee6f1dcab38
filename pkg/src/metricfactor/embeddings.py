"""Explicit embeddings: summing maps on cubes, Bourgain's tree map, and the
glued map of the infinite tree built from per-block tree maps."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .bitgraphs import (
    BitString,
    LevelPartition,
    MetricGraph,
    baudier_partition,
    build_binary_tree,
    decompose,
    tree_nodes,
)
from .spaces import NormedSpace, _pnorm, block_sum, lp


@dataclass(frozen=True)
class Embedding:
    """Row ``i`` of ``vectors`` is the image of ``graph.vertices[i]``."""

    graph: MetricGraph
    space: NormedSpace
    vectors: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=float)
        if v.shape != (len(self.graph.vertices), self.space.dim):
            raise ValueError(
                f"embedding table has shape {v.shape}, expected "
                f"({len(self.graph.vertices)}, {self.space.dim})"
            )
        object.__setattr__(self, "vectors", v)

    def __call__(self, vertex: BitString) -> np.ndarray:
        return self.vectors[self.graph.index[vertex]]

    def scaled(self, c: float) -> "Embedding":
        return Embedding(self.graph, self.space, self.vectors * c)

    def to_json(self) -> dict:
        return {
            "graph": self.graph.to_json(),
            "space": self.space.to_json(),
            "map": {v: row.tolist() for v, row in zip(self.graph.vertices, self.vectors)},
        }

    @classmethod
    def from_json(cls, d: dict) -> "Embedding":
        g = MetricGraph.from_json(d["graph"])
        space = NormedSpace.from_json(d["space"])
        m = d["map"]
        missing = [v for v in g.vertices if v not in m]
        if missing:
            raise ValueError(f"embedding has no image for vertex {missing[0]!r}")
        return cls(g, space, np.array([m[v] for v in g.vertices], dtype=float))


def js_vertex_embedding(g: MetricGraph, basis, space: NormedSpace | None = None) -> Embedding:
    """``f(k_1..k_N) = sum of basis[i] over coordinates with k_i = 1``."""
    X = np.atleast_2d(np.asarray(basis, dtype=float))
    length = len(g.vertices[0])
    if len(X) != length:
        raise ValueError(f"{len(X)} basis vectors for vertices of length {length}")
    space = space or lp(X.shape[1], 1)
    bits = np.array([[c == "1" for c in v] for v in g.vertices], dtype=float)
    return Embedding(g, space, bits @ X)


def canonical_node_vectors(depth: int) -> dict[BitString, np.ndarray]:
    """Distinct unit coordinate vectors, one per nonempty node, in tree order."""
    nodes = tree_nodes(depth)[1:]
    eye = np.eye(len(nodes))
    return {u: eye[i] for i, u in enumerate(nodes)}


def random_sign_node_vectors(depth: int, dim: int, rng: np.random.Generator) -> dict[BitString, np.ndarray]:
    """Random ±1/sqrt(dim) vectors (unit in ℓ2), one per nonempty node."""
    nodes = tree_nodes(depth)[1:]
    signs = rng.choice([-1.0, 1.0], size=(len(nodes), dim)) / np.sqrt(dim)
    return {u: signs[i] for i, u in enumerate(nodes)}


def bourgain_tree_embedding(n: int, node_vectors: Mapping[BitString, np.ndarray],
                            space: NormedSpace | None = None) -> Embedding:
    """``f(s) = sum of y_u over the nonempty prefixes u of s``; ``f(root) = 0``."""
    g = build_binary_tree(n)
    missing = [u for u in g.vertices[1:] if u not in node_vectors]
    if missing:
        raise ValueError(f"no vector for node {missing[0]!r}")
    dim = len(next(iter(node_vectors.values()))) if node_vectors else 1
    space = space or lp(dim, 1)
    out = np.zeros((len(g.vertices), dim))
    for i, s in enumerate(g.vertices):
        if s:
            out[i] = out[g.index[s[:-1]]] + node_vectors[s]
    return Embedding(g, space, out)


@dataclass
class GluedEmbeddingPlan:
    """Per-block tree embeddings placed on disjoint coordinate ranges.

    ``block_maps[level]`` embeds B_{2^level} into its own ℓ_p space;
    every block of that level reuses it on its own coordinates.  The ambient
    norm is the ``outer``-sum of the block norms, so each block projection
    has norm ``kappa = 1``.
    """

    partition: LevelPartition
    block_maps: dict[int, Embedding]
    outer: float = 1.0
    D: float = 1.0
    kappa: float = 1.0
    offsets: list[int] = field(init=False)

    def __post_init__(self):
        self.validate()
        self.offsets = [0]
        for b in self.partition.blocks:
            self.offsets.append(self.offsets[-1] + self.block_maps[b.level].space.dim)

    @property
    def dim(self) -> int:
        return self.offsets[-1]

    @property
    def space(self) -> NormedSpace:
        sizes = [self.block_maps[b.level].space.dim for b in self.partition.blocks]
        inner = {m.space.p for m in self.block_maps.values()}
        if len(inner) != 1 or any(m.space.kind != "lp" for m in self.block_maps.values()):
            raise ValueError("ambient space needs one common ℓ_p block norm")
        p = inner.pop()
        if p == self.outer:
            return lp(self.dim, p)
        return block_sum(sizes, p, self.outer)

    def support(self, index: int) -> range:
        return range(self.offsets[index - 1], self.offsets[index])

    def validate(self) -> None:
        for level in range(1, self.partition.max_level + 1):
            f = self.block_maps.get(level)
            if f is None:
                raise ValueError(f"no block embedding for level {level}")
            if f.graph.family != "tree" or f.graph.n != 2**level:
                raise ValueError(f"level-{level} block map must embed B_{2**level}")
            if np.any(f("") != 0):
                raise ValueError(f"level-{level} block map does not send the root to 0")

    def pieces(self, s: BitString) -> dict[int, np.ndarray]:
        """Block index -> block-local image; the glued image is their disjoint sum."""
        if s == "":
            return {}
        out = {}
        for piece, j in decompose(s, self.partition):
            f = self.block_maps[self.partition.block(j).level]
            out[j] = f(piece)
        return out

    def vector(self, s: BitString) -> np.ndarray:
        v = np.zeros(self.dim)
        for j, x in self.pieces(s).items():
            v[self.offsets[j - 1] : self.offsets[j]] = x
        return v

    def distance(self, s: BitString, t: BitString) -> float:
        """``||f(s) - f(t)||`` computed block by block, without the full vector."""
        ps, pt = self.pieces(s), self.pieces(t)
        norms = []
        for j in ps.keys() | pt.keys():
            f = self.block_maps[self.partition.block(j).level]
            a = ps.get(j)
            b = pt.get(j)
            diff = (a if a is not None else 0.0) - (b if b is not None else 0.0)
            norms.append(f.space.norm(np.atleast_1d(diff)))
        if not norms:
            return 0.0
        return float(_pnorm(np.asarray(norms), self.outer))


def desk_plan(max_level: int, outer: float = 1.0) -> GluedEmbeddingPlan:
    """Glued plan whose blocks are Bourgain maps with disjoint ℓ1 unit vectors (D = 1)."""
    part = baudier_partition(max_level)
    maps = {}
    for level in range(1, max_level + 1):
        depth = 2**level
        maps[level] = bourgain_tree_embedding(depth, canonical_node_vectors(depth))
    return GluedEmbeddingPlan(part, maps, outer=outer, D=1.0)


def baudier_glued_embedding(plan: GluedEmbeddingPlan, depth: int | None = None) -> Embedding:
    """Materialise the glued map on the tree truncated at the plan's depth."""
    max_depth = plan.partition.max_depth
    depth = max_depth if depth is None else depth
    if depth > max_depth:
        raise ValueError(f"depth {depth} exceeds the partition's depth {max_depth}")
    g = build_binary_tree(depth)
    return Embedding(g, plan.space, np.array([plan.vector(s) for s in g.vertices]))
