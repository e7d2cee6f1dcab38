"""Binary trees, diamond graphs and Laakso graphs on bit-string vertex sets.

Vertices are plain ``str`` objects over the alphabet ``{'0', '1'}``; the empty
string is the root of the binary tree.  Graphs are immutable
:class:`MetricGraph` values with a canonical vertex order so that their JSON
form is byte-stable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence

from .errors import ResourceCapError, StructureError

BitString = str

TREE_CAP = 20
DIAMOND_CAP = 7
LAAKSO_CAP = 4
PARTITION_CAP = 4

# One Laakso gadget, listed top to bottom; each row is adjacent to the rows
# immediately above and below it.
LAAKSO_GADGET = ("1111", "1101", "1100", "0101", "0100", "0000")
LAAKSO_GADGET_EDGES = (
    ("1111", "1101"),
    ("1101", "1100"),
    ("1101", "0101"),
    ("1100", "0100"),
    ("0101", "0100"),
    ("0100", "0000"),
)


def check_bits(s: str) -> BitString:
    if any(c not in "01" for c in s):
        raise ValueError(f"not a bit string: {s!r}")
    return s


def parent(s: BitString) -> BitString:
    if not s:
        raise ValueError("the empty sequence has no parent")
    return s[:-1]


def is_prefix(s: BitString, t: BitString) -> bool:
    """True when ``s`` is a (not necessarily proper) initial segment of ``t``."""
    return t.startswith(s)


def doubling(s: BitString) -> BitString:
    return "".join(c + c for c in s)


def quadrupling(s: BitString) -> BitString:
    return "".join(c * 4 for c in s)


def hamming(s: BitString, t: BitString) -> int:
    if len(s) != len(t):
        raise ValueError("Hamming distance needs equal lengths")
    return sum(a != b for a, b in zip(s, t))


def flip(s: BitString, i: int) -> BitString:
    return s[:i] + ("1" if s[i] == "0" else "0") + s[i + 1 :]


def tree_key(s: BitString) -> tuple[int, str]:
    return (len(s), s)


@dataclass(frozen=True)
class MetricGraph:
    """Unweighted connected graph on bit strings.

    ``edges`` holds index pairs ``(i, j)`` with ``i < j``, sorted.
    """

    family: str
    n: int
    vertices: tuple[BitString, ...]
    edges: tuple[tuple[int, int], ...]
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    @cached_property
    def index(self) -> dict[BitString, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in self.vertices]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return adj

    @cached_property
    def distances(self):
        from .metrics import bfs_distances

        return bfs_distances(self)

    def __len__(self) -> int:
        return len(self.vertices)

    def edge_strings(self) -> list[tuple[BitString, BitString]]:
        return [(self.vertices[i], self.vertices[j]) for i, j in self.edges]

    def validate(self) -> None:
        """Raise :class:`StructureError` if any graph invariant fails."""
        if len(set(self.vertices)) != len(self.vertices):
            raise StructureError("duplicate vertices")
        nv = len(self.vertices)
        for i, j in self.edges:
            if not (0 <= i < nv and 0 <= j < nv):
                raise StructureError(f"edge ({i}, {j}) references a missing vertex")
            if i == j:
                raise StructureError(f"self-loop at {self.vertices[i]!r}")
        if self.family in ("diamond", "laakso"):
            lengths = {len(v) for v in self.vertices}
            if len(lengths) != 1:
                raise StructureError("vertices of unequal length")
            for s, t in self.edge_strings():
                if hamming(s, t) != 1:
                    raise StructureError(f"edge {s}-{t} is not a Hamming edge")
        # connectivity by DFS
        seen = {0} if nv else set()
        stack = [0] if nv else []
        while stack:
            i = stack.pop()
            for j in self.adjacency[i]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        if len(seen) != nv:
            missing = next(i for i in range(nv) if i not in seen)
            raise StructureError(
                f"graph is disconnected: {self.vertices[0]!r} cannot reach "
                f"{self.vertices[missing]!r}"
            )

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "n": self.n,
            "vertices": list(self.vertices),
            "edges": [list(e) for e in self.edges],
        }

    @classmethod
    def from_json(cls, data: dict) -> "MetricGraph":
        try:
            vertices = tuple(check_bits(str(v)) for v in data["vertices"])
            edges = tuple(sorted((min(i, j), max(i, j)) for i, j in data["edges"]))
            g = cls(str(data["family"]), int(data["n"]), vertices, edges)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed graph JSON: {exc}") from exc
        g.validate()
        return g


def _graph(family: str, n: int, vertices: Sequence[str], edge_strings, meta=None) -> MetricGraph:
    index = {v: i for i, v in enumerate(vertices)}
    edges = sorted(
        (min(index[s], index[t]), max(index[s], index[t])) for s, t in edge_strings
    )
    return MetricGraph(family, n, tuple(vertices), tuple(edges), meta or {})


def all_strings(length: int) -> Iterator[BitString]:
    for bits in itertools.product("01", repeat=length):
        yield "".join(bits)


def tree_nodes(depth: int) -> list[BitString]:
    """All nodes of the binary tree of the given depth, shorter first."""
    return [s for k in range(depth + 1) for s in all_strings(k)]


def build_binary_tree(n: int, cap: int = TREE_CAP) -> MetricGraph:
    if n < 0:
        raise ValueError("depth must be >= 0")
    if n > cap:
        raise ResourceCapError("tree depth", n, cap, "--tree-cap")
    vertices = tree_nodes(n)
    index = {v: i for i, v in enumerate(vertices)}
    edges = tuple((index[v[:-1]], i) for i, v in enumerate(vertices) if v)
    return MetricGraph("tree", n, tuple(vertices), tuple(sorted(edges)))


def hamming_edges(vertices: Sequence[BitString]) -> list[tuple[int, int]]:
    """Index pairs of vertices at Hamming distance exactly one."""
    if not vertices:
        return []
    length = len(vertices[0])
    if any(len(v) != length for v in vertices):
        raise ValueError("hamming_edges needs vertices of equal length")
    index = {v: i for i, v in enumerate(vertices)}
    if len(index) != len(vertices):
        raise ValueError("duplicate vertices")
    out = []
    for i, v in enumerate(vertices):
        for k in range(length):
            j = index.get(flip(v, k))
            if j is not None and j > i:
                out.append((i, j))
    out.sort()
    return out


def diamond_vertices(n: int) -> list[BitString]:
    """Vertex set of the n-th diamond.

    New vertices are the strings strictly between ``d(u)`` and ``d(u')`` for
    an edge ``u``-``u'``; equivalently, strings Hamming-adjacent to at least
    two doubled vertices.  Taking every neighbour of a doubled vertex instead
    agrees up to n = 2 but adds pendant vertices from n = 3 on.
    """
    verts = ["0", "1"]
    for _ in range(n):
        doubled = {doubling(t) for t in verts}
        middles = set()
        for i, j in hamming_edges(verts):
            low, _, k = orient(verts[i], verts[j])
            base = doubling(low)
            middles.add(flip(base, 2 * k))
            middles.add(flip(base, 2 * k + 1))
        verts = sorted(doubled | middles)
    return verts


def build_diamond(n: int, cap: int = DIAMOND_CAP) -> MetricGraph:
    if n < 0:
        raise ValueError("n must be >= 0")
    if n > cap:
        raise ResourceCapError("diamond n", n, cap, "--diamond-cap")
    vertices = diamond_vertices(n)
    return MetricGraph("diamond", n, tuple(vertices), tuple(hamming_edges(vertices)))


def differing_coordinate(s: BitString, t: BitString) -> int:
    diffs = [i for i, (a, b) in enumerate(zip(s, t)) if a != b]
    if len(s) != len(t) or len(diffs) != 1:
        raise ValueError(f"{s!r} and {t!r} do not differ at exactly one coordinate")
    return diffs[0]


def orient(s: BitString, t: BitString) -> tuple[BitString, BitString, int]:
    """Order a Hamming edge as (zero side, one side, coordinate)."""
    j = differing_coordinate(s, t)
    return (s, t, j) if s[j] == "0" else (t, s, j)


def laakso_gadget(s: BitString, t: BitString) -> tuple[list[BitString], list[tuple[str, str]]]:
    """Vertices and edges replacing the edge ``s``-``t`` one generation up."""
    low, _, j = orient(s, t)
    qu, qv = quadrupling(low[:j]), quadrupling(low[j + 1 :])
    verts = [qu + x + qv for x in LAAKSO_GADGET]
    edges = [(qu + a + qv, qu + b + qv) for a, b in LAAKSO_GADGET_EDGES]
    return verts, edges


def build_laakso(n: int, cap: int = LAAKSO_CAP) -> MetricGraph:
    if n < 0:
        raise ValueError("n must be >= 0")
    if n > cap:
        raise ResourceCapError("laakso n", n, cap, "--laakso-cap")
    vertices = {"0", "1"}
    edges = [("0", "1")]
    for _ in range(n):
        new_vertices = {quadrupling(v) for v in vertices}
        new_edges = []
        for s, t in edges:
            gv, ge = laakso_gadget(s, t)
            new_vertices.update(gv)
            new_edges.extend(ge)
        vertices, edges = new_vertices, new_edges
    return _graph("laakso", n, sorted(vertices), edges)


def extra_hamming_edges(g: MetricGraph) -> list[tuple[BitString, BitString]]:
    """Induced Hamming edges of ``g`` that are not edges of ``g``."""
    present = set(g.edges)
    return [
        (g.vertices[i], g.vertices[j])
        for i, j in hamming_edges(g.vertices)
        if (i, j) not in present
    ]


def path_graph(k: int) -> MetricGraph:
    """Path on ``k + 1`` vertices, labelled by fixed-width binary numerals."""
    width = max(1, k.bit_length())
    vertices = [format(i, f"0{width}b") for i in range(k + 1)]
    return MetricGraph("custom", k, tuple(vertices), tuple((i, i + 1) for i in range(k)))


# --- tree levels and the block partition used by the glued tree embedding ---


def r(n: int) -> int:
    return 2**n - 1


def level_of(s: BitString | int) -> int:
    """The ``n`` with ``2**n - 1 <= |s| < 2**(n+1) - 1``."""
    length = s if isinstance(s, int) else len(s)
    return (length + 1).bit_length() - 1


@dataclass(frozen=True)
class Block:
    index: int
    level: int
    anchor: BitString

    @property
    def member_count(self) -> int:
        return 2 ** (2**self.level + 1) - 2

    def members(self) -> Iterator[BitString]:
        """Extensions ``anchor + u`` with ``1 <= |u| <= 2**level``."""
        for k in range(1, 2**self.level + 1):
            for u in all_strings(k):
                yield self.anchor + u

    def local(self, s: BitString) -> BitString:
        """The node of the small tree corresponding to member ``s``."""
        if not s.startswith(self.anchor) or not (
            1 <= len(s) - len(self.anchor) <= 2**self.level
        ):
            raise ValueError(f"{s!r} is not a member of block {self.index}")
        return s[len(self.anchor) :]


@dataclass(frozen=True)
class LevelPartition:
    """Blocks ``q[n-1]+1 .. q[n]`` partition tree level ``n`` (1 <= n <= max_level).

    The root carries no block.  Members are enumerated lazily since level 4
    alone has about two billion nodes.
    """

    max_level: int
    q: tuple[int, ...]
    blocks: tuple[Block, ...]

    @property
    def max_depth(self) -> int:
        return r(self.max_level + 1) - 1

    def block(self, index: int) -> Block:
        if not 1 <= index <= self.q[-1]:
            raise ValueError(f"no block with index {index}")
        return self.blocks[index - 1]

    def block_index(self, level: int, anchor: BitString) -> int:
        if not 1 <= level <= self.max_level or len(anchor) != r(level) - 1:
            raise ValueError(f"no level-{level} block anchored at {anchor!r}")
        return self.q[level - 1] + 1 + (int(anchor, 2) if anchor else 0)

    def block_of(self, s: BitString) -> Block:
        n = level_of(s)
        if s == "" or n > self.max_level:
            raise ValueError(f"{s!r} lies in no block")
        return self.block(self.block_index(n, s[: r(n) - 1]))


def baudier_partition(max_level: int, cap: int = PARTITION_CAP) -> LevelPartition:
    if max_level < 1:
        raise ValueError("max_level must be >= 1")
    if max_level > cap:
        raise ResourceCapError("partition max_level", max_level, cap, "--level-cap")
    q = [0]
    blocks = []
    for n in range(1, max_level + 1):
        anchors = list(all_strings(r(n) - 1))
        for i, anchor in enumerate(anchors, start=q[-1] + 1):
            blocks.append(Block(i, n, anchor))
        q.append(q[-1] + len(anchors))
    return LevelPartition(max_level, tuple(q), tuple(blocks))


def decompose(s: BitString, p: LevelPartition) -> list[tuple[BitString, int]]:
    """Cut ``s`` into pieces at lengths ``2**(i+1) - 2`` and tag each with its block.

    Piece ``i`` (1-based, ``i < n``) has length ``2**i``; the last piece is
    the nonempty remainder.
    """
    if s == "":
        raise ValueError("the empty sequence has no decomposition")
    n = level_of(s)
    if n > p.max_level:
        raise ValueError(f"{s!r} is at level {n}, beyond the partition's {p.max_level}")
    out = []
    start = 0
    for i in range(1, n + 1):
        end = r(i + 1) - 1 if i < n else len(s)
        out.append((s[start:end], p.block_index(i, s[:start])))
        start = end
    return out
