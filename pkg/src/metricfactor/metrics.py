"""Exact graph distances and metric-axiom validation."""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .errors import StructureError

FULL_MATRIX_LIMIT = 20_000


@dataclass(frozen=True)
class DistanceMatrix:
    vertices: tuple[str, ...]
    entries: np.ndarray  # int64, shape (n, n)

    @property
    def order(self) -> int:
        return len(self.vertices)

    def __getitem__(self, ij):
        return self.entries[ij]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.vertices)
        for row in self.entries:
            w.writerow(int(x) for x in row)
        return buf.getvalue()


def _csgraph(g) -> csr_matrix:
    n = len(g.vertices)
    if not g.edges:
        return csr_matrix((n, n))
    e = np.asarray(g.edges, dtype=np.int64)
    rows = np.concatenate([e[:, 0], e[:, 1]])
    cols = np.concatenate([e[:, 1], e[:, 0]])
    return csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))


def distances_from(g, sources) -> np.ndarray:
    """Hop counts from each source index to every vertex (rows = sources)."""
    sources = np.atleast_1d(np.asarray(sources, dtype=np.int64))
    d = shortest_path(_csgraph(g), method="D", unweighted=True, indices=sources)
    d = np.atleast_2d(d)
    if not np.all(np.isfinite(d)):
        r, c = np.argwhere(~np.isfinite(d))[0]
        raise StructureError(
            f"graph is disconnected: {g.vertices[sources[r]]!r} cannot reach "
            f"{g.vertices[c]!r}"
        )
    return d.astype(np.int64)


def bfs_distances(g, threads: int = 1) -> DistanceMatrix:
    n = len(g.vertices)
    if n > FULL_MATRIX_LIMIT:
        raise StructureError(
            f"{n} vertices exceeds the full-matrix limit {FULL_MATRIX_LIMIT}; "
            "use distances_from for per-source queries"
        )
    if threads <= 1 or n < 256:
        entries = distances_from(g, np.arange(n))
    else:
        chunks = np.array_split(np.arange(n), threads)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: distances_from(g, c), chunks))
        entries = np.vstack(parts)
    entries.setflags(write=False)
    return DistanceMatrix(g.vertices, entries)


def tree_distance(s: str, t: str) -> int:
    common = len(os.path.commonprefix([s, t]))
    return len(s) + len(t) - 2 * common


@dataclass
class MetricReport:
    violations: list[dict] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations


def check_metric(m, limit: int = 20) -> MetricReport:
    """List violated metric axioms, each with a witness (at most ``limit`` per axiom)."""
    a = np.asarray(m.entries if isinstance(m, DistanceMatrix) else m)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"distance matrix must be square, got shape {a.shape}")
    rep = MetricReport()
    for i in np.flatnonzero(np.diag(a) != 0)[:limit]:
        rep.violations.append({"axiom": "zero-diagonal", "witness": [int(i)]})
    off = ~np.eye(len(a), dtype=bool)
    for i, j in np.argwhere((a <= 0) & off)[:limit]:
        rep.violations.append({"axiom": "positivity", "witness": [int(i), int(j)]})
    for i, j in np.argwhere(a != a.T)[:limit]:
        if i < j:
            rep.violations.append({"axiom": "symmetry", "witness": [int(i), int(j)]})
    if not np.all(np.isfinite(a)):
        i, j = np.argwhere(~np.isfinite(a))[0]
        rep.violations.append({"axiom": "finite", "witness": [int(i), int(j)]})
        return rep
    found = 0
    for b in range(len(a)):
        bad = np.argwhere(a > a[:, b][:, None] + a[b, :][None, :])
        for i, j in bad[: limit - found]:
            rep.violations.append(
                {"axiom": "triangle", "witness": [int(i), int(b), int(j)]}
            )
        found += min(len(bad), limit - found)
        if found >= limit:
            break
    return rep
