"""Lipschitz / co-Lipschitz constants of a map composed with an operator."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..embeddings import Embedding
from ..errors import PreconditionError
from ..metrics import distances_from
from ..spaces import NormedOperator, identity

PAIR_LIMIT = 10**7
SAMPLE_PAIRS = 10**6


@dataclass(frozen=True)
class FactorizationReport:
    lip: float
    colip: float
    D: float
    witness_upper: tuple[str, str]
    witness_lower: tuple[str, str]
    mode: str
    seed: int | None
    pairs: int

    @property
    def collapsed(self) -> bool:
        return self.colip == 0

    def to_json(self) -> dict:
        return {
            "lip": self.lip,
            "colip": self.colip,
            "D": self.D,
            "witness_upper": list(self.witness_upper),
            "witness_lower": list(self.witness_lower),
            "mode": self.mode,
            "seed": self.seed,
            "pairs": self.pairs,
        }


def pair_ratios(f: Embedding, A: NormedOperator, i: int, j: int, d: int) -> tuple[float, float]:
    """``(||f(s)-f(t)||/d, ||Af(s)-Af(t)||/d)`` for one pair of vertex indices."""
    V = f.vectors
    AV = A.apply(V[[i, j]])
    up = float(f.space.norm((V[j] - V[i])[None, :])[0]) / d
    lo = float(A.codomain.norm((AV[1] - AV[0])[None, :])[0]) / d
    return up, lo


def _scan_exhaustive(f, A, dist):
    V = f.vectors
    AV = A.apply(V)
    n = len(V)
    best_up, best_lo = (-1.0, None), (math.inf, None)
    for i in range(n - 1):
        d = dist[i, i + 1 :]
        up = np.asarray(f.space.norm(V[i + 1 :] - V[i])) / d
        lo = np.asarray(A.codomain.norm(AV[i + 1 :] - AV[i])) / d
        k = int(np.argmax(up))
        if up[k] > best_up[0]:
            best_up = (float(up[k]), (i, i + 1 + k))
        k = int(np.argmin(lo))
        if lo[k] < best_lo[0]:
            best_lo = (float(lo[k]), (i, i + 1 + k))
    return best_up[1], best_lo[1], n * (n - 1) // 2


def _scan_sampled(f, A, g, count, rng):
    V = f.vectors
    AV = A.apply(V)
    n = len(V)
    i = rng.integers(0, n, size=count)
    j = rng.integers(0, n - 1, size=count)
    j = j + (j >= i)
    d = np.empty(count)
    for src in np.unique(i):
        sel = i == src
        d[sel] = distances_from(g, [src])[0][j[sel]]
    up = np.asarray(f.space.norm(V[j] - V[i])) / d
    lo = np.asarray(A.codomain.norm(AV[j] - AV[i])) / d
    ku, kl = int(np.argmax(up)), int(np.argmin(lo))
    return (int(i[ku]), int(j[ku])), (int(i[kl]), int(j[kl])), count


def factorization_report(f: Embedding, A: NormedOperator | None = None, seed: int = 0,
                         pair_limit: int = PAIR_LIMIT, sample_pairs: int = SAMPLE_PAIRS) -> FactorizationReport:
    """Scan vertex pairs for ``max ||f(s)-f(t)||/d`` and ``min ||Af(s)-Af(t)||/d``.

    Above ``pair_limit`` pairs a seeded sample is used and the report says so.
    A collapsing pair gives ``D = inf`` rather than an exception.
    """
    g = f.graph
    A = A or identity(f.space)
    if A.domain.dim != f.space.dim:
        raise ValueError("operator domain does not match the embedding's space")
    n = len(g.vertices)
    if n < 2:
        raise ValueError("need at least two vertices")
    total = n * (n - 1) // 2
    if total <= pair_limit:
        wu, wl, pairs = _scan_exhaustive(f, A, g.distances.entries)
        mode = "exhaustive"
    else:
        rng = np.random.default_rng(seed)
        wu, wl, pairs = _scan_sampled(f, A, g, sample_pairs, rng)
        mode = "sampled"

    def dist(i, j):
        return int(distances_from(g, [i])[0][j]) if mode == "sampled" else int(g.distances.entries[i, j])

    # re-evaluate the witnesses so the report reproduces exactly
    lip = pair_ratios(f, A, *wu, dist(*wu))[0]
    colip = pair_ratios(f, A, *wl, dist(*wl))[1]
    D = math.inf if colip == 0 else lip / colip
    V = g.vertices
    return FactorizationReport(
        lip, colip, D, (V[wu[0]], V[wu[1]]), (V[wl[0]], V[wl[1]]), mode,
        seed if mode == "sampled" else None, pairs,
    )


def normalized(f: Embedding, report: FactorizationReport | None = None) -> Embedding:
    """Scale ``f`` to Lipschitz constant one."""
    report = report or factorization_report(f)
    if report.lip == 0:
        raise ValueError("constant embedding cannot be normalised")
    return f.scaled(1.0 / report.lip)


def check_hypothesis(f: Embedding, A: NormedOperator, D: float | None, rtol: float = 1e-9) -> tuple[FactorizationReport, float]:
    """Check ``d/D <= ||Af(s)-Af(t)|| <= ||f(s)-f(t)|| <= d`` on every pair.

    ``D = None`` takes the smallest admissible constant, ``1/colip``.
    Returns the report and the constant used.
    """
    rep = factorization_report(f, A)
    if rep.mode != "exhaustive":
        raise PreconditionError("hypothesis check needs an exhaustive pair scan")
    if rep.lip > 1 + rtol:
        raise PreconditionError(
            f"map is not 1-Lipschitz: ratio {rep.lip!r} at {rep.witness_upper}", rep.witness_upper
        )
    if rep.colip == 0:
        raise PreconditionError(f"pair {rep.witness_lower} collapses under A∘f", rep.witness_lower)
    if D is None:
        D = 1.0 / rep.colip
    if rep.colip < (1.0 / D) * (1 - rtol):
        raise PreconditionError(
            f"lower bound fails: ratio {rep.colip!r} < 1/D = {1 / D!r} at {rep.witness_lower}",
            rep.witness_lower,
        )
    # ||Ax|| <= ||x|| on the differences that occur
    V = f.vectors
    AV = A.apply(V)
    for i in range(len(V) - 1):
        a = np.asarray(A.codomain.norm(AV[i + 1 :] - AV[i]))
        b = np.asarray(f.space.norm(V[i + 1 :] - V[i]))
        bad = np.flatnonzero(a > b * (1 + rtol) + 1e-300)
        if bad.size:
            j = i + 1 + int(bad[0])
            pair = (f.graph.vertices[i], f.graph.vertices[j])
            raise PreconditionError(f"operator expands the difference at {pair}", pair)
    return rep, D
