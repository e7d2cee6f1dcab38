"""Heuristic low-distortion placement of graph vertices in ℓ_p.

Each start (classical MDS first, then seeded random ones) is optimised by
L-BFGS on a smoothed max/min of the log distance ratios, annealing the
temperature.  On small problems the best result then gets an SLSQP polish
of the exact problem: maximise ``c`` subject to
``c*d <= ||x_i - x_j|| <= d``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp

from ..bitgraphs import MetricGraph
from ..embeddings import Embedding
from ..spaces import NormedSpace, _pgrad, _pnorm
from .factorization import FactorizationReport, factorization_report

SLSQP_LIMIT = 120_000  # constraints x variables


@dataclass(frozen=True)
class SearchBudget:
    restarts: int = 8
    iterations: int = 300


def _mds(dist: np.ndarray, k: int) -> np.ndarray:
    n = len(dist)
    J = np.eye(n) - 1.0 / n
    B = -0.5 * J @ (dist.astype(float) ** 2) @ J
    w, v = np.linalg.eigh(B)
    order = np.argsort(w)[::-1][:k]
    X = v[:, order] * np.sqrt(np.clip(w[order], 0, None))
    if X.shape[1] < k:
        X = np.hstack([X, np.zeros((n, k - X.shape[1]))])
    return X


def _distortion(X, I, J, d, p):
    r = _pnorm(X[J] - X[I], p) / d
    return r.max() / r.min() if r.min() > 0 else np.inf


def _smooth_stage(X0, I, J, d, p, iterations):
    n, k = X0.shape
    logd = np.log(d)

    def fun(flat, beta):
        X = flat.reshape(n, k)
        diff = X[J] - X[I]
        nrm = np.maximum(_pnorm(diff, p), 1e-12)
        rho = np.log(nrm) - logd
        up = logsumexp(beta * rho) / beta
        lo = logsumexp(-beta * rho) / beta
        wu = np.exp(beta * rho - beta * up)
        wl = np.exp(-beta * rho - beta * lo)
        coef = (wu - wl) / nrm
        gdiff = coef[:, None] * _pgrad(diff, p)
        G = np.zeros_like(X)
        np.add.at(G, J, gdiff)
        np.add.at(G, I, -gdiff)
        return up + lo, G.ravel()

    x = X0.ravel()
    for beta in (4.0, 16.0, 64.0, 256.0):
        res = minimize(fun, x, args=(beta,), jac=True, method="L-BFGS-B",
                       options={"maxiter": iterations})
        x = res.x
    return x.reshape(n, k)


def _polish_stage(X0, I, J, d, p, iterations):
    n, k = X0.shape
    r = _pnorm(X0[J] - X0[I], p) / d
    X0 = X0 / r.max()
    c0 = float((_pnorm(X0[J] - X0[I], p) / d).min())
    P = len(I)

    def split(z):
        return z[:-1].reshape(n, k), z[-1]

    def cons(z):
        X, c = split(z)
        nr = _pnorm(X[J] - X[I], p)
        return np.concatenate([d - nr, nr - c * d])

    def cons_jac(z):
        X, c = split(z)
        diff = X[J] - X[I]
        g = _pgrad(diff, p)
        jac = np.zeros((2 * P, n * k + 1))
        rows = np.arange(P)
        for a in range(k):
            jac[rows, J * k + a] += -g[:, a]
            jac[rows, I * k + a] += g[:, a]
            jac[P + rows, J * k + a] += g[:, a]
            jac[P + rows, I * k + a] += -g[:, a]
        jac[P:, -1] = -d
        return jac

    grad = np.zeros(n * k + 1)
    grad[-1] = -1.0
    res = minimize(lambda z: -z[-1], np.append(X0.ravel(), c0), jac=lambda z: grad,
                   constraints=[{"type": "ineq", "fun": cons, "jac": cons_jac}],
                   method="SLSQP", options={"maxiter": iterations, "ftol": 1e-15})
    return split(res.x)[0]


def distortion_search(g: MetricGraph, target: NormedSpace, budget: SearchBudget = SearchBudget(),
                      seed: int = 0) -> tuple[Embedding, FactorizationReport]:
    """Best placement found; the returned map is scaled to Lipschitz constant one."""
    if target.kind != "lp":
        raise ValueError("distortion_search needs a plain ℓ_p target")
    p, k = target.p, target.dim
    dist = g.distances.entries
    n = len(g.vertices)
    I, J = np.triu_indices(n, 1)
    d = dist[I, J].astype(float)
    rng = np.random.default_rng(seed)
    starts = [_mds(dist, k)] + [rng.standard_normal((n, k)) for _ in range(budget.restarts)]
    polish = 2 * len(I) * (n * k + 1) <= SLSQP_LIMIT

    cands = []
    for X0 in starts:
        cands += [X0, _smooth_stage(X0, I, J, d, p, budget.iterations)]
    scores = [_distortion(X, I, J, d, p) for X in cands]
    best = int(np.argmin(scores))
    best_X, best_D = cands[best], scores[best]
    if polish and np.isfinite(best_D):
        X = _polish_stage(best_X, I, J, d, p, budget.iterations)
        D = _distortion(X, I, J, d, p)
        if D < best_D:
            best_X, best_D = X, D
    f = Embedding(g, target, best_X)
    rep = factorization_report(f)
    f = f.scaled(1.0 / rep.lip)
    return f, factorization_report(f)
