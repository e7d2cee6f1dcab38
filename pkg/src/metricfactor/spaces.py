"""Finite-dimensional normed spaces, operators between them, and searches
over their unit balls.

Norms act on the last axis, so a ``(k, dim)`` array yields ``k`` norms.
Search routines label which side of the true value they bound.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

INF = math.inf


def _p_from_json(p):
    return INF if p in ("inf", "Infinity", None) or p == INF else float(p)


def _p_to_json(p):
    return "inf" if p == INF else p


def _pnorm(x: np.ndarray, p: float) -> np.ndarray:
    a = np.abs(x)
    if p == 1:
        return a.sum(axis=-1)
    if p == INF:
        return a.max(axis=-1) if x.shape[-1] else np.zeros(x.shape[:-1])
    # scale by the max entry first so powers neither overflow nor underflow
    m = a.max(axis=-1, keepdims=True)
    safe = np.where(m > 0, m, 1.0)
    if p == 2:
        b = a / safe
        return np.squeeze(m, -1) * np.sqrt((b * b).sum(axis=-1))
    return np.squeeze(m, -1) * ((a / safe) ** p).sum(axis=-1) ** (1.0 / p)


def _conjugate(p: float) -> float:
    if p == 1:
        return INF
    if p == INF:
        return 1.0
    return p / (p - 1)


def _pgrad(x: np.ndarray, p: float) -> np.ndarray:
    """A norming functional for ``x`` in the dual unit ball (zero at zero)."""
    nx = _pnorm(x, p)[..., None]
    if p == 1:
        return np.sign(x)
    if p == INF:
        out = np.zeros_like(x)
        k = np.argmax(np.abs(x), axis=-1)
        np.put_along_axis(out, k[..., None], np.sign(np.take_along_axis(x, k[..., None], -1)), -1)
        return out
    safe = np.where(nx > 0, nx, 1.0)
    return np.where(nx > 0, np.sign(x) * (np.abs(x) / safe) ** (p - 1), 0.0)


@dataclass(frozen=True)
class NormedSpace:
    """``kind`` is one of ``lp`` (plain), ``weighted`` or ``blocks``.

    ``blocks`` is a direct sum of ℓ_p blocks (inner exponent ``p``) combined
    by an outer ℓ_outer norm; ``outer = inf`` is the max-of-blocks norm.
    """

    dim: int
    p: float = 2.0
    kind: str = "lp"
    weights: tuple[float, ...] | None = None
    blocks: tuple[int, ...] | None = None
    outer: float = INF

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")
        if not (self.p >= 1):
            raise ValueError(f"p must be in [1, inf], got {self.p}")
        if self.kind == "weighted":
            if self.weights is None or len(self.weights) != self.dim:
                raise ValueError("weighted space needs one weight per coordinate")
            if min(self.weights) <= 0:
                raise ValueError("weights must be positive")
        elif self.kind == "blocks":
            if not self.blocks or sum(self.blocks) != self.dim or min(self.blocks) < 1:
                raise ValueError("block sizes must be positive and sum to dim")
        elif self.kind != "lp":
            raise ValueError(f"unknown space kind {self.kind!r}")

    @property
    def label(self) -> str:
        if self.kind == "lp":
            return {1.0: "l1", 2.0: "l2", INF: "linf"}.get(self.p, f"l{self.p:g}")
        return self.kind

    def _check(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape[-1] != self.dim:
            raise ValueError(f"vector of dimension {v.shape[-1]} in a {self.dim}-dimensional space")
        return v

    def _split(self, v):
        edges = np.cumsum((0,) + self.blocks)
        return [v[..., a:b] for a, b in zip(edges[:-1], edges[1:])]

    def norm(self, v) -> np.ndarray | float:
        v = self._check(v)
        if self.kind == "lp":
            out = _pnorm(v, self.p)
        elif self.kind == "weighted":
            w = np.asarray(self.weights)
            out = _pnorm(v * w ** (1 / self.p) if self.p != INF else v * w, self.p)
        else:
            inner = np.stack([_pnorm(b, self.p) for b in self._split(v)], axis=-1)
            out = _pnorm(inner, self.outer)
        return float(out) if np.ndim(out) == 0 else out

    def dual_norm(self, w) -> np.ndarray | float:
        w = self._check(w)
        q = _conjugate(self.p)
        if self.kind == "lp":
            out = _pnorm(w, q)
        elif self.kind == "weighted":
            wt = np.asarray(self.weights)
            out = _pnorm(w / (wt ** (1 / self.p) if self.p != INF else wt), q)
        else:
            inner = np.stack([_pnorm(b, q) for b in self._split(w)], axis=-1)
            out = _pnorm(inner, _conjugate(self.outer))
        return float(out) if np.ndim(out) == 0 else out

    def norming_functional(self, v) -> np.ndarray:
        """``w`` with dual norm <= 1 and ``<w, v> = ||v||`` (zero for ``v = 0``)."""
        v = self._check(v)
        if self.kind == "lp":
            return _pgrad(v, self.p)
        if self.kind == "weighted":
            wt = np.asarray(self.weights)
            s = wt ** (1 / self.p) if self.p != INF else wt
            return _pgrad(v * s, self.p) * s
        parts = self._split(v)
        inner = np.stack([_pnorm(b, self.p) for b in parts], axis=-1)
        outer_w = _pgrad(inner, self.outer)
        return np.concatenate(
            [outer_w[..., i : i + 1] * _pgrad(b, self.p) for i, b in enumerate(parts)],
            axis=-1,
        )

    def unit_basis(self) -> np.ndarray:
        """Signed coordinate vectors scaled to norm one, shape ``(2*dim, dim)``."""
        e = np.vstack([np.eye(self.dim), -np.eye(self.dim)])
        return e / np.asarray(self.norm(e))[:, None]

    def to_json(self) -> dict:
        if self.kind == "lp":
            d = {"kind": self.label, "dim": self.dim}
            if self.label.startswith("l") and self.label not in ("l1", "l2", "linf"):
                d = {"kind": "lp", "p": self.p, "dim": self.dim}
            return d
        if self.kind == "weighted":
            return {"kind": "weighted", "p": _p_to_json(self.p), "weights": list(self.weights)}
        return {
            "kind": "blocks",
            "p": _p_to_json(self.p),
            "outer": _p_to_json(self.outer),
            "blocks": list(self.blocks),
        }

    @classmethod
    def from_json(cls, d: dict) -> "NormedSpace":
        kind = d.get("kind")
        if kind in ("l1", "l2", "linf"):
            return lp(int(d["dim"]), {"l1": 1.0, "l2": 2.0, "linf": INF}[kind])
        if kind == "lp":
            return lp(int(d["dim"]), _p_from_json(d["p"]))
        if kind == "weighted":
            w = tuple(float(x) for x in d["weights"])
            return cls(len(w), _p_from_json(d.get("p", 2)), "weighted", weights=w)
        if kind == "blocks":
            b = tuple(int(x) for x in d["blocks"])
            return block_sum(b, _p_from_json(d.get("p", 2)), _p_from_json(d.get("outer", "inf")))
        raise ValueError(f"unknown space kind {kind!r}")


def lp(dim: int, p: float = 2.0) -> NormedSpace:
    return NormedSpace(dim, float(p))


def block_sum(sizes, p: float = 2.0, outer: float = INF) -> NormedSpace:
    sizes = tuple(int(s) for s in sizes)
    return NormedSpace(sum(sizes), float(p), "blocks", blocks=sizes, outer=float(outer))


def parse_space(text: str) -> NormedSpace:
    """Parse a compact descriptor such as ``l2:3``, ``l1:4``, ``linf:2`` or ``lp:3:5``."""
    parts = text.split(":")
    try:
        if parts[0] in ("l1", "l2", "linf") and len(parts) == 2:
            return NormedSpace.from_json({"kind": parts[0], "dim": int(parts[1])})
        if parts[0] == "lp" and len(parts) == 3:
            return lp(int(parts[2]), _p_from_json(parts[1]))
    except ValueError as exc:
        raise ValueError(f"bad space descriptor {text!r}: {exc}") from exc
    raise ValueError(f"bad space descriptor {text!r}; expected e.g. l2:3 or lp:3:5")


@dataclass(frozen=True)
class NormedOperator:
    matrix: np.ndarray  # (codomain.dim, domain.dim)
    domain: NormedSpace
    codomain: NormedSpace

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (self.codomain.dim, self.domain.dim):
            raise ValueError(
                f"matrix shape {m.shape} does not match "
                f"{self.domain.dim}-dim domain / {self.codomain.dim}-dim codomain"
            )
        object.__setattr__(self, "matrix", m)

    def apply(self, v) -> np.ndarray:
        return np.asarray(v, dtype=float) @ self.matrix.T

    def scaled(self, c: float) -> "NormedOperator":
        return NormedOperator(self.matrix * c, self.domain, self.codomain)

    def to_json(self) -> dict:
        return {
            "matrix": self.matrix.tolist(),
            "domain": self.domain.to_json(),
            "codomain": self.codomain.to_json(),
        }

    @classmethod
    def from_json(cls, d: dict) -> "NormedOperator":
        return cls(
            np.asarray(d["matrix"], dtype=float),
            NormedSpace.from_json(d["domain"]),
            NormedSpace.from_json(d["codomain"]),
        )


def identity(space: NormedSpace) -> NormedOperator:
    return NormedOperator(np.eye(space.dim), space, space)


@dataclass(frozen=True)
class Budget:
    restarts: int = 64
    steps: int = 500


DEFAULT_BUDGET = Budget()
SIGN_ENUM_LIMIT = 16


@dataclass(frozen=True)
class OperatorNorm:
    lower: float  # attained at an evaluated point
    upper: float  # heuristic unless exact
    exact: bool
    argmax: np.ndarray | None = None


def _hill_climb(score, x0: np.ndarray, steps: int, rng: np.random.Generator,
                sigma0: float = 0.3) -> tuple[np.ndarray, np.ndarray]:
    """Batched (1+1) random search maximising ``score`` row-wise.

    Each row adapts its own step size: grow on success, shrink on failure.
    """
    x = x0.copy()
    fx = score(x)
    sigma = np.full(len(x), sigma0)
    for _ in range(steps):
        scale = np.linalg.norm(x, axis=-1, keepdims=True) + 1e-300
        cand = x + sigma[:, None] * scale * rng.standard_normal(x.shape) / math.sqrt(x.shape[-1])
        fc = score(cand)
        better = fc > fx
        x[better] = cand[better]
        fx[better] = fc[better]
        sigma = np.clip(np.where(better, sigma * 1.5, sigma * 0.87), 1e-9, 2.0)
    return x, fx


def operator_norm(A: NormedOperator, budget: Budget = DEFAULT_BUDGET, seed: int = 0) -> OperatorNorm:
    """Norm of ``A`` between its spaces.

    Closed forms are used for ℓ1→ℓ1 (max column sum), ℓ∞→ℓ∞ (max row sum)
    and ℓ2→ℓ2 (largest singular value).  An ℓ1 domain is exact via ``±e_i``
    and an ℓ∞ domain up to ``SIGN_ENUM_LIMIT`` coordinates via sign vectors.
    Otherwise multi-start maximisation of ``||Av|| / ||v||``.
    """
    M = A.matrix
    dom, cod = A.domain, A.codomain
    if not M.any():
        return OperatorNorm(0.0, 0.0, True, np.eye(dom.dim)[0])
    plain = dom.kind == cod.kind == "lp" and dom.p == cod.p
    if plain and dom.p in (1.0, INF):
        sums = np.abs(M).sum(axis=0 if dom.p == 1.0 else 1)
        k = int(np.argmax(sums))
        v = np.eye(dom.dim)[k] if dom.p == 1.0 else np.sign(M[k]) + (M[k] == 0)
        val = float(sums[k])
        return OperatorNorm(val, val, True, v)
    if plain and dom.p == 2.0:
        _, s, vt = np.linalg.svd(M)
        v = vt[0]
        lower = float(cod.norm(A.apply(v)) / dom.norm(v))
        return OperatorNorm(min(lower, float(s[0])), float(s[0]), True, v)

    # polytope domains: the norm is attained at an extreme point of the ball
    if dom.kind == "lp" and dom.p == 1.0:
        vals = np.asarray(cod.norm(M.T))
        k = int(np.argmax(vals))
        return OperatorNorm(float(vals[k]), float(vals[k]), True, np.eye(dom.dim)[k])
    if dom.kind == "lp" and dom.p == INF and dom.dim <= SIGN_ENUM_LIMIT:
        # fixing the first sign halves the enumeration (the norm is even)
        tail = np.array(list(itertools.product((-1.0, 1.0), repeat=dom.dim - 1))).reshape(-1, dom.dim - 1)
        V = np.hstack([np.ones((len(tail), 1)), tail])
        vals = np.asarray(cod.norm(A.apply(V)))
        k = int(np.argmax(vals))
        return OperatorNorm(float(vals[k]), float(vals[k]), True, V[k])

    rng = np.random.default_rng(seed)

    def ratio(v):
        nv = np.asarray(dom.norm(v))
        return np.where(nv > 0, np.asarray(cod.norm(A.apply(v))) / np.where(nv > 0, nv, 1), -np.inf)

    starts = np.vstack([dom.unit_basis(), rng.standard_normal((budget.restarts, dom.dim))])
    lower_pts = ratio(starts)
    x, fx = _hill_climb(ratio, starts, budget.steps, rng)
    k = int(np.argmax(fx))
    return OperatorNorm(float(lower_pts.max()), float(fx[k]), False, x[k])


def normalize(A: NormedOperator, budget: Budget = DEFAULT_BUDGET, seed: int = 0) -> NormedOperator:
    """Rescale ``A`` so its (estimated) norm is at most one."""
    est = operator_norm(A, budget, seed)
    return A.scaled(1.0 / est.upper) if est.upper > 1 else A


# --- modulus of convexity -------------------------------------------------


@dataclass(frozen=True)
class ModulusEstimate:
    """``delta`` is an upper estimate: it comes from the best pair found."""

    eps: float
    delta: float
    x1: np.ndarray | None
    x2: np.ndarray | None
    midpoint_norm: float
    separation: float
    feasible: bool

    def to_json(self) -> dict:
        return {
            "eps": self.eps,
            "delta": self.delta,
            "midpoint_norm": self.midpoint_norm,
            "separation": self.separation,
            "feasible": self.feasible,
            "x1": None if self.x1 is None else self.x1.tolist(),
            "x2": None if self.x2 is None else self.x2.tolist(),
        }


FEAS_RTOL = 1e-12
CORNER_PAIR_LIMIT = 6


def _max_midpoint_scale(dom: NormedSpace, mhat: np.ndarray, h: np.ndarray, iters: int = 60) -> np.ndarray:
    """Largest ``s`` in [0, 1] with ``||s*mhat ± h|| <= 1`` (row-wise bisection).

    ``s -> max ||s*mhat ± h||`` is convex and <= 1 at 0 whenever ``||h|| <= 1``,
    so the feasible set is an interval starting at 0.
    """
    lo = np.zeros(len(mhat))
    hi = np.ones(len(mhat))
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        sm = mid[:, None] * mhat
        ok = np.maximum(dom.norm(sm + h), dom.norm(sm - h)) <= 1.0
        lo = np.where(ok, mid, lo)
        hi = np.where(ok, hi, mid)
    at_one = np.maximum(dom.norm(mhat + h), dom.norm(mhat - h)) <= 1.0
    return np.where(at_one, 1.0, lo)


def modulus_of_convexity(A: NormedOperator, eps: float, budget: Budget = DEFAULT_BUDGET,
                         seed: int = 0) -> ModulusEstimate:
    """Estimate ``1 - sup ||(x1+x2)/2||`` over pairs in the domain ball with
    ``||A(x1-x2)/2|| >= eps``.

    Pairs are parametrised as ``x = m ± h``.  The half-difference ``h`` is
    rescaled so that ``||Ah|| = eps`` exactly (shrinking ``h`` never leaves
    the ball), then ``m`` is pushed as far as the ball allows along its
    direction.  Search runs over the two directions.  Signed basis pairs are
    always evaluated too, which catches flat faces of polyhedral balls.
    An empty constraint set gives ``delta = 1``.
    """
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    dom, cod = A.domain, A.codomain
    rng = np.random.default_rng(seed)
    best = (-1.0, None, None)

    # explicit candidate pairs: signed basis vectors, plus the corners of a
    # small linf ball
    basis = dom.unit_basis()
    if dom.kind == "lp" and dom.p == INF and dom.dim <= CORNER_PAIR_LIMIT:
        corners = np.array(list(itertools.product((-1.0, 1.0), repeat=dom.dim)))
        basis = np.vstack([basis, corners])
    x1 = np.repeat(basis, len(basis), axis=0)
    x2 = np.tile(basis, (len(basis), 1))
    sep = np.asarray(cod.norm(A.apply(x1 - x2) / 2))
    feas = sep >= eps * (1 - FEAS_RTOL)
    if feas.any():
        mids = np.asarray(dom.norm((x1 + x2) / 2))
        mids = np.where(feas, mids, -1.0)
        k = int(np.argmax(mids))
        best = (float(mids[k]), x1[k], x2[k])

    def evaluate(mh):
        m, h = mh[:, : dom.dim], mh[:, dom.dim :]
        nah = np.asarray(cod.norm(A.apply(h)))
        ok = nah > 0
        h = h * (eps / np.where(ok, nah, 1.0))[:, None]
        ok &= np.asarray(dom.norm(h)) <= 1.0
        nm = np.asarray(dom.norm(m))
        mhat = m / np.where(nm > 0, nm, 1.0)[:, None]
        s = _max_midpoint_scale(dom, mhat, np.where(ok[:, None], h, 0.0))
        return np.where(ok, s, -1.0), mhat, h

    start = rng.standard_normal((budget.restarts, 2 * dom.dim))
    x, fx = _hill_climb(lambda z: evaluate(z)[0], start, budget.steps, rng)
    k = int(np.argmax(fx))
    if fx[k] > best[0]:
        s, mhat, h = evaluate(x[k : k + 1])
        m = s[0] * mhat[0]
        cand1, cand2 = m + h[0], m - h[0]
        # same rounding slack as the separation test: the re-computed norm
        # can land one ulp above the bisection's accepted value
        ball = 1.0 + FEAS_RTOL
        ok = (dom.norm(cand1) <= ball and dom.norm(cand2) <= ball
              and cod.norm(A.apply(cand1 - cand2) / 2) >= eps * (1 - FEAS_RTOL))
        if ok:
            best = max(best, (float(dom.norm((cand1 + cand2) / 2)), cand1, cand2), key=lambda t: t[0])

    value, w1, w2 = best
    if w1 is None:
        return ModulusEstimate(float(eps), 1.0, None, None, 0.0, 0.0, False)
    return ModulusEstimate(
        float(eps),
        1.0 - value,
        w1,
        w2,
        value,
        float(cod.norm(A.apply(w1 - w2) / 2)),
        True,
    )


# --- convex separation and basis constants ------------------------------


@dataclass(frozen=True)
class ConvexSeparation:
    """``value`` is attained at ``weights``; ``lower`` is a certified lower bound."""

    value: float
    lower: float
    weights: np.ndarray
    iterations: int


def _as_rows(vectors, space: NormedSpace) -> np.ndarray:
    Y = np.atleast_2d(np.asarray(vectors, dtype=float))
    if Y.size == 0 or len(Y) == 0:
        raise ValueError("need at least one vector")
    if Y.shape[1] != space.dim:
        raise ValueError(f"vectors of dimension {Y.shape[1]} in a {space.dim}-dimensional space")
    return Y


def convex_separation(vectors, space: NormedSpace, rtol: float = 1e-6, atol: float = 1e-12,
                      max_iter: int = 20_000) -> ConvexSeparation:
    """Minimise ``||sum_i w_i y_i||`` over the probability simplex.

    Pairwise Frank–Wolfe with exact line search.  The norming functional
    ``w`` at the current point gives the duality bound
    ``min_i <w, y_i> <= optimum`` (minimax over the dual ball), which is the
    stopping test and the returned ``lower``.
    """
    Y = _as_rows(vectors, space)
    k = len(Y)
    lam = np.full(k, 1.0 / k)
    value = lower = 0.0
    it = 0
    for it in range(1, max_iter + 1):
        z = lam @ Y
        value = float(space.norm(z))
        if value <= atol:
            lower = 0.0
            break
        w = space.norming_functional(z)
        scores = Y @ w
        lower = max(lower, float(scores.min()))
        if value - lower <= rtol * value:
            break
        s = int(np.argmin(scores))
        active = np.flatnonzero(lam > 0)
        a = int(active[np.argmax(scores[active])])
        if a == s:
            break
        d = Y[s] - Y[a]
        gmax = lam[a]
        res = minimize_scalar(lambda g: space.norm(z + g * d), bounds=(0.0, gmax),
                              method="bounded", options={"xatol": 1e-14 * max(gmax, 1e-300)})
        g = float(res.x)
        if space.norm(z + g * d) >= value:
            # line search found no progress; take the endpoint if it helps
            if space.norm(z + gmax * d) < value:
                g = gmax
            else:
                break
        lam[s] += g
        lam[a] -= g
        if lam[a] < 1e-15:
            lam[a] = 0.0
        lam /= lam.sum()
    value = float(space.norm(lam @ Y))
    return ConvexSeparation(value, min(lower, value), lam, it)


@dataclass(frozen=True)
class BasisConstant:
    """``c`` is attained by ``coefficients`` at prefix length ``m``: a lower bound."""

    c: float
    m: int
    coefficients: np.ndarray | None


def basis_constant(vectors, space: NormedSpace, budget: Budget = DEFAULT_BUDGET,
                   seed: int = 0) -> BasisConstant:
    """Estimate ``sup_m sup_a ||sum_{i<=m} a_i y_i|| / ||sum_i a_i y_i||``."""
    Y = _as_rows(vectors, space)
    k = len(Y)
    if np.linalg.matrix_rank(Y) < k:
        raise ValueError("vectors are linearly dependent")
    if k == 1:
        return BasisConstant(1.0, 1, np.ones(1))
    rng = np.random.default_rng(seed)
    ms = np.repeat(np.arange(1, k), budget.restarts)
    mask = (np.arange(k)[None, :] < ms[:, None]).astype(float)

    def ratio(a):
        den = np.asarray(space.norm(a @ Y))
        num = np.asarray(space.norm((a * mask) @ Y))
        return np.where(den > 0, num / np.where(den > 0, den, 1.0), -np.inf)

    x, fx = _hill_climb(ratio, rng.standard_normal((len(ms), k)), budget.steps, rng)
    j = int(np.argmax(fx))
    c = float(fx[j])
    if c < 1.0:
        return BasisConstant(1.0, k, np.ones(k))
    return BasisConstant(c, int(ms[j]), x[j])


@dataclass
class SeparatedBasisWitness:
    """Vectors whose convex combinations all have norm >= psi and whose
    basis constant is at most c."""

    vectors: np.ndarray
    psi: float
    c: float
    details: dict = field(default_factory=dict)

    def check(self, space: NormedSpace, tol: float = 1e-6, budget: Budget = DEFAULT_BUDGET,
              seed: int = 0) -> bool:
        sep = convex_separation(self.vectors, space)
        bc = basis_constant(self.vectors, space, budget, seed)
        self.details = {"min_convex": sep.value, "min_convex_lower": sep.lower, "c_estimate": bc.c}
        return sep.value >= self.psi - tol and bc.c <= self.c + tol

    def to_json(self) -> dict:
        return {"vectors": np.asarray(self.vectors).tolist(), "psi": self.psi, "c": self.c}

    @classmethod
    def from_json(cls, d: dict) -> "SeparatedBasisWitness":
        return cls(np.asarray(d["vectors"], dtype=float), float(d["psi"]), float(d["c"]))


def estimate_witness(vectors, space: NormedSpace, budget: Budget = DEFAULT_BUDGET,
                     seed: int = 0) -> SeparatedBasisWitness:
    """Measure (psi, c) for a given sequence: psi from the certified lower
    bound of the convex separation, c from the basis-constant search."""
    Y = _as_rows(vectors, space)
    sep = convex_separation(Y, space)
    bc = basis_constant(Y, space, budget, seed)
    return SeparatedBasisWitness(
        Y, sep.lower, bc.c,
        {"min_convex": sep.value, "weights": sep.weights.tolist(), "c_prefix": bc.m},
    )
