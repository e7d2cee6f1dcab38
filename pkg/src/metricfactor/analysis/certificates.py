"""Collapse certificates for trees, diamonds and Laakso graphs.

Each extractor follows the inductive argument that uniform convexity of the
operator forces the far endpoints of the graph to contract, and returns the
vertices the argument selects together with the evaluated inequality.  The
induction runs on vector-valued callables so sub-problems (restricted,
pulled back, translated or rescaled maps) never need a materialised graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..bitgraphs import doubling, orient, quadrupling
from ..embeddings import Embedding
from ..errors import PreconditionError
from ..spaces import Budget, NormedOperator, identity, modulus_of_convexity
from .factorization import check_hypothesis

RTOL = 1e-9

Vec = np.ndarray
VertexMap = Callable[[str], Vec]


# --- modulus providers ------------------------------------------------------


class AnalyticL2Modulus:
    """``1 - sqrt(1 - eps^2)``: the modulus of the identity of a Hilbert space."""

    name = "l2-analytic"
    certified = True

    def __call__(self, eps: float) -> float:
        if eps >= 1:
            return 1.0
        # same value as 1 - sqrt(1 - eps^2), without the cancellation
        return eps * eps / (1.0 + math.sqrt(1.0 - eps * eps))


class ConstantModulus:
    name = "constant"
    certified = True

    def __init__(self, value: float = 0.0):
        self.value = float(value)
        self.name = f"constant:{value:g}"

    def __call__(self, eps: float) -> float:
        return self.value


class NumericalModulus:
    """Search-based modulus for an arbitrary operator.

    Values are upper estimates of the true modulus, so certificates built on
    them are not guaranteed; ``certified`` is False and reports say so.
    """

    name = "numerical"
    certified = False

    def __init__(self, A: NormedOperator, budget: Budget = Budget(), seed: int = 0):
        self.A, self.budget, self.seed = A, budget, seed
        self._cache: dict[float, float] = {}

    def __call__(self, eps: float) -> float:
        if eps not in self._cache:
            self._cache[eps] = modulus_of_convexity(self.A, eps, self.budget, self.seed).delta
        return self._cache[eps]


def provider_for(A: NormedOperator) -> Callable[[float], float]:
    d = A.domain
    if d.kind == "lp" and d.p == 2.0 and d.dim >= 2 and np.array_equal(A.matrix, np.eye(d.dim)):
        return AnalyticL2Modulus()
    return NumericalModulus(A)


# --- the midpoint observation ----------------------------------------------


@dataclass(frozen=True)
class MidpointChoice:
    choice: str  # "y" or "z"
    value: float  # min(||x+y||, ||x+z||)
    bound: float  # 2(1 - delta)
    delta: float
    holds: bool


def midpoint_selector(x, y, z, A: NormedOperator, D: float, delta: Callable[[float], float],
                      rtol: float = RTOL) -> MidpointChoice:
    """Pick whichever of ``y``, ``z`` gives the shorter ``x + .``.

    Requires ``x, y, z`` in the unit ball and ``||(Ay - Az)/2|| >= 1/D``;
    then the shorter sum is at most ``2(1 - delta(1/2D))``.  Ties go to ``y``.
    """
    x, y, z = (np.asarray(v, dtype=float) for v in (x, y, z))
    X = A.domain
    for name, v in (("x", x), ("y", y), ("z", z)):
        if X.norm(v) > 1 + rtol:
            raise PreconditionError(f"{name} lies outside the unit ball (norm {X.norm(v)!r})")
    sep = A.codomain.norm(A.apply(y - z) / 2)
    if sep < (1 / D) * (1 - rtol):
        raise PreconditionError(f"||(Ay - Az)/2|| = {sep!r} is below 1/D = {1 / D!r}")
    ny, nz = X.norm(x + y), X.norm(x + z)
    choice, value = ("y", ny) if ny <= nz else ("z", nz)
    dl = delta(1 / (2 * D))
    bound = 2 * (1 - dl)
    return MidpointChoice(choice, float(value), bound, dl, value <= bound * (1 + rtol))


# --- certificates -----------------------------------------------------------


@dataclass
class CollapseCertificate:
    family: str
    n: int
    endpoints: tuple[str, str]
    pair: tuple[str, str]
    D: float
    delta_used: float
    delta_provider: str
    delta_certified: bool
    bound: float
    lhs: float
    rhs: float
    steps: list[dict] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.lhs <= self.bound * self.rhs * (1 + RTOL)

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "n": self.n,
            "endpoints": list(self.endpoints),
            "pair": list(self.pair),
            "D": self.D,
            "delta_used": self.delta_used,
            "delta_provider": self.delta_provider,
            "delta_certified": self.delta_certified,
            "bound": self.bound,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "holds": self.holds,
            "steps": self.steps,
        }


def _prepare(f: Embedding, family: str, A, D, delta):
    if f.graph.family != family:
        raise ValueError(f"expected an embedding of a {family} graph, got {f.graph.family!r}")
    A = A or identity(f.space)
    _, D = check_hypothesis(f, A, D)
    delta = delta or provider_for(A)
    return A, D, delta


def _name(delta) -> tuple[str, bool]:
    return getattr(delta, "name", "custom"), bool(getattr(delta, "certified", False))


def _tree_base(F: VertexMap, A, D, delta, steps) -> tuple[str, str]:
    root = F("")
    picked = []
    for e in "01":
        x = F(e) - root
        y = F(e + "0") - F(e)
        z = F(e + "1") - F(e)
        ch = midpoint_selector(x, y, z, A, D, delta)
        leaf = e + ("0" if ch.choice == "y" else "1")
        steps.append({"step": "tree-base", "branch": e, "leaf": leaf, "value": ch.value,
                      "bound": ch.bound, "holds": ch.holds})
        picked.append(leaf)
    return picked[0], picked[1]


def _tree_claim(k: int, F: VertexMap, A, D, delta, steps) -> tuple[str, str]:
    """Leaves of B_{2^k} starting with 0 and 1 whose images stay within
    ``2^k (1-delta)^k`` of the root's image."""
    if k == 0:
        return "0", "1"
    if k == 1:
        return _tree_base(F, A, D, delta, steps)
    s0, s1 = _tree_claim(k - 1, F, A, D, delta, steps)
    tails = {}
    for e, se in (("0", s0), ("1", s1)):
        tails[e] = _tree_claim(k - 1, lambda t, se=se: F(se + t), A, D, delta, steps)
    dl = delta(1 / (2 * D))
    scale = 2 ** (k - 1) * (1 - dl) ** (k - 1)
    heads = {"0": s0, "1": s1}
    path = {"": ""}
    for e in "01":
        path[e] = heads[e]
        for e2 in "01":
            path[e + e2] = heads[e] + tails[e][int(e2)]
    origin = F("")
    if scale == 0:
        raise PreconditionError("delta = 1 leaves no room: the hypothesis cannot hold")

    def G(t: str) -> Vec:
        return (F(path[t]) - origin) / scale

    t0, t1 = _tree_base(G, A, D, delta, steps)
    return path[t0], path[t1]


def tree_collapse_certificate(f: Embedding, A: NormedOperator | None = None, D: float | None = None,
                              delta=None) -> CollapseCertificate:
    """Certificate for an embedding of B_{2^n}.

    ``lhs`` is the larger of ``||f(t_i) - f(root)||``; the claim bounds it by
    ``2^n (1-delta)^n`` with ``delta = delta(1/2D)``, so ``rhs = 1`` (the
    Lipschitz scale).
    """
    A, D, delta = _prepare(f, "tree", A, D, delta)
    depth = f.graph.n
    n = depth.bit_length() - 1
    if depth != 2**n:
        raise ValueError(f"tree depth {depth} is not a power of two")
    steps: list[dict] = []
    t0, t1 = _tree_claim(n, f, A, D, delta, steps)
    root = f("")
    lhs = max(float(f.space.norm(f(t0) - root)), float(f.space.norm(f(t1) - root)))
    dl = delta(1 / (2 * D))
    name, cert = _name(delta)
    return CollapseCertificate("tree", n, ("", ""), (t0, t1), D, dl, name, cert,
                               2**n * (1 - dl) ** n, lhs, 1.0, steps)


def _diamond_base(F: VertexMap, A, D, delta, steps) -> tuple[str, str]:
    """On D_1 = {00, 01, 10, 11}: the adjacent pair with the longest image."""
    X = A.domain
    b, l, r, t = F("00"), F("01"), F("10"), F("11")
    sides = [
        (X.norm(l - b), ("00", "01")),
        (X.norm(r - b), ("00", "10")),
        (X.norm(t - l), ("01", "11")),
        (X.norm(t - r), ("10", "11")),
    ]
    best = max(s[0] for s in sides)
    pair = min(p for v, p in sides if v == best)
    dl = delta(1 / D)
    lhs = float(X.norm(t - b))
    steps.append({"step": "diamond-base", "pair": list(pair), "lhs": lhs, "rhs": float(best),
                  "bound": 2 * (1 - dl), "holds": lhs <= 2 * (1 - dl) * best * (1 + RTOL)})
    return pair


def _diamond_claim(k: int, F: VertexMap, A, D, delta, steps) -> tuple[str, str]:
    if k == 0:
        return "0", "1"
    if k == 1:
        return _diamond_base(F, A, D, delta, steps)
    u, u2 = _diamond_claim(k - 1, lambda s: 0.5 * F(doubling(s)), A, D, delta, steps)
    low, _, j = orient(u, u2)
    base = doubling(low)

    def lift(xy: str) -> str:
        return base[: 2 * j] + xy + base[2 * j + 2 :]

    s, s2 = _diamond_base(lambda xy: F(lift(xy)), A, D, delta, steps)
    return lift(s), lift(s2)


def diamond_collapse_certificate(f: Embedding, A: NormedOperator | None = None, D: float | None = None,
                                 delta=None) -> CollapseCertificate:
    """Adjacent ``s, s'`` with ``||f(top) - f(bottom)|| <= 2^n (1-delta)^n ||f(s) - f(s')||``,
    ``delta = delta(1/D)``."""
    A, D, delta = _prepare(f, "diamond", A, D, delta)
    n = f.graph.n
    steps: list[dict] = []
    s, s2 = _diamond_claim(n, f, A, D, delta, steps)
    top, bottom = "1" * 2**n, "0" * 2**n
    dl = delta(1 / D)
    name, cert = _name(delta)
    return CollapseCertificate(
        "diamond", n, (top, bottom), (s, s2), D, dl, name, cert, 2**n * (1 - dl) ** n,
        float(f.space.norm(f(top) - f(bottom))), float(f.space.norm(f(s) - f(s2))), steps,
    )


_LAAKSO_FAR_PAIRS = (
    (("0000", "1100"), "0100"),
    (("0000", "0101"), "0100"),
    (("1100", "1111"), "1101"),
    (("0101", "1111"), "1101"),
)


def _laakso_base(F: VertexMap, A, D, delta, steps) -> tuple[str, str]:
    """On L_1: the distance-2 pair among 0000, 1100, 0101, 1111 with the longest
    image, then its longer half through the middle vertex."""
    X = A.domain
    far = [(X.norm(F(b) - F(a)), (a, b), mid) for (a, b), mid in _LAAKSO_FAR_PAIRS]
    best = max(v for v, _, _ in far)
    _, (a, b), mid = next(t for t in sorted(far, key=lambda t: t[1]) if t[0] == best)
    halves = [(X.norm(F(mid) - F(a)), tuple(sorted((a, mid)))),
              (X.norm(F(b) - F(mid)), tuple(sorted((mid, b))))]
    top = max(h[0] for h in halves)
    pair = min(p for v, p in halves if v == top)
    dl = delta(1 / (2 * D))
    lhs = float(X.norm(F("1111") - F("0000")))
    steps.append({"step": "laakso-base", "far_pair": [a, b], "middle": mid, "pair": list(pair),
                  "lhs": lhs, "far_norm": float(best), "rhs": float(top),
                  "bound": 4 * (1 - dl), "holds": lhs <= 4 * (1 - dl) * top * (1 + RTOL)})
    return pair


def _laakso_claim(k: int, F: VertexMap, A, D, delta, steps) -> tuple[str, str]:
    if k == 0:
        return "0", "1"
    if k == 1:
        return _laakso_base(F, A, D, delta, steps)
    s, s2 = _laakso_claim(k - 1, lambda t: 0.25 * F(quadrupling(t)), A, D, delta, steps)
    low, _, j = orient(s, s2)
    qu, qv = quadrupling(low[:j]), quadrupling(low[j + 1 :])

    def lift(x: str) -> str:
        return qu + x + qv

    t, t2 = _laakso_base(lambda x: F(lift(x)), A, D, delta, steps)
    return lift(t), lift(t2)


def laakso_collapse_certificate(f: Embedding, A: NormedOperator | None = None, D: float | None = None,
                                delta=None) -> CollapseCertificate:
    """Adjacent ``s, s'`` with ``||f(1..1) - f(0..0)|| <= 4^n (1-delta)^n ||f(s) - f(s')||``.

    The base gadget's four corner vectors have norm up to 2, so after
    normalisation their separation is only guaranteed to be ``1/2D``; the
    certificate therefore uses ``delta = delta(1/2D)``.  With ``delta(1/D)``
    the inequality can fail (see the tests).
    """
    A, D, delta = _prepare(f, "laakso", A, D, delta)
    n = f.graph.n
    steps: list[dict] = []
    s, s2 = _laakso_claim(n, f, A, D, delta, steps)
    one, zero = "1" * 4**n, "0" * 4**n
    dl = delta(1 / (2 * D))
    name, cert = _name(delta)
    return CollapseCertificate(
        "laakso", n, (one, zero), (s, s2), D, dl, name, cert, 4**n * (1 - dl) ** n,
        float(f.space.norm(f(one) - f(zero))), float(f.space.norm(f(s) - f(s2))), steps,
    )


CERTIFIERS = {
    "tree": tree_collapse_certificate,
    "diamond": diamond_collapse_certificate,
    "laakso": laakso_collapse_certificate,
}


# --- lower bounds -------------------------------------------------------------


def _delta_argument(family: str, D: float) -> float:
    return 1 / D if family == "diamond" else 1 / (2 * D)


def lower_bound_solve(family: str, n: int, delta, tol: float = 1e-12, hi_cap: float = 1e12) -> float:
    """Smallest ``D >= 1`` with ``D (1 - delta(arg(D)))^n >= 1``.

    ``arg(D)`` is ``1/D`` for diamonds and ``1/2D`` for trees (``n`` indexes
    B_{2^n}) and Laakso graphs, matching the certificates above.
    """
    if family not in CERTIFIERS:
        raise ValueError(f"unknown family {family!r}")

    def h(D):
        return D * (1 - delta(_delta_argument(family, D))) ** n - 1

    if h(1.0) >= 0:
        return 1.0
    lo, hi = 1.0, 2.0
    while h(hi) < 0:
        lo, hi = hi, hi * 2
        if hi > hi_cap:
            raise ValueError("no admissible D below the search cap")
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if h(mid) >= 0:
            hi = mid
        else:
            lo = mid
    return hi
