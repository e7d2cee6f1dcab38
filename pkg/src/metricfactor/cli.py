"""Command-line front end.

    metricfactor gen --family diamond --n 2 -o d2.json
    metricfactor embed --construction js --graph d2.json -o f.json
    metricfactor report --embedding f.json
    metricfactor bound --family diamond --n 1 --modulus l2-analytic

Exit status: 0 on success, 2 on invalid input, 3 when a size cap refuses
the request.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import bitgraphs, serialization
from .analysis import (
    CERTIFIERS,
    AnalyticL2Modulus,
    ConstantModulus,
    NumericalModulus,
    SearchBudget,
    distortion_search,
    factorization_report,
    lower_bound_solve,
)
from .embeddings import (
    Embedding,
    baudier_glued_embedding,
    bourgain_tree_embedding,
    canonical_node_vectors,
    desk_plan,
    js_vertex_embedding,
    random_sign_node_vectors,
)
from .errors import PreconditionError, ResourceCapError, StructureError
from .metrics import bfs_distances
from .serialization import ArtifactError, fmt
from .spaces import (
    Budget,
    NormedOperator,
    NormedSpace,
    estimate_witness,
    identity,
    lp,
    modulus_of_convexity,
    parse_space,
)

DEFAULT_SEED = 0
BUILDERS = {
    "tree": (bitgraphs.build_binary_tree, "tree_cap"),
    "diamond": (bitgraphs.build_diamond, "diamond_cap"),
    "laakso": (bitgraphs.build_laakso, "laakso_cap"),
}


def _caps(args) -> dict:
    return {
        "tree": args.tree_cap,
        "diamond": args.diamond_cap,
        "laakso": args.laakso_cap,
        "level": args.level_cap,
    }


def _emit(args, text: str) -> None:
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_json(args, payload: dict) -> None:
    _emit(args, serialization.dumps(payload, serialization.provenance(args.seed, _caps(args))))


def _graph(args) -> bitgraphs.MetricGraph:
    if getattr(args, "graph", None):
        return bitgraphs.MetricGraph.from_json(serialization.load(args.graph))
    if not args.family or args.n is None:
        raise ValueError("give --graph FILE or both --family and --n")
    build, cap = BUILDERS[args.family]
    return build(args.n, cap=getattr(args, cap))


def _embedding(path) -> Embedding:
    return Embedding.from_json(serialization.load(path))


def _operator(args, space: NormedSpace) -> NormedOperator:
    if getattr(args, "operator", None):
        A = NormedOperator.from_json(serialization.load(args.operator))
        if A.domain.dim != space.dim:
            raise ValueError("operator domain dimension does not match the embedding")
        return A
    return identity(space)


def _modulus(name: str, A: NormedOperator | None, args):
    if name == "l2-analytic":
        return AnalyticL2Modulus()
    if name.startswith("constant:"):
        return ConstantModulus(float(name.split(":", 1)[1]))
    if name == "numerical":
        if A is None:
            raise ValueError("--modulus numerical needs an operator (--operator or --space)")
        return NumericalModulus(A, Budget(args.restarts, args.steps), args.seed)
    raise ValueError(f"unknown modulus provider {name!r}")


# --- subcommands ----------------------------------------------------------------


def cmd_gen(args):
    g = _graph(args)
    payload = g.to_json()
    if g.family == "laakso":
        payload["extra_hamming_edges"] = [list(e) for e in bitgraphs.extra_hamming_edges(g)]
    _emit_json(args, payload)


def cmd_dist(args):
    g = _graph(args)
    _emit(args, bfs_distances(g, threads=args.threads).to_csv())


def cmd_embed(args):
    rng = np.random.default_rng(args.seed)
    if args.construction == "js":
        g = _graph(args)
        if g.family not in ("diamond", "laakso"):
            raise ValueError("the js construction needs a diamond or Laakso graph")
        length = len(g.vertices[0])
        if args.basis:
            basis = np.asarray(serialization.load(args.basis)["vectors"], dtype=float)
            space = parse_space(args.space) if args.space else lp(basis.shape[1], 1)
        else:
            basis, space = np.eye(length), lp(length, 1)
        f = js_vertex_embedding(g, basis, space)
    elif args.construction == "bourgain":
        if args.n is None:
            raise ValueError("bourgain needs --n (tree depth)")
        bitgraphs.build_binary_tree(args.n, cap=args.tree_cap)
        if args.vectors == "canonical":
            f = bourgain_tree_embedding(args.n, canonical_node_vectors(args.n))
        else:
            f = bourgain_tree_embedding(
                args.n, random_sign_node_vectors(args.n, args.dim, rng), lp(args.dim, 2)
            )
    else:
        level = args.max_level
        if level > args.level_cap:
            raise ResourceCapError("partition max_level", level, args.level_cap, "--level-cap")
        plan = desk_plan(level)
        f = baudier_glued_embedding(plan, args.depth)
    _emit_json(args, f.to_json())


def cmd_report(args):
    f = _embedding(args.embedding)
    rep = factorization_report(f, _operator(args, f.space), seed=args.seed)
    _emit_json(args, rep.to_json())


def cmd_certify(args):
    f = _embedding(args.embedding)
    A = _operator(args, f.space)
    family = f.graph.family
    if family not in CERTIFIERS:
        raise ValueError(f"no certificate for graph family {family!r}")
    delta = _modulus(args.modulus, A, args)
    cert = CERTIFIERS[family](f, A, args.D, delta)
    _emit_json(args, cert.to_json())


def _grid(text: str) -> list[float]:
    if ":" in text:
        lo, hi, step = (float(x) for x in text.split(":"))
        k = int(round((hi - lo) / step))
        return [round(lo + i * step, 12) for i in range(k + 1)]
    return [float(x) for x in text.split(",")]


def cmd_modulus(args):
    if args.operator:
        A = NormedOperator.from_json(serialization.load(args.operator))
    else:
        A = identity(parse_space(args.space))
    budget = Budget(args.restarts, args.steps)
    lines = ["eps,delta,midpoint_norm,separation,feasible"]
    for eps in _grid(args.eps):
        m = modulus_of_convexity(A, eps, budget, args.seed)
        lines.append(",".join([fmt(eps), fmt(m.delta), fmt(m.midpoint_norm), fmt(m.separation), str(m.feasible).lower()]))
    _emit(args, "\n".join(lines) + "\n")


def cmd_witness(args):
    if args.vectors:
        data = serialization.load(args.vectors)
        Y = np.asarray(data["vectors"], dtype=float)
        space = parse_space(args.space) if args.space else NormedSpace.from_json(data["space"])
    elif args.construction == "l1-unit":
        Y, space = np.eye(args.k), lp(args.k, 1)
    else:  # summing basis of ℓ∞^k
        Y, space = np.tril(np.ones((args.k, args.k))), lp(args.k, np.inf)
    w = estimate_witness(Y, space, Budget(args.restarts, args.steps), args.seed)
    _emit_json(args, {**w.to_json(), "space": space.to_json(), "details": w.details})


def cmd_search(args):
    g = _graph(args)
    target = parse_space(args.space)
    f, rep = distortion_search(g, target, SearchBudget(args.restarts, args.iterations), args.seed)
    _emit_json(args, {"embedding": f.to_json(), "report": rep.to_json()})


def cmd_bound(args):
    A = identity(parse_space(args.space)) if args.space else None
    delta = _modulus(args.modulus, A, args)
    value = lower_bound_solve(args.family, args.n, delta)
    if args.json:
        _emit_json(args, {"family": args.family, "n": args.n, "modulus": getattr(delta, "name", args.modulus),
                          "D": value})
    else:
        _emit(args, fmt(value) + "\n")


# --- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", help="write the artifact here instead of stdout")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--threads", type=int, default=1, help="worker cap for parallel steps")
    common.add_argument("--tree-cap", type=int, default=bitgraphs.TREE_CAP)
    common.add_argument("--diamond-cap", type=int, default=bitgraphs.DIAMOND_CAP)
    common.add_argument("--laakso-cap", type=int, default=bitgraphs.LAAKSO_CAP)
    common.add_argument("--level-cap", type=int, default=bitgraphs.PARTITION_CAP)

    graph_src = argparse.ArgumentParser(add_help=False)
    graph_src.add_argument("--graph", help="graph JSON produced by gen")
    graph_src.add_argument("--family", choices=sorted(BUILDERS))
    graph_src.add_argument("--n", type=int)

    search_budget = argparse.ArgumentParser(add_help=False)
    search_budget.add_argument("--restarts", type=int, default=64)
    search_budget.add_argument("--steps", type=int, default=500)

    p = argparse.ArgumentParser(prog="metricfactor", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen", parents=[common, graph_src], help="build a graph (JSON)")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("dist", parents=[common, graph_src], help="distance matrix (CSV)")
    s.set_defaults(func=cmd_dist)

    s = sub.add_parser("embed", parents=[common, graph_src], help="explicit embedding (JSON)")
    s.add_argument("--construction", choices=["js", "bourgain", "baudier"], required=True)
    s.add_argument("--basis", help="JSON with 'vectors' for the js construction")
    s.add_argument("--space", help="space of the basis vectors, e.g. l2:4")
    s.add_argument("--vectors", choices=["canonical", "random-sign"], default="canonical")
    s.add_argument("--dim", type=int, default=8, help="dimension for random-sign node vectors")
    s.add_argument("--max-level", type=int, default=2)
    s.add_argument("--depth", type=int)
    s.set_defaults(func=cmd_embed)

    s = sub.add_parser("report", parents=[common], help="factorization report (JSON)")
    s.add_argument("--embedding", required=True)
    s.add_argument("--operator")
    s.set_defaults(func=cmd_report)

    s = sub.add_parser("certify", parents=[common, search_budget], help="collapse certificate (JSON)")
    s.add_argument("--embedding", required=True)
    s.add_argument("--operator")
    s.add_argument("--D", type=float, help="hypothesis constant (default: measured)")
    s.add_argument("--modulus", default="l2-analytic")
    s.set_defaults(func=cmd_certify)

    s = sub.add_parser("modulus", parents=[common, search_budget], help="modulus table (CSV)")
    s.add_argument("--operator")
    s.add_argument("--space", default="l2:2", help="identity on this space when no --operator")
    s.add_argument("--eps", default="0.1:0.9:0.1", help="lo:hi:step or comma list")
    s.set_defaults(func=cmd_modulus)

    s = sub.add_parser("witness", parents=[common, search_budget], help="(psi, c) witness (JSON)")
    s.add_argument("--vectors", help="JSON with 'vectors' (and 'space')")
    s.add_argument("--space")
    s.add_argument("--construction", choices=["l1-unit", "summing"], default="l1-unit")
    s.add_argument("--k", type=int, default=4)
    s.set_defaults(func=cmd_witness)

    s = sub.add_parser("search", parents=[common, graph_src], help="distortion search (JSON)")
    s.add_argument("--space", default="l2:2")
    s.add_argument("--restarts", type=int, default=8)
    s.add_argument("--iterations", type=int, default=300)
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("bound", parents=[common, search_budget], help="lower bound on D")
    s.add_argument("--family", choices=sorted(CERTIFIERS), required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--modulus", default="l2-analytic")
    s.add_argument("--space", help="identity operator for --modulus numerical")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_bound)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ResourceCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ArtifactError, PreconditionError, StructureError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
