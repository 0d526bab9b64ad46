"""Command-line front end.

Subcommands expose each pipeline: `matroid` (structure report and lattice
export), `chordality` (graph and matroid predicates), `groebner` (strong
elimination order search / certification), `betti` (resolution tables and
identity checks), and `reproduce-paper` (the acceptance suite). Exit
codes: 0 success, 2 input or axiom error, 3 resource cap, 4 internal
consistency failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from typing import Optional

from . import gma, graphs, groebner, instances, jsonio
from . import matroid as mt
from . import resolution as rs
from .errors import (AxiomViolation, BadArgument, MismatchBug, NotSimple,
                     ParseError, SizeLimit)


@dataclass
class RunConfig:
    """Validated run parameters shared by the subcommands."""

    named: Optional[str] = None
    input: Optional[str] = None
    format: str = "text"
    char: int = rs.DEFAULT_PRIME
    steps: int = 4
    degree_cap: Optional[int] = None
    strategy: str = "dfs_pruned"
    order: Optional[str] = None
    threads: int = 1
    seed: int = 0
    check_identities: bool = False

    def __post_init__(self):
        if self.steps < 0:
            raise BadArgument("--steps must be nonnegative")
        if self.degree_cap is not None and self.degree_cap <= 0:
            raise BadArgument("--degree-cap must be positive")
        if self.threads < 1:
            raise BadArgument("--threads must be at least 1")
        if self.char != 0 and not rs._is_prime(self.char):
            raise BadArgument("--char must be prime or 0")


def _config(args: argparse.Namespace) -> RunConfig:
    fields = {k: getattr(args, k) for k in RunConfig.__dataclass_fields__
              if hasattr(args, k)}
    return RunConfig(**fields)


def _load_instance(cfg: RunConfig):
    """Resolve --named/--input to (name, matroid, graph or None, note)."""
    if cfg.named and cfg.input:
        raise ParseError("give either --named or --input, not both")
    if cfg.named:
        inst = instances.named_instance(cfg.named)
        return inst.name, inst.matroid, inst.graph, inst.description
    if cfg.input:
        matroid, graph = jsonio.load_instance(cfg.input)
        return cfg.input, matroid, graph, "loaded from file"
    raise ParseError("an instance is required: --named NAME or --input PATH")


def _emit(cfg: RunConfig, payload: dict, text: str) -> None:
    if cfg.format == "json":
        print(json.dumps(payload, indent=2))
    else:
        print(text)


# --------------------------------------------------------------------------
# matroid
# --------------------------------------------------------------------------
def cmd_matroid(args: argparse.Namespace) -> int:
    cfg = _config(args)
    name, matroid, graph, note = _load_instance(cfg)
    lat = mt.FlatLattice(matroid)
    whitney = lat.whitney()
    if cfg.format == "dot":
        print(jsonio.lattice_to_dot(lat))
        return 0
    payload = {
        "name": name,
        "description": note,
        "ground_size": matroid.ground_size,
        "rank": matroid.rank(),
        "n_circuits": len(matroid.circuits),
        "simple": matroid.is_simple(),
        "whitney": list(whitney),
        "lattice": jsonio.lattice_to_json(lat),
    }
    if graph is not None:
        payload["graph"] = jsonio.graph_to_json(graph)
    lines = [
        f"instance:   {name} ({note})",
        f"ground set: {matroid.ground_size} elements",
        f"rank:       {matroid.rank()}",
        f"circuits:   {len(matroid.circuits)}",
        f"simple:     {'yes' if matroid.is_simple() else 'no'}",
        f"whitney:    {tuple(whitney)}",
        f"flats:      {len(lat)}",
    ]
    if graph is not None:
        lines.append(f"graph:      {graph.n_vertices} vertices, "
                     f"{len(graph.edges)} edges")
    _emit(cfg, payload, "\n".join(lines))
    return 0


# --------------------------------------------------------------------------
# chordality
# --------------------------------------------------------------------------
def cmd_chordality(args: argparse.Namespace) -> int:
    cfg = _config(args)
    name, matroid, graph, note = _load_instance(cfg)
    payload: dict = {"name": name}
    lines = [f"instance: {name} ({note})"]
    if graph is not None:
        peo = graphs.is_chordal(graph)
        sc = graphs.is_strongly_chordal(graph)
        witness = graphs.find_induced_trampoline(graph)
        label = graphs.mat_labeling(graph)
        seeo = graphs.strong_edge_elimination_order(graph)
        payload["graph"] = {
            "chordal": peo is not None,
            "strongly_chordal": sc is not None,
            "trampoline_witness": list(witness) if witness else None,
            "mat_labeling": (jsonio.mat_labeling_to_json(label)
                             if label is not None else None),
            "strong_edge_elimination_order":
                (jsonio.edge_order_to_json(seeo)
                 if seeo is not None else None),
        }
        lines += [
            f"chordal:              {'yes' if peo is not None else 'no'}",
            f"strongly chordal:     {'yes' if sc is not None else 'no'}",
            f"trampoline witness:   "
            f"{list(witness) if witness else 'none'}",
            f"MAT labeling:         "
            f"{'found' if label is not None else 'none'}",
            f"strong edge order:    "
            f"{jsonio.edge_order_to_json(seeo) if seeo is not None else 'none'}",
        ]
    quad = gma.is_quadratic(matroid)
    cchord = gma.is_C_chordal(matroid)
    tchord = gma.is_T_chordal(matroid)
    lclosed = gma.is_line_closed(matroid)
    payload["matroid"] = {
        "quadratic": quad,
        "C_chordal": cchord,
        "T_chordal": tchord,
        "line_closed": lclosed,
    }
    lines += [
        f"quadratic (ideal):    {'yes' if quad else 'no'}",
        f"C-chordal:            {'yes' if cchord else 'no'}",
        f"T-chordal:            {'yes' if tchord else 'no'}",
        f"line-closed:          {'yes' if lclosed else 'no'}",
    ]
    _emit(cfg, payload, "\n".join(lines))
    return 0


# --------------------------------------------------------------------------
# groebner
# --------------------------------------------------------------------------
def cmd_groebner(args: argparse.Namespace) -> int:
    cfg = _config(args)
    name, matroid, graph, note = _load_instance(cfg)
    if cfg.order is not None:
        order = jsonio.parse_element_order(cfg.order, matroid.ground_size)
        certified = groebner.certify_order(matroid, order)
        summary = groebner.lex_initial_ideal(matroid, order)
        payload = {
            "name": name,
            "order": order.as_json(),
            "certified": certified,
            "initial_ideal": summary.as_json(),
        }
        lines = [
            f"instance:      {name}",
            f"order:         {','.join(str(e) for e in order.sequence)}",
            f"certified:     {'yes' if certified else 'no'}",
            f"initial ideal: {len(summary.generators)} generators, "
            f"max degree {summary.max_degree}",
        ]
        _emit(cfg, payload, "\n".join(lines))
        return 0
    report = groebner.search_strong_elimination_order(
        matroid, strategy=cfg.strategy)
    payload = {"name": name, "strategy": cfg.strategy,
               "report": report.as_json()}
    lines = [
        f"instance:        {name}",
        f"strategy:        {cfg.strategy}",
        f"outcome:         {report.outcome}",
        f"orders examined: {report.orders_examined}",
    ]
    if report.order is not None:
        lines.append(f"order:           "
                     f"{','.join(str(e) for e in report.order.sequence)}")
    if report.witness_circuit:
        lines.append(f"witness circuit: {list(report.witness_circuit)}")
    _emit(cfg, payload, "\n".join(lines))
    return 0


# --------------------------------------------------------------------------
# betti
# --------------------------------------------------------------------------
def _probe_from_table(table: rs.BettiTable) -> dict:
    first = None
    for (i, j) in sorted(table.entries):
        if j > i and table.entries[(i, j)]:
            first = (i, j)
            break
    linear_through = table.max_step if first is None else first[0] - 1
    return {"linear_through": linear_through,
            "first_nonlinear": list(first) if first else None}


def cmd_betti(args: argparse.Namespace) -> int:
    cfg = _config(args)
    name, matroid, graph, note = _load_instance(cfg)
    algebra = gma.build_gma(matroid)
    struct = rs.StructuredAlgebra.from_gma(algebra, char=cfg.char)
    strand_cap = None if cfg.degree_cap is not None else 2
    table = rs.betti_table_of_k(struct, cfg.steps,
                                max_internal_degree=cfg.degree_cap,
                                strand_cap=strand_cap,
                                threads=cfg.threads)
    probe = _probe_from_table(table)
    payload = {"name": name, "betti": table.as_json(),
               "koszul_probe": probe}
    # text mode streams the main report before the (fallible) identity
    # checks so a SizeLimit there still leaves the table on stdout
    if cfg.format == "text":
        print(f"instance: {name}   characteristic {cfg.char}   "
              f"steps {cfg.steps}")
        print(table.as_text())
        print(f"koszul probe: linear through step {probe['linear_through']}"
              + (f", first nonlinear entry {tuple(probe['first_nonlinear'])}"
                 if probe["first_nonlinear"]
                 else ", no nonlinear entry found"), flush=True)
    if cfg.check_identities:
        hs = rs.check_hs_poincare_identity(struct, cfg.steps,
                                           threads=cfg.threads)
        payload["hs_poincare_residual"] = hs
        if cfg.format == "text":
            print(f"HS*P(-t) - 1 residual through t^{cfg.steps}: "
                  f"{hs['coefficients']}"
                  + ("  (all zero)" if hs["all_zero"] else ""), flush=True)
        tramp = None
        if graph is not None and name.startswith("trampoline"):
            tramp = int(name.removeprefix("trampoline"))
        elif graph is not None and name.startswith("broken-trampoline"):
            tramp = int(name.removeprefix("broken-trampoline"))
        if tramp is not None:
            fe = rs.check_trampoline_functional_equation(
                tramp, cfg.steps, char=cfg.char or rs.DEFAULT_PRIME,
                threads=cfg.threads)
            payload["functional_equation_residual"] = fe
            if cfg.format == "text":
                print(f"functional-equation residual (n={tramp}) through "
                      f"total degree {cfg.steps}: "
                      + ("all zero" if fe["all_zero"]
                         else str(fe["nonzero"])))
    if cfg.format == "json":
        print(json.dumps(payload, indent=2))
    return 0


# --------------------------------------------------------------------------
# reproduce-paper
# --------------------------------------------------------------------------
def cmd_reproduce(args: argparse.Namespace) -> int:
    from . import acceptance
    cfg = _config(args)
    only = set(args.only or [])
    results = []
    for crit in acceptance.CRITERIA:
        if only and crit.number not in only:
            continue
        results.append(acceptance.run_criterion(crit, threads=cfg.threads,
                                                seed=cfg.seed))
    if cfg.format == "json":
        print(json.dumps({"results": results}, indent=2))
    else:
        for r in results:
            flag = "PASS" if r["passed"] else "FAIL"
            print(f"{flag} criterion {r['number']:>2}: {r['name']} "
                  f"({r['detail']}) [{r['seconds']:.1f}s]")
        n_ok = sum(r["passed"] for r in results)
        print(f"{n_ok}/{len(results)} criteria passed")
    return 0 if all(r["passed"] for r in results) else 1


# --------------------------------------------------------------------------
# parser and dispatch
# --------------------------------------------------------------------------
def _add_common(p: argparse.ArgumentParser, formats=("text", "json")):
    p.add_argument("--named", help="named instance (fano, ag23, "
                   "betsy-ross, whirl3, l23, example-2-1, trampolineN, "
                   "broken-trampolineN, uRN)")
    p.add_argument("--input", help="path to a matroid or graph JSON file")
    p.add_argument("--format", choices=formats, default="text")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="gmobius",
        description="graded Moebius algebras: chordality, initial ideals, "
                    "Betti tables")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("matroid", help="structure report and lattice export")
    _add_common(p, formats=("text", "json", "dot"))
    p.set_defaults(func=cmd_matroid)

    p = sub.add_parser("chordality", help="graph and matroid chordality "
                       "predicates")
    _add_common(p)
    p.set_defaults(func=cmd_chordality)

    p = sub.add_parser("groebner", help="strong elimination order search "
                       "or certification")
    _add_common(p)
    p.add_argument("--strategy",
                   choices=("exhaustive", "dfs_pruned", "graphic_mat"),
                   default="dfs_pruned")
    p.add_argument("--order", help="comma-separated element ids, most "
                   "significant first; certify instead of searching")
    p.set_defaults(func=cmd_groebner)

    p = sub.add_parser("betti", help="Betti table of the ground field")
    _add_common(p)
    p.add_argument("--char", type=int, default=rs.DEFAULT_PRIME,
                   help="field characteristic, prime or 0 for rationals")
    p.add_argument("--steps", type=int, default=4,
                   help="homological steps to resolve")
    p.add_argument("--degree-cap", dest="degree_cap", type=int,
                   default=None,
                   help="internal degree cap (default: steps + 2 strand "
                   "window)")
    p.add_argument("--check-identities", dest="check_identities",
                   action="store_true",
                   help="also report Hilbert/Poincare and trampoline "
                   "functional-equation residuals")
    p.set_defaults(func=cmd_betti)

    p = sub.add_parser("reproduce-paper", help="run the acceptance suite "
                       "and emit a pass/fail manifest")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--only", type=int, nargs="*",
                   help="criterion numbers to run (default: all)")
    p.set_defaults(func=cmd_reproduce)
    return ap


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, AxiomViolation, NotSimple, BadArgument) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SizeLimit as exc:
        print(f"size limit: {exc}", file=sys.stderr)
        if exc.partial is not None:
            print(f"partial result (incomplete, do not trust): "
                  f"{exc.partial}", file=sys.stderr)
        return 3
    except MismatchBug as exc:
        print(f"internal consistency failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
