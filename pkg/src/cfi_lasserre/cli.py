"""Command line entry point: instance generation, checks and the end-to-end pipeline."""
from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import cfi, graph_core, iso, lasserre, resolution, xor_system
from .graph_core import ColoredGraph, GraphError

SCHEMA = 1

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_CFI = 10
EXIT_ISO = 11
EXIT_WL = 12
EXIT_SYSTEM = 13
EXIT_REFUTATION = 14
EXIT_CLASSES = 15
EXIT_LASSERRE = 16
EXIT_RELAXATION = 17
EXIT_EXPANSION = 18
EXIT_CUTWIDTH = 19

STAGE_CODES = {
    "cfi": EXIT_CFI, "iso": EXIT_ISO, "wl": EXIT_WL, "system": EXIT_SYSTEM,
    "refutation": EXIT_REFUTATION, "classes": EXIT_CLASSES, "lasserre": EXIT_LASSERRE,
    "relaxation": EXIT_RELAXATION, "expansion": EXIT_EXPANSION, "cutwidth": EXIT_CUTWIDTH,
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    graph_file: Optional[str] = None
    random_n: Optional[int] = None
    named: Optional[str] = None
    seed: int = 0
    twist: str = "odd"
    width: int = 12
    level: Optional[int] = None
    samples: int = 2000
    time_budget: float = 120.0
    mode: str = "exact"
    tol: float = 1e-9
    out: Optional[str] = None
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)
    extra: dict = field(default_factory=dict)

    def validate(self):
        sources = [self.graph_file is not None, self.random_n is not None, self.named is not None]
        if self.command != "expansion-sweep" and sum(sources) != 1:
            raise ConfigError("give exactly one of --graph, --random, --named")
        for name in ("width", "samples", "workers"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"--{name} must be positive")
        if self.time_budget <= 0 or self.tol <= 0:
            raise ConfigError("budgets must be positive")
        if self.level is not None and self.level < 0:
            raise ConfigError("--level must be nonnegative")

    def as_json(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k not in ("out", "workers", "extra")}
        d.update(self.extra)
        return d


# ----------------------------------------------------------------------------
# helpers

def fr(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def load_graph(cfg: RunConfig) -> ColoredGraph:
    if cfg.graph_file is not None:
        return graph_core.read_edge_list(Path(cfg.graph_file).read_text())
    if cfg.random_n is not None:
        return graph_core.random_3regular(cfg.random_n, cfg.seed)
    named = {"k4": lambda: graph_core.complete_graph(4), "petersen": graph_core.petersen_graph}
    if cfg.named not in named:
        raise ConfigError(f"unknown named graph {cfg.named!r}")
    return named[cfg.named]()


def load_twist(base: ColoredGraph, choice: str) -> cfi.TwistFunction:
    if choice == "zero":
        return cfi.TwistFunction.zero(base)
    if choice == "odd":
        return cfi.TwistFunction.odd(base)
    if choice == "even":
        edges = base.edge_list
        return cfi.TwistFunction.from_edges(base, [edges[0], edges[-1]])
    text = Path(choice).read_text()
    edges = []
    for line in text.splitlines():
        if line.strip() and not line.startswith("#"):
            a, b = line.split()
            if not base.has_edge(int(a), int(b)):
                raise GraphError(f"twist edge {a} {b} is not a base edge")
            edges.append((int(a), int(b)))
    return cfi.TwistFunction.from_edges(base, edges)


class Report:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.claims = []
        self.data = {}
        self.first_failure = None

    def claim(self, stage: str, name: str, status: str, **details):
        if status not in ("pass", "fail", "skipped"):
            raise ValueError(status)
        self.claims.append({"stage": stage, "name": name, "status": status, "details": details})
        if status == "fail" and self.first_failure is None:
            self.first_failure = stage

    def exit_code(self) -> int:
        return EXIT_OK if self.first_failure is None else STAGE_CODES[self.first_failure]

    def to_json(self) -> str:
        doc = {
            "schema": SCHEMA,
            "command": self.cfg.command,
            "config": self.cfg.as_json(),
            "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "claims": self.claims,
            "data": self.data,
            "exit_code": self.exit_code(),
        }
        return json.dumps(doc, indent=2, sort_keys=True, default=_json_default)


def _json_default(x):
    if isinstance(x, Fraction):
        return fr(x)
    if isinstance(x, (set, frozenset)):
        return sorted(x)
    if isinstance(x, tuple):
        return list(x)
    raise TypeError(f"cannot serialize {type(x)}")


def emit(report: Report, cfg: RunConfig) -> int:
    text = report.to_json()
    if cfg.out:
        Path(cfg.out).write_text(text + "\n")
    else:
        print(text)
    return report.exit_code()


# ----------------------------------------------------------------------------
# stages shared by subcommands and the pipeline

def stage_cfi(report: Report, base, f, g):
    xf, xg = cfi.build_X(base, f), cfi.build_X(base, g)
    n, m = base.vertex_count, base.edge_count
    ok = all(x.graph.vertex_count == 10 * n and x.graph.edge_count == 12 * n + 2 * m for x in (xf, xg))
    report.claim("cfi", "vertex_and_edge_counts", "pass" if ok else "fail",
                 vertices=xf.graph.vertex_count, edges=xf.graph.edge_count,
                 expected_vertices=10 * n, expected_edges=12 * n + 2 * m)
    return xf, xg


def stage_iso(report: Report, cfg: RunConfig, base, f, g, xf, xg, uncolored: bool = True):
    same = f.parity == g.parity
    cert = iso.find_isomorphism(xf.graph, xg.graph, cfg.time_budget)
    if same:
        perm = cfi.parity_isomorphism(base, f, g)
        ok = cert.status == "found" and cfi.is_isomorphism(xf.graph, xg.graph, perm)
        report.claim("iso", "same_parity_isomorphic", "pass" if ok else "fail",
                     search=cert.status, nodes=cert.nodes, parity_map_verified=ok)
        report.data["parity_isomorphism"] = list(perm)
    else:
        report.claim("iso", "opposite_parity_colored_nonisomorphic",
                     "pass" if cert.status == "none-found" else "fail",
                     search=cert.status, nodes=cert.nodes)
    if uncolored:
        if base.vertex_count <= cfg.extra.get("max_uncolored_search_n", 4):
            c2 = iso.find_isomorphism(xf.graph.uncolored(), xg.graph.uncolored(), cfg.time_budget)
            want = "found" if same else "none-found"
            report.claim("iso", "uncolored_search", "pass" if c2.status == want else "fail",
                         search=c2.status, nodes=c2.nodes, expected=want)
        else:
            report.claim("iso", "uncolored_search", "skipped", reason="base too large for default budget")
    return cert


def stage_wl(report: Report, cfg: RunConfig, base, xf, xg, ks=(1, 2)):
    yf, yg = xf.graph.uncolored(), xg.graph.uncolored()
    for k in ks:
        if k >= 2 and yf.vertex_count > cfg.extra.get("max_wl2_vertices", 100):
            report.claim("wl", f"wl{k}_indistinguishable", "skipped", reason="tuple budget")
            continue
        res = iso.wl_refine(yf, yg, k)
        report.claim("wl", f"wl{k}_indistinguishable",
                     "pass" if res.verdict == "indistinguishable" else "fail",
                     verdict=res.verdict, rounds=res.state.rounds)


def stage_system(report: Report, base, f, g):
    sys_ = xor_system.build_phi(base, f, g)
    sat = sys_.satisfiable()
    want = f.parity == g.parity
    report.claim("system", "satisfiable_iff_same_parity", "pass" if sat == want else "fail",
                 satisfiable=sat, variables=len(sys_.variables), constraints=len(sys_.constraints))
    return sys_


def stage_refutation(report: Report, cfg: RunConfig, base, sys_):
    verdict = resolution.refutation_width(sys_, cfg.width)
    report.data["refutation_width"] = verdict.to_json()
    sat = sys_.satisfiable()
    if sat:
        report.claim("refutation", "no_refutation_for_consistent_system",
                     "pass" if not verdict.exact else "fail", verdict=verdict.to_json())
    else:
        report.claim("refutation", "refutation_width_computed", "pass", verdict=verdict.to_json())
    if base.vertex_count <= graph_core.CUTWIDTH_MAX_VERTICES and not sat:
        cw, _ = graph_core.cutwidth(base)
        ok = verdict.value >= cw
        report.claim("refutation", "refutation_width_at_least_cutwidth", "pass" if ok else "fail",
                     cutwidth=cw, verdict=verdict.to_json())
    return verdict


def stage_lasserre(report: Report, cfg: RunConfig, sys_, verdict):
    r = verdict.value - 1 if verdict.exact else cfg.width
    level = cfg.level if cfg.level is not None else r // 9
    s, w = resolution.default_budgets(r)
    if level >= 1 and 3 * level > s:
        report.claim("classes", "budgets_cover_level", "fail", r=r, level=level, size_budget=s)
        return None
    try:
        inst = lasserre.LasserreInstance.from_system(sys_, r, level=level, eager=False)
    except resolution.IllDefinedGamma as exc:
        report.claim("classes", "gamma_well_defined", "fail", error=str(exc))
        return None
    report.claim("classes", "gamma_well_defined", "pass", r=r, size_budget=s, width_budget=w)
    rep = lasserre.verify_all(inst, samples=cfg.samples, seed=cfg.seed)
    for key in ("l1", "l2", "l3", "l4_l5"):
        report.claim("lasserre", key, rep[key]["status"], **{k: v for k, v in rep[key].items() if k != "status"})
    report.data["lasserre_level"] = level
    report.data["class_table_nodes"] = inst.table.explored_nodes
    return inst


def _probabilities(count: int, mode: str):
    if count == 1:
        return [Fraction(1)]
    if mode == "exact":
        return [Fraction(9, 25), Fraction(16, 25)]
    return [0.5, 0.5]


def stage_relaxation(report: Report, cfg: RunConfig, base, f, g, xf, xg):
    perm = cfi.parity_isomorphism(base, f, g)
    auts = iso.automorphisms(xg.graph, limit=64, time_budget=cfg.time_budget)
    isos = sorted({tuple(a[perm[i]] for i in range(len(perm))) for a in auts})[:2]
    probs = _probabilities(len(isos), cfg.mode)
    level = min(3, base.vertex_count) if cfg.level is None else cfg.level
    fam, rep = lasserre.vectors_from_isomorphisms(xf.graph, xg.graph, isos, probs, level,
                                                  mode=cfg.mode, tol=cfg.tol, samples=cfg.samples,
                                                  seed=cfg.seed)
    for key in ("l1", "l2", "l3", "l4_l5"):
        report.claim("relaxation", key, rep[key]["status"],
                     **{k: v for k, v in rep[key].items() if k not in ("status", "cases")})
    report.data["relaxation"] = {"isomorphisms": len(isos), "probabilities": [str(p) for p in probs],
                                 "level": level, "arithmetic": rep["arithmetic"]}


def stage_expansion(report: Report, cfg: RunConfig, base, xf=None):
    data = {}
    if base.vertex_count <= graph_core.EXPANSION_MAX_VERTICES:
        data["exact"] = graph_core.expansion_exact(base)
    b = graph_core.expansion_bounds(base, samples=cfg.samples, seed=cfg.seed)
    data["lower"] = round(b.lower, 12)
    data["upper"] = b.upper
    ok = b.lower <= float(data.get("exact", b.upper)) + 1e-12 and float(data.get("exact", b.lower)) <= b.upper
    report.claim("expansion", "spectral_lower_le_exact_le_sampled_upper", "pass" if ok else "fail", **data)
    if xf is not None:
        bx = graph_core.expansion_bounds(xf.graph, samples=cfg.samples, seed=cfg.seed)
        report.claim("expansion", "cfi_spectral_lower_positive", "pass" if bx.lower > 0 else "fail",
                     lower=round(bx.lower, 12), upper=bx.upper)
    report.data["expansion"] = data


# ----------------------------------------------------------------------------
# subcommands

def cmd_gen_graph(cfg: RunConfig) -> int:
    g = load_graph(cfg)
    text = graph_core.write_edge_list(g)
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_build_cfi(cfg: RunConfig) -> int:
    base = load_graph(cfg)
    f = load_twist(base, cfg.twist)
    x = cfi.build_X(base, f)
    g = x.graph.uncolored() if cfg.extra.get("uncolored") else x.graph
    text = graph_core.write_edge_list(g)
    if cfg.out:
        Path(cfg.out).write_text(text)
        Path(cfg.out).with_suffix(".index.json").write_text(x.index_json() + "\n")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _pair(cfg: RunConfig):
    base = load_graph(cfg)
    return base, cfi.TwistFunction.zero(base), load_twist(base, cfg.twist)


def cmd_check_iso(cfg: RunConfig) -> int:
    report = Report(cfg)
    base, f, g = _pair(cfg)
    xf, xg = stage_cfi(report, base, f, g)
    stage_iso(report, cfg, base, f, g, xf, xg)
    return emit(report, cfg)


def cmd_refutation_width(cfg: RunConfig) -> int:
    report = Report(cfg)
    base, f, g = _pair(cfg)
    sys_ = stage_system(report, base, f, g)
    stage_refutation(report, cfg, base, sys_)
    return emit(report, cfg)


def cmd_build_vectors(cfg: RunConfig) -> int:
    report = Report(cfg)
    base, f, g = _pair(cfg)
    sys_ = xor_system.build_phi(base, f, g)
    verdict = resolution.refutation_width(sys_, cfg.width)
    r = verdict.value - 1 if verdict.exact else cfg.width
    level = cfg.level if cfg.level is not None else r // 9
    try:
        inst = lasserre.LasserreInstance.from_system(sys_, r, level=level)
    except resolution.IllDefinedGamma as exc:
        report.claim("classes", "gamma_well_defined", "fail", error=str(exc))
        return emit(report, cfg)
    vectors = {"empty": lasserre.fmt_vector(inst.vector(xor_system.EMPTY))}
    if level >= 1:
        for i in range(inst.G.vertex_count):
            for j in lasserre.candidate_targets(inst.G, inst.H, i):
                v = inst.vector(xor_system.PartialIso.single(i, j))
                vectors[f"{i}->{j}"] = lasserre.fmt_vector(v)
    report.data.update({"r": r, "level": level, "vectors": vectors})
    report.claim("classes", "gamma_well_defined", "pass", r=r)
    return emit(report, cfg)


def cmd_verify_lasserre(cfg: RunConfig) -> int:
    report = Report(cfg)
    base, f, g = _pair(cfg)
    sys_ = stage_system(report, base, f, g)
    verdict = stage_refutation(report, cfg, base, sys_)
    stage_lasserre(report, cfg, sys_, verdict)
    return emit(report, cfg)


def _sweep_one(args):
    n, seed = args
    b = graph_core.expansion_bounds(graph_core.random_3regular(n, seed), samples=200, seed=seed)
    return seed, b.lower


def cmd_expansion(cfg: RunConfig) -> int:
    report = Report(cfg)
    sweep = cfg.extra.get("sweep")
    if sweep:
        n = cfg.random_n or 64
        jobs = [(n, s) for s in range(sweep)]
        if cfg.workers > 1:
            with ProcessPoolExecutor(cfg.workers) as ex:
                results = list(ex.map(_sweep_one, jobs))
        else:
            results = [_sweep_one(j) for j in jobs]
        results.sort()
        frac = Fraction(sum(1 for _, low in results if low > 0.2), len(results))
        report.data["sweep"] = {"n": n, "graphs": len(results), "fraction_lower_above_0.2": frac,
                                "lower_bounds": [round(low, 9) for _, low in results]}
        report.claim("expansion", "sweep_completed", "pass", graphs=len(results))
        return emit(report, cfg)
    base = load_graph(cfg)
    stage_expansion(report, cfg, base)
    return emit(report, cfg)


def cmd_cutwidth(cfg: RunConfig) -> int:
    report = Report(cfg)
    base = load_graph(cfg)
    cw, prof = graph_core.cutwidth(base)
    w = graph_core.graph_width(base)
    report.data.update({"cutwidth": cw, "ordering": list(prof.ordering), "cut_values": list(prof.cut_values),
                        "width": w})
    report.claim("cutwidth", "cutwidth_equals_width", "pass" if cw == w else "fail", cutwidth=cw, width=w)
    return emit(report, cfg)


def cmd_wl(cfg: RunConfig) -> int:
    report = Report(cfg)
    base, f, g = _pair(cfg)
    xf, xg = stage_cfi(report, base, f, g)
    stage_wl(report, cfg, base, xf, xg, ks=tuple(cfg.extra.get("k", [1, 2])))
    return emit(report, cfg)


def cmd_pipeline(cfg: RunConfig) -> int:
    """Full chain on one base graph with twists f = 0 and g from --twist."""
    report = Report(cfg)
    base, f, g = _pair(cfg)
    report.data["base"] = {"vertices": base.vertex_count, "edges": base.edge_count,
                           "parity_f": f.parity, "parity_g": g.parity}
    xf, xg = stage_cfi(report, base, f, g)
    stage_iso(report, cfg, base, f, g, xf, xg)
    stage_wl(report, cfg, base, xf, xg)
    sys_ = stage_system(report, base, f, g)
    verdict = stage_refutation(report, cfg, base, sys_)
    stage_lasserre(report, cfg, sys_, verdict)
    if f.parity == g.parity:
        stage_relaxation(report, cfg, base, f, g, xf, xg)
    stage_expansion(report, cfg, base, xf)
    return emit(report, cfg)


COMMANDS = {
    "gen-graph": cmd_gen_graph,
    "build-cfi": cmd_build_cfi,
    "check-iso": cmd_check_iso,
    "refutation-width": cmd_refutation_width,
    "build-vectors": cmd_build_vectors,
    "verify-lasserre": cmd_verify_lasserre,
    "expansion": cmd_expansion,
    "cutwidth": cmd_cutwidth,
    "wl": cmd_wl,
    "pipeline": cmd_pipeline,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cfi-lasserre", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        src = p.add_mutually_exclusive_group()
        src.add_argument("--graph", metavar="FILE", help="edge-list file")
        src.add_argument("--random", metavar="N", type=int, help="random 3-regular graph on N vertices")
        src.add_argument("--named", choices=["k4", "petersen"])
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--twist", default="odd", help="zero | odd | even | FILE of twisted edges")
        p.add_argument("--width", type=int, default=12, help="refutation width search budget")
        p.add_argument("--level", type=int, default=None)
        p.add_argument("--samples", type=int, default=2000)
        p.add_argument("--time-budget", type=float, default=120.0)
        p.add_argument("--mode", choices=["exact", "float"], default="exact")
        p.add_argument("--tol", type=float, default=1e-9)
        p.add_argument("--out", metavar="FILE")
        p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
        if name == "build-cfi":
            p.add_argument("--uncolored", action="store_true", help="emit Y instead of X")
        if name == "wl":
            p.add_argument("--k", type=int, action="append", help="WL dimension (repeatable)")
        if name == "expansion":
            p.add_argument("--sweep", type=int, default=0, help="number of random cubic graphs to sample")
    return parser


def config_from_args(args) -> RunConfig:
    extra = {}
    if getattr(args, "uncolored", False):
        extra["uncolored"] = True
    if getattr(args, "k", None):
        extra["k"] = args.k
    if getattr(args, "sweep", 0):
        extra["sweep"] = args.sweep
    cfg = RunConfig(command=args.command, graph_file=args.graph, random_n=args.random, named=args.named,
                    seed=args.seed, twist=args.twist, width=args.width, level=args.level,
                    samples=args.samples, time_budget=args.time_budget, mode=args.mode, tol=args.tol,
                    out=args.out, workers=args.workers, extra=extra)
    if args.command == "expansion" and extra.get("sweep"):
        cfg.command = "expansion-sweep"
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        cfg.validate()
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GraphError, OSError, ValueError) as exc:
        print(f"error: could not read input: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
