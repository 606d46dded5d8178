"""Command-line front end.

Exit codes: 0 success, 2 validation error, 3 non-termination (the JSON
payload on stdout carries the loop certificate when one was found).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Any

import numpy as np

from . import __version__
from .algorithms import AlgorithmSpec, bridge_trap_rule
from .analyze import (
    bipartite_parity_probe,
    chain_cliques_scaling,
    derive_seed,
    exact_joint,
    floor_d_half_experiment,
    hiding_report,
    lemma_known_check,
    mc_joint,
    n_sweep,
    parse_prior,
    scaling_csv,
    scaling_slope,
    uc_series,
)
from .errors import ConfigError, HidekitError, NonTermination
from .graph import (
    FAMILIES,
    GraphFamilySpec,
    PortLabeledGraph,
    diameter,
    double_star,
    dump_graph,
    gen_family,
    load_graph,
)
from .markov import (
    algorithm_walk_matrix,
    d_t,
    lazy_walk_matrix,
    mixing_time,
    stationary_distribution,
)
from .simulate import DEFAULT_CAP, run_multi, run_single

EXIT_OK, EXIT_INVALID, EXIT_NONTERMINATION = 0, 2, 3
SEED_ENV = "HIDEKIT_SEED"


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV}: not an integer: {raw!r}") from None


@dataclass
class ExperimentConfig:
    """Experiment description shared by ``simulate`` and ``analyze``.

    ``graph`` is a path to a graph JSON file or a family object such as
    ``{"family": "path", "n": 5}``. Unknown keys are rejected.
    """

    graph: Any = None
    algorithm: Any = None
    prior: Any = "uniform"
    trials: int = 1000
    seed: int | None = None
    mode: str = "exact"
    starts: list[int] | None = None
    truncate: int | None = None
    output: dict | None = field(default=None)

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        if not isinstance(data, dict):
            raise ConfigError("config: top level must be a JSON object")
        names = {f.name for f in fields(cls)}
        for key in data:
            if key not in names:
                raise ConfigError(f"{key}: unknown config field")
        return cls(**data)

    def validate(self) -> None:
        if self.graph is None:
            raise ConfigError("graph: missing (give --graph FILE or --family ...)")
        if self.algorithm is None:
            raise ConfigError("algorithm: missing (give --algo)")
        if not isinstance(self.algorithm, AlgorithmSpec):
            if not isinstance(self.algorithm, dict):
                raise ConfigError("algorithm: must be an object")
            self.algorithm = AlgorithmSpec.from_dict(self.algorithm)
        if self.mode not in ("exact", "mc"):
            raise ConfigError(f"mode: must be 'exact' or 'mc', got {self.mode!r}")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError(f"trials: must be a positive integer, got {self.trials!r}")
        if self.seed is not None and not isinstance(self.seed, int):
            raise ConfigError(f"seed: must be an integer, got {self.seed!r}")
        if self.truncate is not None and (not isinstance(self.truncate, int) or self.truncate < 0):
            raise ConfigError(f"truncate: must be a non-negative integer, got {self.truncate!r}")
        if self.starts is not None and (not isinstance(self.starts, list) or not self.starts):
            raise ConfigError("starts: must be a non-empty list of vertices")
        if self.output is not None:
            if not isinstance(self.output, dict) or set(self.output) - {"path", "format"}:
                raise ConfigError("output: must be an object with keys 'path' and/or 'format'")


def load_config_graph(spec: Any) -> PortLabeledGraph:
    if isinstance(spec, PortLabeledGraph):
        return spec
    if isinstance(spec, str):
        return load_graph(spec)
    if isinstance(spec, dict):
        spec = dict(spec)
        if "family" not in spec:
            raise ConfigError("graph.family: missing")
        family = spec.pop("family")
        seed = spec.pop("seed", None)
        return gen_family(GraphFamilySpec(family, spec, seed))
    raise ConfigError("graph: must be a file path or a family object")


# -- argument plumbing ---------------------------------------------------------

FAMILY_PARAMS = ("n", "x", "y", "d", "p", "a", "b")


def _add_graph_args(p: argparse.ArgumentParser, seed_flag: str = "--graph-seed") -> None:
    g = p.add_argument_group("graph (a file or a generated family member)")
    g.add_argument("--graph", help="graph JSON file")
    g.add_argument("--family", help=f"generate instead: one of {', '.join(f.replace('_', '-') for f in FAMILIES)}")
    for name in FAMILY_PARAMS:
        g.add_argument(f"--{name}", type=int, help=argparse.SUPPRESS if name != "n" else "family parameter "
                       "(also --x --y for chain-of-cliques, --d --p for double-star, --a --b for complete-bipartite)")
    g.add_argument(seed_flag, dest="graph_seed", type=int, help="seed for randomized family members")


def _graph_spec_from_args(args) -> Any:
    if args.graph and args.family:
        raise ConfigError("graph: give either --graph or --family, not both")
    if args.graph:
        return args.graph
    if args.family:
        family = args.family.replace("-", "_")
        wanted = FAMILIES.get(family)
        if wanted is None:
            raise ConfigError(f"family: unknown family {args.family!r}")
        params = {}
        for name in wanted:
            val = getattr(args, name)
            if val is None:
                raise ConfigError(f"{name}: family {args.family} needs --{name}")
            params[name] = val
        extra = [nm for nm in FAMILY_PARAMS if nm not in wanted and getattr(args, nm) is not None]
        if extra:
            raise ConfigError(f"{extra[0]}: not a parameter of family {args.family}")
        out = {"family": family, **params}
        if args.graph_seed is not None:
            out["seed"] = args.graph_seed
        return out
    return None


def _add_algo_args(p: argparse.ArgumentParser, required: bool = False) -> None:
    p.add_argument("--algo", required=required,
                   help="go-to-min-id | dfs-min-id | rw-hider | det-no-memory | idle")
    p.add_argument("--q", type=float, help="termination probability for rw-hider")
    p.add_argument("--rule", help="degree:port pairs for det-no-memory, e.g. 1:1,4:2")


def _algo_from_args(args) -> AlgorithmSpec | None:
    if not args.algo:
        return None
    rule = None
    if args.rule:
        try:
            rule = {int(a): int(b) for a, b in (pair.split(":") for pair in args.rule.split(","))}
        except ValueError:
            raise ConfigError(f"rule: cannot parse {args.rule!r}, expected degree:port,...") from None
    return AlgorithmSpec(args.algo, args.q, rule)


def _int_list(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_csv(path: str, header: tuple, rows: list) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in r])


def _graph_summary(g: PortLabeledGraph) -> dict:
    return {"n": g.n, "m": g.m, "D": diameter(g)}


def _build_config(args) -> ExperimentConfig:
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"config: cannot read {args.config}: {exc}") from None
        cfg = ExperimentConfig.from_dict(data)
    else:
        cfg = ExperimentConfig()
    overrides = {
        "graph": _graph_spec_from_args(args),
        "algorithm": _algo_from_args(args),
        "prior": getattr(args, "prior", None),
        "trials": getattr(args, "trials", None),
        "seed": getattr(args, "seed", None),
        "mode": getattr(args, "mode", None),
        "starts": getattr(args, "starts", None),
        "truncate": getattr(args, "truncate", None),
    }
    for key, val in overrides.items():
        if val is not None:
            setattr(cfg, key, val)
    if cfg.seed is None:
        cfg.seed = default_seed()
    out = getattr(args, "out", None)
    if out:
        cfg.output = {**(cfg.output or {}), "path": out}
    cfg.validate()
    return cfg


# -- subcommands ---------------------------------------------------------------

def cmd_generate(args) -> int:
    spec = _graph_spec_from_args(args)
    if not isinstance(spec, dict):
        raise ConfigError("family: generate needs --family and its parameters")
    g = load_config_graph(spec)
    text = dump_graph(g) + "\n"
    summary = _dumps({**_graph_summary(g), "graph": spec}) + "\n"
    if args.out:
        _emit(text, args.out)
        sys.stdout.write(summary)
    else:
        sys.stdout.write(text)
        sys.stderr.write(summary)
    return EXIT_OK


def _simulate_trial(job: tuple) -> str:
    g_dict, algo_dict, starts, seed, trial, truncate = job
    g = PortLabeledGraph.from_dict(g_dict)
    algo = AlgorithmSpec.from_dict(algo_dict)
    res = run_multi(g, algo, starts, seed, truncate=truncate)
    return json.dumps({"trial": trial, "seed": seed, **res.to_dict()}, sort_keys=True)


def cmd_simulate(args) -> int:
    cfg = _build_config(args)
    g = load_config_graph(cfg.graph)
    algo = cfg.algorithm
    prior = parse_prior(g, cfg.prior)
    pick = np.random.default_rng([cfg.seed, 0xC0FFEE])
    outcomes = sorted(prior.probs)
    weights = [prior[x] for x in outcomes]
    jobs = []
    for trial in range(cfg.trials):
        starts = cfg.starts if cfg.starts is not None else [int(pick.choice(outcomes, p=weights))]
        jobs.append((g.to_dict(), algo.to_dict(), starts, derive_seed(cfg.seed, trial), trial, cfg.truncate))
    try:
        if args.jobs > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                lines = list(pool.map(_simulate_trial, jobs, chunksize=max(1, len(jobs) // (4 * args.jobs))))
        else:
            lines = [_simulate_trial(j) for j in jobs]
    except NonTermination as exc:
        sys.stdout.write(_dumps(exc.to_dict()) + "\n")
        return EXIT_NONTERMINATION
    _emit("".join(line + "\n" for line in lines), (cfg.output or {}).get("path"))
    return EXIT_OK


def cmd_analyze(args) -> int:
    if args.n_sweep:
        algo = _algo_from_args(args)
        if algo is None or not args.family:
            raise ConfigError("n_sweep: needs --family and --algo")
        family = args.family.replace("-", "_")
        size_param = args.sweep_param or FAMILIES.get(family, ("n",))[0]
        fixed = {nm: getattr(args, nm) for nm in FAMILIES.get(family, ()) if nm != size_param}
        missing = [k for k, v in fixed.items() if v is None]
        if missing:
            raise ConfigError(f"{missing[0]}: family {args.family} needs --{missing[0]}")
        rows = n_sweep(family, args.n_sweep, algo, args.prior or "diameter", fixed, size_param, args.graph_seed)
        payload = {"algorithm": algo.to_dict(), "prior": args.prior or "diameter", "sweep": rows,
                   "note": "finite-size trend of U; well-hiding is asymptotic and is not decided here"}
        _emit(_dumps(payload) + "\n", args.out)
        return EXIT_OK
    cfg = _build_config(args)
    if cfg.mode == "exact" and cfg.algorithm.kind == "det-no-memory" and cfg.truncate is None:
        raise ConfigError("mode: exact analysis is unavailable for det-no-memory (it need not terminate)")
    g = load_config_graph(cfg.graph)
    prior = parse_prior(g, cfg.prior)
    if cfg.mode == "exact":
        rep = hiding_report(exact_joint(g, cfg.algorithm, prior, truncate=cfg.truncate))
    else:
        joint = mc_joint(g, cfg.algorithm, prior, cfg.trials, cfg.seed, truncate=cfg.truncate)
        rep = hiding_report(joint, "monte_carlo", cfg.trials, cfg.seed)
    payload = {
        "graph": _graph_summary(g),
        "algorithm": cfg.algorithm.to_dict(),
        "prior": prior.to_json(),
        "truncate": cfg.truncate,
        "report": rep.to_dict(),
    }
    if args.emit_plot_data:
        if cfg.algorithm.kind == "det-no-memory" and cfg.mode == "exact":
            raise ConfigError("emit_plot_data: U series needs an algorithm with an exact law")
        series = uc_series(g, cfg.algorithm, prior, args.horizon)
        _write_csv(args.emit_plot_data, ("t", "U"), series)
    _emit(_dumps(payload) + "\n", (cfg.output or {}).get("path"))
    return EXIT_OK


def cmd_mixing(args) -> int:
    spec = _graph_spec_from_args(args)
    if spec is None:
        raise ConfigError("graph: missing (give --graph FILE or --family ...)")
    g = load_config_graph(spec)
    if args.walk == "lazy":
        P = lazy_walk_matrix(g)
    else:
        if args.q is None:
            raise ConfigError("q: --walk algorithm needs --q")
        P = algorithm_walk_matrix(g, args.q)
    pi = stationary_distribution(g)
    t_mix = mixing_time(P, pi, args.epsilon, args.t_max)
    payload = {"graph": _graph_summary(g), "walk": args.walk, "epsilon": args.epsilon, "t_mix": t_mix}
    if args.walk == "algorithm":
        payload["q"] = args.q
    if args.emit_plot_data:
        _write_csv(args.emit_plot_data, ("t", "d"), [(t, d_t(P, pi, t)) for t in range(t_mix + 1)])
    _emit(_dumps(payload) + "\n", args.out)
    return EXIT_OK


def _lb_graph(args) -> PortLabeledGraph:
    spec = _graph_spec_from_args(args)
    if spec is None:
        raise ConfigError("graph: missing (give --graph FILE or --family ...)")
    return load_config_graph(spec)


def _lb_algo(args) -> AlgorithmSpec:
    algo = _algo_from_args(args)
    if algo is None:
        raise ConfigError("algorithm: missing (give --algo)")
    return algo


def cmd_lowerbound(args) -> int:
    seed = args.seed if args.seed is not None else default_seed()
    which = args.experiment
    if which == "lemma-known":
        g, algo = _lb_graph(args), _lb_algo(args)
        mode = "exact" if args.mode == "exact" else "monte_carlo"
        w = lemma_known_check(g, algo, args.t, args.u, args.v, args.trials, seed, mode)
        payload = {"experiment": which, "algorithm": algo.to_dict(), **w.to_dict()}
        if mode == "monte_carlo":
            payload["seed"] = seed
        _emit(_dumps(payload) + "\n", args.out)
    elif which == "d-half":
        g, algo = _lb_graph(args), _lb_algo(args)
        rep = floor_d_half_experiment(g, algo, args.trials, seed, args.k)
        _emit(_dumps({"experiment": which, "algorithm": algo.to_dict(), "seed": seed, **rep.to_dict()}) + "\n",
              args.out)
    elif which == "chain-cliques":
        algo = _lb_algo(args)
        rows = chain_cliques_scaling(args.xs, args.ys, algo, args.members, args.trials, seed)
        _emit(scaling_csv(rows), args.out)
        try:
            sys.stderr.write(f"log-log slope of mean steps vs m: {scaling_slope(rows):.4f}\n")
        except HidekitError:
            pass
    elif which == "bipartite-parity":
        g = _lb_graph(args)
        rep = bipartite_parity_probe(g, args.t, args.u, args.v)
        _emit(_dumps({"experiment": which, **rep.to_dict()}) + "\n", args.out)
        if args.emit_plot_data:
            series = [(t, r.uc_non_lazy, r.uc_lazy) for t in range(args.horizon + 1)
                      for r in [bipartite_parity_probe(g, t, rep.u, rep.v)]]
            _write_csv(args.emit_plot_data, ("t", "U_non_lazy", "U_lazy"), series)
    elif which == "double-star-trap":
        if args.d is None or args.p is None:
            raise ConfigError("d: double-star-trap needs --d and --p")
        g = double_star(args.d, args.p)
        rule = bridge_trap_rule(args.d, args.p)
        algo = AlgorithmSpec("det-no-memory", rule=rule)
        runs = []
        for start in g.vertices:
            try:
                res = run_single(g, algo, start, cap=args.cap)
            except NonTermination as exc:
                runs.append({"start": start, "terminated": False, "certificate": exc.certificate,
                             "rounds": exc.rounds})
            else:
                runs.append({"start": start, "terminated": True, "rounds": res.makespan})
        payload = {
            "experiment": which,
            "d": args.d,
            "p": args.p,
            "n": g.n,
            "rule": algo.to_dict()["rule"],
            "loops_everywhere": all(not r["terminated"] and r["certificate"] is not None for r in runs),
            "max_certificate_round": max(r["rounds"] for r in runs),
            "runs": runs,
        }
        _emit(_dumps(payload) + "\n", args.out)
    return EXIT_OK


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hidekit",
        description="Simulate and analyze location-hiding protocols for mobile agents on port-labeled graphs.",
        epilog=f"The default seed is read from ${SEED_ENV} (0 if unset).",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a graph family member as JSON")
    _add_graph_args(p, seed_flag="--seed")
    p.add_argument("--out", help="write the graph here (summary goes to stdout); default: graph to stdout")
    p.set_defaults(func=cmd_generate)

    for name, func, helptext in (("simulate", cmd_simulate, "run seeded trials, one JSON object per line"),
                                 ("analyze", cmd_analyze, "hiding report: entropy, mutual information, U")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", help="experiment config JSON (flags override its fields)")
        _add_graph_args(p)
        _add_algo_args(p)
        p.add_argument("--prior", help="uniform | diameter | two_point:u,v (default uniform)")
        p.add_argument("--trials", type=int, help="simulate: number of runs; analyze --mode mc: runs per start")
        p.add_argument("--seed", type=int, help=f"experiment seed (default ${SEED_ENV} or 0)")
        p.add_argument("--truncate", type=int, help="hard stop after this many rounds")
        p.add_argument("--out", help="output file (default stdout)")
        p.set_defaults(func=func)
        if name == "simulate":
            p.add_argument("--starts", type=_int_list, help="fixed start vertices, one per agent (default: sample "
                           "one start per trial from the prior)")
            p.add_argument("--jobs", type=int, default=1, help="worker processes; output order is by trial")
        else:
            p.add_argument("--mode", choices=("exact", "mc"), help="exact law or Monte Carlo plug-in estimate")
            p.add_argument("--emit-plot-data", metavar="CSV", help="write the (t, U) series of the truncated algorithm")
            p.add_argument("--horizon", type=int, default=64, help="last t of the plot series (default 64)")
            p.add_argument("--n-sweep", type=_int_list, metavar="SIZES",
                           help="exact U across family sizes, e.g. 4,8,16 (needs --family)")
            p.add_argument("--sweep-param", help="family parameter the sweep varies (default: the first one)")

    p = sub.add_parser("mixing", help="mixing time of the lazy walk or the hider's movement kernel")
    _add_graph_args(p)
    p.add_argument("--epsilon", type=float, default=0.25)
    p.add_argument("--t-max", type=int, help="cap on t (default 8 n^3 ceil(log2 1/epsilon))")
    p.add_argument("--walk", choices=("lazy", "algorithm"), default="lazy")
    p.add_argument("--q", type=float, help="termination probability for --walk algorithm")
    p.add_argument("--emit-plot-data", metavar="CSV", help="write the (t, d(t)) series up to t_mix")
    p.add_argument("--out")
    p.set_defaults(func=cmd_mixing)

    p = sub.add_parser("lowerbound", help="lower-bound experiments")
    p.add_argument("experiment", choices=("lemma-known", "d-half", "chain-cliques", "bipartite-parity",
                                          "double-star-trap"))
    _add_graph_args(p)
    _add_algo_args(p)
    p.add_argument("--u", type=int)
    p.add_argument("--v", type=int)
    p.add_argument("--t", type=int, default=1, help="step horizon (lemma-known, bipartite-parity)")
    p.add_argument("--mode", choices=("exact", "mc"), default="exact")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--members", type=int, default=50, help="chain-cliques: random members per (x, y)")
    p.add_argument("--xs", type=_int_list, default=[3, 4, 5], help="chain-cliques clique sizes")
    p.add_argument("--ys", type=_int_list, default=[3, 5], help="chain-cliques chain lengths")
    p.add_argument("--k", type=int, default=1, help="d-half: number of agents")
    p.add_argument("--seed", type=int)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--horizon", type=int, default=16)
    p.add_argument("--emit-plot-data", metavar="CSV")
    p.add_argument("--out")
    p.set_defaults(func=cmd_lowerbound)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NonTermination as exc:
        sys.stdout.write(_dumps(exc.to_dict()) + "\n")
        return EXIT_NONTERMINATION
    except HidekitError as exc:
        sys.stderr.write(_dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
