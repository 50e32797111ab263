"""Command-line front end.

Exit codes: 0 success, 2 usage or configuration error, 3 numeric or
geometric failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from nervegraph import experiments, fixtures, io
from nervegraph.complexes import NerveClass, build_filtration, maximal_simplices, nerve
from nervegraph.geometry import GeometryError
from nervegraph.graphs import (
    clique_separator_trace,
    cliques,
    decomposable_from_filtration,
    factorization_string,
    from_skeleton,
    graph_from_blocks,
    is_decomposable,
    junction_tree,
    parse_factorization,
)
from nervegraph.mcmc import ProposalConfig, StructureMap, run_posterior_chain, run_prior_chain, topology_tally
from nervegraph.models import (
    ClaytonHypergraphBackend,
    ClaytonJTBackend,
    FlatBackend,
    GaussianHIWBackend,
    HIWHyper,
    NormalizerCache,
    sample_gaussian_model,
    sample_junction_tree_model,
)
from nervegraph.priors import DensityUnavailable, PackingError, Window, prior_from_dict

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3

logger = logging.getLogger("nervegraph")


class ConfigError(ValueError):
    """Configuration file fails validation."""


# ------------------------------------------------------------- run config

SCHEMA = {
    "seed": int,
    "nerve": {"class": str, "dim": int, "r": float, "view": str, "max_card": int},
    "prior": {"kind": str, "gamma": float, "R": float, "rho": float, "burn_in": int, "max_attempts": int},
    "model": {"kind": str, "truth": str, "theta": float, "N": int, "delta": float, "D": object,
              "precision": object, "normalizer_M": int, "truncation": float},
    "chain": {"steps": int, "burn_in": int, "thin": int, "theta0": float, "n_vertices": int},
    "proposal": {"eta": float, "local": float, "redraw": dict, "global_weight": float, "beta": float},
    "io": {"data": str, "out_dir": str},
}

DEFAULTS = {
    "seed": 0,
    "nerve": {"class": "alpha", "dim": 2, "r": None, "view": "decomposable"},
    "prior": {"kind": "uniform"},
    "model": {"kind": "clayton-jt", "theta": 4.0, "N": 250, "delta": 3.0},
    "chain": {"steps": 1000, "burn_in": 0, "thin": 1, "theta0": 1.0},
    "proposal": {},
    "io": {},
}


def _check_type(path, value, typ):
    if typ is object or value is None:
        return
    if typ is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        return
    if typ is int and isinstance(value, bool):
        raise ConfigError(f"{path}: expected int, got bool")
    if not isinstance(value, typ):
        raise ConfigError(f"{path}: expected {typ.__name__}, got {type(value).__name__}")


def validate_config(raw: dict) -> dict:
    """Check keys and types against the schema and fill defaults."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - set(SCHEMA)
    if unknown:
        raise ConfigError(f"unknown top-level keys {sorted(unknown)}")
    cfg = json.loads(json.dumps(DEFAULTS))
    for key, sub in SCHEMA.items():
        if key not in raw:
            continue
        if isinstance(sub, dict):
            block = raw[key]
            if not isinstance(block, dict):
                raise ConfigError(f"{key} must be an object")
            bad = set(block) - set(sub)
            if bad:
                raise ConfigError(f"unknown keys in {key}: {sorted(bad)}")
            for k, v in block.items():
                _check_type(f"{key}.{k}", v, sub[k])
            if key == "prior":
                cfg[key] = dict(block)
            else:
                cfg[key].update(block)
        else:
            _check_type(key, raw[key], sub)
            cfg[key] = raw[key]
    try:
        NerveClass(cfg["nerve"]["class"], cfg["nerve"]["dim"])
        if cfg["proposal"]:
            ProposalConfig.from_dict(cfg["proposal"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def load_config(path) -> dict:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return validate_config(raw)


def _matrix(value, default):
    if value is None:
        return default
    if isinstance(value, str):
        X, _ = io.read_matrix(value)
        return X
    return np.asarray(value, dtype=float)


# ---------------------------------------------------------------- commands


def _out_dir(args, cfg=None) -> Path:
    d = args.out_dir or (cfg or {}).get("io", {}).get("out_dir") or "."
    p = Path(d)
    p.mkdir(parents=True, exist_ok=True)
    return p


def cmd_nerve(args) -> int:
    P = io.read_points(args.points)
    cls = _nerve_class_for(args, P)
    K = nerve(P, cls, args.r, args.max_card)
    G = from_skeleton(K)
    maxs = maximal_simplices(K)
    payload = K.to_json()
    cl = cliques(G)
    if is_decomposable(G) and cl == maxs:
        jt = junction_tree(G)
        payload["junction_tree"] = jt.to_json()
        text = factorization_string(jt.cliques)
    else:
        text = factorization_string(maxs)
    payload["factorization"] = text
    payload["resolved"] = {"class": cls.kind, "dim": cls.d, "r": args.r, "max_card": args.max_card,
                           "points": str(args.points)}
    io.write_json(_out_dir(args) / "complex.json", payload)
    print(text)
    return EXIT_OK


def _nerve_class_for(args, P) -> NerveClass:
    if args.cls is None or args.r is None:
        raise ConfigError("--class and --r are required")
    if args.r <= 0:
        raise ConfigError("--r must be positive")
    d = args.dim if args.dim is not None else P.shape[1]
    if d != P.shape[1]:
        raise ConfigError(f"--dim {d} does not match the {P.shape[1]}-column points file")
    return NerveClass(args.cls, d)


def cmd_decompose(args) -> int:
    P = io.read_points(args.points)
    cls = _nerve_class_for(args, P)
    F = build_filtration(P, cls, 2, args.r)
    G = decomposable_from_filtration(F)
    out = _out_dir(args)
    payload = G.to_json()
    payload["resolved"] = {"class": cls.kind, "dim": cls.d, "r": args.r, "points": str(args.points)}
    io.write_json(out / "graph.json", payload)
    rows = []
    for row in clique_separator_trace(F):
        edge = "" if row.edge is None else f"({row.edge[0] + 1},{row.edge[1] + 1})"
        status = "" if row.accepted is None else ("accepted" if row.accepted else "rejected")
        rows.append([factorization_string(row.cliques),
                     factorization_string(row.separators) if row.separators else "-",
                     f"{row.radius:.6f}", f"{2 * row.radius:.6f}", edge, status])
    io.write_rows(out / "trace.csv", ["cliques", "separators", "r", "distance", "edge", "status"], rows)
    print(factorization_string(cliques(G)))
    return EXIT_OK


def _backend(cfg, data):
    m = cfg["model"]
    kind = m["kind"]
    if kind == "clayton-jt":
        return ClaytonJTBackend(data)
    if kind == "clayton-hypergraph":
        return ClaytonHypergraphBackend(data, NormalizerCache(m.get("normalizer_M", 200_000), seed=cfg["seed"]))
    if kind == "gaussian-hiw":
        n = data.shape[1]
        D = _matrix(m.get("D"), fixtures.hiw_scale(n))
        return GaussianHIWBackend(data, HIWHyper(float(m["delta"]), D))
    if kind == "flat":
        return FlatBackend(data.shape[1])
    raise ConfigError(f"unknown model kind {kind!r}")


def cmd_sample(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg["seed"] = args.seed
    if cfg["nerve"].get("r") is None:
        raise ConfigError("nerve.r is required")
    out = _out_dir(args, cfg)
    ch = cfg["chain"]
    window = Window("ball", cfg["nerve"]["dim"])
    try:
        prior = prior_from_dict(cfg["prior"], window)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad prior block: {exc}") from exc
    pcfg = ProposalConfig.from_dict(cfg["proposal"]) if cfg["proposal"] else ProposalConfig()
    cls = NerveClass(cfg["nerve"]["class"], cfg["nerve"]["dim"])
    rng = np.random.default_rng(cfg["seed"])
    if args.mode == "prior":
        n = ch.get("n_vertices")
        if not n:
            raise ConfigError("prior mode needs chain.n_vertices")
        smap = StructureMap(cls, cfg["nerve"]["r"], cfg["nerve"]["view"])
        trace = run_prior_chain(prior, pcfg, ch["steps"], ch["burn_in"], ch["thin"], smap, n, rng)
    else:
        data_path = cfg["io"].get("data")
        if not data_path:
            raise ConfigError("posterior mode needs io.data")
        data, _ = io.read_matrix(data_path)
        backend = _backend(cfg, data)
        view = "simplices" if backend.structure == "simplices" else cfg["nerve"]["view"]
        smap = StructureMap(cls, cfg["nerve"]["r"], view)
        try:
            trace = run_posterior_chain(backend, prior, pcfg, ch["steps"], ch["burn_in"], ch["thin"], smap, rng,
                                        theta0=ch["theta0"])
        except DensityUnavailable as exc:
            raise ConfigError(str(exc)) from exc
    (out / "trace.jsonl").write_text(trace.to_jsonl())
    tally = topology_tally(trace) if trace.records else []
    io.write_tally(out / "tally.csv", tally)
    summary = {"config": cfg, "mode": args.mode, "diagnostics": trace.diagnostics(),
               "tally": io.tally_rows(tally[:10])}
    io.write_json(out / "run.json", summary)
    print(f"acceptance_rate {trace.acceptance_rate:.6f}")
    for s, f in io.tally_rows(tally[:5]):
        print(f"{f:.4f} {s}")
    return EXIT_OK


def cmd_gen_data(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg["seed"] = args.seed
    m = cfg["model"]
    rng = np.random.default_rng(cfg["seed"])
    N = int(m["N"])
    if N < 0:
        raise ConfigError("model.N must be nonnegative")
    if m["kind"] == "gaussian-hiw":
        K = _matrix(m.get("precision"), fixtures.GAUSSIAN_PRECISION)
        X = sample_gaussian_model(K, N, rng)
    else:
        if "truth" not in m:
            raise ConfigError("model.truth is required")
        try:
            blocks = parse_factorization(m["truth"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        n = max(max(b) for b in blocks) + 1
        if m["kind"] == "clayton-jt":
            G = graph_from_blocks(n, blocks)
            if not is_decomposable(G):
                raise ConfigError("model.truth must be decomposable for clayton-jt")
            X = sample_junction_tree_model(junction_tree(G), float(m["theta"]), N, rng)
        elif m["kind"] == "clayton-hypergraph":
            X = experiments.sample_hypergraph_model(blocks, float(m["theta"]), N, rng, m.get("truncation", 1e-3)) \
                if N else np.empty((0, n))
        else:
            raise ConfigError(f"gen-data does not support model kind {m['kind']!r}")
    out = _out_dir(args, cfg)
    io.write_matrix(out / "data.csv", X, [f"X{i + 1}" for i in range(X.shape[1])])
    io.write_json(out / "data_config.json", cfg)
    print(f"wrote {X.shape[0]}x{X.shape[1]} to {out / 'data.csv'}")
    return EXIT_OK


def _parse_overrides(items):
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} must look like key=value")
        k, v = item.split("=", 1)
        try:
            out[k] = json.loads(v)
        except json.JSONDecodeError:
            out[k] = v
    return out


def cmd_experiment(args) -> int:
    if args.id not in experiments.EXPERIMENT_IDS:
        raise ConfigError(f"unknown experiment {args.id!r}; known: {', '.join(experiments.EXPERIMENT_IDS)}")
    overrides = _parse_overrides(args.set)
    try:
        res = experiments.run_experiment(args.id, _out_dir(args), seed=args.seed, reps=args.reps, **overrides)
    except KeyError as exc:
        raise ConfigError(str(exc)) from exc
    if "tally" in res:
        print(f"truth {res['truth']} rank {res['truth_rank']}")
        for s, f in res["tally"][:5]:
            print(f"{f:.4f} {s}")
    elif "rows" in res:
        for r in res["rows"]:
            print(r if not isinstance(r, dict) else " ".join(str(v) for v in r.values()))
    else:
        print(json.dumps(res))
    return EXIT_OK


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nervegraph", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def geom(sp):
        sp.add_argument("--points", required=True)
        sp.add_argument("--class", dest="cls", choices=["cech", "alpha", "delaunay"], required=True)
        sp.add_argument("--r", type=float, required=True)
        sp.add_argument("--dim", type=int, choices=[2, 3])
        sp.add_argument("--out-dir")

    sp = sub.add_parser("nerve", help="build a nerve and print its factorization")
    geom(sp)
    sp.add_argument("--max-card", type=int, default=None)
    sp.set_defaults(func=cmd_nerve)

    sp = sub.add_parser("decompose", help="decomposable graph from the filtration, with trace")
    geom(sp)
    sp.set_defaults(func=cmd_decompose)

    sp = sub.add_parser("sample", help="run a prior or posterior chain from a config file")
    sp.add_argument("--config", required=True)
    sp.add_argument("--mode", choices=["prior", "posterior"], required=True)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out-dir")
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("experiment", help="run a registered experiment")
    sp.add_argument("id")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--reps", type=int)
    sp.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a spec field")
    sp.add_argument("--out-dir")
    sp.set_defaults(func=cmd_experiment)

    sp = sub.add_parser("gen-data", help="simulate data from a config's model block")
    sp.add_argument("--config", required=True)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out-dir")
    sp.set_defaults(func=cmd_gen_data)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except DensityUnavailable as exc:
        # a NotImplementedError, so it must be caught before RuntimeError
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GeometryError, np.linalg.LinAlgError, PackingError, FloatingPointError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, io.FormatError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
