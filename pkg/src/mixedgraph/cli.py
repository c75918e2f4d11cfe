"""Command-line entry point: ``mixedgraph {estimate,graph,simulate,bench}``.

Every command writes its artifacts into the ``--out`` directory together with
one ``manifest.json``. Artifacts other than the manifest are byte-for-byte
reproducible; the manifest adds timestamps.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import datetime as _dt
import hashlib
import json
import os
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .data import ingest_csv, write_csv, write_kinds
from .errors import MixedGraphError, ValidationError
from .glasso import lambda_grid, select_model
from .latent import FAMILIES as LATENT_FAMILIES
from .latent import estimate_latent_correlation, repair
from .simulation import (
    FAMILIES,
    RNG_ALGORITHM,
    TRANSFORMS,
    BenchConfig,
    GraphSpec,
    MixSpec,
    _replicate_spec,
    generate_graph,
    make_rng,
    run_benchmark,
    sample_mixed,
)

# key -> (parser, required)
CONFIG_SCHEMA = {
    "graph": {"d": (int, True), "s": (float, False), "target_edges": (int, False), "c": (float, False)},
    "mix": {"preset": (str, True), "transform": (str, True)},
    "run": {
        "n": (int, True),
        "replicates": (int, True),
        "seed": (int, True),
        "families": (lambda v: tuple(x.strip() for x in v.split(",") if x.strip()), False),
        "theta": (float, False),
        "grid": (int, False),
    },
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage problems are validation errors (exit 1); 2 is reserved for numerical failure
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _theta(value):
    try:
        t = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid theta {value!r}") from None
    if not 0.0 <= t <= 1.0:
        raise argparse.ArgumentTypeError(f"theta must lie in [0, 1], got {value}")
    return t


def _positive_int(value):
    try:
        v = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {value!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return v


def build_parser():
    p = _Parser(prog="mixedgraph", description="Sparse graphical models for mixed continuous/discrete data.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--out", required=True, help="output directory")
        sp.add_argument("--threads", type=_positive_int, default=None,
                        help="worker cap (default: logical cores)")

    est = sub.add_parser("estimate", help="latent correlation matrix of a CSV dataset")
    est.add_argument("--data", required=True)
    est.add_argument("--kinds", help="variable-kind sidecar file")
    est.add_argument("--family", choices=LATENT_FAMILIES, default="poly")
    common(est)

    gr = sub.add_parser("graph", help="glasso path with eBIC selection")
    gr.add_argument("--data", required=True)
    gr.add_argument("--kinds")
    gr.add_argument("--family", choices=LATENT_FAMILIES, default="poly")
    gr.add_argument("--theta", type=_theta, default=0.5)
    gr.add_argument("--grid", type=_positive_int, default=30)
    common(gr)

    for name, text in (("simulate", "draw one synthetic dataset"), ("bench", "run benchmark replicates")):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--config", required=True, help="INI config path or bundled name (e.g. desk_d50)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--theta", type=_theta)
        if name == "bench":
            sp.add_argument("--replicates", type=_positive_int)
        common(sp)
    return p


def _sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def config_hash(config: dict) -> str:
    """SHA-256 of the canonical (key-sorted) JSON encoding."""
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _now():
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def write_manifest(out: Path, command, config, seeds, started, outputs):
    manifest = {
        "command": command,
        "config": config,
        "config_hash": config_hash(config),
        "seeds": seeds,
        "rng": RNG_ALGORITHM,
        "version": __version__,
        "started": started,
        "finished": _now(),
        "outputs": {name: _sha256_file(out / name) for name in sorted(outputs)},
    }
    _write_json(out / "manifest.json", manifest)


def _write_json(path, doc):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True, allow_nan=False)
        fh.write("\n")


def _write_matrix(path, m, names=None):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if names is not None:
            w.writerow(list(names))
        for row in np.asarray(m, dtype=float):
            w.writerow([repr(float(v)) for v in row])


def resolve_config_path(name):
    path = Path(name)
    if path.exists():
        return path
    stem = name[:-4] if name.endswith(".cfg") else name
    bundled = resources.files("mixedgraph").joinpath("configs", f"{stem}.cfg")
    if bundled.is_file():
        return Path(str(bundled))
    raise ValidationError(f"config {name!r} not found (neither a file nor a bundled config)")


def load_config(path) -> BenchConfig:
    """Parse and validate an INI benchmark config; all problems are reported together."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    problems, values = [], {}
    for section, keys in CONFIG_SCHEMA.items():
        present = parser[section] if parser.has_section(section) else {}
        for key, (conv, required) in keys.items():
            if key not in present:
                if required:
                    problems.append(f"missing key {section}.{key}")
                continue
            try:
                values[f"{section}.{key}"] = conv(present[key])
            except ValueError:
                problems.append(f"invalid value for {section}.{key}: {present[key]!r}")
        for key in present:
            if key not in keys:
                problems.append(f"unknown key {section}.{key}")
    for section in parser.sections():
        if section not in CONFIG_SCHEMA:
            problems.append(f"unknown section [{section}]")
    if "graph.target_edges" not in values and "graph.c" not in values:
        problems.append("missing key graph.target_edges (or graph.c)")
    if values.get("mix.transform", "identity") not in TRANSFORMS:
        problems.append(f"invalid value for mix.transform: must be one of {TRANSFORMS}")
    bad_fam = [f for f in values.get("run.families", ()) if f not in FAMILIES]
    if bad_fam:
        problems.append(f"invalid value for run.families: {bad_fam}")
    theta = values.get("run.theta")
    if theta is not None and not 0.0 <= theta <= 1.0:
        problems.append("invalid value for run.theta: must lie in [0, 1]")
    if problems:
        raise ValidationError(f"config {path}: " + "; ".join(problems))
    try:
        mix = MixSpec.preset(values["mix.preset"], transform=values["mix.transform"])
        return BenchConfig(
            d=values["graph.d"],
            n=values["run.n"],
            replicates=values["run.replicates"],
            s=values.get("graph.s", 0.15),
            target_edges=values.get("graph.target_edges"),
            c=values.get("graph.c"),
            mix=mix,
            families=values.get("run.families", FAMILIES),
            theta=values.get("run.theta"),
            grid_size=values.get("run.grid", 30),
            seed=values["run.seed"],
        )
    except ValidationError as exc:
        raise ValidationError(f"config {path}: {exc}") from exc


def _estimate(args, out):
    ds = ingest_csv(args.data, args.kinds)
    lcm = repair(estimate_latent_correlation(ds, args.family, threads=args.threads))
    return ds, lcm


def _input_config(args, **extra):
    cfg = {"data_sha256": _sha256_file(args.data), "family": args.family}
    if args.kinds:
        cfg["kinds_sha256"] = _sha256_file(args.kinds)
    cfg.update(extra)
    return cfg


def cmd_estimate(args, out, started):
    _, lcm = _estimate(args, out)
    _write_json(out / "correlation.json", lcm.to_dict())
    lcm.write_csv(out / "correlation.csv")
    write_manifest(out, "estimate", _input_config(args), [], started, ["correlation.json", "correlation.csv"])


def cmd_graph(args, out, started):
    ds, lcm = _estimate(args, out)
    path = select_model(lcm.values, ds.n, args.theta, lambda_grid(lcm.values, args.grid))
    _write_json(out / "correlation.json", lcm.to_dict())
    doc = path.to_dict()
    doc["names"] = list(ds.names)
    _write_json(out / "path.json", doc)
    with open(out / "edges.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["j", "k", "name_j", "name_k", "omega_jk"])
        for j, k, v in path.best.edge_list():
            w.writerow([j, k, ds.names[j], ds.names[k], repr(v)])
    write_manifest(out, "graph", _input_config(args, theta=args.theta, grid=args.grid), [], started,
                   ["correlation.json", "path.json", "edges.csv"])


def _bench_config(args):
    cfg = load_config(resolve_config_path(args.config))
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.theta is not None:
        overrides["theta"] = args.theta
    if getattr(args, "replicates", None) is not None:
        overrides["replicates"] = args.replicates
    if overrides:
        cfg = replace(cfg, **overrides)
    return cfg


def cmd_simulate(args, out, started):
    cfg = _bench_config(args)
    spec = _replicate_spec(GraphSpec(cfg.d, cfg.s, cfg.c, cfg.target_edges, seed=cfg.seed), 0)
    gt = generate_graph(spec)
    sim = sample_mixed(gt, cfg.mix, cfg.n, make_rng(cfg.seed, 0, 1))
    write_csv(sim.dataset, out / "data.csv")
    write_kinds(sim.dataset, out / "kinds.csv")
    write_csv(sim.latent, out / "latent.csv")
    _write_matrix(out / "omega_star.csv", gt.omega_star)
    _write_matrix(out / "sigma_star.csv", gt.sigma_star)
    write_manifest(out, "simulate", cfg.to_dict(), [cfg.seed], started,
                   ["data.csv", "kinds.csv", "latent.csv", "omega_star.csv", "sigma_star.csv"])


def cmd_bench(args, out, started):
    cfg = _bench_config(args)
    workers = (os.cpu_count() or 1) if args.threads is None else args.threads
    report = run_benchmark(cfg, workers=workers)
    outputs = ["report.json", "summary.csv"]
    roc_dir = out / "roc"
    roc_dir.mkdir(exist_ok=True)
    for rec in report["replicates"]:
        for fam, res in rec.get("families", {}).items():
            if "roc" not in res:
                continue
            name = f"roc/rep{rec['replicate']:03d}_{fam}.csv"
            with open(out / name, "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["lambda", "tpr", "fpr"])
                for row in zip(res["roc"]["lambda"], res["roc"]["tpr"], res["roc"]["fpr"]):
                    w.writerow([repr(float(v)) for v in row])
            outputs.append(name)
    _write_json(out / "report.json", report)
    with open(out / "summary.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["family", "metric", "mean", "sd", "replicates"])
        for fam, agg in report["aggregates"].items():
            for metric in ("frobenius", "auc", "tpr", "fpr", "selected_edges"):
                m = agg[metric]
                w.writerow([fam, metric, "" if m["mean"] is None else repr(m["mean"]),
                            "" if m["sd"] is None else repr(m["sd"]), agg["replicates"]])
    write_manifest(out, "bench", cfg.to_dict(), [cfg.seed], started, outputs)
    for f in report["failures"]:
        print(f"warning: replicate {f['replicate']} {f.get('family', '')}: {f['error']}", file=sys.stderr)
    return report


COMMANDS = {"estimate": cmd_estimate, "graph": cmd_graph, "simulate": cmd_simulate, "bench": cmd_bench}


def main(argv=None):
    args = build_parser().parse_args(argv)
    started = _now()
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](args, out, started)
    except MixedGraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
