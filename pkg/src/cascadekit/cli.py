"""Command-line entry point.

Exit status: 0 success, 1 input or validation error, 2 computation error.
Settings resolve as command-line flag > ``--config`` JSON file > default;
``CASCADEKIT_OUT_DIR`` supplies the default output directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import traceback
from pathlib import Path

from . import __version__
from .estimators import ProjectAnalyzer, Undefined, cross_project_table
from .exceptions import ComputationError, InputError
from .ingest import parse_project
from .null import STATISTICS, null_ensemble
from .graph import compute_diameter
from .perturbation import PERTURBED_DEFS, apply_profile, compute_perturbations
from .report import (ensemble_table, projects_table, provenance_for, render_manifest_report,
                     render_report, write_table, write_tables)
from .synth import (MODELS, GeneratorConfig, generate_dag, generate_project,
                    matched_inheritance_config, seed_perturbations, write_generated)

DEFAULTS = {
    "seed": 0,
    "samples": 50,
    "dmax": 10,
    "perturbed_def": "nonzero",
    "format": "csv",
    "out_dir": None,
}
OUT_DIR_ENV = "CASCADEKIT_OUT_DIR"


def resolve_config(args) -> dict:
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        path = Path(args.config)
        try:
            loaded = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"{path}: cannot read config ({exc})") from None
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise InputError(f"{path}: unknown config keys {sorted(unknown)}")
        cfg.update(loaded)
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if cfg["out_dir"] is None:
        cfg["out_dir"] = os.environ.get(OUT_DIR_ENV, "cascadekit-out")
    if cfg["perturbed_def"] not in PERTURBED_DEFS:
        raise InputError(f"perturbed_def must be one of {PERTURBED_DEFS}")
    if cfg["samples"] < 0 or cfg["samples"] == 1:
        raise InputError("samples must be 0 (disable null models) or >= 2")
    if cfg["dmax"] < 1:
        raise InputError("dmax must be >= 1")
    return cfg


def _load(args):
    if not args.activities or not args.dependencies:
        raise InputError("--activities and --dependencies are required")
    for p in (args.activities, args.dependencies):
        if not Path(p).exists():
            raise InputError(f"{p}: file not found")
    return parse_project(args.activities, args.dependencies, strict=not args.lenient,
                         allow_cycles=args.allow_cycles)


def _analyzer(cfg, samples=None):
    return ProjectAnalyzer(perturbed_def=cfg["perturbed_def"], d_max=cfg["dmax"],
                           samples=cfg["samples"] if samples is None else samples,
                           seed=cfg["seed"])


def _print_pairs(pairs):
    for k, v in pairs:
        print(f"{k}: {v}")


def cmd_validate(cfg, args):
    net = _load(args)
    log = net.ingest_log
    _print_pairs([
        ("nodes", net.node_count), ("links", net.edge_count),
        ("average_degree", f"{2 * net.edge_count / net.node_count:.4f}"),
        ("diameter", compute_diameter(net)),
        ("completed", int(net.completed_mask().sum())),
        ("rows_in", log.rows_in), ("accepted", log.accepted),
        ("warned", log.warned), ("errored", log.errored),
    ])
    for w in log.warnings:
        print(f"warning: {w}")
    for e in log.errors:
        print(f"skipped: {e}")
    return 0


def cmd_analyze(cfg, args):
    net = _load(args)
    an = _analyzer(cfg, samples=0).fit(net)
    _print_pairs(an.summary_.as_dict().items())
    written = write_tables(an, cfg["out_dir"], ["nodes", "perturbations"], cfg["format"])
    for p in written:
        print(f"wrote {p}")
    return 0


def cmd_cascades(cfg, args):
    net = _load(args)
    an = _analyzer(cfg, samples=0).fit(net)
    fit = an.cascade_fit_
    print(f"cascades: {len(an.cascades_)}")
    if isinstance(fit, Undefined):
        print(f"exponent: {fit}")
    else:
        print(f"exponent: {fit.exponent:.6g} (r_squared {fit.r_squared:.4g}, "
              f"{fit.points_used} points)")
    for p in write_tables(an, cfg["out_dir"], ["cascades", "ccdf", "fit"], cfg["format"]):
        print(f"wrote {p}")
    return 0


def cmd_correlate(cfg, args):
    net = _load(args)
    an = _analyzer(cfg).fit(net)
    for r in an.c_of_d_.rows:
        obs = "undefined:" + r.reason if r.c_value is None else f"{r.c_value:.4f}"
        print(f"C({r.d}) = {obs}  pairs={r.pair_count}")
    for p in write_tables(an, cfg["out_dir"], ["c_of_d", "fragility"], cfg["format"]):
        print(f"wrote {p}")
    return 0


def cmd_nullmodel(cfg, args):
    net = _load(args)
    if cfg["samples"] < 2:
        raise InputError("nullmodel needs --samples >= 2")
    profile = compute_perturbations(net, cfg["perturbed_def"])
    ens = null_ensemble(net, profile, args.statistic, cfg["samples"], cfg["seed"],
                        d_max=cfg["dmax"])
    for label, m, s in zip(ens.labels, ens.mean, ens.sd):
        print(f"{label}: mean={m:.6g} sd={s:.6g}")
    out = Path(cfg["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    header, rows = ensemble_table(ens)
    print(f"wrote {write_table(out / f'ensemble_{args.statistic}', 'ensemble', header, rows, cfg['format'])}")
    return 0


def cmd_generate(cfg, args):
    gen = GeneratorConfig(
        node_count=args.nodes,
        target_degree_exponent=args.degree_exponent,
        mean_parents=args.mean_parents,
        perturbation_model=args.model,
        base_rate=args.base_rate,
        inheritance_probability=args.q,
        late_fraction=args.late_fraction,
        seed=cfg["seed"],
    )
    extra = {}
    if args.match_rate is not None:
        if args.model != "inheritance":
            raise InputError("--match-rate applies to the inheritance model only")
        dag = generate_dag(gen)
        gen = matched_inheritance_config(dag, gen, args.match_rate)
        extra["matched_target_rate"] = args.match_rate
        profile = seed_perturbations(dag, gen)
        net = apply_profile(dag, profile)
    else:
        net, profile = generate_project(gen)
    write_generated(cfg["out_dir"], net, gen, extra)
    print(f"generated {net.node_count} activities, {net.edge_count} dependencies, "
          f"{profile.perturbed_count} perturbed -> {cfg['out_dir']}")
    return 0


def _report_one(cfg, act, dep, out_dir, allow_cycles, strict):
    net = parse_project(act, dep, strict=strict, allow_cycles=allow_cycles)
    an = _analyzer(cfg).fit(net)
    prov = provenance_for(act, dep, {k: v for k, v in cfg.items() if k != "out_dir"})
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.txt").write_text(render_report(an, prov), encoding="utf-8")
    write_tables(an, out, fmt_kind=cfg["format"])
    for stat, ens in an.nulls_.items():
        if not isinstance(ens, Undefined):
            header, rows = ensemble_table(ens)
            write_table(out / f"ensemble_{stat}", "ensemble", header, rows, cfg["format"])
    return an


def read_manifest(path) -> list[tuple[str, Path]]:
    path = Path(path)
    if not path.exists():
        raise InputError(f"{path}: file not found")
    entries = []
    for n, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        d = (path.parent / line).resolve()
        if not d.is_dir():
            raise InputError(f"{path}:{n}: project directory {line!r} not found")
        entries.append((Path(line).name, d))
    if not entries:
        raise InputError(f"{path}: manifest lists no projects")
    return entries


def cmd_report(cfg, args):
    out = Path(cfg["out_dir"])
    strict = not args.lenient
    if args.manifest:
        analyzers = {}
        for name, d in read_manifest(args.manifest):
            analyzers[name] = _report_one(cfg, d / "activities.csv", d / "dependencies.csv",
                                          out / name, args.allow_cycles, strict)
            print(f"{name}: report written to {out / name}")
        cross = cross_project_table(analyzers)
        prov = {"tool_version": __version__, "manifest": Path(args.manifest).name}
        prov.update({f"config.{k}": v for k, v in sorted(cfg.items()) if k != "out_dir"})
        (out / "manifest_report.txt").write_text(render_manifest_report(cross, prov),
                                                 encoding="utf-8")
        header, rows = projects_table(cross)
        write_table(out / "projects", "projects", header, rows, cfg["format"])
        print(f"cross-project report written to {out / 'manifest_report.txt'}")
        return 0
    if not args.activities or not args.dependencies:
        raise InputError("report needs --activities and --dependencies, or --manifest")
    for p in (args.activities, args.dependencies):
        if not Path(p).exists():
            raise InputError(f"{p}: file not found")
    _report_one(cfg, args.activities, args.dependencies, out, args.allow_cycles, strict)
    print(f"report written to {out / 'report.txt'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--activities", help="activities file")
    common.add_argument("--dependencies", help="dependencies file")
    common.add_argument("--manifest", help="file listing project directories, one per line")
    common.add_argument("--config", help="JSON file with default settings")
    common.add_argument("--seed", type=int)
    common.add_argument("--samples", type=int, help="shuffle samples (default 50, 0 disables)")
    common.add_argument("--dmax", type=int, help="largest distance for C(d) (default 10)")
    common.add_argument("--perturbed-def", dest="perturbed_def", choices=PERTURBED_DEFS)
    common.add_argument("--out-dir", dest="out_dir")
    common.add_argument("--format", choices=("csv", "json-lines"))
    common.add_argument("--allow-cycles", action="store_true",
                        help="drop a minimal set of feedback edges instead of failing")
    common.add_argument("--lenient", action="store_true",
                        help="skip malformed rows instead of failing")

    parser = argparse.ArgumentParser(prog="cascadekit",
                                     description="Perturbation cascade analytics for activity networks")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, help_ in (
        ("validate", cmd_validate, "parse and check a project"),
        ("analyze", cmd_analyze, "summary plus node and perturbation tables"),
        ("cascades", cmd_cascades, "cascade list, size CCDF and exponent"),
        ("correlate", cmd_correlate, "C(d) and fragility correlations with null bands"),
        ("nullmodel", cmd_nullmodel, "shuffle ensemble for one statistic"),
        ("generate", cmd_generate, "write a synthetic project"),
        ("report", cmd_report, "full report and tables"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=fn)
        if name == "nullmodel":
            p.add_argument("--statistic", choices=STATISTICS, default="cascade_exponent")
        if name == "generate":
            p.add_argument("--nodes", type=int, default=5000)
            p.add_argument("--model", choices=MODELS, default="uniform_random")
            p.add_argument("--base-rate", dest="base_rate", type=float, default=0.2)
            p.add_argument("--q", type=float, default=0.8, help="inheritance probability")
            p.add_argument("--match-rate", dest="match_rate", type=float,
                           help="solve the inheritance base rate for this expected perturbed fraction")
            p.add_argument("--degree-exponent", dest="degree_exponent", type=float, default=2.0)
            p.add_argument("--mean-parents", dest="mean_parents", type=float, default=1.45)
            p.add_argument("--late-fraction", dest="late_fraction", type=float, default=0.8)
    return parser


def _operation(exc):
    frames = traceback.extract_tb(exc.__traceback__)
    for fr in reversed(frames):
        if "cascadekit" in fr.filename and not fr.name.startswith("_") and fr.name != "<lambda>":
            return fr.name
    return "unknown"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return args.func(cfg, args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ComputationError as exc:
        print(f"error in {_operation(exc)}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
