"""Structured text report and flat tables for one project or a manifest.

The report is ``key = value`` lines grouped under ``[section]`` headers and
opens with a schema line. Every table file opens with a schema line as well
(``# schema: ...`` for CSV, a ``{"schema": ...}`` object for JSON lines).
Statistics that could not be computed appear as ``undefined:<reason>``;
NaN never reaches an output.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .estimators import ProjectAnalyzer, Undefined
from .null import NullEnsemble

REPORT_SCHEMA = "# cascadekit-report schema=1"
TABLE_SCHEMA_VERSION = "v1"
RNG_NAME = "numpy PCG64 via SeedSequence((seed, sample_index))"


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def fmt(value) -> str:
    if isinstance(value, Undefined):
        return str(value)
    if value is None:
        return "undefined:not_computed"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "undefined:nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(value)


def _nullable(x):
    return Undefined("no_null_ensemble") if x is None else x


def _ensemble_items(prefix, ens, k=0):
    if ens is None:
        return [(f"{prefix}.null", Undefined("null_models_disabled"))]
    if isinstance(ens, Undefined):
        return [(f"{prefix}.null", ens)]
    lo, hi = ens.band(ens.labels[k])
    return [
        (f"{prefix}.null_mean", ens.mean[k]),
        (f"{prefix}.null_sd", ens.sd[k]),
        (f"{prefix}.null_band_low", lo),
        (f"{prefix}.null_band_high", hi),
        (f"{prefix}.null_samples", ens.sample_count),
        (f"{prefix}.null_failures", ens.failures),
    ]


def report_sections(an: ProjectAnalyzer, provenance: dict) -> list[tuple[str, list]]:
    sections = []
    sections.append(("provenance", sorted(provenance.items())))

    log = getattr(an.network_, "ingest_log", None)
    ingest = [("duplicate_edges", an.network_.duplicate_edges),
              ("removed_feedback_edges", len(an.network_.removed_edges))]
    if log is not None:
        ingest = [("rows_in", log.rows_in), ("accepted", log.accepted),
                  ("warned", log.warned), ("errored", log.errored)] + ingest
    sections.append(("ingest", ingest))

    sections.append(("summary", list(an.summary_.as_dict().items())))

    prof = an.profile_
    pert = [("definition", prof.perturbed_def), ("completed_count", prof.completed_count),
            ("perturbed_count", prof.perturbed_count), ("delay_rate", prof.delay_rate)]
    pert += [(f"class.{c.value}", n) for c, n in prof.class_counts().items()]
    sections.append(("perturbation", pert))

    inh = an.inheritance_
    if isinstance(inh, Undefined):
        sections.append(("inheritance", [("status", inh)]))
    else:
        g, c = inh.group, inh.correlation
        sections.append(("inheritance", [
            ("rank_sum.u", g.u), ("rank_sum.p_value", g.p_value),
            ("rank_sum.median_p_pert_perturbed", g.median_perturbed),
            ("rank_sum.median_p_pert_unperturbed", g.median_unperturbed),
            ("rank_sum.n_perturbed", g.n_perturbed),
            ("rank_sum.n_unperturbed", g.n_unperturbed),
            ("spearman_p_pert_abs_delta.rho", c.rho),
            ("spearman_p_pert_abs_delta.p_value", c.p_value),
            ("spearman_p_pert_abs_delta.n", c.n),
        ]))

    casc = [("count", len(an.cascades_)),
            ("largest", an.cascades_[0].size if an.cascades_ else 0)]
    casc += _fit_items("fit", an.cascade_fit_)
    casc += _ensemble_items("exponent", an.nulls_.get("cascade_exponent") if an.samples else None)
    sections.append(("cascades", casc))

    sections.append(("degree_distribution", _fit_items("fit", an.degree_fit_)))

    cod = []
    for r in an.c_of_d_.rows:
        obs = Undefined(r.reason) if r.c_value is None else r.c_value
        cod += [(f"d{r.d}.observed", obs), (f"d{r.d}.pair_count", r.pair_count)]
        if an.samples:
            cod += [(f"d{r.d}.null_mean", _nullable(r.null_mean)),
                    (f"d{r.d}.null_sd", _nullable(r.null_sd))]
    sections.append(("distance_correlation", cod))

    frag = an.fragility_
    if isinstance(frag, Undefined):
        sections.append(("fragility", [("status", frag)]))
    else:
        items = []
        ens = an.nulls_.get("fragility") if an.samples else None
        for k, (name, res) in enumerate((("reach", frag.reach), ("degree", frag.degree))):
            items += [(f"{name}.rho", res.rho), (f"{name}.p_value", res.p_value),
                      (f"{name}.n", res.n)]
            items += _ensemble_items(name, ens, k)
        sections.append(("fragility", items))

    warns = [("count", len(an.warnings_))]
    warns += [(f"w{i + 1}", w) for i, w in enumerate(an.warnings_)]
    sections.append(("warnings", warns))
    return sections


def _fit_items(prefix, fit):
    if isinstance(fit, Undefined):
        return [(prefix, fit)]
    return [(f"{prefix}.exponent", fit.exponent), (f"{prefix}.intercept", fit.intercept),
            (f"{prefix}.r_squared", fit.r_squared), (f"{prefix}.points_used", fit.points_used)]


def render_sections(sections) -> str:
    out = [REPORT_SCHEMA]
    for name, items in sections:
        out.append(f"[{name}]")
        out.extend(f"{k} = {fmt(v)}" for k, v in items)
    return "\n".join(out) + "\n"


def render_report(an: ProjectAnalyzer, provenance: dict) -> str:
    return render_sections(report_sections(an, provenance))


def provenance_for(activities, dependencies, config: dict) -> dict:
    prov = {
        "tool_version": __version__,
        "rng": RNG_NAME,
        "input.activities.name": Path(activities).name,
        "input.activities.sha256": file_digest(activities),
        "input.dependencies.name": Path(dependencies).name,
        "input.dependencies.sha256": file_digest(dependencies),
    }
    prov.update({f"config.{k}": v for k, v in sorted(config.items())})
    return prov


# -- tables -------------------------------------------------------------------

def node_table(an):
    header = ["id", "in_degree", "out_degree", "total_degree", "reach"]
    return header, [list(r) for r in an.metrics_.rows(an.network_.ids)]


def perturbation_table(an):
    prof, stats = an.profile_, an.parent_stats_
    rows = []
    for k, (node_id, cls) in enumerate(zip(prof.ids, prof.classes())):
        done = bool(prof.completed[k])
        p = stats.p_pert[k]
        rows.append([node_id,
                     prof.delta[k] if done else "",
                     prof.abs_delta[k] if done else "",
                     cls.value if cls is not None else "",
                     "" if np.isnan(p) else p])
    return ["id", "delta", "abs_delta", "class", "p_pert"], rows


def cascade_table(an):
    rows = [[i + 1, c.size, " ".join(c.sorted_members())] for i, c in enumerate(an.cascades_)]
    return ["cascade_id", "size", "members"], rows


def ccdf_table(an):
    pts = an.ccdf_
    rows = [] if isinstance(pts, Undefined) else [[x, p] for x, p in pts]
    return ["value", "probability"], rows


def fit_table(an):
    rows = []
    for target, fit in (("cascade_size", an.cascade_fit_), ("degree", an.degree_fit_)):
        if isinstance(fit, Undefined):
            rows.append([target, fit, fit, fit, fit])
        else:
            rows.append([target, fit.exponent, fit.intercept, fit.r_squared, fit.points_used])
    return ["target", "exponent", "intercept", "r_squared", "points_used"], rows


def c_of_d_table(an):
    rows = []
    for r in an.c_of_d_.rows:
        rows.append([r.d, Undefined(r.reason) if r.c_value is None else r.c_value, r.pair_count,
                     _nullable(r.null_mean), _nullable(r.null_sd)])
    return ["d", "observed", "pair_count", "null_mean", "null_sd"], rows


def fragility_table(an):
    header = ["metric", "rho", "p_value", "n", "null_mean", "null_sd"]
    frag = an.fragility_
    ens = an.nulls_.get("fragility")
    rows = []
    for k, name in enumerate(("reach", "degree")):
        if isinstance(frag, Undefined):
            rows.append([name, frag, frag, frag, frag, frag])
            continue
        res = getattr(frag, name)
        if isinstance(ens, NullEnsemble):
            nm, ns = ens.mean[k], ens.sd[k]
        else:
            nm = ns = ens if isinstance(ens, Undefined) else Undefined("null_models_disabled")
        rows.append([name, res.rho, res.p_value, res.n, nm, ns])
    return header, rows


def ensemble_table(ens: NullEnsemble):
    rows = []
    for i in range(ens.sample_count):
        for k, label in enumerate(ens.labels):
            v = ens.values[i, k]
            rows.append([i, label, Undefined("sample_failed") if np.isnan(v) else v])
    for k, label in enumerate(ens.labels):
        rows.append(["mean", label, ens.mean[k]])
        rows.append(["sd", label, ens.sd[k]])
    return ["sample", "statistic", "value"], rows


def _cell(v):
    if isinstance(v, str):
        return v or None
    return fmt(v)


def _json_cell(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)) and math.isfinite(v):
        return float(v)
    return _cell(v)


def write_table(path: Path, name: str, header, rows, fmt_kind: str = "csv") -> Path:
    path = Path(path)
    if fmt_kind == "csv":
        buf = io.StringIO()
        buf.write(f"# schema: cascadekit/{name} {TABLE_SCHEMA_VERSION}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows([[_cell(v) or "" for v in row] for row in rows])
        target = path.with_suffix(".csv")
        target.write_text(buf.getvalue(), encoding="utf-8")
    elif fmt_kind == "json-lines":
        lines = [json.dumps({"schema": f"cascadekit/{name} {TABLE_SCHEMA_VERSION}"})]
        for row in rows:
            lines.append(json.dumps({h: _json_cell(v) for h, v in zip(header, row)}))
        target = path.with_suffix(".jsonl")
        target.write_text("\n".join(lines) + "\n", encoding="utf-8")
    else:
        raise ValueError(f"unknown table format {fmt_kind!r}")
    return target


TABLES = {
    "nodes": node_table,
    "perturbations": perturbation_table,
    "cascades": cascade_table,
    "ccdf": ccdf_table,
    "fit": fit_table,
    "c_of_d": c_of_d_table,
    "fragility": fragility_table,
}


def write_tables(an: ProjectAnalyzer, out_dir, names=None, fmt_kind="csv") -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name in names or TABLES:
        header, rows = TABLES[name](an)
        written.append(write_table(out / name, name, header, rows, fmt_kind))
    return written


def render_manifest_report(cross: dict, provenance: dict) -> str:
    sections = [("provenance", sorted(provenance.items()))]
    for row in cross["rows"]:
        name = row["project"]
        sections.append((f"project:{name}", [(k, v) for k, v in row.items() if k != "project"]))
    tests = []
    for key, res in cross["tests"].items():
        if isinstance(res, Undefined):
            tests.append((key, res))
        elif hasattr(res, "rho"):
            tests += [(f"{key}.rho", res.rho), (f"{key}.p_value", res.p_value), (f"{key}.n", res.n)]
        else:
            for cname, c in res.coefficients.items():
                tests += [(f"{key}.{cname}.estimate", c.estimate),
                          (f"{key}.{cname}.p_value", c.p_value)]
            tests += [(f"{key}.r_squared", res.r_squared), (f"{key}.n", res.n)]
    sections.append(("cross_project", tests))
    return render_sections(sections)


def projects_table(cross: dict):
    header = ["project", "node_count", "perturbed_count", "delay_rate", "cascade_exponent",
              "rho_reach", "rho_degree"]
    return header, [[r[h] for h in header] for r in cross["rows"]]
