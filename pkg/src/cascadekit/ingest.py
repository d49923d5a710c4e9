"""Reading and writing project files, plus the per-project summary table.

Two delimited text files describe a project::

    activities:   id, name, planned_duration | planned_start+planned_end,
                  actual_duration | actual_start+actual_end
    dependencies: predecessor_id, successor_id, link_type

The delimiter (comma, tab or semicolon) is detected from the header line.
Leading lines starting with ``#`` are treated as comments, which lets files
written by :func:`write_project` carry a schema line.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import asdict, dataclass
from datetime import date
from pathlib import Path
from typing import TextIO

import numpy as np

from .exceptions import DanglingEdgeEndpoint, DuplicateActivityId, InputError, MalformedRow
from .network import Activity, ActivityNetwork, IngestLog

ACTIVITIES_SCHEMA = "# cascadekit activities v1"
DEPENDENCIES_SCHEMA = "# cascadekit dependencies v1"
DELIMITERS = ",\t;"


@dataclass(frozen=True)
class NetworkSummary:
    node_count: int
    link_count: int
    average_degree: float
    max_degree: int
    average_reach: float
    max_reach: int
    delay_rate: float
    diameter: int

    def as_dict(self):
        return asdict(self)


def _open_text(source) -> tuple[str, str]:
    if isinstance(source, (str, os.PathLike)):
        path = Path(source)
        return path.read_text(encoding="utf-8-sig"), str(path)
    text = source.read()
    if isinstance(text, bytes):
        text = text.decode("utf-8-sig")
    return text, getattr(source, "name", None) or "<stream>"


def _strip_comments(text):
    lines = text.splitlines(keepends=True)
    skipped = 0
    while skipped < len(lines) and lines[skipped].lstrip().startswith("#"):
        skipped += 1
    return "".join(lines[skipped:]), skipped


def sniff_delimiter(header: str) -> str:
    counts = {d: header.count(d) for d in DELIMITERS}
    best = max(DELIMITERS, key=lambda d: counts[d])
    return best if counts[best] else ","


def _read_table(source):
    text, name = _open_text(source)
    body, offset = _strip_comments(text)
    first = body.split("\n", 1)[0]
    if not first.strip():
        raise MalformedRow("missing header row", line=offset + 1, source=name)
    reader = csv.reader(io.StringIO(body), delimiter=sniff_delimiter(first))
    header = [h.strip().lower() for h in next(reader)]
    rows = []
    for raw in reader:
        line = reader.line_num + offset
        if not any(cell.strip() for cell in raw):
            continue
        rows.append((line, raw))
    return name, header, rows, offset + 1


def _cell(row, col, header):
    try:
        k = header.index(col)
    except ValueError:
        return ""
    return row[k].strip() if k < len(row) else ""


def _number(text, label):
    try:
        value = float(text)
    except ValueError:
        raise MalformedRow(f"{label}: not a number: {text!r}") from None
    return value


def _date_span(start, end, label):
    try:
        d0, d1 = date.fromisoformat(start), date.fromisoformat(end)
    except ValueError as exc:
        raise MalformedRow(f"{label}: bad ISO date ({exc})") from None
    days = (d1 - d0).days
    if days < 0:
        raise MalformedRow(f"{label}: end date precedes start date")
    return float(days)


def _duration(row, header, prefix, required):
    dur = _cell(row, f"{prefix}_duration", header)
    if dur:
        return _number(dur, f"{prefix}_duration")
    start = _cell(row, f"{prefix}_start", header)
    end = _cell(row, f"{prefix}_end", header)
    if start and end:
        return _date_span(start, end, prefix)
    if required:
        raise MalformedRow(f"missing {prefix} duration")
    return None


def _fail(log, strict, exc, line, name):
    exc.line, exc.source = line, name
    exc.args = (f"{name}:{line}: {exc.reason}",)
    if strict:
        raise exc
    log.errored += 1
    log.errors.append(str(exc))


def parse_activities(source, log: IngestLog | None = None, *, strict=True) -> list[Activity]:
    log = log if log is not None else IngestLog()
    name, header, rows, header_line = _read_table(source)
    if "id" not in header:
        raise MalformedRow("header lacks an 'id' column", line=header_line, source=name)
    if "planned_duration" not in header and not {"planned_start", "planned_end"} <= set(header):
        raise MalformedRow("header needs planned_duration or planned_start+planned_end",
                           line=header_line, source=name)
    activities = []
    seen = set()
    for line, row in rows:
        log.rows_in += 1
        try:
            aid = _cell(row, "id", header)
            if not aid:
                raise MalformedRow("empty activity id")
            if aid in seen:
                raise DuplicateActivityId(f"duplicate activity id {aid!r}")
            act = Activity(
                id=aid,
                planned_duration=_duration(row, header, "planned", required=True),
                actual_duration=_duration(row, header, "actual", required=False),
                name=_cell(row, "name", header) or None,
            )
        except MalformedRow as exc:
            _fail(log, strict, exc, line, name)
            continue
        seen.add(aid)
        activities.append(act)
        log.accepted += 1
    return activities


def parse_dependencies(source, known_ids, log: IngestLog | None = None,
                       *, strict=True) -> list[tuple[str, str]]:
    log = log if log is not None else IngestLog()
    name, header, rows, header_line = _read_table(source)
    for col in ("predecessor_id", "successor_id"):
        if col not in header:
            raise MalformedRow(f"header lacks a '{col}' column", line=header_line, source=name)
    edges = []
    seen = set()
    for line, row in rows:
        log.rows_in += 1
        try:
            p = _cell(row, "predecessor_id", header)
            s = _cell(row, "successor_id", header)
            if not p or not s:
                raise MalformedRow("empty endpoint id")
            for end in (p, s):
                if end not in known_ids:
                    raise DanglingEdgeEndpoint(f"edge {p}->{s} names unknown activity {end!r}")
            if p == s:
                raise MalformedRow(f"self-loop on activity {p!r}")
        except MalformedRow as exc:
            _fail(log, strict, exc, line, name)
            continue
        notes = []
        link = _cell(row, "link_type", header).upper()
        if link and link != "FS":
            notes.append(f"link type {link} treated as FS")
        if (p, s) in seen:
            notes.append(f"duplicate edge {p}->{s} collapsed")
        else:
            seen.add((p, s))
            edges.append((p, s))
        if notes:
            log.warned += 1
            log.warnings.extend(f"{name}:{line}: {n}" for n in notes)
        else:
            log.accepted += 1
    return edges


def parse_project(activities_source, dependencies_source, *, strict: bool = True,
                  allow_cycles: bool = False) -> ActivityNetwork:
    """Parse both files and build a validated :class:`ActivityNetwork`.

    In strict mode the first malformed row raises; otherwise malformed rows
    are logged and skipped. The row accounting is attached as ``ingest_log``.
    """
    log = IngestLog()
    activities = parse_activities(activities_source, log, strict=strict)
    ids = {a.id for a in activities}
    edges = parse_dependencies(dependencies_source, ids, log, strict=strict)
    dep_name = dependencies_source if isinstance(dependencies_source, (str, os.PathLike)) \
        else getattr(dependencies_source, "name", None)
    net = ActivityNetwork(activities, edges, allow_cycles=allow_cycles,
                          source=str(dep_name) if dep_name else None)
    for u, v in net.removed_edges:
        log.warnings.append(f"feedback edge {u}->{v} dropped to break a cycle")
    net.ingest_log = log
    return net


def read_project(directory, **kwargs) -> ActivityNetwork:
    """Parse ``activities.csv`` and ``dependencies.csv`` from a directory."""
    directory = Path(directory)
    act, dep = directory / "activities.csv", directory / "dependencies.csv"
    for p in (act, dep):
        if not p.exists():
            raise InputError(f"{p}: file not found")
    return parse_project(act, dep, **kwargs)


def _fmt(x):
    if x is None:
        return ""
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def write_project(network: ActivityNetwork, activities: str | Path | TextIO,
                  dependencies: str | Path | TextIO) -> None:
    """Serialize a network to the two-file format (comma-delimited, durations)."""

    def emit(target, schema, header, rows):
        buf = io.StringIO()
        buf.write(schema + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        if isinstance(target, (str, os.PathLike)):
            Path(target).write_text(buf.getvalue(), encoding="utf-8")
        else:
            target.write(buf.getvalue())

    acts = network.activities
    emit(activities, ACTIVITIES_SCHEMA, ["id", "name", "planned_duration", "actual_duration"],
         [[i, acts[i].name or "", _fmt(acts[i].planned_duration), _fmt(acts[i].actual_duration)]
          for i in network.ids])
    emit(dependencies, DEPENDENCIES_SCHEMA, ["predecessor_id", "successor_id", "link_type"],
         [[e.predecessor, e.successor, "FS"] for e in network.edges])


def summarize(network: ActivityNetwork, profile) -> NetworkSummary:
    """Descriptive statistics for one project (degree is total degree)."""
    from .graph import compute_degrees, compute_diameter, compute_reach

    n, m = network.node_count, network.edge_count
    deg = compute_degrees(network).total_degree
    reach = compute_reach(network)
    return NetworkSummary(
        node_count=n,
        link_count=m,
        average_degree=2.0 * m / n,
        max_degree=int(deg.max()),
        average_reach=float(np.mean(reach)),
        max_reach=int(reach.max()),
        delay_rate=float(profile.delay_rate),
        diameter=compute_diameter(network),
    )
