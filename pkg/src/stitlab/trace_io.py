"""JSON Lines persistence for process traces and JSON output for reports.

Trace layout: one header record
    {"window": {"vertices": [[x, y], ...]}, "measure": {...},
     "model_tag": "STIT", "seed": 7}
followed by one record per event
    {"t": 0.12, "cell": 0, "line": {"theta": .., "p": ..}, "jump": true}
where discrete-model events carry an integer decision index "n" instead of
the real time "t".
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

from .errors import ConfigError, GeometryError
from .geometry import ConvexPolygon, Line
from .line_measure import measure_from_json, measure_to_json
from .processes import ModelTag, ProcessTrace, TraceEvent
from .stats import VerificationReport


def polygon_to_json(poly: ConvexPolygon) -> dict:
    return {"vertices": [[x, y] for x, y in poly.vertices]}


def polygon_from_json(obj: dict) -> ConvexPolygon:
    return ConvexPolygon(tuple((float(x), float(y)) for x, y in obj["vertices"]))


def _event_to_json(event: TraceEvent, discrete: bool) -> dict:
    record: dict = {}
    if discrete:
        record["n"] = int(event.time)
    else:
        record["t"] = float(event.time)
    record["cell"] = event.cell_index
    record["line"] = {"theta": event.line.theta, "p": event.line.offset}
    record["jump"] = event.jump
    return record


def trace_to_lines(trace: ProcessTrace) -> list[str]:
    header = {
        "window": polygon_to_json(trace.window),
        "measure": measure_to_json(trace.measure),
        "model_tag": trace.model_tag.value,
        "seed": trace.seed,
    }
    discrete = trace.model_tag is ModelTag.MECKE_DISCRETE
    lines = [json.dumps(header)]
    lines.extend(json.dumps(_event_to_json(e, discrete)) for e in trace.events)
    return lines


def write_trace(trace: ProcessTrace, path: str | Path) -> None:
    Path(path).write_text("\n".join(trace_to_lines(trace)) + "\n", encoding="utf-8")


def read_trace(path: str | Path) -> ProcessTrace:
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ConfigError(f"trace file {path} is empty")
    try:
        header = json.loads(lines[0])
        window = polygon_from_json(header["window"])
        measure = measure_from_json(header["measure"])
        tag = ModelTag(header["model_tag"])
        seed = header.get("seed")
        discrete = tag is ModelTag.MECKE_DISCRETE
        events = []
        for ln in lines[1:]:
            rec = json.loads(ln)
            time = int(rec["n"]) if discrete else float(rec["t"])
            events.append(
                TraceEvent(
                    time=time,
                    cell_index=int(rec["cell"]),
                    line=Line(float(rec["line"]["theta"]), float(rec["line"]["p"])),
                    jump=bool(rec["jump"]),
                )
            )
    except (KeyError, ValueError, TypeError, GeometryError) as exc:
        raise ConfigError(f"malformed trace file {path}: {exc}") from exc
    return ProcessTrace(window, measure, tuple(events), tag, seed)


def reports_to_json(reports: Sequence[VerificationReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2)


def write_reports(reports: Sequence[VerificationReport], path: str | Path) -> None:
    Path(path).write_text(reports_to_json(reports) + "\n", encoding="utf-8")
