"""SVG rendering of a tessellation trace.

The picture is exactly the union of internal cell boundaries: the window
outline plus, for every jump event, the splitting chord clipped to the cell
it divided.  Output is deterministic (fixed coordinate formatting) so
renders can be diffed in CI.
"""

from __future__ import annotations

from .geometry import chord
from .processes import ModelTag, ProcessTrace, replay

_MARGIN_FRACTION = 0.05


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def chord_segments(
    trace: ProcessTrace, at: float | None = None
) -> list[tuple[tuple[float, float], tuple[float, float]]]:
    """Chord endpoints of every jump event with time/index <= `at`."""
    segments = []
    for event, target, _ in replay(trace):
        if at is not None and event.time > at:
            break
        if not event.jump or target is None:
            continue
        _, endpoints = chord(target, event.line)
        if endpoints is not None:
            segments.append(endpoints)
    return segments


def render_svg(trace: ProcessTrace, at: float | None = None) -> str:
    """Render the tessellation state (optionally at an intermediate time)."""
    window = trace.window
    xs = [v[0] for v in window.vertices]
    ys = [v[1] for v in window.vertices]
    margin = _MARGIN_FRACTION * window.diameter
    x0, y0 = min(xs) - margin, min(ys) - margin
    w = max(xs) - min(xs) + 2 * margin
    h = max(ys) - min(ys) + 2 * margin
    stroke = window.diameter / 300.0

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{_fmt(x0)} {_fmt(y0)} '
        f'{_fmt(w)} {_fmt(h)}">',
        # flip the y axis so CCW geometry renders in the usual orientation
        f'<g transform="translate(0 {_fmt(2 * y0 + h)}) scale(1 -1)" fill="none" '
        f'stroke="black" stroke-width="{_fmt(stroke)}" stroke-linecap="round">',
    ]
    points = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in window.vertices)
    lines.append(f'<polygon points="{points}"/>')
    for (ax, ay), (bx, by) in chord_segments(trace, at):
        lines.append(
            f'<line x1="{_fmt(ax)}" y1="{_fmt(ay)}" x2="{_fmt(bx)}" y2="{_fmt(by)}"/>'
        )
    lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def model_time_label(tag: ModelTag) -> str:
    return "decision" if tag is ModelTag.MECKE_DISCRETE else "time"
