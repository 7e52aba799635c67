"""Static SVG figures for experiment results.

The markup is assembled by hand with fixed number formatting, so the same
result always yields the same bytes.
"""

from __future__ import annotations

from pathlib import Path

from .harness import ExperimentResult

__all__ = ["emit_plot", "render_svg"]

W, H = 480, 320
LEFT, RIGHT, TOP, BOTTOM = 60, 20, 30, 40


def _f(v: float) -> str:
    return f"{v:.2f}"


class _Frame:
    def __init__(self, x0: float, x1: float, y0: float, y1: float):
        if x1 <= x0:
            x1 = x0 + 1.0
        if y1 <= y0:
            y1 = y0 + 1.0
        self.x0, self.x1, self.y0, self.y1 = x0, x1, y0, y1

    def x(self, v: float) -> float:
        return LEFT + (v - self.x0) / (self.x1 - self.x0) * (W - LEFT - RIGHT)

    def y(self, v: float) -> float:
        return H - BOTTOM - (v - self.y0) / (self.y1 - self.y0) * (H - TOP - BOTTOM)


def _axes(title: str, frame: _Frame | None) -> list[str]:
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<line class="axis" x1="{LEFT}" y1="{H - BOTTOM}" x2="{W - RIGHT}" y2="{H - BOTTOM}" stroke="black"/>',
        f'<line class="axis" x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{H - BOTTOM}" stroke="black"/>',
        f'<text x="{W // 2}" y="18" text-anchor="middle" font-size="12">{title}</text>',
    ]
    if frame is not None:
        for v in (frame.y0, frame.y1):
            out.append(
                f'<text x="{LEFT - 4}" y="{_f(frame.y(v) + 4)}" text-anchor="end" font-size="10">{v:.4g}</text>'
            )
    return out


def _padded(lo: float, hi: float) -> tuple[float, float]:
    span = hi - lo
    pad = 0.1 * span if span > 0 else max(abs(hi), 1.0) * 0.1
    return lo - pad, hi + pad


def _concentration(result: ExperimentResult) -> list[str]:
    stats = result.statistics
    vals = [s["estimate"] for s in stats] + [s["target"] for s in stats if s["target"] is not None]
    frame = _Frame(0, len(stats), *_padded(min(vals), max(vals)))
    out = _axes("normalised sums vs limits", frame)
    for i, s in enumerate(stats):
        xa, xb = frame.x(i + 0.1), frame.x(i + 0.9)
        if s["target"] is not None:
            y = frame.y(s["target"])
            out.append(
                f'<line class="target" x1="{_f(xa)}" y1="{_f(y)}" x2="{_f(xb)}" y2="{_f(y)}" stroke="red"/>'
            )
        cx = frame.x(i + 0.5)
        out.append(f'<circle class="marker" cx="{_f(cx)}" cy="{_f(frame.y(s["estimate"]))}" r="3" fill="black"/>')
        out.append(f'<text x="{_f(cx)}" y="{H - BOTTOM + 14}" text-anchor="middle" font-size="10">{s["name"]}</text>')
    return out


def _variance(result: ExperimentResult) -> list[str]:
    stats = [s for s in result.statistics if s["name"].startswith(("var_", "cov_", "corr_"))]
    vals = [0.0] + [s["estimate"] for s in stats] + [s["target"] for s in stats]
    frame = _Frame(0, len(stats), *_padded(min(vals), max(vals)))
    out = _axes("sample (co)variances vs limits", frame)
    base = frame.y(0.0)
    for i, s in enumerate(stats):
        top = frame.y(s["estimate"])
        xa = frame.x(i + 0.2)
        width = frame.x(i + 0.8) - xa
        out.append(
            f'<rect class="bar" x="{_f(xa)}" y="{_f(min(top, base))}" width="{_f(width)}" '
            f'height="{_f(abs(base - top))}" fill="steelblue"/>'
        )
        y = frame.y(s["target"])
        out.append(
            f'<line class="target" x1="{_f(xa)}" y1="{_f(y)}" x2="{_f(xa + width)}" y2="{_f(y)}" stroke="red"/>'
        )
        out.append(
            f'<text x="{_f(frame.x(i + 0.5))}" y="{H - BOTTOM + 14}" text-anchor="middle" '
            f'font-size="10">{s["name"]}</text>'
        )
    return out


def _tailslope(result: ExperimentResult) -> list[str]:
    rows = result.thresholds
    xs = [r["x"] for r in rows]
    x_hi = max(xs) * 1.2
    # every shipped rate is a pure quadratic, so one point fixes the curve
    curv = rows[0]["rate_prediction"] / rows[0]["x"] ** 2
    ys = [r["slope"] for r in rows] + [curv * x_hi**2]
    frame = _Frame(0.0, x_hi, 0.0, max(ys) * 1.1)
    out = _axes("empirical tail slope vs rate", frame)
    pts = " ".join(f"{_f(frame.x(x_hi * k / 40))},{_f(frame.y(curv * (x_hi * k / 40) ** 2))}" for k in range(41))
    out.append(f'<polyline class="rate" points="{pts}" fill="none" stroke="red"/>')
    for r in rows:
        fill = "white" if r["lower_bound_flag"] else "black"
        out.append(
            f'<circle class="marker" cx="{_f(frame.x(r["x"]))}" cy="{_f(frame.y(r["slope"]))}" r="3" '
            f'fill="{fill}" stroke="black"/>'
        )
    return out


def _generic(result: ExperimentResult) -> list[str]:
    stats = [s for s in result.statistics if s.get("estimate") is not None]
    vals = [s["estimate"] for s in stats] + [s["target"] for s in stats if s.get("target") is not None]
    frame = _Frame(0, len(stats), *_padded(min(vals), max(vals)))
    out = _axes(f"{result.experiment.value} estimates", frame)
    for i, s in enumerate(stats):
        cx = frame.x(i + 0.5)
        out.append(f'<circle class="marker" cx="{_f(cx)}" cy="{_f(frame.y(s["estimate"]))}" r="3" fill="black"/>')
        if s.get("target") is not None:
            y = frame.y(s["target"])
            out.append(
                f'<line class="target" x1="{_f(cx - 6)}" y1="{_f(y)}" x2="{_f(cx + 6)}" y2="{_f(y)}" stroke="red"/>'
            )
    return out


_KINDS = {
    "concentration": _concentration,
    "variance": _variance,
    "tailslope": _tailslope,
    "generic": _generic,
}


def render_svg(result: ExperimentResult | None, kind: str) -> str:
    if kind not in _KINDS:
        raise ValueError(f"unknown plot kind {kind!r}; expected one of {sorted(_KINDS)}")
    empty = result is None or not (result.statistics or result.thresholds)
    if empty or (kind == "tailslope" and not result.thresholds):
        lines = _axes(kind, None)
    else:
        lines = _KINDS[kind](result)
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def emit_plot(result: ExperimentResult | None, kind: str, path: "str | Path") -> Path:
    """Write the SVG for ``result``; an empty result gives bare axes."""
    p = Path(path)
    p.write_text(render_svg(result, kind))
    return p
