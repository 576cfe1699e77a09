"""Grouped bar chart of mean TNR per task, written as standalone SVG 1.1."""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

from .experiment import ExperimentReport

WIDTH, HEIGHT = 640, 400
LEFT, RIGHT, TOP, BOTTOM = 60, 160, 30, 50
PLOT_W = WIDTH - LEFT - RIGHT
PLOT_H = HEIGHT - TOP - BOTTOM

# single-output yellow, multi-task blue, direct-label green
FAMILIES = (
    ("single", "single output", "#e6c229"),
    ("multitask", "multi-task", "#2f6db5"),
    ("onehot", "rank classifier", "#3a9a4a"),
)


def chart_bars(report: ExperimentReport) -> list[tuple[int, str, str, float]]:
    """(task, family, classifier_type, mean_tnr) for every bar drawn, in draw order."""
    bars = []
    for t in sorted({t for _, t in report.summary}):
        names = {
            "single": f"SingleT{t}",
            "multitask": report.multitask_name,
            "onehot": report.onehot_name,
        }
        for family, _, _ in FAMILIES:
            value = report.summary.get((names[family], t))
            if value is not None:
                bars.append((t, family, names[family], value))
    return bars


def render_svg(report: ExperimentReport, title: str = "Mean TNR at TPR >= 0.95") -> str:
    bars = chart_bars(report)
    if not bars:
        raise ValueError("nothing to plot")
    tasks = sorted({b[0] for b in bars})
    group_w = PLOT_W / len(tasks)
    bar_w = group_w * 0.8 / len(FAMILIES)
    slot = {f: i for i, (f, _, _) in enumerate(FAMILIES)}
    colour = {f: c for f, _, c in FAMILIES}

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        '<!DOCTYPE svg PUBLIC "-//W3C//DTD SVG 1.1//EN" "http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd">',
        f'<svg version="1.1" xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{LEFT + PLOT_W / 2:.1f}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>',
    ]
    # y axis, ticks every 0.2
    for i in range(6):
        v = i / 5
        y = TOP + PLOT_H * (1 - v)
        out.append(f'<line x1="{LEFT}" y1="{y:.1f}" x2="{LEFT + PLOT_W}" y2="{y:.1f}" stroke="#dddddd"/>')
        out.append(f'<text x="{LEFT - 6}" y="{y + 4:.1f}" text-anchor="end">{v:.1f}</text>')
    out.append(f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + PLOT_H}" stroke="black"/>')
    out.append(f'<line x1="{LEFT}" y1="{TOP + PLOT_H}" x2="{LEFT + PLOT_W}" y2="{TOP + PLOT_H}" stroke="black"/>')
    out.append(
        f'<text transform="translate(16,{TOP + PLOT_H / 2:.1f}) rotate(-90)" text-anchor="middle">mean TNR</text>'
    )

    for gi, t in enumerate(tasks):
        gx = LEFT + gi * group_w
        out.append(
            f'<text x="{gx + group_w / 2:.1f}" y="{TOP + PLOT_H + 20}" text-anchor="middle">task {t}</text>'
        )
    for t, family, name, value in bars:
        gi = tasks.index(t)
        x = LEFT + gi * group_w + group_w * 0.1 + slot[family] * bar_w
        h = PLOT_H * min(max(value, 0.0), 1.0)
        y = TOP + PLOT_H - h
        out.append(
            f'<rect class="bar" x="{x:.3f}" y="{y:.3f}" width="{bar_w:.3f}" height="{h:.3f}" '
            f'fill="{colour[family]}" data-task="{t}" data-type="{escape(name)}" data-tnr="{value:.6f}">'
            f"<title>{escape(name)} task {t}: {value:.3f}</title></rect>"
        )
        out.append(
            f'<text class="bar-label" x="{x + bar_w / 2:.3f}" y="{y - 4:.3f}" text-anchor="middle" '
            f'font-size="10">{value:.3f}</text>'
        )

    lx = LEFT + PLOT_W + 15
    for i, (family, label, c) in enumerate(FAMILIES):
        ly = TOP + 10 + i * 20
        out.append(f'<rect x="{lx}" y="{ly}" width="12" height="12" fill="{c}"/>')
        out.append(f'<text x="{lx + 18}" y="{ly + 10}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_bar_chart(report: ExperimentReport, path) -> Path:
    path = Path(path)
    path.write_text(render_svg(report), encoding="utf-8")
    return path
