"""Tiny dependency-free SVG writers for quick-look plots."""

from __future__ import annotations

from typing import Sequence

_WIDTH = 640
_HEIGHT = 360
_MARGIN = 48


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def _header(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
        f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{_WIDTH / 2:.0f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
    ]


def line_chart(values: Sequence[float], title: str) -> str:
    """Index-vs-value polyline, axes clamped to the data range."""
    lo = min(values) if values else 0.0
    hi = max(values) if values else 1.0
    if hi == lo:
        hi = lo + 1.0
    span_x = _WIDTH - 2 * _MARGIN
    span_y = _HEIGHT - 2 * _MARGIN
    points = []
    for i, v in enumerate(values):
        x = _MARGIN + span_x * (i / max(1, len(values) - 1))
        y = _HEIGHT - _MARGIN - span_y * ((v - lo) / (hi - lo))
        points.append(f"{_fmt(x)},{_fmt(y)}")
    parts = _header(title)
    parts.append(f'<polyline fill="none" stroke="steelblue" '
                 f'stroke-width="1.5" points="{" ".join(points)}"/>')
    parts.append(f'<text x="{_MARGIN}" y="{_HEIGHT - 12}" '
                 f'font-family="sans-serif" font-size="11">'
                 f'min={lo:.4g} max={hi:.4g} n={len(values)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def bar_chart(labels: Sequence[str], values: Sequence[float],
              title: str) -> str:
    """Labeled vertical bars scaled to [0, max]."""
    hi = max(max(values), 1e-12) if values else 1.0
    span_x = _WIDTH - 2 * _MARGIN
    span_y = _HEIGHT - 2 * _MARGIN
    slot = span_x / max(1, len(values))
    parts = _header(title)
    for i, (label, v) in enumerate(zip(labels, values)):
        height = span_y * (v / hi)
        x = _MARGIN + i * slot + slot * 0.1
        y = _HEIGHT - _MARGIN - height
        parts.append(f'<rect x="{_fmt(x)}" y="{_fmt(y)}" '
                     f'width="{_fmt(slot * 0.8)}" height="{_fmt(height)}" '
                     f'fill="steelblue"/>')
        parts.append(f'<text x="{_fmt(x + slot * 0.4)}" '
                     f'y="{_HEIGHT - _MARGIN + 14}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="9">{label}</text>')
        parts.append(f'<text x="{_fmt(x + slot * 0.4)}" y="{_fmt(y - 4)}" '
                     f'text-anchor="middle" font-family="sans-serif" '
                     f'font-size="9">{v:.3f}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
