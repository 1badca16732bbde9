"""CSV, SVG and manifest writers for run directories.

Every decimal field is written with 34 significant digits so a CSV is a
deterministic function of the run parameters.  A run directory holds
``data.csv``, an optional ``plot.svg`` and a ``manifest`` of key=value lines.
"""
from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import mpmath
import numpy as np

from .precision import with_precision

SIG_DIGITS = 34
_SURD_CTX = with_precision(60)
_FMT_PREC = 200  # bits; exact for doubles and for 34-digit rounding of mpf values


def fmt(x, sig: int = SIG_DIGITS) -> str:
    """Decimal string of a number with ``sig`` significant digits.

    Integers are written exactly; floats, Fractions and mpf values are
    rounded once from their exact value.
    """
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    if hasattr(x, "to_hp"):
        x = x.to_hp(_SURD_CTX)
    if hasattr(x, "_mpf_"):
        m = x._mpf_
    elif isinstance(x, Fraction):
        m = mpmath.libmp.from_rational(x.numerator, x.denominator, _FMT_PREC)
    else:
        v = float(x)
        if not math.isfinite(v):
            return repr(v)
        m = mpmath.libmp.from_float(v)
    s = mpmath.libmp.to_str(m, sig)
    # "7.0" -> "7", "1.0e-5" -> "1e-5"
    mant, e, ex = s.partition("e")
    if mant.endswith(".0"):
        mant = mant[:-2]
    return mant + e + ex


class CsvWriter:
    """Streaming CSV writer that tracks the row count and a SHA-256 digest."""

    def __init__(self, path, header: Sequence[str]):
        self.path = Path(path)
        self._fh = open(self.path, "w", newline="\n", encoding="ascii")
        self._hash = hashlib.sha256()
        self.rows = 0
        self._line(",".join(header))

    def _line(self, s: str):
        s += "\n"
        self._fh.write(s)
        self._hash.update(s.encode("ascii"))

    def write(self, row: Iterable):
        self._line(",".join(fmt(v) for v in row))
        self.rows += 1

    def write_many(self, rows: Iterable[Iterable]):
        for r in rows:
            self.write(r)

    @property
    def digest(self) -> str:
        return self._hash.hexdigest()

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


@dataclass
class RunManifest:
    """What is needed to reproduce (and recognise) a run's outputs."""

    command_line: str
    parameters: dict
    digits: int
    truncation_terms: object
    row_count: int = 0
    wall_time: float = 0.0
    digests: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def lines(self) -> list:
        out = [f"command={self.command_line}"]
        out += [f"param.{k}={v}" for k, v in sorted(self.parameters.items())]
        out += [f"digits={self.digits}",
                f"truncation_terms={self.truncation_terms}",
                f"rows={self.row_count}",
                f"wall_time_s={self.wall_time:.3f}"]
        out += [f"sha256.{k}={v}" for k, v in sorted(self.digests.items())]
        out += [f"{k}={v}" for k, v in self.extra.items()]
        return out

    def write(self, path):
        Path(path).write_text("\n".join(self.lines()) + "\n", encoding="utf-8")


def read_manifest(path) -> dict:
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if "=" in line:
            k, v = line.split("=", 1)
            out[k] = v
    return out


@dataclass(frozen=True)
class PlotSpec:
    """Viewport, dot size and axis scales of an SVG plot.

    ``dot_ratio`` is the dot diameter as a fraction of the plot width.
    """

    x_range: tuple = (-1.0, 1.0)
    y_range: tuple = (-1.0, 1.0)
    dot_ratio: float = 1e-3
    log_x: bool = False
    log_y: bool = False
    size: tuple = (800, 800)
    x_label: str = "S_x"
    y_label: str = "S_z"

    def __post_init__(self):
        if not self.dot_ratio > 0:
            raise ValueError("dot_ratio must be positive")
        for lo, hi, lg in ((*self.x_range, self.log_x), (*self.y_range, self.log_y)):
            if not lo < hi:
                raise ValueError("empty plot range")
            if lg and lo <= 0:
                raise ValueError("logarithmic axis needs a positive range")

    def _map(self, v, rng, log, span, flip):
        lo, hi = rng
        if log:
            v, lo, hi = np.log10(v), math.log10(lo), math.log10(hi)
        u = (v - lo) / (hi - lo) * span
        return span - u if flip else u

    def to_pixels(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        w, h = self.size
        return self._map(x, self.x_range, self.log_x, w, False), \
            self._map(y, self.y_range, self.log_y, h, True)

    def inside(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return ((x >= self.x_range[0]) & (x <= self.x_range[1])
                & (y >= self.y_range[0]) & (y <= self.y_range[1]))


_MARGIN = 50


def _frame(spec: PlotSpec, body: list) -> str:
    w, h = spec.size
    W, H = w + 2 * _MARGIN, h + 2 * _MARGIN
    xs = "log " if spec.log_x else ""
    ys = "log " if spec.log_y else ""
    head = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<g transform="translate({_MARGIN},{_MARGIN})">',
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="none" stroke="black"/>',
        f'<text x="{w / 2:.1f}" y="{h + 35}" text-anchor="middle" font-size="14">'
        f'{xs}{spec.x_label} [{spec.x_range[0]:g}, {spec.x_range[1]:g}]</text>',
        f'<text x="-35" y="{h / 2:.1f}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 -35 {h / 2:.1f})">'
        f'{ys}{spec.y_label} [{spec.y_range[0]:g}, {spec.y_range[1]:g}]</text>',
    ]
    return "\n".join(head + body + ["</g>", "</svg>"]) + "\n"


def svg_scatter(x, y, spec: PlotSpec = PlotSpec()) -> str:
    """One circle per point inside the viewport; points outside are skipped."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    m = spec.inside(x, y)
    px, py = spec.to_pixels(x[m], y[m])
    r = spec.dot_ratio * spec.size[0] / 2
    body = [f'<circle cx="{a:.3f}" cy="{b:.3f}" r="{r:.4g}"/>' for a, b in zip(px, py)]
    return _frame(spec, body)


def svg_vectors(rows, spec: PlotSpec = PlotSpec(), arrow_scale: float = 0.08) -> str:
    """Arrows from (x, z) along (u, w); lengths are relative (u, w <= 1)."""
    w_px, h_px = spec.size
    body = []
    for x, z, u, w in rows:
        x, z, u, w = float(x), float(z), float(u), float(w)
        (x0,), (y0,) = spec.to_pixels([x], [z])
        dx = u * arrow_scale * w_px / 2
        dy = -w * arrow_scale * h_px / 2
        x1, y1 = x0 + dx, y0 + dy
        body.append(f'<line x1="{x0:.2f}" y1="{y0:.2f}" x2="{x1:.2f}" y2="{y1:.2f}" '
                    f'stroke="black"/>')
        L = math.hypot(dx, dy)
        if L > 0:
            ux, uy = dx / L, dy / L
            hl = min(6.0, 0.4 * L)
            p1 = (x1 - hl * (ux - 0.5 * uy), y1 - hl * (uy + 0.5 * ux))
            p2 = (x1 - hl * (ux + 0.5 * uy), y1 - hl * (uy - 0.5 * ux))
            body.append(f'<polygon points="{x1:.2f},{y1:.2f} {p1[0]:.2f},{p1[1]:.2f} '
                        f'{p2[0]:.2f},{p2[1]:.2f}"/>')
    return _frame(spec, body)


def svg_line(x, y, spec: PlotSpec) -> str:
    """Polyline through the points (spectra and |c_k| plots)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    px, py = spec.to_pixels(x, y)
    pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
    return _frame(spec, [f'<polyline points="{pts}" fill="none" stroke="black"/>'])


def run_directory(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


def default_threads() -> int:
    """Thread count from JCMBLOCH_THREADS, else 1."""
    try:
        return max(1, int(os.environ.get("JCMBLOCH_THREADS", "1")))
    except ValueError:
        return 1
