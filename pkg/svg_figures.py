"""
Static SVG panels comparing Newton profiles with their leading-order shape.

Panel a: Stokes wave at beta = 1/2.  Panel b: K=2 plus branch.
Panel c: K=3 (branch 3 unless told otherwise). Every profile is divided by a,
so the leading-order curve is cos x + b1 cos Kx.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List

import numpy as np

import asymptotics
import solver
from settings import DEFAULT_SETTINGS, Settings
from trigpoly import evaluate
from wilton_errors import InvalidParameterError

logger = logging.getLogger(__name__)

GRID_POINTS = 129
MARKER_STRIDE = 4
WIDTH, HEIGHT = 640, 400
MARGIN = 60


@dataclass(frozen=True)
class Panel:
    key: str
    title: str
    x: np.ndarray
    numeric: np.ndarray
    asymptotic: np.ndarray

    @property
    def deviation(self) -> float:
        """max |u/a - leading order| over the plotted grid"""
        return float(np.max(np.abs(self.numeric - self.asymptotic)))


@dataclass(frozen=True)
class Fig1:
    a: float
    panels: List[Panel]

    def svgs(self) -> Dict[str, str]:
        return {f"fig1{p.key}.svg": render_svg(p) for p in self.panels}

    def csv_rows(self) -> List[List]:
        rows = []
        for p in self.panels:
            for x, num, asym in zip(p.x, p.numeric, p.asymptotic):
                rows.append([p.key, float(x), float(num), float(asym)])
        return rows

    def deviations(self) -> Dict[str, float]:
        return {p.key: p.deviation for p in self.panels}


def _panel(key: str, title: str, result: solver.SolveResult, leading: Dict[int, float]) -> Panel:
    x = np.linspace(-math.pi, math.pi, GRID_POINTS)
    numeric = evaluate(result.profile, x) / result.a
    asymptotic = sum(coef * np.cos(k * x) for k, coef in leading.items())
    return Panel(key, title, x, numeric, asymptotic)


def build_fig1(a: float = DEFAULT_SETTINGS.default_amplitude, branch3: str = "3",
               seed_order: int = 2, settings: Settings = DEFAULT_SETTINGS) -> Fig1:
    if a == 0 or not math.isfinite(a):
        raise InvalidParameterError("fig1 normalizes profiles by a; a must be nonzero",
                                    suggestions=["the published figure uses a = 0.01"])

    stokes = solver.stokes_solve(Fraction(1, 2), a, seed_order=seed_order, settings=settings)
    plus = asymptotics.find_branch(2, "plus")
    k2 = solver.solve_wilton(2, plus, a, seed_order=seed_order, settings=settings)
    k3_branch = asymptotics.find_branch(3, branch3)
    k3 = solver.solve_wilton(3, k3_branch, a, seed_order=seed_order, settings=settings)

    panels = [
        _panel("a", "Stokes wave, beta = 1/2", stokes, {1: 1.0}),
        _panel("b", "Wilton ripple, beta = 1/5 (K=2, plus)", k2,
               {1: 1.0, 2: float(plus.kernel_amplitude)}),
        _panel("c", f"Wilton ripple, beta = 1/10 (K=3, branch {k3_branch.label})", k3,
               {1: 1.0, 3: float(k3_branch.kernel_amplitude)}),
    ]
    for p in panels:
        logger.info(f"panel {p.key}: max |u/a - leading order| = {p.deviation:.4g}")
    return Fig1(a=float(a), panels=panels)


def render_svg(panel: Panel) -> str:
    """Fixed-viewBox SVG: red polyline for the leading order, blue markers for Newton"""
    lo = float(min(panel.numeric.min(), panel.asymptotic.min()))
    hi = float(max(panel.numeric.max(), panel.asymptotic.max()))
    pad = 0.05 * (hi - lo or 1.0)
    lo, hi = lo - pad, hi + pad
    plot_w, plot_h = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

    def px(x):
        return MARGIN + (x + math.pi) / (2 * math.pi) * plot_w

    def py(y):
        return HEIGHT - MARGIN - (y - lo) / (hi - lo) * plot_h

    line = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(panel.x, panel.asymptotic))
    markers = "\n".join(
        f'    <circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="2.5" fill="#1f4e9c"/>'
        for x, y in list(zip(panel.x, panel.numeric))[::MARKER_STRIDE]
    )
    zero = py(0.0) if lo < 0 < hi else HEIGHT - MARGIN

    svg = f"""<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}">
  <rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>
  <text x="{WIDTH / 2:.0f}" y="30" text-anchor="middle" font-family="Arial" font-size="16">({panel.key}) {panel.title}</text>
  <line x1="{MARGIN}" y1="{zero:.2f}" x2="{WIDTH - MARGIN}" y2="{zero:.2f}" stroke="#999" stroke-width="1"/>
  <line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="#999" stroke-width="1"/>
  <text x="{MARGIN}" y="{HEIGHT - MARGIN + 20}" text-anchor="middle" font-family="Arial" font-size="12">-π</text>
  <text x="{WIDTH - MARGIN}" y="{HEIGHT - MARGIN + 20}" text-anchor="middle" font-family="Arial" font-size="12">π</text>
  <text x="{MARGIN - 8}" y="{py(hi - pad):.2f}" text-anchor="end" font-family="Arial" font-size="12">{hi - pad:.3g}</text>
  <text x="{MARGIN - 8}" y="{py(lo + pad):.2f}" text-anchor="end" font-family="Arial" font-size="12">{lo + pad:.3g}</text>
  <polyline points="{line}" fill="none" stroke="#c0392b" stroke-width="2"/>
{markers}
  <text x="{WIDTH - MARGIN}" y="{MARGIN}" text-anchor="end" font-family="Arial" font-size="12" fill="#c0392b">leading order</text>
  <text x="{WIDTH - MARGIN}" y="{MARGIN + 16}" text-anchor="end" font-family="Arial" font-size="12" fill="#1f4e9c">Newton u/a</text>
</svg>
"""
    return svg
