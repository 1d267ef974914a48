"""Convergence sweeps, eigenfunction comparisons and their serialization.

A sweep runs the full pipeline per mesh size N (assemble, smallest
eigenpair, calibrated lower bound, interpolation upper bound, predictions)
and records one row per N. Rows are independent, so they may be computed in
worker processes; output order and every digit are independent of the worker
count.
"""
from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .assembly import assemble_pencil, boundary_condition, check_dimension, free_nodes, hardy_constant
from .calibration import (CalibrationError, near_u_1d, near_v_radial, solve_delta_1d,
                          solve_radial)
from .eigensolve import EigenSolveError, smallest_eigenpair
from .mesh import uniform_mesh
from .minimizers import ScheduleError, upper_bound_value
from .predictions import predict, scaled_ratio

log = logging.getLogger(__name__)

CSV_HEADER = ("N", "h", "S_h", "gap", "mu", "ub", "ratio_lb", "ratio_asym", "ratio_ub",
              "eig_residual")
RATIO_KINDS = ("ratio_lb", "ratio_asym", "ratio_ub")


@dataclass(frozen=True)
class SweepConfig:
    n: int
    N_min: int
    N_max: int
    points: int
    tol: float = 1e-12
    workers: int = 1

    def __post_init__(self):
        check_dimension(self.n)
        if self.N_min < 2:
            raise ValueError("N_min must be at least 2")
        if self.N_max < self.N_min:
            raise ValueError("N_max must be at least N_min")
        if self.points < 2:
            raise ValueError("points must be at least 2")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


@dataclass(frozen=True)
class SweepRecord:
    """One sweep row. Fields that could not be computed are None and the
    reason is kept in ``flags``."""
    N: int
    h: float
    s_h: Optional[float]
    gap: Optional[float]
    mu: Optional[float]
    ub: Optional[float]
    ratio_lb: Optional[float]
    ratio_asym: Optional[float]
    ratio_ub: Optional[float]
    eig_residual: Optional[float]
    flags: Dict[str, str] = field(default_factory=dict, compare=False)

    def as_row(self) -> Tuple:
        return (self.N, self.h, self.s_h, self.gap, self.mu, self.ub, self.ratio_lb,
                self.ratio_asym, self.ratio_ub, self.eig_residual)


def sweep_sizes(config: SweepConfig) -> List[int]:
    """Rounded geometric spacing of N, deduplicated and ascending."""
    raw = np.geomspace(config.N_min, config.N_max, config.points)
    return sorted({int(round(x)) for x in raw})


def compute_record(n: int, N: int, tol: float = 1e-12) -> SweepRecord:
    h = 1.0 / N
    flags: Dict[str, str] = {}
    s_h = gap = mu = ub = r_lb = r_asym = r_ub = resid = None
    try:
        eig = smallest_eigenpair(assemble_pencil(uniform_mesh(N), n), tol=tol)
        s_h, resid = eig.lambda_min, eig.residual
        gap = s_h - hardy_constant(n)
    except EigenSolveError as exc:
        flags["S_h"] = str(exc)
    try:
        mu = solve_delta_1d(h).lam if n == 1 else solve_radial(n, h).lam
    except (CalibrationError, ValueError) as exc:
        flags["mu"] = str(exc)
    try:
        ub = upper_bound_value(N, n)[0]
    except ScheduleError as exc:
        flags["ub"] = str(exc)
    pred = predict(n, h)
    if gap is not None and gap > 0:
        r_lb = scaled_ratio(gap, pred.gap_lb)
        r_asym = scaled_ratio(gap, pred.gap_asymptotic)
        if pred.gap_ub is not None:
            r_ub = scaled_ratio(gap, pred.gap_ub)
        else:
            flags["ratio_ub"] = "upper-bound prediction infeasible at this h"
    for name, msg in flags.items():
        # an infeasible eps-schedule at small N is expected, not a failure
        level = logging.INFO if name in ("ub", "ratio_ub") else logging.WARNING
        log.log(level, "N=%d %s: %s", N, name, msg)
    return SweepRecord(N, h, s_h, gap, mu, ub, r_lb, r_asym, r_ub, resid, flags)


def _record_task(args):
    return compute_record(*args)


def run_sweep(config: SweepConfig) -> List[SweepRecord]:
    tasks = [(config.n, N, config.tol) for N in sweep_sizes(config)]
    if config.workers == 1 or len(tasks) == 1:
        records = [_record_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            records = list(pool.map(_record_task, tasks))
    return sorted(records, key=lambda r: r.N)


# ---------------------------------------------------------------------------
# eigenfunctions


def eigenfunction_samples(N: int, n: int, tol: float = 1e-12):
    """Sample points, normalized FE minimizer and analytic near-minimizer.

    Normalization: value 1 at x = 1 for n = 1, at r = 0 for n >= 3.
    """
    check_dimension(n)
    mesh = uniform_mesh(N)
    eig = smallest_eigenpair(assemble_pencil(mesh, n), tol=tol)
    full = np.zeros(mesh.nodes.size)
    full[free_nodes(mesh.nodes.size, boundary_condition(n))] = eig.vector
    anchor = full[-1] if n == 1 else full[0]
    if anchor == 0.0:
        raise EigenSolveError("normalization node value is zero")
    full /= anchor
    x = np.linspace(0.0, 1.0, 10 * N + 1)
    fe = np.interp(x, mesh.nodes, full)
    h = 1.0 / N
    exact = near_u_1d(x, solve_delta_1d(h)) if n == 1 else near_v_radial(x, solve_radial(n, h))
    return x, fe, exact


def eigenfunction_error(N: int, n: int) -> float:
    """Sup-norm distance between the FE minimizer and the analytic near-minimizer."""
    _, fe, exact = eigenfunction_samples(N, n)
    return float(np.max(np.abs(fe - exact)))


def delta_ratios(n: int, hs: Sequence[float]) -> np.ndarray:
    """delta_h divided by its leading-order asymptotic, for each h."""
    out = []
    for h in hs:
        L = -math.log(h)
        if n == 1:
            out.append(solve_delta_1d(h).delta * (6.0 + L) / math.pi)
        else:
            lead = 8.0 * (n - 1) / (n * (n - 2)) + h + L
            out.append(solve_radial(n, h).delta * lead / math.pi)
    return np.array(out)


# ---------------------------------------------------------------------------
# output


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def emit_csv(records: Sequence[SweepRecord], path) -> None:
    if not records:
        raise ValueError("no records to write")
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for r in records:
                w.writerow([_fmt(v) for v in r.as_row()])
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc.strerror or exc}") from exc


def emit_columns_csv(columns: Dict[str, np.ndarray], path) -> None:
    names = list(columns)
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(names)
            for row in zip(*(columns[k] for k in names)):
                w.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc.strerror or exc}") from exc


_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def svg_plot(series: Dict[str, Tuple[Sequence[float], Sequence[float]]], *, xlog: bool,
             xlabel: str, ylabel: str, title: str = "", width: int = 640,
             height: int = 420) -> str:
    """Minimal line plot as an SVG document. None / non-finite y values are skipped."""
    pts = {}
    for name, (xs, ys) in series.items():
        keep = [(float(x), float(y)) for x, y in zip(xs, ys)
                if y is not None and math.isfinite(y) and (not xlog or x > 0)]
        pts[name] = keep
    allp = [p for v in pts.values() for p in v]
    if not allp:
        raise ValueError("nothing to plot")
    tx = (lambda x: math.log10(x)) if xlog else (lambda x: x)
    xs = [tx(p[0]) for p in allp]
    ys = [p[1] for p in allp]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    pad = 0.05 * (y1 - y0) if y1 > y0 else 0.5
    y0, y1 = y0 - pad, y1 + pad
    ml, mr, mt, mb = 70, 140, 30, 50
    pw, ph = width - ml - mr, height - mt - mb

    def X(x):
        return ml + (tx(x) - x0) / (x1 - x0) * pw

    def Y(y):
        return mt + (y1 - y) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
           f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    if title:
        out.append(f'<text x="{ml + pw / 2:.2f}" y="18" text-anchor="middle">{title}</text>')
    if xlog:
        for k in range(math.ceil(x0), math.floor(x1) + 1):
            px = ml + (k - x0) / (x1 - x0) * pw
            out.append(f'<line x1="{px:.2f}" y1="{mt + ph}" x2="{px:.2f}" y2="{mt + ph + 5}" stroke="black"/>')
            out.append(f'<text x="{px:.2f}" y="{mt + ph + 18}" text-anchor="middle">1e{k}</text>')
    else:
        for i in range(6):
            v = x0 + (x1 - x0) * i / 5
            px = ml + pw * i / 5
            out.append(f'<line x1="{px:.2f}" y1="{mt + ph}" x2="{px:.2f}" y2="{mt + ph + 5}" stroke="black"/>')
            out.append(f'<text x="{px:.2f}" y="{mt + ph + 18}" text-anchor="middle">{v:.3g}</text>')
    for i in range(6):
        v = y0 + (y1 - y0) * i / 5
        py = Y(v)
        out.append(f'<line x1="{ml - 5}" y1="{py:.2f}" x2="{ml}" y2="{py:.2f}" stroke="black"/>')
        out.append(f'<text x="{ml - 8}" y="{py + 4:.2f}" text-anchor="end">{v:.4g}</text>')
    out.append(f'<text x="{ml + pw / 2:.2f}" y="{height - 10}" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="16" y="{mt + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {mt + ph / 2:.2f})">{ylabel}</text>')
    for i, (name, p) in enumerate(pts.items()):
        color = _COLORS[i % len(_COLORS)]
        if p:
            coords = " ".join(f"{X(x):.2f},{Y(y):.2f}" for x, y in p)
            out.append(f'<polyline class="series" data-name="{name}" fill="none" '
                       f'stroke="{color}" stroke-width="1.5" points="{coords}"/>')
        ly = mt + 15 + 18 * i
        out.append(f'<line x1="{ml + pw + 10}" y1="{ly}" x2="{ml + pw + 30}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{ml + pw + 35}" y="{ly + 4}">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(records: Sequence[SweepRecord], kind: str, path) -> None:
    """Scaled gap ratios against h (log axis). ``kind`` is one ratio name or "all"."""
    if not records:
        raise ValueError("no records to plot")
    kinds = RATIO_KINDS if kind == "all" else (kind,)
    for k in kinds:
        if k not in RATIO_KINDS:
            raise ValueError(f"unknown plot kind {kind!r}")
    hs = [r.h for r in records]
    series = {k: (hs, [getattr(r, k) for r in records]) for k in kinds}
    _write_text(path, svg_plot(series, xlog=True, xlabel="h", ylabel="gap / prediction",
                               title="scaled gap ratios"))


def _write_text(path, text: str) -> None:
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
