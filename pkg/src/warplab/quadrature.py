"""Panel Gauss-Legendre quadrature on log-spaced grids.

Radial quantities in this package span twenty or more decades in the radius,
so every integral is accumulated over log-spaced panels with a fixed-order
Gauss rule per panel.  Inside a panel the cumulative integral is a smooth
(polynomial-exact) function of the endpoint, which keeps finite differences
of integral-backed quantities clean: differentiating them probes the
function, not quadrature jitter.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

_GAUSS_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1], cached per order."""
    try:
        return _GAUSS_CACHE[order]
    except KeyError:
        xw = np.polynomial.legendre.leggauss(order)
        _GAUSS_CACHE[order] = xw
        return xw


class PanelGrid:
    """Log-spaced panels [edges[i], edges[i+1]] with Gauss nodes per panel."""

    def __init__(self, lo: float, hi: float, panels: int, order: int = 12):
        if not (0.0 < lo < hi):
            raise ValueError(f"need 0 < lo < hi, got lo={lo}, hi={hi}")
        if panels < 1:
            raise ValueError("need at least one panel")
        self.order = order
        self.edges = np.geomspace(lo, hi, panels + 1)
        x, w = gauss_nodes(order)
        mid = 0.5 * (self.edges[1:] + self.edges[:-1])
        half = 0.5 * np.diff(self.edges)
        self.nodes = mid[:, None] + half[:, None] * x          # (panels, order)
        self.node_weights = half[:, None] * w                  # (panels, order)

    @property
    def n_panels(self) -> int:
        return len(self.edges) - 1

    def locate(self, x):
        """Panel index containing each query point (clipped to valid range)."""
        idx = np.searchsorted(self.edges, x, side="right") - 1
        return np.clip(idx, 0, self.n_panels - 1)


def _partial_gauss(fn, a, b, order):
    """Vectorized Gauss integral of fn over [a_i, b_i] pairs."""
    x, w = gauss_nodes(order)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    pts = mid[..., None] + half[..., None] * x
    vals = fn(pts)
    return np.sum(vals * w, axis=-1) * half


class CumulativeIntegral:
    """Smooth evaluator of x -> integral of fn over [lo, x] (or [x, hi]).

    Full panels come from precomputed node values; the final partial panel is
    integrated on the fly, so the result is smooth in x to machine precision.
    With ``from_right=True`` the accumulation runs from hi downward, which
    avoids catastrophic cancellation for integrands concentrated near lo.
    """

    def __init__(self, grid: PanelGrid, fn: Callable, from_right: bool = False):
        self.grid = grid
        self.fn = fn
        self.from_right = from_right
        panel_sums = np.sum(fn(grid.nodes) * grid.node_weights, axis=1)
        if from_right:
            # edge_cum[i] = integral over [edges[i], hi]
            self.edge_cum = np.concatenate(
                [np.cumsum(panel_sums[::-1])[::-1], [0.0]])
        else:
            # edge_cum[i] = integral over [lo, edges[i]]
            self.edge_cum = np.concatenate([[0.0], np.cumsum(panel_sums)])

    def __call__(self, x):
        x_arr = np.atleast_1d(np.asarray(x, dtype=float))
        edges = self.grid.edges
        if np.any(x_arr < edges[0] * (1 - 1e-12)) or np.any(
                x_arr > edges[-1] * (1 + 1e-12)):
            raise ValueError(
                f"query outside quadrature range [{edges[0]}, {edges[-1]}]")
        x_arr = np.clip(x_arr, edges[0], edges[-1])
        idx = self.grid.locate(x_arr)
        if self.from_right:
            # integral over [x, hi] = partial over [x, right edge] + stored
            out = self.edge_cum[idx + 1] + _partial_gauss(
                self.fn, x_arr, edges[idx + 1], self.grid.order)
        else:
            out = self.edge_cum[idx] + _partial_gauss(
                self.fn, edges[idx], x_arr, self.grid.order)
        return out if np.ndim(x) else float(out[0])

    def between(self, a, b):
        """Integral of fn over [a, b]."""
        if self.from_right:
            return self(a) - self(b)
        return self(b) - self(a)


def integrate_panels(fn, lo, hi, panels=200, order=12):
    """One-shot panel integral with an error estimate from order reduction."""
    grid = PanelGrid(lo, hi, panels, order)
    best = float(np.sum(fn(grid.nodes) * grid.node_weights))
    xc, wc = gauss_nodes(order // 2)
    mid = 0.5 * (grid.edges[1:] + grid.edges[:-1])
    half = 0.5 * np.diff(grid.edges)
    coarse_nodes = mid[:, None] + half[:, None] * xc
    coarse = float(np.sum(fn(coarse_nodes) * (half[:, None] * wc)))
    return best, abs(best - coarse)


def richardson_derivative(fn, x, rel_step: float = 1e-3):
    """First derivative by Richardson-extrapolated central differences.

    Central differences at steps h and h/2 are combined to fourth order.
    The step is relative: h = |x| * rel_step.
    """
    x = np.asarray(x, dtype=float)
    h = np.abs(x) * rel_step
    d1 = (fn(x + h) - fn(x - h)) / (2.0 * h)
    d2 = (fn(x + 0.5 * h) - fn(x - 0.5 * h)) / h
    return (4.0 * d2 - d1) / 3.0


def golden_minimize(fn, lo, hi, coarse: int = 64, iters: int = 80,
                    log_grid: bool = False):
    """Minimize a quasi-convex scalar function on [lo, hi].

    A coarse bracketing grid guards against non-unimodal edge cases; golden
    section then refines inside the bracketing cell.  Ties on the coarse grid
    break toward the larger argument.  Returns (argmin, min).
    """
    if log_grid:
        xs = np.geomspace(lo, hi, coarse)
    else:
        xs = np.linspace(lo, hi, coarse)
    vals = np.array([fn(x) for x in xs])
    best = len(vals) - 1 - int(np.argmin(vals[::-1]))   # ties -> larger x
    a = xs[max(best - 1, 0)]
    b = xs[min(best + 1, len(xs) - 1)]
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
        if b - a <= 1e-14 * max(1.0, abs(a)):
            break
    x_star = d if fd <= fc else c
    return x_star, fn(x_star)
