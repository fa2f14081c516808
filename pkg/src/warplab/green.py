"""Minimal positive Green's function with pole at the tip, and the
distance-like function built from it.

On a warped product the Laplacian of a radial function u is
u'' + (n-1)(f'/f) u', so the Green's function with pole at the tip is the
exact quadrature

    G(rho) = (n-2) * integral_rho^infinity f(s)^{1-n} ds,

normalized so that G = rho^{2-n} on flat space.  The distance-like function
b = G^{1/(2-n)} then has closed-form derivatives in terms of w = b/f:

    b'   = w^{n-1}
    b''  = (n-1) w^{n-2} w',             w'  = (b' - w f') / f
    b''' = (n-1) [(n-2) w^{n-3} w'^2 + w^{n-2} w''],
                                         w'' = (b'' - 2 w' f' - w f'') / f

A single cumulative quadrature of f^{1-n} therefore makes every downstream
quantity (level-set areas, |grad b|, the trace-free Hessian density) a smooth
closed-form function of the radius.  The quadrature accumulates from the far
end so that G keeps full relative precision where it is tiny; the tail beyond
the grid is integrated analytically per profile family.

The trace-free Hessian density of u = b^2 is, in the radial frame,

    Q = (n-1)/n * (u'' - (f'/f) u')^2  +  (2 b b')^2 (n-1) (-f''/f)
      = 4 n (n-1) b'^2 (b' - (b/f) f')^2  +  4 (n-1) b^2 b'^2 (-f''/f),

where the first term is |Hess_{b^2} - (Lap b^2 / n) g|^2 (the harmonicity of
G supplies u'' = 2n b'^2 - (n-1)(f'/f) u') and the second is
Ric(grad b^2, grad b^2).  Q >= 0 termwise, and Q = 0 identically iff the
profile is flat.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .profiles import ManifoldModel, sphere_area
from .quadrature import CumulativeIntegral, PanelGrid

__all__ = [
    "GreenData", "LevelData", "RangeError", "TailRegimeError",
    "solve_green", "rho_of_b", "level_quantities", "hessian_integrand",
]


class RangeError(ValueError):
    """Query outside the representable range; carries the valid interval."""

    def __init__(self, message, lo, hi):
        super().__init__(message)
        self.lo = lo
        self.hi = hi


class TailRegimeError(ValueError):
    """Grid ends before the profile reaches its asymptotic regime."""


def _tail_integral(model: ManifoldModel, rho_max: float) -> float:
    """integral_{rho_max}^infinity f^{1-n} ds in closed form."""
    n = model.n
    p = model.profile
    a = p.slope_at_infinity
    if p.family == "euclidean" or (p.family == "power_growth" and p.params[0] == 1.0):
        return rho_max ** (2 - n) / (n - 2)
    if p.family == "exp_cone":
        a = p.params[0]
        c = 1.0 - a
        if c * math.exp(-rho_max) > 1e-6:
            raise TailRegimeError(
                f"|f' - a| = {c * math.exp(-rho_max):.2e} > 1e-6 at rho_max; "
                f"increase rho_max (>= {math.log(max(c, 1e-300) / 1e-6):.0f})")
        base = (a * rho_max + c) ** (2 - n) / (a * (n - 2))
        # first-order correction for the dropped c*exp(-s) term
        base += (n - 1) * c * math.exp(-rho_max) * (a * rho_max + c) ** (-n)
        return base
    # power_growth, beta < 1: f^{1-n} = beta^{n-1} (1+s)^{-beta(n-1)} (1-x)^{1-n}
    # with x = (1+s)^{-beta}; expand (1-x)^{1-n} binomially and integrate.
    beta = p.params[0]
    x = (1.0 + rho_max) ** (-beta)
    if x > 0.05:
        need = (0.05) ** (-1.0 / beta) - 1.0
        raise TailRegimeError(
            f"power tail parameter (1+rho_max)^-beta = {x:.2e} > 0.05; "
            f"increase rho_max (>= {need:.3g})")
    total = 0.0
    coeff = 1.0  # binomial(n-2+k, k)
    for k in range(60):
        expo = beta * (n - 1 + k) - 1.0
        term = coeff * (1.0 + rho_max) ** (-expo) / expo
        total += term
        if abs(term) < 1e-18 * abs(total):
            break
        coeff *= (n - 1 + k) / (k + 1.0)
    return beta ** (n - 1) * total


@dataclass
class LevelData:
    """Geometry of one level set {b = r}."""

    r: float
    rho: float
    area: float
    grad_b: float


class GreenData:
    """Tabulated Green's function plus smooth off-grid evaluators.

    The public columns (rho_grid, G, b, db) live on the log-spaced grid; all
    methods accept arbitrary radii inside [rho_min, rho_max] and evaluate
    through the panel quadrature, so they are smooth to machine precision
    (safe to feed to finite differences).
    """

    def __init__(self, model: ManifoldModel, grid: PanelGrid, tail: float):
        self.model = model
        self._grid = grid
        n = model.n
        f_pow = lambda s: model.profile.f(s) ** (1 - n)
        self._green_cum = CumulativeIntegral(grid, f_pow, from_right=True)
        self._tail = tail
        self._cum_cache: dict[str, CumulativeIntegral] = {}

        self.rho_grid = grid.edges.copy()
        self.G = self.green_value(self.rho_grid)
        self.b = self.b_of(self.rho_grid)
        self.db = self.db_of(self.rho_grid)
        self.tail_slope = model.profile.slope_at_infinity
        self.harmonic_residual = self._harmonic_residual()

    # -- closed-form evaluators ------------------------------------------

    @property
    def rho_min(self) -> float:
        return float(self.rho_grid[0])

    @property
    def rho_max(self) -> float:
        return float(self.rho_grid[-1])

    def green_value(self, rho):
        n = self.model.n
        return (n - 2) * (self._green_cum(rho) + self._tail)

    def b_of(self, rho):
        n = self.model.n
        return self.green_value(rho) ** (-1.0 / (n - 2))

    def db_of(self, rho, b=None):
        n = self.model.n
        b = self.b_of(rho) if b is None else b
        f = self.model.profile.f(rho)
        return (b / f) ** (n - 1)

    def _w_chain(self, rho):
        """w = b/f and its first two derivatives; shared by b'', b'''."""
        p = self.model.profile
        b = self.b_of(rho)
        f, df, d2f = p.f(rho), p.df(rho), p.d2f(rho)
        w = b / f
        n = self.model.n
        db = w ** (n - 1)
        dw = (db - w * df) / f
        d2b = (n - 1) * w ** (n - 2) * dw
        d2w = (d2b - 2.0 * dw * df - w * d2f) / f
        d3b = (n - 1) * ((n - 2) * w ** (n - 3) * dw ** 2 + w ** (n - 2) * d2w)
        return b, f, df, d2f, w, db, d2b, d3b

    def d2b_of(self, rho):
        return self._w_chain(rho)[6]

    def d3b_of(self, rho):
        return self._w_chain(rho)[7]

    def hessian_density(self, rho):
        """Q = |Hess_{b^2} - (Lap b^2/n) g|^2 + Ric(grad b^2, grad b^2)."""
        n = self.model.n
        b, f, df, d2f, w, db, _, _ = self._w_chain(rho)
        shear = db - w * df
        return (4.0 * n * (n - 1) * db ** 2 * shear ** 2
                + 4.0 * (n - 1) * b ** 2 * db ** 2 * (-d2f / f))

    def tracefree_hessian_norm(self, rho):
        """|Hess_{b^2} - (Lap b^2 / n) g| (the L^1 integrand)."""
        n = self.model.n
        _, _, df, _, w, db, _, _ = self._w_chain(rho)
        return 2.0 * math.sqrt(n * (n - 1)) * db * np.abs(db - w * df)

    def log_green_slope(self, rho):
        """(log G)' = (2 - n) b'/b."""
        b = self.b_of(rho)
        return (2 - self.model.n) * self.db_of(rho, b=b) / b

    # -- inversion and level sets ----------------------------------------

    def rho_of_b(self, r):
        """Radius rho with b(rho) = r, by Newton with a table warm start."""
        r_arr = np.atleast_1d(np.asarray(r, dtype=float))
        lo, hi = float(self.b[0]), float(self.b[-1])
        if np.any(r_arr < lo) or np.any(r_arr > hi):
            raise RangeError(
                f"b-level outside representable range [{lo:.6g}, {hi:.6g}]",
                lo, hi)
        rho = np.interp(np.log(r_arr), np.log(self.b), np.log(self.rho_grid))
        rho = np.exp(rho)
        for _ in range(60):
            err = self.b_of(rho) - r_arr
            step = err / self.db_of(rho)
            rho = np.clip(rho - step, self.rho_min, self.rho_max)
            if np.all(np.abs(err) <= 1e-14 * r_arr):
                break
        return rho if np.ndim(r) else float(rho[0])

    def level(self, r: float) -> LevelData:
        rho = self.rho_of_b(r)
        n = self.model.n
        area = sphere_area(n) * float(self.model.profile.f(rho)) ** (n - 1)
        return LevelData(r=float(r), rho=float(rho), area=area,
                         grad_b=float(self.db_of(rho)))

    # -- cached cumulative integrals --------------------------------------

    def _volume_weight(self, rho):
        return self.model.profile.f(rho) ** (self.model.n - 1)

    def _integrand(self, key: str) -> Callable:
        n = self.model.n
        if key == "volume":
            return self._volume_weight
        if key == "hessian_vol":
            return lambda s: self.hessian_density(s) * self._volume_weight(s)
        if key == "hessian_bn":
            return lambda s: (self.hessian_density(s) * self.b_of(s) ** (-n)
                              * self._volume_weight(s))
        if key == "hessian_b22n":
            return lambda s: (self.hessian_density(s)
                              * self.b_of(s) ** (2 - 2 * n)
                              * self._volume_weight(s))
        if key == "gradb4":
            return lambda s: self.db_of(s) ** 4 * self._volume_weight(s)
        if key == "gradb2":
            return lambda s: self.db_of(s) ** 2 * self._volume_weight(s)
        if key == "tracefree_l1":
            return lambda s: (self.tracefree_hessian_norm(s)
                              * self._volume_weight(s))
        if key == "tail_volume":
            # integrand of V_infty after substituting the level radius:
            # (|grad b|^2 - 1) |grad b| / b
            def fn(s):
                b = self.b_of(s)
                db = self.db_of(s, b=b)
                return (db ** 2 - 1.0) * db / b
            return fn
        raise KeyError(f"unknown integrand {key!r}")

    def cumulative(self, key: str, fn: Callable | None = None,
                   from_right: bool = False) -> CumulativeIntegral:
        """Cumulative integral of a radial density from rho_min.

        Named built-in densities are listed in _integrand; callers may also
        register their own density under a fresh key by passing fn.  Pass
        from_right=True for densities that blow up toward the pole (weights
        b^{2-2n} and the like): accumulating from the far end keeps annulus
        integrals at moderate radii free of catastrophic cancellation
        against the large pole contribution.
        """
        cache_key = (key, from_right)
        if cache_key not in self._cum_cache:
            self._cum_cache[cache_key] = CumulativeIntegral(
                self._grid, fn if fn is not None else self._integrand(key),
                from_right=from_right)
        return self._cum_cache[cache_key]

    def ball_integral(self, key: str, r, fn: Callable | None = None):
        """Integral of a named density over the sublevel set {b <= r}.

        The sphere factor omega_{n-1} is included; the region below rho_min
        (a coordinate ball of radius 1e-6 by default) is neglected, which is
        an O(rho_min^n)-relative effect for the densities used here.
        """
        rho = self.rho_of_b(r)
        return sphere_area(self.model.n) * self.cumulative(key, fn)(rho)

    def annulus_integral(self, key: str, r1, r2, fn: Callable | None = None,
                         from_right: bool = False):
        """Integral of a named density over {r1 <= b <= r2}."""
        rho1 = self.rho_of_b(r1)
        rho2 = self.rho_of_b(r2)
        return sphere_area(self.model.n) * self.cumulative(
            key, fn, from_right).between(rho1, rho2)

    # -- verification and export ------------------------------------------

    def _harmonic_residual(self) -> float:
        """Scaled residual of the Green ODE from 6th-order differences.

        In x = log rho the ODE reads G_xx + ((n-1) rho f'/f - 1) G_x = 0;
        both derivatives come from the tabulated column, so this is a genuine
        consistency check of the quadrature, not an algebraic identity.
        """
        G = self.G
        x = np.log(self.rho_grid)
        h = x[1] - x[0]
        c = (self.model.n - 1) * (self.rho_grid * self.model.profile.df(self.rho_grid)
                                  / self.model.profile.f(self.rho_grid)) - 1.0
        i = slice(3, len(G) - 3)
        gx = (-G[:-6] + 9 * G[1:-5] - 45 * G[2:-4]
              + 45 * G[4:-2] - 9 * G[5:-1] + G[6:]) / (60 * h)
        gxx = (2 * G[:-6] - 27 * G[1:-5] + 270 * G[2:-4] - 490 * G[3:-3]
               + 270 * G[4:-2] - 27 * G[5:-1] + 2 * G[6:]) / (180 * h * h)
        res = gxx + c[i] * gx
        scale = np.maximum(np.abs(gxx), np.maximum(np.abs(gx), np.abs(G[i])))
        return float(np.max(np.abs(res) / scale))

    def dump_csv(self, path):
        """Write the rho, G, b, db, Q table (schema warplab-green-v1)."""
        q = self.hessian_density(self.rho_grid)
        with open(path, "w") as fh:
            fh.write("# warplab-green-v1\n")
            fh.write("rho,G,b,db,Q\n")
            for row in zip(self.rho_grid, self.G, self.b, self.db, q):
                fh.write(",".join(format(v, ".17g") for v in row) + "\n")


def solve_green(model: ManifoldModel, rho_min: float = 1e-6,
                rho_max: float = 1e8, points: int = 2400) -> GreenData:
    """Build GreenData for an admissible model.

    points is the number of grid nodes (>= 200); the quadrature panels are
    the gaps between nodes.  The harmonic residual of the resulting table is
    checked against 1e-8 before returning.
    """
    if not (0.0 < rho_min < rho_max):
        raise ValueError("need 0 < rho_min < rho_max")
    if points < 200:
        raise ValueError("need points >= 200")
    tail = _tail_integral(model, rho_max)
    grid = PanelGrid(rho_min, rho_max, points - 1, order=12)
    data = GreenData(model, grid, tail)
    if data.harmonic_residual > 1e-8:
        raise RuntimeError(
            f"harmonic residual {data.harmonic_residual:.2e} exceeds 1e-8; "
            "increase points")
    return data


def rho_of_b(green: GreenData, r):
    """Module-level alias for GreenData.rho_of_b."""
    return green.rho_of_b(r)


def level_quantities(green: GreenData, r: float) -> LevelData:
    """Level radius, area and |grad b| of the level set {b = r}.

    Level integrals of a radial v reduce to v(rho) * area * |grad b|-weights
    chosen by the caller; the constancy of r^{1-n} * area * |grad b| is the
    basic sanity check (it equals omega_{n-1} for every r).
    """
    return green.level(r)


def hessian_integrand(green: GreenData, rho):
    """Module-level alias for GreenData.hessian_density."""
    return green.hessian_density(rho)
