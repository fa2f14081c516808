"""Monotone quantities of the Green's function and their identity residuals.

The three basic quantities, all normalized so they are constant on flat
space, are level/ball averages of powers of |grad b|:

    A(r)      = r^{1-n} * integral over {b = r} of |grad b|^3
    V(r)      = r^{-n}  * integral over {b <= r} of |grad b|^4
    Vinf(r)   = integral_1^r (A(s) - omega_{n-1}) / s ds

On every admissible model three exact identities connect their derivatives
to ball integrals of the trace-free Hessian density Q (see green.py):

    (A - 2(n-1) V)'                 = 1/2 r^{-1-n} * int_{b<=r} Q
    (2-n)(A - omega) + r A'         = 1/2 * int_{b<=r} Q b^{-n}
    r2^{3-n} A'(r2) - r1^{3-n} A'(r1) = 1/2 * int_{r1<=b<=r2} Q b^{2-2n}

together with the coarea relation r V' = A - n V, the reparametrized
derivative J'(s) = A - omega - (n-2) Vinf under s = r^{2-n}, and a transfer
identity for the drift Laplacian L u = Lap u + 2 <grad log G, grad u>.
Left-hand sides are differentiated numerically (Richardson-extrapolated
central differences), right-hand sides are quadratures, so every residual is
a genuine two-route cross-check.

Residual vectors in MonotoneReport are *scaled*: |lhs - rhs| divided by
max(|lhs|, |rhs|, floor) with a dimensionally matching floor, so a value of
1e-6 means agreement to six digits relative to the natural size of the
identity at that radius.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .green import GreenData
from .profiles import ball_volume, sphere_area
from .quadrature import richardson_derivative

__all__ = [
    "RadialFunction", "MonotoneReport", "GradientReport", "PoleFit",
    "area_ratio", "volume_ratio", "tail_volume", "i1_value",
    "i_functional", "i_functional_deriv", "drift_laplacian",
    "radial_constant", "b_power", "grad_b_squared",
    "theorem_residuals", "gradient_suite", "pole_laplacian_estimate",
]


# ---------------------------------------------------------------------------
# basic functionals

def area_ratio(green: GreenData, r):
    """A(r) = r^{1-n} * area(b=r) * |grad b|^3 (flat value: omega_{n-1})."""
    r = np.asarray(r, dtype=float)
    n = green.model.n
    rho = green.rho_of_b(r)
    f = green.model.profile.f(rho)
    db = green.db_of(rho)
    return sphere_area(n) * r ** (1 - n) * f ** (n - 1) * db ** 3


def volume_ratio(green: GreenData, r):
    """V(r) = r^{-n} * int_{b<=r} |grad b|^4 (flat value: Vol(B_1))."""
    r = np.asarray(r, dtype=float)
    n = green.model.n
    rho = green.rho_of_b(r)
    # near-Euclidean stub for the coordinate ball below rho_min
    stub = float(green.db_of(green.rho_min)) ** 4 * green.rho_min ** n / n
    return sphere_area(n) * (green.cumulative("gradb4")(rho) + stub) * r ** (-n)


def tail_volume(green: GreenData, r):
    """Vinf(r) = int_1^r (A(s) - omega_{n-1})/s ds (signed for r < 1)."""
    r = np.asarray(r, dtype=float)
    cum = green.cumulative("tail_volume")
    anchor = cum(green.rho_of_b(1.0))
    return sphere_area(green.model.n) * (cum(green.rho_of_b(r)) - anchor)


def i1_value(green: GreenData, r):
    """I_1(r) = r^{1-n} * area(b=r) * |grad b|; constant equal to omega."""
    r = np.asarray(r, dtype=float)
    n = green.model.n
    rho = green.rho_of_b(r)
    f = green.model.profile.f(rho)
    return sphere_area(n) * r ** (1 - n) * f ** (n - 1) * green.db_of(rho)


# ---------------------------------------------------------------------------
# radial test functions and the drift Laplacian

@dataclass(frozen=True)
class RadialFunction:
    """A radial function with enough derivatives for the drift Laplacian."""

    value: Callable
    deriv: Callable
    deriv2: Callable
    name: str = ""


def radial_constant(c: float) -> RadialFunction:
    return RadialFunction(
        value=lambda s: np.full_like(np.asarray(s, dtype=float), c),
        deriv=lambda s: np.zeros_like(np.asarray(s, dtype=float)),
        deriv2=lambda s: np.zeros_like(np.asarray(s, dtype=float)),
        name=f"const({c})")


def b_power(green: GreenData, k: float) -> RadialFunction:
    """u = b^k with derivatives through the closed-form chain."""

    def val(s):
        return green.b_of(s) ** k

    def d1(s):
        b = green.b_of(s)
        return k * b ** (k - 1) * green.db_of(s, b=b)

    def d2(s):
        b = green.b_of(s)
        db = green.db_of(s, b=b)
        return k * (k - 1) * b ** (k - 2) * db ** 2 + k * b ** (k - 1) * green.d2b_of(s)

    return RadialFunction(val, d1, d2, name=f"b^{k:g}")


def grad_b_squared(green: GreenData) -> RadialFunction:
    """u = |grad b|^2 = b'(rho)^2."""

    def val(s):
        return green.db_of(s) ** 2

    def d1(s):
        return 2.0 * green.db_of(s) * green.d2b_of(s)

    def d2(s):
        return 2.0 * (green.d2b_of(s) ** 2 + green.db_of(s) * green.d3b_of(s))

    return RadialFunction(val, d1, d2, name="|grad b|^2")


def drift_laplacian(green: GreenData, u: RadialFunction, rho):
    """L u = u'' + (n-1)(f'/f) u' + 2 (log G)' u' at radius rho."""
    rho = np.asarray(rho, dtype=float)
    p = green.model.profile
    n = green.model.n
    du = u.deriv(rho)
    return (u.deriv2(rho) + (n - 1) * (p.df(rho) / p.f(rho)) * du
            + 2.0 * green.log_green_slope(rho) * du)


def i_functional(green: GreenData, u: RadialFunction, r):
    """I_u(r) = r^{1-n} int_{b=r} u |grad b| = omega * u(rho(r))."""
    rho = green.rho_of_b(np.asarray(r, dtype=float))
    return sphere_area(green.model.n) * u.value(rho)


def i_functional_deriv(green: GreenData, u: RadialFunction, r):
    """I_u'(r) via the normal-derivative surface integral.

    The outward normal of {b <= r} is the radial direction, so
    I_u' = r^{1-n} int_{b=r} u_n = omega * u'(rho) f^{n-1} r^{1-n}.
    """
    r = np.asarray(r, dtype=float)
    rho = green.rho_of_b(r)
    n = green.model.n
    f = green.model.profile.f(rho)
    return sphere_area(n) * u.deriv(rho) * f ** (n - 1) * r ** (1 - n)


def _ltransfer_density(green: GreenData):
    """(L |grad b|^2) * G^2 * f^{n-1}, the transfer-identity bulk term."""
    u = grad_b_squared(green)
    n = green.model.n

    def fn(s):
        b = green.b_of(s)
        g2 = b ** (2 * (2 - n))
        return (drift_laplacian(green, u, s) * g2
                * green.model.profile.f(s) ** (n - 1))

    return fn


# ---------------------------------------------------------------------------
# the identity report

@dataclass
class MonotoneReport:
    r_grid: np.ndarray
    A: np.ndarray
    V: np.ndarray
    Vinf: np.ndarray
    dA: np.ndarray
    dV: np.ndarray
    dVinf: np.ndarray
    rhs_main: np.ndarray
    rhs_second: np.ndarray
    rhs_third: np.ndarray
    residual_main: np.ndarray
    residual_second: np.ndarray
    residual_second_e2: np.ndarray
    residual_third: np.ndarray
    residual_coarea: np.ndarray
    residual_J: np.ndarray
    residual_ltransfer: np.ndarray
    sup_db_outside: np.ndarray

    def dump_csv(self, path):
        """CSV export (schema warplab-monotone-v1)."""
        cols = ["r", "A", "V", "Vinf", "dA", "dV", "rhs_main", "residual_main",
                "residual_second", "residual_third", "residual_coarea",
                "residual_J", "sup_db_outside"]
        data = [self.r_grid, self.A, self.V, self.Vinf, self.dA, self.dV,
                self.rhs_main, self.residual_main, self.residual_second,
                self.residual_third, self.residual_coarea, self.residual_J,
                self.sup_db_outside]
        with open(path, "w") as fh:
            fh.write("# warplab-monotone-v1\n")
            fh.write(",".join(cols) + "\n")
            for row in zip(*data):
                fh.write(",".join(format(v, ".17g") for v in row) + "\n")


def _scaled(lhs, rhs, floor):
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    scale = np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), floor)
    return np.abs(lhs - rhs) / scale


def theorem_residuals(green: GreenData, r_grid) -> MonotoneReport:
    """Evaluate every derivative/quadrature identity on a radius grid.

    Derivatives of A, V, Vinf (and of the reparametrized quantities) use
    Richardson-extrapolated central differences with relative step 1e-3; the
    pair-form identities (third monotonicity, drift-Laplacian transfer) are
    evaluated over consecutive grid radii, with the final slot repeating the
    last pair so all columns share the grid length.
    """
    r = np.asarray(r_grid, dtype=float)
    if r.ndim != 1 or len(r) < 50 or np.any(np.diff(r) <= 0):
        raise ValueError("need an increasing radius grid with >= 50 points")
    n = green.model.n
    omega = sphere_area(n)

    A = area_ratio(green, r)
    V = volume_ratio(green, r)
    Vinf = tail_volume(green, r)
    dA = richardson_derivative(lambda x: area_ratio(green, x), r)
    dV = richardson_derivative(lambda x: volume_ratio(green, x), r)
    dVinf = richardson_derivative(lambda x: tail_volume(green, x), r)

    rho = green.rho_of_b(r)
    hess_ball = sphere_area(n) * green.cumulative("hessian_vol")(rho)
    # Q b^{-n} f^{n-1} tends to a nonzero constant at the pole for profiles
    # with tip curvature; an endpoint-value stub covers [0, rho_min].
    bn_stub = float(green.cumulative("hessian_bn").fn(
        np.array([green.rho_min]))[0]) * green.rho_min
    hess_bn = sphere_area(n) * (green.cumulative("hessian_bn")(rho) + bn_stub)

    # first monotonicity
    lhs_main = dA - 2.0 * (n - 1) * dV
    rhs_main = 0.5 * r ** (-1 - n) * hess_ball
    residual_main = _scaled(lhs_main, rhs_main, omega / r)

    # second monotonicity, both forms
    lhs_sec = (2.0 - n) * (A - omega) + r * dA
    rhs_sec = 0.5 * hess_bn
    residual_second = _scaled(lhs_sec, rhs_sec, omega)

    d_second = richardson_derivative(
        lambda x: x ** (2 - n) * (area_ratio(green, x) - omega), r)
    rhs_sec2 = 0.5 * r ** (1 - n) * hess_bn
    residual_second_e2 = _scaled(d_second, rhs_sec2, omega * r ** (1 - n))

    # third monotonicity over consecutive radius pairs; the b^{2-2n} weight
    # diverges at the pole, so its cumulative runs from the far end
    m = len(r)
    rhs_third = np.zeros(m)
    residual_third = np.zeros(m)
    pair_lhs = r[1:] ** (3 - n) * dA[1:] - r[:-1] ** (3 - n) * dA[:-1]
    pair_rhs = 0.5 * np.array(
        sphere_area(n) * green.cumulative(
            "hessian_b22n", from_right=True).between(rho[:-1], rho[1:]))
    rhs_third[:-1] = pair_rhs
    residual_third[:-1] = _scaled(pair_lhs, pair_rhs, omega * r[1:] ** (2 - n))
    rhs_third[-1] = rhs_third[-2]
    residual_third[-1] = residual_third[-2]

    # coarea relation
    residual_coarea = _scaled(dV, (A - n * V) / r, omega / r)

    # J under the substitution s = r^{2-n}
    s = r ** (2.0 - n)

    def j_of(s_val):
        rr = s_val ** (1.0 / (2.0 - n))
        return -(n - 2.0) * s_val * tail_volume(green, rr)

    dJ = richardson_derivative(j_of, s)
    rhs_J = A - omega - (n - 2.0) * Vinf
    residual_J = _scaled(dJ, rhs_J, omega)

    # drift-Laplacian transfer for u = |grad b|^2 over consecutive pairs;
    # L u * G^2 shares the pole divergence of the b^{2-2n} weight
    u = grad_b_squared(green)
    iu_prime = i_functional_deriv(green, u, r)
    bulk = sphere_area(n) * green.cumulative(
        "ltransfer", _ltransfer_density(green),
        from_right=True).between(rho[:-1], rho[1:])
    lt_lhs = iu_prime[1:]
    lt_rhs = (r[1:] ** (n - 3) * r[:-1] ** (3 - n) * iu_prime[:-1]
              + r[1:] ** (n - 3) * bulk)
    residual_ltransfer = np.zeros(m)
    residual_ltransfer[:-1] = _scaled(lt_lhs, lt_rhs, omega / r[1:])
    residual_ltransfer[-1] = residual_ltransfer[-2]

    # running sup of |grad b| outside {b >= r}
    suffix = np.maximum.accumulate(green.db[::-1])[::-1]
    idx = np.searchsorted(green.rho_grid, rho)
    idx = np.clip(idx, 0, len(suffix) - 1)
    sup_db_outside = np.maximum(green.db_of(rho), suffix[idx])

    return MonotoneReport(
        r_grid=r, A=A, V=V, Vinf=Vinf, dA=dA, dV=dV, dVinf=dVinf,
        rhs_main=rhs_main, rhs_second=rhs_sec, rhs_third=rhs_third,
        residual_main=residual_main, residual_second=residual_second,
        residual_second_e2=residual_second_e2, residual_third=residual_third,
        residual_coarea=residual_coarea, residual_J=residual_J,
        residual_ltransfer=residual_ltransfer, sup_db_outside=sup_db_outside)


# ---------------------------------------------------------------------------
# gradient estimates

@dataclass
class GradientReport:
    max_grad_b: float
    sharp_bound_ok: bool            # |grad b| <= 1 + 1e-10 everywhere
    green_gradient_ratio: float     # max |grad G| / ((n-2) G^{(n-1)/(n-2)})
    sup_outside_monotone: bool      # sup_{b>=r} |grad b| nonincreasing in r
    asymptotic_limit: float         # a^{(n-1)/(n-2)} (zero for slope 0)
    grad_b_far: float               # |grad b| at rho = 1e3
    asymptotic_ok: bool


def gradient_suite(green: GreenData, probe_rho: float = 1e3) -> GradientReport:
    """Sharp and asymptotic gradient checks for one model.

    For profiles with positive asymptotic slope a the far-field value of
    |grad b| is compared against a^{(n-1)/(n-2)} at the probe radius (1%
    tolerance); for sub-Euclidean growth the check is |grad b| < 0.05 there.
    """
    n = green.model.n
    a = green.tail_slope
    db_all = np.concatenate([[float(green.db_of(green.rho_min))], green.db])
    max_db = float(np.max(db_all))
    ratio = max_db  # |grad G| / ((n-2) G^{(n-1)/(n-2)}) equals |grad b| here
    suffix = np.maximum.accumulate(green.db[::-1])[::-1]
    sup_monotone = bool(np.all(np.diff(suffix) <= 1e-12))
    db_far = float(green.db_of(probe_rho))
    if a > 0:
        limit = a ** ((n - 1) / (n - 2))
        ok = abs(db_far - limit) <= 0.01 * limit
    else:
        limit = 0.0
        ok = db_far < 0.05
    return GradientReport(
        max_grad_b=max_db, sharp_bound_ok=max_db <= 1.0 + 1e-10,
        green_gradient_ratio=ratio, sup_outside_monotone=sup_monotone,
        asymptotic_limit=limit, grad_b_far=db_far, asymptotic_ok=ok)


# ---------------------------------------------------------------------------
# pole behaviour

@dataclass
class PoleFit:
    c0: float
    c2: float
    delta_estimate: float     # 2 n c2: Laplacian at the pole of c0 + c2 rho^2
    rms_residual: float
    max_residual: float
    cond: float


def pole_laplacian_estimate(green: GreenData, lo: float = 1e-5,
                            hi: float = 1e-3, points: int = 41) -> PoleFit:
    """Fit |grad b|^2 ~ c0 + c2 rho^2 near the pole.

    The Laplacian of the fitted even profile at the pole is 2 n c2 (each of
    the n coordinate directions contributes 2 c2).  The fit residual is the
    smallness certificate for the pole-regularity hypothesis of the
    low-dimensional derivative identities: profiles whose curvature is
    singular at the tip pick up an O(rho) term that the even model cannot
    represent, and the residual reports exactly that defect.
    """
    if green.model.n != 4:
        raise ValueError("pole Laplacian estimate is defined for n = 4 models")
    rho = np.geomspace(lo, hi, points)
    y = green.db_of(rho) ** 2
    col = (rho / hi) ** 2
    design = np.column_stack([np.ones_like(rho), col])
    cond = float(np.linalg.cond(design))
    if cond > 1e12:
        raise RuntimeError(f"pole fit ill-conditioned: cond = {cond:.2e}")
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    c0 = float(coef[0])
    c2 = float(coef[1] / hi ** 2)
    resid = y - (c0 + c2 * rho ** 2)
    return PoleFit(
        c0=c0, c2=c2, delta_estimate=2 * green.model.n * c2,
        rms_residual=float(np.sqrt(np.mean(resid ** 2))),
        max_residual=float(np.max(np.abs(resid))), cond=cond)
