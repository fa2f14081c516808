"""Scale-invariant distance to cones, uniqueness criteria, and the Koch demo.

For a warped-product model the identity map onto the cone of slope a'
distorts distances by a dimension-free multiple of sup_{s<=r} |f(s) - a' s|,
so

    theta_hat(r) = min_{a' in (0,1]} (1/r) sup_{s<=r} |f(s) - a' s|

is a certified upper bound for the scale-invariant Gromov-Hausdorff distance
from the ball B_r at the tip to the nearest cone ball, vanishing exactly on
cones.  Because f is concave with f(0) = 0 and f'(0) = 1, the deviation
g = f - a' s is concave with g(0) = 0, so its sup over [0, r] is attained
either where f' = a' (closed form for every built-in family) or at the end
point; the outer minimization runs golden section over a bracketing grid.

The uniqueness criteria are numeric classifiers:

  * dini_check integrates theta^2 |log r|^alpha / r and classifies the tail
    by fitting log theta against log r and log log r on the last decade;
  * ode_criterion_check verifies -F' >= F^{1+alpha} pointwise and bounds
    the weighted integral of F' s^{1+beta} (the summability lemma);
  * unique_cone_scenario feeds F0 = 2(n-1)V - A - K from the monotone
    module into the ODE criterion, with K estimated from the large-radius
    plateau of 2(n-1)V - A.

fund_ratio_report forms the four ratio series that empirically fit the
constants of the theta-versus-Hessian bounds; the constants are
existence-only, so the fitted values are reported with a stability flag
rather than compared to anything.

The Koch construction bends a segment by a fixed angle at every dyadic
level; its theta series (Hausdorff distance in the plane against a chord
through the base vertex, an upper bound for the GH distance) is roughly
scale-independent and shrinks as the bend angle approaches pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .green import GreenData
from .heat import HeatData, _derivatives
from .monotone import area_ratio, volume_ratio
from .profiles import ManifoldModel, Profile, sphere_area
from .quadrature import golden_minimize, richardson_derivative

__all__ = [
    "ThetaSeries", "CriteriaVerdict", "FundRatioReport",
    "WeightedDistanceReport", "theta_hat", "theta_series", "dini_check",
    "summability_check", "ode_criterion_check", "unique_cone_scenario",
    "fund_ratio_report", "weighted_distance", "koch_polyline", "koch_theta",
]


# ---------------------------------------------------------------------------
# theta_hat

def _sup_line_deviation(profile: Profile, a1: float, r: float) -> float:
    """sup over [0, r] of |f(s) - a1 s|, exactly.

    g = f - a1 s is concave with g(0) = 0, so the sup of g sits where
    f' = a1 (clipped to [0, r]) and the inf at an endpoint.
    """
    fam = profile.family
    if fam == "euclidean" or (fam == "power_growth" and profile.params[0] == 1.0):
        return (1.0 - a1) * r
    if fam == "exp_cone":
        a = profile.params[0]
        if a1 <= a:
            s_peak = r
        elif a1 >= 1.0:
            s_peak = 0.0
        else:
            s_peak = min(r, -math.log((a1 - a) / (1.0 - a)))
    else:  # power_growth, beta < 1
        beta = profile.params[0]
        if a1 >= 1.0:
            s_peak = 0.0
        else:
            s_peak = min(r, math.exp(math.log(a1) / (beta - 1.0)) - 1.0)
    g_peak = float(profile.f(s_peak)) - a1 * s_peak
    g_end = float(profile.f(r)) - a1 * r
    return max(g_peak, 0.0, -g_end)


def theta_hat(model: ManifoldModel, r: float) -> tuple[float, float]:
    """Cone-distance surrogate at scale r and the minimizing cone slope."""
    if r <= 0:
        raise ValueError("scale must be positive")
    p = model.profile

    def objective(a1):
        return _sup_line_deviation(p, a1, r) / r

    best_a, val = golden_minimize(objective, 1e-9, 1.0, coarse=64)
    # a perfect fit should report slope exactly 1
    if objective(1.0) <= val + 1e-15:
        return float(objective(1.0)), 1.0
    return float(val), float(best_a)


@dataclass
class ThetaSeries:
    r_grid: np.ndarray
    theta: np.ndarray
    best_a: np.ndarray

    def interpolate(self, r):
        """Log-log interpolation of theta (linear tails)."""
        r = np.asarray(r, dtype=float)
        if np.all(self.theta == 0.0):
            return np.zeros_like(r)
        return np.exp(np.interp(np.log(r), np.log(self.r_grid),
                                np.log(np.maximum(self.theta, 1e-300))))

    def dump_csv(self, path):
        """CSV export (schema warplab-theta-v1)."""
        with open(path, "w") as fh:
            fh.write("# warplab-theta-v1\n")
            fh.write("r,theta,best_a\n")
            for row in zip(self.r_grid, self.theta, self.best_a):
                fh.write(",".join(format(v, ".17g") for v in row) + "\n")


def theta_series(model: ManifoldModel, r_grid) -> ThetaSeries:
    r = np.asarray(r_grid, dtype=float)
    vals = np.empty(len(r))
    slopes = np.empty(len(r))
    for i, ri in enumerate(r):
        vals[i], slopes[i] = theta_hat(model, float(ri))
    return ThetaSeries(r_grid=r, theta=vals, best_a=slopes)


# ---------------------------------------------------------------------------
# uniqueness criteria

@dataclass
class CriteriaVerdict:
    criterion: str            # dini_log | ode_decay | summability
    holds: bool
    value: float              # integral estimate or fitted exponent
    diagnostics: str

    def log_line(self) -> str:
        return (f"{self.criterion},{str(self.holds).lower()},"
                f"{format(self.value, '.10g')},{self.diagnostics}")


def dini_check(theta: ThetaSeries, alpha: float) -> CriteriaVerdict:
    """Convergence classification of int_1^inf theta^2 |log r|^alpha / r dr.

    The partial integral is accumulated on the sampled grid; the tail is
    classified from a fit of log theta against log r and log log r over the
    last decade (theta ~ C r^-p (log r)^-q).  An ambiguous fit (R^2 < 0.99)
    yields holds = False with the reason recorded.
    """
    if alpha <= 1.0:
        raise ValueError("the Dini criterion needs alpha > 1")
    r = theta.r_grid
    th = theta.theta
    if r[-1] < 1e4:
        raise ValueError("theta series must reach r >= 1e4 for the tail fit")
    if np.all(th == 0.0):
        return CriteriaVerdict("dini_log", True, 0.0,
                               "theta identically zero (exact cone)")

    sel = r >= 1.5  # integrand carries log r; start safely above 1
    logr = np.log(r[sel])
    integrand = th[sel] ** 2 * np.abs(logr) ** alpha / r[sel]
    partial = float(np.trapezoid(integrand * r[sel], logr))

    fit_sel = r >= r[-1] / 10.0
    x1 = np.log(r[fit_sel])
    x2 = np.log(np.log(r[fit_sel]))
    y = np.log(np.maximum(th[fit_sel], 1e-300))
    design = np.column_stack([np.ones_like(x1), x1, x2])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    pred = design @ coef
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    p = -float(coef[1])
    q = -float(coef[2])
    if r2 < 0.99:
        return CriteriaVerdict(
            "dini_log", False, partial,
            f"inconclusive: tail fit R^2 = {r2:.4f} < 0.99")

    # tail of C^2 r^{-2p-1} (log r)^{alpha-2q}
    if p > 1e-3:
        finite = True
    elif p < -1e-3:
        finite = False
    else:
        finite = (alpha - 2.0 * q) < -1.0

    # Cauchy check: half-decade increments must not grow
    edges = r[-1] * 10.0 ** np.array([-1.0, -0.5, 0.0])
    incs = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        seg = (r >= lo) & (r <= hi)
        if np.sum(seg) > 2:
            lr = np.log(r[seg])
            incs.append(float(np.trapezoid(
                th[seg] ** 2 * np.abs(lr) ** alpha, lr)))
    cauchy_ok = len(incs) < 2 or incs[-1] <= incs[0] * 1.02

    holds = finite and cauchy_ok
    diag = (f"fit theta ~ r^-{p:.3f} (log r)^-{q:.3f}, R^2={r2:.5f}; "
            f"partial integral {partial:.4g}; "
            f"tail {'finite' if finite else 'divergent'}; "
            f"increments {'Cauchy' if cauchy_ok else 'growing'}")
    return CriteriaVerdict("dini_log", holds, partial, diag)


def summability_check(s, F, beta: float) -> CriteriaVerdict:
    """Boundedness of int F' s^{1+beta} ds for a nonnegative decaying F.

    The sampled part is integrated directly; the tail is classified from
    the local log-log slope of -F' over the last decade (slope m gives a
    finite tail iff m > 2 + beta).
    """
    s = np.asarray(s, dtype=float)
    F = np.asarray(F, dtype=float)
    dF = np.gradient(F, s, edge_order=2)
    partial = float(np.trapezoid(dF * s ** (1.0 + beta), s))
    tail_sel = s >= s[-1] / 10.0
    neg = np.maximum(-dF[tail_sel], 1e-300)
    m = -float(np.polyfit(np.log(s[tail_sel]), np.log(neg), 1)[0])
    finite = m > 2.0 + beta
    diag = (f"partial integral {partial:.4g}; -F' ~ s^-{m:.3f} on the last "
            f"decade; needs decay beyond s^-{2 + beta:.3f}")
    return CriteriaVerdict("summability", finite, partial, diag)


def ode_criterion_check(s, F, alpha: float, epsilon: float) -> CriteriaVerdict:
    """Pointwise check of -F' >= F^{1+alpha} plus the summability bound.

    The derivative is a second-order central difference, so the pointwise
    inequality is tested with 1e-3 relative slack (the closed-form equality
    family must pass).  The first violating s is reported on failure.
    """
    if not (1.0 / alpha - 1.0 > 2.0 * epsilon >= 0.0):
        raise ValueError("need 1/alpha - 1 > 2 epsilon >= 0")
    s = np.asarray(s, dtype=float)
    F = np.asarray(F, dtype=float)
    if np.any(F < 0):
        raise ValueError("F must be nonnegative")
    dF = np.gradient(F, s, edge_order=2)
    rhs = F ** (1.0 + alpha)
    bad = np.where(-dF < rhs * (1.0 - 1e-3) - 1e-300)[0]
    if len(bad) > 0:
        i = bad[0]
        return CriteriaVerdict(
            "ode_decay", False, float(s[i]),
            f"-F' >= F^{1 + alpha:g} first violated at s = {s[i]:.6g} "
            f"(-F' = {-dF[i]:.4g} vs {rhs[i]:.4g})")
    summ = summability_check(s, F, 2.0 * epsilon)
    holds = bool(summ.holds)
    diag = f"ODE inequality holds on [{s[0]:.3g}, {s[-1]:.3g}]; {summ.diagnostics}"
    return CriteriaVerdict("ode_decay", holds, summ.value, diag)


def unique_cone_scenario(green: GreenData, alpha: float = 0.5,
                         epsilon: float = 0.2,
                         r_plateau: float = 1e3) -> CriteriaVerdict:
    """Tangent-cone uniqueness scenario driven by the monotone quantities.

    F0(r) = 2(n-1) V(r) - A(r) - K decays monotonically to zero (K is the
    large-radius plateau of 2(n-1)V - A); F(s) = F0(e^s) is fed to the ODE
    criterion.  The fitted exponential decay rate of F is recorded in the
    diagnostics.
    """
    if green.tail_slope <= 0:
        raise ValueError("scenario needs a Euclidean-volume-growth model")
    n = green.model.n

    def D(r):
        return 2.0 * (n - 1) * volume_ratio(green, r) - area_ratio(green, r)

    K = float(D(np.array([r_plateau]))[0])
    r = np.geomspace(1.0, r_plateau / 2.0, 400)
    F0 = np.asarray(D(r)) - K
    floor = 1e-8 * max(F0.max(), 1e-30)
    keep = F0 > floor
    # keep the contiguous range from the start; F0 decays monotonically
    last = int(np.argmin(keep)) if not keep.all() else len(F0)
    r, F0 = r[:last], F0[:last]
    if len(r) < 30:
        return CriteriaVerdict("ode_decay", False, 0.0,
                               "decay window too short above noise floor")
    s = np.log(r)
    verdict = ode_criterion_check(s, F0, alpha, epsilon)
    rate = -float(np.polyfit(s, np.log(F0), 1)[0])
    diag = (f"F0 = 2(n-1)V - A - K with K = {K:.8g}; fitted decay "
            f"F0 ~ exp(-{rate:.3f} s) over s in [0, {s[-1]:.3g}]; "
            + verdict.diagnostics)
    return CriteriaVerdict("ode_decay", verdict.holds, rate, diag)


# ---------------------------------------------------------------------------
# empirical constants for the theta-versus-Hessian bounds

@dataclass
class FundRatioSeries:
    name: str
    values: np.ndarray
    sup: float
    variation: float          # max/min over the last decade
    fit_slope: float          # d log ratio / d log r over the last decade
    fit_intercept: float
    stable: bool
    applicable: bool


@dataclass
class FundRatioReport:
    r_grid: np.ndarray
    series: list[FundRatioSeries]

    def by_name(self, name: str) -> FundRatioSeries:
        for s in self.series:
            if s.name == name:
                return s
        raise KeyError(name)


def _series_summary(name, r, vals, applicable=True) -> FundRatioSeries:
    if not applicable or np.any(~np.isfinite(vals)):
        return FundRatioSeries(name, vals, math.nan, math.nan, math.nan,
                               math.nan, False, False)
    window = r >= r[-1] / 10.0
    w = vals[window]
    variation = float(w.max() / w.min()) if w.min() > 0 else math.inf
    slope, intercept = np.polyfit(np.log(r[window]), np.log(w), 1)
    return FundRatioSeries(
        name=name, values=vals, sup=float(np.max(vals)),
        variation=variation, fit_slope=float(slope),
        fit_intercept=float(intercept),
        stable=bool(np.isfinite(variation) and variation <= 1.2),
        applicable=True)


def fund_ratio_report(green: GreenData, theta: ThetaSeries, epsilon: float,
                      c_scale: float, r_grid=None) -> FundRatioReport:
    """Ratio series whose sups are the empirical constants of the
    theta-versus-Hessian derivative bounds.

    Four series are formed on a log grid: theta_hat(r/c)^{1+eps} over the
    scale-invariant L^1 trace-free Hessian integral, theta_hat(r/c)^{2+2eps}
    over the L^2 integral, the same numerator over r * (A - 2(n-1)V)', and
    the 1/s-weighted theta integral over (r^{2-n}(A - omega))'.  Each series
    reports its sup, its max/min variation over the last decade, and a
    log-log slope fit; "stable" means the variation stays below 20%.  On a
    flat model the numerators vanish identically and the series are marked
    not applicable.
    """
    if epsilon <= 0 or c_scale <= 1:
        raise ValueError("need epsilon > 0 and c_scale > 1")
    if green.tail_slope <= 0:
        raise ValueError("fund ratios need a Euclidean-volume-growth model")
    n = green.model.n
    omega = sphere_area(n)
    if r_grid is None:
        r_grid = np.geomspace(10.0, 1000.0, 49)
    r = np.asarray(r_grid, dtype=float)

    th_rc = theta.interpolate(r / c_scale)
    flat = bool(np.all(th_rc < 1e-15))

    l1 = green.ball_integral("tracefree_l1", r) * r ** (-n)
    l2 = green.ball_integral("hessian_vol", r) * r ** (-n)
    d_main = richardson_derivative(
        lambda x: area_ratio(green, x) - 2.0 * (n - 1) * volume_ratio(green, x), r)
    d_second = richardson_derivative(
        lambda x: x ** (2 - n) * (area_ratio(green, x) - omega), r)

    # 1/s-weighted theta integral, accumulated on a fine log grid
    s_fine = np.geomspace(min(theta.r_grid[0] * c_scale, r[0] * 1e-3),
                          r[-1], 2000)
    th_fine = theta.interpolate(s_fine / c_scale) ** (2.0 + 2.0 * epsilon)
    cum = np.concatenate([[0.0], np.cumsum(
        0.5 * (th_fine[1:] + th_fine[:-1]) * np.diff(np.log(s_fine)))])
    th_int = np.interp(np.log(r), np.log(s_fine), cum)

    if flat or np.any(np.abs(d_main) < 1e-14):
        series = [_series_summary(nm, r, np.full_like(r, math.nan), False)
                  for nm in ("l1_bound", "l2_bound", "first_mono_bound",
                             "second_mono_bound")]
        return FundRatioReport(r_grid=r, series=series)

    s1 = _series_summary("l1_bound", r, th_rc ** (1.0 + epsilon) / l1)
    s2 = _series_summary("l2_bound", r, th_rc ** (2.0 + 2.0 * epsilon) / l2)
    s3 = _series_summary("first_mono_bound", r,
                         th_rc ** (2.0 + 2.0 * epsilon) / (r * d_main))
    s4 = _series_summary("second_mono_bound", r,
                         r ** (1 - n) * th_int / d_second)
    return FundRatioReport(r_grid=r, series=[s1, s2, s3, s4])


# ---------------------------------------------------------------------------
# weighted (parabolic) distances to cones

@dataclass
class WeightedDistanceReport:
    t_grid: np.ndarray
    C: np.ndarray
    C_alpha: np.ndarray
    alpha: float
    ratio_fund2: np.ndarray
    sup_ratio_large_t: float


def weighted_distance(heat: HeatData, model: ManifoldModel,
                      alpha: float) -> WeightedDistanceReport:
    """Heat-kernel-weighted cone distance C(t) and its L^alpha version.

    C(t) averages theta_hat over the kernel; C_alpha(t) is the L^alpha
    average, which dominates C(t) for alpha >= 1 by Jensen.  The companion
    ratio C(t)^2 / (t^2 int |Hess_h - g/2t|^2 H) is reported with its sup
    over the last decade of times.
    """
    if alpha < 1.0:
        raise ValueError("need alpha >= 1")
    if model is not heat.model and model != heat.model:
        raise ValueError("model does not match the heat data")
    n = model.n
    t = heat.t_grid
    xi = heat.xi_grid
    lo = float(xi[0]) * math.sqrt(4.0 * t[0])
    hi = float(xi[-1]) * math.sqrt(4.0 * t[-1])
    th = theta_series(model, np.geomspace(lo, hi, 90))

    M = len(t)
    C = np.empty(M)
    Ca = np.empty(M)
    ratio = np.empty(M)
    xi_max = xi[-1] + 0.5 * heat.delta
    for k in range(M):
        u = heat.U[k]
        tk = float(t[k])
        s = math.sqrt(4.0 * tk)
        w = heat.weights(k)
        mask = (u > 1e-25 * u.max()) & (xi <= xi_max - 1.0)
        uw = u * w
        total = float(np.sum(uw[mask]))
        th_vals = th.interpolate(xi * s)
        C[k] = float(np.sum(th_vals[mask] * uw[mask]) / total)
        Ca[k] = float(np.sum(th_vals[mask] ** alpha * uw[mask])
                      / total) ** (1.0 / alpha)

        ux, uxx = _derivatives(u, heat.delta)
        with np.errstate(divide="ignore", invalid="ignore"):
            lu = ux / u
            h_r = -lu / s
            h_rr = -(uxx / u - lu ** 2) / (s * s)
        rho = xi * s
        fp_over_f = model.profile.df(rho) / model.profile.f(rho)
        half2t = 0.5 / tk
        hess = (h_rr - half2t) ** 2 + (n - 1) * (fp_over_f * h_r - half2t) ** 2
        mask_pw = (u > 1e-16 * u.max()) & (xi <= xi_max - 1.5)
        denom = tk * tk * float(np.sum(hess[mask_pw] * uw[mask_pw]) / total)
        ratio[k] = C[k] ** 2 / denom if denom > 1e-300 else math.nan

    sel = t >= t[-1] / 10.0
    finite = np.isfinite(ratio[sel])
    sup = float(np.max(ratio[sel][finite])) if np.any(finite) else math.nan
    return WeightedDistanceReport(t_grid=t, C=C, C_alpha=Ca, alpha=alpha,
                                  ratio_fund2=ratio, sup_ratio_large_t=sup)


# ---------------------------------------------------------------------------
# Koch curve demonstration

def koch_polyline(level: int, angle: float) -> np.ndarray:
    """Vertices of the level-`level` bent-segment curve on [0, 1].

    Each subdivision replaces a segment by two equal segments meeting at
    `angle` (apex on the left of the traversal direction); angle = pi keeps
    the segment straight.
    """
    if level < 0 or level > 10:
        raise ValueError("level must lie in [0, 10]")
    if not (math.pi / 2 < angle <= math.pi):
        raise ValueError("angle must lie in (pi/2, pi]")
    pts = np.array([[0.0, 0.0], [1.0, 0.0]])
    half_bend = 0.5 * (math.pi - angle)
    for _ in range(level):
        p = pts[:-1]
        q = pts[1:]
        mid = 0.5 * (p + q)
        seg = q - p
        normal = np.column_stack([-seg[:, 1], seg[:, 0]])
        apex = mid + 0.5 * math.tan(half_bend) * normal
        out = np.empty((2 * len(p) + 1, 2))
        out[0::2] = pts
        out[1::2] = apex
        pts = out
    return pts


def _sample_polyline(pts: np.ndarray, per_segment: int = 48) -> np.ndarray:
    p = pts[:-1]
    q = pts[1:]
    ts = np.linspace(0.0, 1.0, per_segment, endpoint=False)
    samples = p[:, None, :] + ts[None, :, None] * (q - p)[:, None, :]
    return np.concatenate([samples.reshape(-1, 2), pts[-1:]], axis=0)


def _clip_segments_to_ball(pts: np.ndarray, r: float):
    """Sub-segments of a polyline lying inside the ball of radius r at 0."""
    p = pts[:-1]
    d = pts[1:] - p
    # |p + t d|^2 = r^2: solve per segment, intersect [t-, t+] with [0, 1]
    aa = np.sum(d * d, axis=1)
    bb = np.sum(p * d, axis=1)
    cc = np.sum(p * p, axis=1) - r * r
    disc = bb * bb - aa * cc
    keep = (disc > 0) & (aa > 0)
    sq = np.sqrt(np.maximum(disc[keep], 0.0))
    t_lo = np.clip((-bb[keep] - sq) / aa[keep], 0.0, 1.0)
    t_hi = np.clip((-bb[keep] + sq) / aa[keep], 0.0, 1.0)
    ok = t_hi > t_lo
    p_in = p[keep][ok] + t_lo[ok, None] * d[keep][ok]
    q_in = p[keep][ok] + t_hi[ok, None] * d[keep][ok]
    return p_in, q_in


def _max_min_point_segment(points: np.ndarray, seg_p: np.ndarray,
                           seg_q: np.ndarray) -> float:
    """max over points of (min over segments of the point-segment distance)."""
    d = seg_q - seg_p                                    # (K, 2)
    len2 = np.maximum(np.sum(d * d, axis=1), 1e-300)
    rel = points[:, None, :] - seg_p[None, :, :]          # (M, K, 2)
    t = np.clip(np.einsum("mkd,kd->mk", rel, d) / len2, 0.0, 1.0)
    closest = rel - t[:, :, None] * d[None, :, :]
    dist = np.sqrt(np.sum(closest ** 2, axis=2))
    return float(np.max(np.min(dist, axis=1)))


def koch_theta(level: int, angle: float, scales=None) -> ThetaSeries:
    """Theta series of the Koch-type curve at dyadic scales around the base
    vertex.

    The comparison space for a curve ball at its end point is a straight
    segment; the planar Hausdorff distance between the ball and the chord
    segment through its farthest point (an upper bound for the GH distance)
    is returned, normalized by the scale.  Distances to the curve use exact
    point-to-segment projections on the ball-clipped polyline, so a straight
    curve reports exactly zero.
    """
    if scales is None:
        scales = 2.0 ** -np.arange(3, -1, -1.0)
    scales = np.asarray(scales, dtype=float)
    verts = koch_polyline(level, angle)
    pts = _sample_polyline(verts)
    dist0 = np.hypot(pts[:, 0], pts[:, 1])
    theta = np.empty(len(scales))
    for i, r in enumerate(scales):
        ball = pts[dist0 <= r]
        far = ball[np.argmax(np.hypot(ball[:, 0], ball[:, 1]))]
        norm = math.hypot(far[0], far[1])
        if norm < 1e-15:
            theta[i] = 0.0
            continue
        direction = far / norm
        # ball samples -> chord segment [0, r * direction]
        proj = np.clip(ball @ direction, 0.0, r)
        closest = proj[:, None] * direction[None, :]
        d1 = float(np.max(np.hypot(*(ball - closest).T)))
        # chord samples -> clipped polyline (exact projections)
        seg_p, seg_q = _clip_segments_to_ball(verts, r)
        chord = np.linspace(0.0, r, 512)[:, None] * direction[None, :]
        d2 = _max_min_point_segment(chord, seg_p, seg_q)
        theta[i] = max(d1, d2) / r
    return ThetaSeries(r_grid=scales, theta=theta,
                       best_a=np.ones(len(scales)))
