"""Radial heat kernel and the entropy functionals S, F, W.

The kernel H(x, . , t) with x at the tip solves H_t = H'' + (n-1)(f'/f) H'
with zero flux at the pole.  The solver works in self-similar variables

    xi = rho / sqrt(4 t),    tau = log(t / t0),
    H(rho, t) = (4 pi t)^{-n/2} u(xi, tau),

in which the equation becomes

    u_tau = 1/4 u_xixi + [xi/2 + (n-1)/4 * sqrt(4t) f'(rho)/f(rho)] u_xi
            + n/2 u,        rho = xi sqrt(4t).

On flat space the Gaussian u = exp(-xi^2) is a steady state of this
equation, so a fixed uniform xi-grid resolves the kernel equally well at
every time and the flat-space entropies vanish to the spatial truncation
error with no secular growth.  (A fixed grid in rho cannot do this: the
kernel width sweeps from sqrt(t0) to sqrt(t1), and resolving both ends to
1e-6 costs millions of nodes.)  Stepping is the trapezoidal (Crank-Nicolson)
rule with the operator frozen at the geometric midpoint of each log-time
step; space is discretized to fourth order on cell centers, with even-ghost
reflection at the axis and odd-ghost (Dirichlet) reflection at the outer
face.

Mass is monitored every step against the warped volume element
omega_{n-1} f(rho)^{n-1} d rho and renormalized, with the per-step drift
logged, never silently.

The entropy series are, with h = -log H and unit total mass,

    S = int h H dVol - (n/2) log(4 pi t) - n/2   [= E(-log u) - n/2]
    F = t int |grad h|^2 H dVol - n/2
    W = F + S,

all three zero on flat space.  The pointwise bound t(-Lap log H) <= n/2 and
the derivative identity for t F close the suite; the Hessian term in that
identity takes its radial form

    |Hess_h - g/(2t)|^2 = (h'' - 1/(2t))^2 + (n-1)((f'/f) h' - 1/(2t))^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .profiles import ManifoldModel, sphere_area

__all__ = [
    "HeatData", "EntropyReport", "EntropyIdentityReport",
    "InstabilityError", "TruncationError",
    "solve_heat_kernel", "entropy_series", "entropy_identities",
]


class InstabilityError(RuntimeError):
    """Per-step mass drift exceeded the stability threshold."""


class TruncationError(RuntimeError):
    """Kernel lost positivity (or mass) inside the retained support."""


# sixth-order central stencils on seven points
_D1 = np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0
_D2 = np.array([2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0]) / 180.0
_BW = 3  # stencil half-width / matrix bandwidth


def _extend(u):
    """Ghost extension: even reflection at the axis, odd at the outer face.

    Cell centers sit at (i + 1/2) delta, so the mirror of cell k across
    xi = 0 is exactly ghost cell -1-k (no interpolation error for an even
    function), and the odd mirror across the outer face is cell N-1-k with
    flipped sign.
    """
    ext = np.empty(len(u) + 2 * _BW)
    ext[_BW:-_BW] = u
    ext[:_BW] = u[_BW - 1::-1]
    ext[-_BW:] = -u[:-_BW - 1:-1]
    return ext


def _derivatives(u, delta):
    """Sixth-order u_xi and u_xixi on cell centers, ghosts as in _extend."""
    ext = _extend(u)
    n_pts = len(u)
    ux = np.zeros(n_pts)
    uxx = np.zeros(n_pts)
    for p in range(7):
        seg = ext[p:p + n_pts]
        ux += _D1[p] * seg
        uxx += _D2[p] * seg
    return ux / delta, uxx / (delta * delta)


def _row_coefficients(c, n, delta):
    """L = 1/4 d_xixi + c(xi) d_xi + n/2 as per-row diagonals.

    Returns rowcoef of shape (7, N) with rowcoef[d + 3, i] = L[i, i + d];
    ghost columns are folded back into the band (even reflection at the
    axis, odd at the outer face), which only touches the first and last
    three rows.
    """
    N = len(c)
    rowcoef = np.zeros((2 * _BW + 1, N))
    for p in range(7):
        d = p - _BW
        coef = 0.25 * _D2[p] / delta ** 2 + c * _D1[p] / delta
        lo = max(0, -d)
        hi = N - max(0, d)
        rowcoef[d + _BW, lo:hi] = coef[lo:hi]
    rowcoef[_BW, :] += 0.5 * n
    # fold ghosts for the six boundary rows
    for i in list(range(_BW)) + list(range(N - _BW, N)):
        entries = np.zeros(N)
        for p in range(7):
            ext_col = i - _BW + p
            coef = 0.25 * _D2[p] / delta ** 2 + c[i] * _D1[p] / delta
            if ext_col < 0:
                entries[-1 - ext_col] += coef          # even reflection
            elif ext_col >= N:
                entries[2 * N - 1 - ext_col] -= coef   # odd reflection
            else:
                entries[ext_col] += coef
        entries[i] += 0.5 * n
        for d in range(-_BW, _BW + 1):
            j = i + d
            rowcoef[d + _BW, i] = entries[j] if 0 <= j < N else 0.0
    return rowcoef


def _matvec(rowcoef, u):
    N = len(u)
    y = np.zeros(N)
    for d in range(-_BW, _BW + 1):
        v = rowcoef[d + _BW]
        if d >= 0:
            y[:N - d] += v[:N - d] * u[d:]
        else:
            y[-d:] += v[-d:] * u[:d]
    return y


def _banded(rowcoef, scale, shift):
    """ab-matrix (for solve_banded with l = u = 3) of shift*I + scale*L."""
    N = rowcoef.shape[1]
    ab = np.zeros((2 * _BW + 1, N))
    for d in range(-_BW, _BW + 1):
        row = _BW - d
        if d >= 0:
            ab[row, d:] = scale * rowcoef[d + _BW, :N - d]
        else:
            ab[row, :N + d] = scale * rowcoef[d + _BW, -d:]
    ab[_BW, :] += shift
    return ab


@dataclass
class HeatData:
    """Kernel profiles in self-similar variables plus bookkeeping.

    U[k] holds u(xi, tau_k); the physical kernel at time t_grid[k] lives on
    the radial grid rho = xi_grid * sqrt(4 t_k) and equals
    (4 pi t)^{-n/2} U[k].  mass is the pre-renormalization mass of each
    step, mass_drift the per-step deviation that was renormalized away.
    """

    model: ManifoldModel
    t_grid: np.ndarray
    xi_grid: np.ndarray
    U: np.ndarray
    mass: np.ndarray
    mass_drift: np.ndarray
    delta: float
    rho_max: float

    def rho_grid(self, k: int) -> np.ndarray:
        return self.xi_grid * math.sqrt(4.0 * self.t_grid[k])

    def kernel(self, k: int):
        """(rho, H) arrays at time index k."""
        t = self.t_grid[k]
        return self.rho_grid(k), (4.0 * math.pi * t) ** (-self.model.n / 2) * self.U[k]

    def value_at_origin(self, k: int) -> float:
        """H(0, t_k) by even extrapolation from the first two cells."""
        t = self.t_grid[k]
        u0 = (9.0 * self.U[k, 0] - self.U[k, 1]) / 8.0
        return float((4.0 * math.pi * t) ** (-self.model.n / 2) * u0)

    def weights(self, k: int) -> np.ndarray:
        """Quadrature weights so that sum(U[k] * weights(k)) = mass at t_k."""
        t = self.t_grid[k]
        s = math.sqrt(4.0 * t)
        f = self.model.profile.f(self.xi_grid * s)
        n = self.model.n
        return (sphere_area(n) * (4.0 * math.pi * t) ** (-n / 2) * s
                * self.delta * f ** (n - 1))


def solve_heat_kernel(model: ManifoldModel, t0: float = 1e-3,
                      t1: float = 100.0, rho_max: float | None = None,
                      steps: int = 1200,
                      space_points: int = 1280) -> HeatData:
    """Evolve the radial heat kernel from a unit-mass Gaussian seed at t0.

    rho_max (default 16 sqrt(t1), at least 10 sqrt(t1)) fixes the
    self-similar domain xi <= rho_max / sqrt(4 t1); beyond it the kernel is
    below e^{-64} of its peak and is represented by the Dirichlet condition.
    """
    if not (0.0 < t0 < t1):
        raise ValueError("need 0 < t0 < t1")
    if rho_max is None:
        rho_max = 16.0 * math.sqrt(t1)
    if rho_max < 10.0 * math.sqrt(t1):
        raise ValueError("rho_max must be at least 10 sqrt(t1)")
    n = model.n
    xi_max = rho_max / (2.0 * math.sqrt(t1))
    N = int(space_points)
    delta = xi_max / N
    xi = (np.arange(N) + 0.5) * delta
    dtau = math.log(t1 / t0) / steps
    t_grid = t0 * np.exp(dtau * np.arange(steps + 1))

    def coeff(t):
        s = math.sqrt(4.0 * t)
        rho = xi * s
        return 0.5 * xi + 0.25 * (n - 1) * s * model.profile.f(rho) ** -1 \
            * model.profile.df(rho)

    def mass_of(u, t):
        s = math.sqrt(4.0 * t)
        f = model.profile.f(xi * s)
        return float(np.sum(u * f ** (n - 1)) * delta * s
                     * sphere_area(n) * (4.0 * math.pi * t) ** (-n / 2))

    u = np.exp(-xi ** 2)
    u /= mass_of(u, t0)

    U = np.empty((steps + 1, N))
    mass = np.empty(steps + 1)
    drift = np.zeros(steps + 1)
    U[0] = u
    mass[0] = 1.0

    for k in range(steps):
        t_mid = math.sqrt(t_grid[k] * t_grid[k + 1])
        rowcoef = _row_coefficients(coeff(t_mid), n, delta)
        rhs = u + 0.5 * dtau * _matvec(rowcoef, u)
        ab = _banded(rowcoef, -0.5 * dtau, 1.0)
        u = solve_banded((_BW, _BW), ab, rhs)
        m = mass_of(u, t_grid[k + 1])
        if abs(m - 1.0) > 1e-4:
            raise InstabilityError(
                f"mass drift {m - 1.0:+.2e} in one step at t={t_grid[k+1]:.3g};"
                " reduce the step (increase steps)")
        u = u / m
        U[k + 1] = u
        mass[k + 1] = m
        drift[k + 1] = m - 1.0

    data = HeatData(model=model, t_grid=t_grid, xi_grid=xi, U=U, mass=mass,
                    mass_drift=drift, delta=delta, rho_max=rho_max)
    core = xi <= 6.0
    if np.any(U[:, core] <= 0.0):
        raise TruncationError("kernel lost positivity inside xi <= 6")
    return data


# ---------------------------------------------------------------------------
# entropies

@dataclass
class EntropyReport:
    n: int
    t_grid: np.ndarray
    S: np.ndarray
    F: np.ndarray
    W: np.ndarray
    dS: np.ndarray
    dW: np.ndarray
    dtF: np.ndarray
    liyau_max: np.ndarray
    rhs_mono: np.ndarray

    def dump_csv(self, path):
        """CSV export (schema warplab-entropy-v1)."""
        cols = ["t", "S", "F", "W", "dS", "dW", "dtF", "rhs_mono", "liyau_max"]
        data = [self.t_grid, self.S, self.F, self.W, self.dS, self.dW,
                self.dtF, self.rhs_mono, self.liyau_max]
        with open(path, "w") as fh:
            fh.write("# warplab-entropy-v1\n")
            fh.write(",".join(cols) + "\n")
            for row in zip(*data):
                fh.write(",".join(format(v, ".17g") for v in row) + "\n")


def entropy_series(heat: HeatData, tail_floor: float = 1e-25,
                   liyau_floor: float = 1e-16) -> EntropyReport:
    """Shannon entropy, F- and W-functionals with their time derivatives.

    Two retained supports are used.  Integrals run where the kernel exceeds
    tail_floor relative to its peak and stays one kernel width away from the
    outer boundary; the omitted Gaussian tail is below 1e-20 in every
    integrand.  The pointwise Li-Yau maximum uses the tighter liyau_floor
    (and 1.5 widths of boundary margin) because it probes the second
    log-derivative of the kernel, whose discrete error grows polynomially
    into the far tail while the integrands there are exponentially damped.
    Time derivatives are central differences in log t (the grid is uniform
    there); endpoints copy their neighbors.
    """
    model = heat.model
    n = model.n
    t = heat.t_grid
    M = len(t)
    xi = heat.xi_grid
    xi_max = xi[-1] + 0.5 * heat.delta

    S = np.empty(M)
    F = np.empty(M)
    liyau = np.empty(M)
    rhs = np.empty(M)

    for k in range(M):
        u = heat.U[k]
        tk = float(t[k])
        s = math.sqrt(4.0 * tk)
        w = heat.weights(k)
        peak = u.max()
        mask = (u > tail_floor * peak) & (xi <= xi_max - 1.0)
        mask_pw = (u > liyau_floor * peak) & (xi <= xi_max - 1.5)
        if np.any(u[mask] <= 0):
            raise TruncationError("kernel non-positive on retained support")
        uw = u * w
        total = float(np.sum(uw[mask]))
        ux, uxx = _derivatives(u, heat.delta)

        with np.errstate(divide="ignore", invalid="ignore"):
            lu = ux / u
            h_r = -lu / s
            h_rr = -(uxx / u - lu ** 2) / (s * s)
        rho = xi * s
        fp_over_f = model.profile.df(rho) / model.profile.f(rho)
        d2f_over_f = model.profile.d2f(rho) / model.profile.f(rho)

        S[k] = float(np.sum(-np.log(u[mask]) * uw[mask]) / total) - 0.5 * n
        F[k] = tk * float(np.sum(h_r[mask] ** 2 * uw[mask]) / total) - 0.5 * n

        lap_h = h_rr + (n - 1) * fp_over_f * h_r
        liyau[k] = tk * float(np.max(lap_h[mask_pw])) - 0.5 * n

        half2t = 0.5 / tk
        hess = (h_rr - half2t) ** 2 + (n - 1) * (fp_over_f * h_r - half2t) ** 2
        ric = (n - 1) * (-d2f_over_f) * h_r ** 2
        rhs[k] = -2.0 * tk * tk * float(np.sum((hess + ric)[mask_pw]
                                               * uw[mask_pw]) / total)

    W = F + S
    dtau = math.log(t[1] / t[0])

    def ddt(y):
        out = np.empty(M)
        out[1:-1] = (y[2:] - y[:-2]) / (2.0 * dtau) / t[1:-1]
        out[0] = out[1]
        out[-1] = out[-2]
        return out

    dS = ddt(S)
    dW = ddt(W)
    dtF = ddt(t * F)
    return EntropyReport(n=n, t_grid=t, S=S, F=F, W=W, dS=dS, dW=dW, dtF=dtF,
                         liyau_max=liyau, rhs_mono=rhs)


@dataclass
class EntropyIdentityReport:
    t_grid: np.ndarray
    res_f_tds: np.ndarray        # |F - t S'| scaled
    res_tf_mono: np.ndarray      # |d/dt (tF) - rhs_mono| scaled
    slack_cs: np.ndarray         # -d/dt(tF) - (2/n) F^2  (should be >= -tol)
    res_j: np.ndarray            # |d/dt (tS) - W| scaled
    w_increase: np.ndarray       # forward increments of W (should be <= tol)


def entropy_identities(report: EntropyReport) -> EntropyIdentityReport:
    """Residuals of the derivative identities linking S, F and W.

    Both sides of every identity come from different routes (quadrature
    versus log-time finite differences), so these are genuine cross-checks.
    Endpoint rows reuse interior values since one-sided derivatives there
    are copies.
    """
    t = report.t_grid
    if len(t) < 30:
        raise ValueError("need at least 30 time points")

    def scaled(lhs, rhs, floor=1.0):
        return np.abs(lhs - rhs) / np.maximum(
            np.maximum(np.abs(lhs), np.abs(rhs)), floor)

    res_f = scaled(report.F, t * report.dS)
    res_mono = scaled(report.dtF, report.rhs_mono)
    slack = -report.dtF - (2.0 / report.n) * report.F ** 2
    dtau = math.log(t[1] / t[0])
    dJ = np.empty(len(t))
    J = t * report.S
    dJ[1:-1] = (J[2:] - J[:-2]) / (2.0 * dtau) / t[1:-1]
    dJ[0] = dJ[1]
    dJ[-1] = dJ[-2]
    res_j = scaled(dJ, report.W)
    w_inc = np.concatenate([np.diff(report.W), [0.0]])
    return EntropyIdentityReport(t_grid=t, res_f_tds=res_f,
                                 res_tf_mono=res_mono, slack_cs=slack,
                                 res_j=res_j, w_increase=w_inc)
