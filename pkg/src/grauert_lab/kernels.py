"""Poisson-wave kernels on model spaces and the Hadamard transport recursion.

Conventions.  ``A`` is the shifted frequency operator, with eigenvalues
``A_l = l + (n - 1)/2`` on S^n, and the Poisson kernel at imaginary time tau
is the kernel of ``exp(-tau A)``.  Laplacians are nonnegative:
``Delta = -(d^2/dr^2 + (n-1) (Theta'/Theta + 1/r) d/dr)`` on radial functions.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy import integrate

from .eigenbasis import legendre_table
from .errors import DivergentRegion, ModelUnsupported, OnConoid, QuadratureFailure, TailTooLarge
from .geometry import ModelManifold

_SERIES_SWITCH = 1e-3


def unit_sphere_volume(n: int) -> float:
    """Volume of S^n."""
    return 2 * math.pi ** ((n + 1) / 2) / math.gamma((n + 1) / 2)


def flat_constant(n: int) -> float:
    return math.gamma((n + 1) / 2) / math.pi ** ((n + 1) / 2)


def sphere_constant(n: int) -> float:
    """c_n making the closed form equal the l-sum sum_l e^{-tau A_l} Z_l."""
    return 1 / (unit_sphere_volume(n) * 2 ** ((n - 1) / 2))


# ---------------------------------------------------------------------- flat


def poisson_flat(n: int, tau: float, x, y) -> float:
    """C_n tau (tau^2 + |x - y|^2)^{-(n+1)/2}."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    d2 = float(np.sum((np.atleast_1d(np.asarray(x, float)) - np.atleast_1d(np.asarray(y, float))) ** 2))
    return flat_constant(n) * tau * (tau * tau + d2) ** (-(n + 1) / 2)


def poisson_flat_closed_complex(t: float, tau: float, zeta: complex, y: float) -> complex:
    """Continuation of the n = 1 kernel: i w / (pi (w^2 - d^2)), w = t + i tau, d = zeta - y."""
    w = complex(t, tau)
    d = complex(zeta) - y
    return 1j * w / (math.pi * (w * w - d * d))


def _quad(f, a, b, rtol):
    # quadpack warnings are replaced by our own error-estimate check
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return integrate.quad(f, a, b, epsabs=0.0, epsrel=rtol, limit=400)


def _half_line(a: float, b: float, rtol: float):
    # int_0^inf e^{-a s} e^{i b s} ds, real and imaginary parts separately
    re, e1 = _quad(lambda s: math.exp(-a * s) * math.cos(b * s), 0, np.inf, rtol)
    if b == 0.0:
        return complex(re, 0.0), e1
    im, e2 = _quad(lambda s: math.exp(-a * s) * math.sin(b * s), 0, np.inf, rtol)
    return complex(re, im), math.hypot(e1, e2)


def poisson_flat_complex(t: float, tau: float, zeta: complex, y: float, rtol: float = 1e-11) -> complex:
    """(1/2pi) int e^{i(t + i tau)|xi|} e^{i xi (zeta - y)} d xi by quadrature (n = 1).

    The integral converges only for |Im zeta| < tau.
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    d = complex(zeta) - y
    if abs(d.imag) >= tau:
        raise DivergentRegion(f"|Im zeta| = {abs(d.imag):.6g} >= tau = {tau:.6g}")
    w = complex(t, tau)
    # xi > 0 contributes e^{i (w + d) xi}, xi < 0 contributes e^{i (w - d) |xi|}
    plus, e1 = _half_line((w + d).imag, (w + d).real, rtol)
    minus, e2 = _half_line((w - d).imag, (w - d).real, rtol)
    val = (plus + minus) / (2 * math.pi)
    err = (e1 + e2) / (2 * math.pi)
    if err > 1e3 * rtol * max(abs(val), 1e-300):
        raise QuadratureFailure("oscillatory half-line quadrature did not converge", achieved=err)
    return val


# ----------------------------------------------------------- subordination


def heat_flat(n: int) -> Callable:
    """Euclidean heat kernel (4 pi u)^{-n/2} exp(-|x - y|^2 / 4u)."""

    def heat(u, x, y):
        d2 = float(np.sum((np.atleast_1d(np.asarray(x, float)) - np.atleast_1d(np.asarray(y, float))) ** 2))
        return (4 * math.pi * u) ** (-n / 2) * math.exp(-d2 / (4 * u))

    return heat


def scalar_heat(gamma: float) -> Callable:
    """Heat 'kernel' of multiplication by gamma^2, for the scalar identity."""
    return lambda u, x, y: math.exp(-u * gamma * gamma)


def subordinate(heat: Callable, tau: float, x, y, rtol: float = 1e-12) -> float:
    """(tau / 2 sqrt(pi)) int_0^inf exp(-tau^2/4u) heat(u, x, y) u^{-3/2} du.

    Integrated in s = log u so that both ends of the half-line are resolved.
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    pref = tau / (2 * math.sqrt(math.pi))

    log_c = math.log(tau * tau / 4)

    def g(s):
        if log_c - s > math.log(700.0) or s > 700.0:
            return 0.0
        u = math.exp(s)
        arg = math.exp(log_c - s)
        return math.exp(-arg) * heat(u, x, y) * u ** -0.5

    # the weight peaks near u = tau^2 / 6; split there for robustness
    s0 = math.log(tau * tau / 6)
    a, ea = _quad(g, -np.inf, s0, rtol)
    b, eb = _quad(g, s0, np.inf, rtol)
    val = pref * (a + b)
    err = pref * (ea + eb)
    if err > 1e3 * rtol * max(abs(val), 1e-300):
        raise QuadratureFailure("subordination integral did not reach tolerance", achieved=err)
    return val


# ------------------------------------------------------------------- sphere


def _sphere_closed(n: int, s, r):
    base = np.cosh(s) - np.cos(r)
    if np.any(np.abs(base) < 1e-14):
        raise OnConoid("cosh(tau - i t) = cos(r): point on the characteristic conoid")
    return sphere_constant(n) * np.sinh(s) * base ** (-(n + 1) / 2)


def poisson_sphere_closed(n: int, tau: float, r, t: float = 0.0):
    """c_n sinh(s) (cosh(s) - cos r)^{-(n+1)/2} with s = tau - i t.

    ``r`` may be complex (complexified distance); principal powers are used.
    """
    s = complex(tau, -t) if t else tau
    r = np.asarray(r)
    out = _sphere_closed(n, s, r.astype(complex) if np.iscomplexobj(r) or t else r)
    return out if np.ndim(out) else out[()]


def conoid_amplitude(n: int, t: float, r: float) -> float:
    """Regularized size of the real-time kernel near the conoid t = r.

    |K| |t^2 - r^2|^{(n+1)/2} / (c_n t 2^{(n+1)/2}); its limit as t -> r is the
    leading Hadamard coefficient Theta(r)^{-1/2}.
    """
    k = _sphere_closed(n, complex(0.0, -t), complex(r))
    gam = t * t - r * r
    return float(abs(k) * abs(gam) ** ((n + 1) / 2) / (sphere_constant(n) * t * 2 ** ((n + 1) / 2)))


@dataclass(frozen=True)
class SpectralSum:
    value: complex
    L: int
    tail_bound: float


def _tail(tau: float, s: float, L: int) -> float:
    # sum_{l > L} e^{-tau(l + 1/2)} (2l + 1)/(4 pi) e^{l s}, using |P_l(w)| <= e^{l s}
    q = math.exp(s - tau)
    M = L + 1
    tail = q ** M * ((2 * M + 1) / (1 - q) + 2 * q / (1 - q) ** 2)
    return math.exp(-tau / 2) * tail / (4 * math.pi)


def poisson_sphere_spectral(tau: float, w, L: Optional[int] = None, tol: float = 1e-13, L_cap: int = 20000) -> SpectralSum:
    """sum_{l <= L} e^{-tau (l + 1/2)} (2l + 1)/(4 pi) P_l(w) on S^2.

    ``w`` is x.y, or the complexified zeta.y.  The terms grow like
    e^{(s - tau) l} with s = |Im arccos w|, so s >= tau diverges.  When L is
    omitted the smallest L whose tail bound is below ``tol`` is used.
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    w = complex(w)
    s = abs(np.arccos(w).imag)
    if s >= tau:
        raise TailTooLarge(f"|Im arccos w| = {s:.6g} >= tau = {tau:.6g}: the series diverges")
    if L is None:
        L = 0
        while _tail(tau, s, L) > tol:
            L = max(2 * L, 16)
            if L > L_cap:
                raise TailTooLarge(f"tail bound above {tol:g} even at L = {L_cap}")
        lo, hi = L // 2, L
        while lo < hi:
            mid = (lo + hi) // 2
            if _tail(tau, s, mid) > tol:
                lo = mid + 1
            else:
                hi = mid
        L = hi
    bound = _tail(tau, s, L)
    if bound > tol:
        raise TailTooLarge(f"tail bound {bound:.3g} exceeds {tol:g} at L = {L}")
    l = np.arange(L + 1)
    P = legendre_table(L, w)
    val = np.sum(np.exp(-tau * (l + 0.5)) * (2 * l + 1) / (4 * math.pi) * P)
    return SpectralSum(complex(val), L, bound)


def calibrate_sphere(tau: float = 0.5, r: float = 1.0) -> float:
    """Ratio spectral / closed form at one reference point (1 when c_n is right)."""
    spec = poisson_sphere_spectral(tau, math.cos(r)).value.real
    return spec / float(poisson_sphere_closed(2, tau, r))


# --------------------------------------------------------------- hyperbolic


def poisson_hyperbolic_closed(n: int, tau: float, r) -> float:
    """sin(tau) (cosh r - cos tau)^{-(n+1)/2}, normalized by c_n.

    This is the hyperbolic wave-kernel expression continued to pure imaginary
    time.  For real r and 0 < tau < pi it is positive and decreases in r.
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    r = np.asarray(r)
    base = np.cosh(r) - math.cos(tau)
    if np.any(np.abs(base) < 1e-14):
        raise OnConoid("cosh r = cos tau: point on the characteristic conoid")
    out = sphere_constant(n) * math.sin(tau) * base ** (-(n + 1) / 2)
    return out if np.ndim(out) else out[()]


# ----------------------------------------------------------------- Hadamard


def _sinc_like(r, sign: int):
    # sin(r)/r (sign=+1) or sinh(r)/r (sign=-1), with a series near 0
    r = np.asarray(r, dtype=float)
    small = np.abs(r) < _SERIES_SWITCH
    r2 = r * r
    series = 1 - sign * r2 / 6 + r2 * r2 / 120
    with np.errstate(invalid="ignore", divide="ignore"):
        exact = np.sin(r) / r if sign > 0 else np.sinh(r) / r
    return np.where(small, series, exact)


def theta_density(model: ModelManifold, r):
    """Volume density in normal coordinates: 1, (sin r/r)^{n-1}, (sinh r/r)^{n-1}."""
    r = np.asarray(r, dtype=float)
    if model.is_flat:
        out = np.ones_like(r)
    else:
        out = _sinc_like(r, model.curvature) ** (model.dim - 1)
    return out if out.ndim else float(out)


def hadamard_u0(model: ModelManifold, r):
    """Leading transport coefficient Theta^{-1/2}."""
    out = np.asarray(theta_density(model, r)) ** -0.5
    return out if out.ndim else float(out)


def _kappa(model: ModelManifold, r):
    # r * (log of the polar volume factor)' : r cot r, 1, r coth r
    r = np.asarray(r, dtype=float)
    if model.is_flat:
        return np.ones_like(r)
    r2 = r * r
    small = np.abs(r) < _SERIES_SWITCH
    sign = model.curvature
    series = 1 - sign * r2 / 3 - r2 * r2 / 45
    with np.errstate(invalid="ignore", divide="ignore"):
        exact = r / np.tan(r) if sign > 0 else r / np.tanh(r)
    return np.where(small, series, exact)


@dataclass(frozen=True)
class ParametrixSeries:
    model: ModelManifold
    r: np.ndarray
    coeffs: np.ndarray  # shape (J + 1, len(r))
    J: int
    potential: float = 0.0
    series: tuple = field(default=(), repr=False)  # Chebyshev coefficients in x = r^2
    x_max: float = 0.0

    def evaluate(self, j: int, r) -> np.ndarray:
        """U_j at arbitrary radii in [0, sqrt(x_max)]."""
        r = np.asarray(r, dtype=float)
        return C.chebval(_to_unit(r * r, self.x_max), self.series[j])

    def radial_laplacian(self, j: int, r) -> np.ndarray:
        """(Delta + potential) U_j at radii r."""
        return _apply_laplacian(self.model, self.series[j], self.x_max, np.asarray(r, float), self.potential)


def _to_unit(x, x_max):
    return 2 * x / x_max - 1


def _apply_laplacian(model, coef, x_max, r, potential):
    # f(r) = g(x), x = r^2:  Delta f = -(4 x g'' + 2 g' (1 + (n - 1) kappa))
    x = r * r
    u = _to_unit(x, x_max)
    d1 = C.chebval(u, C.chebder(coef)) * (2 / x_max)
    d2 = C.chebval(u, C.chebder(coef, 2)) * (2 / x_max) ** 2
    n = model.dim
    lap = -(4 * x * d2 + 2 * d1 * (1 + (n - 1) * _kappa(model, r)))
    return lap + potential * C.chebval(u, coef)


def hadamard_coeffs(
    model: ModelManifold,
    r_grid,
    J: int,
    potential: float = 0.0,
    n_cheb: int = 48,
    n_gauss: int = 64,
) -> ParametrixSeries:
    """Transport coefficients U_0..U_J of the static wave operator d_t^2 + Delta + potential.

    With m = n + 1 and alpha = (2 - m)/2,

        U_j(r) = -Theta(r)^{-1/2} / (4 (alpha + j))
                 * int_0^1 s^{j-1} Theta(r s)^{1/2} ((Delta + potential) U_{j-1})(r s) ds

    Each U_j is carried as a Chebyshev series in x = r^2 (radial functions
    are smooth in r^2), so the Laplacian is applied by exact differentiation
    of the series and the s-integral by Gauss-Legendre quadrature.
    """
    if J < 0:
        raise ValueError("J must be >= 0")
    r_grid = np.asarray(r_grid, dtype=float)
    if np.any(r_grid < 0):
        raise ValueError("radii must be nonnegative")
    r_max = float(np.max(r_grid))
    if not r_max < model.injectivity_radius:
        raise ValueError("radial grid must stay inside the injectivity radius")
    m = model.dim + 1
    alpha = (2 - m) / 2
    trivial = model.is_flat and potential == 0.0
    if not trivial:
        for j in range(1, J + 1):
            if alpha + j == 0:
                raise ModelUnsupported(
                    f"alpha + j = 0 at j = {j}: even spacetime dimension needs logarithmic terms"
                )
    # a tiny domain would magnify rounding noise when the series is differentiated
    x_max = max(r_max * r_max, min(1.0, 0.25 * model.injectivity_radius ** 2))
    # Chebyshev points in x
    k = np.arange(n_cheb)
    u_nodes = np.cos(math.pi * (k + 0.5) / n_cheb)
    x_nodes = (u_nodes + 1) * x_max / 2
    r_nodes = np.sqrt(x_nodes)
    sig, wsig = np.polynomial.legendre.leggauss(n_gauss)
    sig = (sig + 1) / 2
    wsig = wsig / 2

    def fit(values):
        # drop coefficients at the rounding floor; differentiation would amplify them
        coef = C.chebfit(u_nodes, values, n_cheb - 1)
        big = np.nonzero(np.abs(coef) > 1e-14 * np.max(np.abs(coef)))[0]
        coef[(big[-1] + 1 if big.size else 1) :] = 0.0
        return coef

    theta_nodes = theta_density(model, r_nodes)
    series = [fit(theta_nodes ** -0.5)]
    for j in range(1, J + 1):
        if trivial:
            # Delta U_0 = 0 exactly, so every higher coefficient vanishes
            series.append(np.zeros(n_cheb))
            continue
        rs = r_nodes[:, None] * sig[None, :]
        lap = _apply_laplacian(model, series[-1], x_max, rs, potential)
        integrand = sig[None, :] ** (j - 1) * theta_density(model, rs) ** 0.5 * lap
        integral = integrand @ wsig
        vals = -(theta_nodes ** -0.5) / (4 * (alpha + j)) * integral
        series.append(fit(vals))
    coeffs = np.array([C.chebval(_to_unit(r_grid ** 2, x_max), s) for s in series])
    if not np.all(np.isfinite(coeffs)):
        raise QuadratureFailure("non-finite transport coefficient")
    return ParametrixSeries(model, r_grid, coeffs, J, potential, tuple(series), x_max)


def transport_residual(series: ParametrixSeries, j: int, r, h: float = 1e-3) -> np.ndarray:
    """Residual of 4 r U_j' + (4 j + 2 r Theta'/Theta) U_j + (Delta + c) U_{j-1} / (alpha + j).

    Derivatives are fourth-order central differences of the tabulated
    coefficients, independent of the Chebyshev machinery used to build them.
    """
    model = series.model
    r = np.asarray(r, dtype=float)
    alpha = (2 - (model.dim + 1)) / 2

    def U(k, rr):
        return series.evaluate(k, rr)

    def d1(f, rr):
        return (-f(rr + 2 * h) + 8 * f(rr + h) - 8 * f(rr - h) + f(rr - 2 * h)) / (12 * h)

    def d2(f, rr):
        return (-f(rr + 2 * h) + 16 * f(rr + h) - 30 * f(rr) + 16 * f(rr - h) - f(rr - 2 * h)) / (12 * h * h)

    theta = lambda rr: np.log(theta_density(model, rr))  # noqa: E731
    dlog_theta = d1(theta, r)
    uj = lambda rr: U(j, rr)  # noqa: E731
    lhs = 4 * r * d1(uj, r) + (4 * j + 2 * r * dlog_theta) * uj(r)
    if j == 0:
        return lhs
    prev = lambda rr: U(j - 1, rr)  # noqa: E731
    n = model.dim
    # (n - 1)/r + Theta'/Theta is the mean-curvature term of geodesic spheres
    lap = -(d2(prev, r) + ((n - 1) / r + dlog_theta) * d1(prev, r)) + series.potential * prev(r)
    if alpha + j == 0:
        # the equation degenerates to its solvability condition (Delta + c) U_{j-1} = 0
        return lap
    return lhs + lap / (alpha + j)


@dataclass(frozen=True)
class Truncation:
    order: int
    inside: bool
    ratio: float
    required: Optional[int]

    @property
    def outside_radius(self) -> bool:
        return not self.inside


def rofc_bound(r: float, eps: float, K: float, m: int = 3) -> float:
    """Right-hand side of the Hadamard convergence condition on |t^2 - r^2|."""
    m1 = (m - 2) / 2
    return (1 - r / eps) ** 2 / ((1 + m1 / eps + m1 * m1 / (eps * eps)) * K)


def rofc_truncation(
    t2_minus_r2: float,
    r: float,
    eps: float,
    K: float,
    m: int = 3,
    J_max: int = 50,
    tail_tol: float = 1e-8,
) -> Truncation:
    """Truncation order from the geometric majorant q^j, q = |t^2 - r^2| / bound.

    Inside the convergence region the series is used up to ``J_max`` when the
    majorant tail q^{J_max + 1}/(1 - q) is below ``tail_tol``; ``required`` is
    the smallest order achieving that tail.  Outside (q >= 1, or a tail that
    J_max cannot bring below the tolerance) the order is 0 and flagged.
    """
    if not K > 0:
        raise ValueError("K must be positive")
    if not 0 <= r < eps:
        return Truncation(0, False, math.inf, None)
    q = abs(t2_minus_r2) / rofc_bound(r, eps, K, m)
    if q >= 1:
        return Truncation(0, False, q, None)
    if q == 0:
        return Truncation(J_max, True, 0.0, 0)
    # smallest J with q^{J+1} / (1 - q) <= tail_tol
    need = math.log(tail_tol * (1 - q)) / math.log(q) - 1
    required = max(0, math.ceil(need - 1e-12))
    if required > J_max:
        return Truncation(0, False, q, required)
    return Truncation(J_max, True, q, required)
