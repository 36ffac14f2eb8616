"""Complex zeros of trigonometric polynomials on the circle and their currents.

A degree-N trigonometric polynomial

    p(zeta) = a_0 + sum_{k=1}^N a_k cos(k zeta) + b_k sin(k zeta)

becomes, after z = e^{i zeta}, the polynomial z^N p = sum_j c_j z^j of degree
2N with c_{N+k} = (a_k - i b_k)/2, c_{N-k} = (a_k + i b_k)/2, c_N = a_0.
Zeros live on the cylinder zeta = x + i xi, x in [0, 2 pi).

Two pairings of the zero divisor with a test function f(x, xi) are provided:
the direct sum (1/lambda) sum_k f(zeta_k), and the Poincare-Lelong form
(1/(4 pi lambda)) int log|p|^2 Delta f dx dxi, which moves the Laplacian onto
f (Delta log|p|^2 = 4 pi sum_k delta_{zeta_k}).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .eigenbasis import Eigenbasis
from .errors import DegenerateLeadingCoefficient, EmptyWindow, GridTooCoarse, ModelUnsupported, NonConvergence

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class TrigPoly:
    a: np.ndarray  # a_0..a_N
    b: np.ndarray  # b_1..b_N

    def __post_init__(self):
        a = np.asarray(self.a, dtype=complex).reshape(-1)
        b = np.asarray(self.b, dtype=complex).reshape(-1)
        if len(b) != len(a) - 1:
            raise ValueError("need a_0..a_N and b_1..b_N")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def degree(self) -> int:
        return len(self.a) - 1

    def poly_coeffs(self) -> np.ndarray:
        """Coefficients of z^N p(zeta), highest power first (numpy convention)."""
        N = self.degree
        c = np.zeros(2 * N + 1, dtype=complex)  # c[j] multiplies z^j
        c[N] = self.a[0]
        k = np.arange(1, N + 1)
        c[N + k] = (self.a[1:] - 1j * self.b) / 2
        c[N - k] = (self.a[1:] + 1j * self.b) / 2
        return c[::-1]

    def __call__(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        k = np.arange(1, self.degree + 1)
        kz = zeta[..., None] * k
        return self.a[0] + np.sum(self.a[1:] * np.cos(kz) + self.b * np.sin(kz), axis=-1)

    def derivative(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        k = np.arange(1, self.degree + 1)
        kz = zeta[..., None] * k
        return np.sum(k * (-self.a[1:] * np.sin(kz) + self.b * np.cos(kz)), axis=-1)

    def magnitude(self, zeta):
        """|a_0| + sum (|a_k| + |b_k|) cosh(k xi): the size scale of p near zeta."""
        xi = np.asarray(zeta, dtype=complex).imag
        k = np.arange(1, self.degree + 1)
        ch = np.cosh(xi[..., None] * k)
        return abs(self.a[0]) + np.sum((np.abs(self.a[1:]) + np.abs(self.b)) * ch, axis=-1)

    def log_abs2(self, zeta):
        """log|p(zeta)|^2 via the polynomial form, 2 log|q(z)| + 2 N xi."""
        zeta = np.asarray(zeta, dtype=complex)
        z = np.exp(1j * zeta)
        with np.errstate(divide="ignore"):
            return 2 * np.log(np.abs(np.polyval(self.poly_coeffs(), z))) + 2 * self.degree * zeta.imag


@dataclass(frozen=True)
class ZeroSet:
    """Zeros with multiplicity; ``residuals`` are |p(zeta_k)| / magnitude(zeta_k).

    Off the real line p is exponentially large, so the raw modulus at a root
    carries round-off of size e^{N |xi|}; dividing by the coefficient scale
    gives the backward error that can meet a fixed tolerance.
    """

    zeros: np.ndarray
    degree: int
    residuals: np.ndarray
    multiplicity: np.ndarray = field(repr=False)
    converged: bool = True

    def __len__(self):
        return len(self.zeros)


def _newton_ratio(c, dc, rc, drc, z):
    # p/p' evaluated without overflow: outside the unit disk use the reversed
    # polynomial R(w) = w^n p(1/w), for which p'/p = w (n - w R'(w)/R(w))
    n = len(c) - 1
    out = np.empty_like(z)
    inner = np.abs(z) <= 1
    zi = z[inner]
    w = 1 / z[~inner]
    with np.errstate(divide="ignore", invalid="ignore"):
        out[inner] = np.polyval(c, zi) / np.polyval(dc, zi)
        out[~inner] = 1 / (w * (n - w * np.polyval(drc, w) / np.polyval(rc, w)))
    # an exact root gives 0/0 or 1/inf; either way it should not move
    return np.where(np.isfinite(out), out, 0.0)


def aberth(coeffs, tol: float = 1e-14, max_iter: int = 500, seed_angle: float = 0.4):
    """All roots of a polynomial (highest power first) by Aberth-Ehrlich iteration.

    Returns (roots, converged).  Starting points are spread on a circle whose
    radius is the geometric mean of the root moduli.
    """
    c = np.asarray(coeffs, dtype=complex)
    n = len(c) - 1
    if n < 1:
        return np.zeros(0, complex), True
    dc = np.polyder(c)
    rc = c[::-1]
    drc = np.polyder(rc)
    radius = abs(c[-1] / c[0]) ** (1 / n) if c[-1] != 0 else 1.0
    radius = radius if radius > 0 else 1.0
    z = radius * np.exp(1j * (TWO_PI * np.arange(n) / n + seed_angle))
    active = np.ones(n, dtype=bool)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            return z, True
        ratio = _newton_ratio(c, dc, rc, drc, z[idx])
        diff = z[idx, None] - z[None, :]
        diff[np.arange(idx.size), idx] = 1.0
        inv = 1 / diff
        inv[np.arange(idx.size), idx] = 0.0
        step = ratio / (1 - ratio * inv.sum(axis=1))
        z[idx] -= step
        done = np.abs(step) <= tol * np.maximum(np.abs(z[idx]), 1.0)
        active[idx[done]] = False
    return z, not np.any(active)


def _newton_trig(poly: TrigPoly, zeta: np.ndarray, step_tol: float = 1e-12, max_iter: int = 50):
    zeta = zeta.copy()
    for _ in range(max_iter):
        d = poly.derivative(zeta)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(d != 0, poly(zeta) / d, 0.0)
        step = np.where(np.isfinite(step), step, 0.0)
        # damp steps that would leave the root's neighborhood
        big = np.abs(step) > 0.1
        step[big] = 0.1 * step[big] / np.abs(step[big])
        zeta -= step
        if np.all(np.abs(step) < step_tol):
            break
    return zeta


def _cluster_sizes(z: np.ndarray, radius: float = 1e-6) -> np.ndarray:
    m = np.ones(len(z), dtype=int)
    for i in range(len(z)):
        m[i] = int(np.count_nonzero(np.abs(z - z[i]) < radius))
    return m


def complex_zeros(a, b, refine: bool = True) -> ZeroSet:
    """Zeros of a_0 + sum a_k cos(k zeta) + b_k sin(k zeta) in one period cylinder."""
    poly = TrigPoly(a, b)
    N = poly.degree
    if N < 1:
        return ZeroSet(np.zeros(0, complex), 0, np.zeros(0), np.zeros(0, int))
    if poly.a[-1] == 0 and poly.b[-1] == 0:
        raise DegenerateLeadingCoefficient("a_N = b_N = 0")
    c = poly.poly_coeffs()
    scale = np.max(np.abs(c))
    # exact zero coefficients at either end are roots at z = infinity or z = 0,
    # which correspond to no finite zeta
    nz = np.flatnonzero(np.abs(c) > 0)
    c = c[nz[0] : nz[-1] + 1] / scale
    roots, ok = aberth(c)
    zeta = -1j * np.log(roots)
    zeta = np.mod(zeta.real, TWO_PI) + 1j * zeta.imag
    if refine and len(zeta):
        zeta = _newton_trig(poly, zeta)
        zeta = np.mod(zeta.real, TWO_PI) + 1j * zeta.imag
    res = np.abs(poly(zeta)) / poly.magnitude(zeta) if len(zeta) else np.zeros(0)
    order = np.lexsort((zeta.imag, zeta.real))
    zeta, res = zeta[order], res[order]
    zs = ZeroSet(zeta, N, res, _cluster_sizes(zeta), ok)
    # Aberth converges only linearly at multiple roots; the residual decides
    if len(res) and np.max(res) > 1e-8:
        raise NonConvergence(f"root refinement stalled (max residual {np.max(res):.3g})", result=zs)
    return zs


# --------------------------------------------------------------- test functions


@dataclass(frozen=True)
class TestFunction:
    """A function on the cylinder together with its flat Laplacian."""

    name: str
    f: Callable
    laplacian: Callable
    g_integral: float  # int_0^{2pi} f(x, 0) dx

    __test__ = False  # not a pytest class


def bump_profile(xi0: float):
    """h(xi) = e * exp(-1 / (1 - (xi/xi0)^2)) on |xi| < xi0, with h(0) = 1; returns (h, h'')."""

    def parts(xi):
        xi = np.asarray(xi, dtype=float)
        s = xi / xi0
        inside = np.abs(s) < 1
        q = np.where(inside, 1 - s * s, 1.0)
        h = np.where(inside, np.exp(1 - 1 / q), 0.0)
        phi = -2 * s / (xi0 * q * q)
        dphi = -2 / (xi0 * xi0 * q * q) - 8 * s * s / (xi0 * xi0 * q ** 3)
        return h, np.where(inside, h * (phi * phi + dphi), 0.0)

    return (lambda xi: parts(xi)[0]), (lambda xi: parts(xi)[1])


def product_test_function(xi0: float = 0.5, harmonic: int = 1, name: Optional[str] = None) -> TestFunction:
    """f(x, xi) = (1 + cos(harmonic x)/2) h(xi), h a smooth bump of half-width xi0."""
    h, h2 = bump_profile(xi0)
    k = harmonic

    def f(x, xi):
        return (1 + 0.5 * np.cos(k * np.asarray(x))) * h(xi)

    def lap(x, xi):
        x = np.asarray(x)
        g = 1 + 0.5 * np.cos(k * x)
        g2 = -0.5 * k * k * np.cos(k * x)
        return g2 * h(xi) + g * h2(xi)

    return TestFunction(name or f"bump{xi0}-cos{k}", f, lap, TWO_PI)


def constant_test_function(xi0: float = 1.0) -> TestFunction:
    """f = 1 on the strip (used only with root sums; no Laplacian needed)."""
    return TestFunction("one", lambda x, xi: np.ones(np.broadcast(x, xi).shape), lambda x, xi: np.zeros(np.broadcast(x, xi).shape), TWO_PI)


def zero_current_pairing(zs: ZeroSet, lam: float, f: TestFunction | Callable) -> float:
    """(1/lambda) sum_k f(zeta_k)."""
    fn = f.f if isinstance(f, TestFunction) else f
    if len(zs) == 0:
        return 0.0
    return float(np.sum(fn(zs.zeros.real, zs.zeros.imag)) / lam)


def ddbar_log_pairing(
    log_abs2: Callable,
    lam: float,
    f: TestFunction,
    grid=(2048, 512),
    xi_max: float = 1.0,
) -> float:
    """(1/(4 pi lambda)) int log|phi|^2 Delta f dx dxi on [0, 2pi) x [-xi_max, xi_max].

    Midpoint rule in both directions; f must vanish near |xi| = xi_max.
    ``log_abs2`` maps an array of complex zeta to log|phi(zeta)|^2.
    """
    nx, nxi = grid
    hx = TWO_PI / nx
    hxi = 2 * xi_max / nxi
    x = (np.arange(nx) + 0.5) * hx
    xi = -xi_max + (np.arange(nxi) + 0.5) * hxi
    total = 0.0
    # one row of xi at a time keeps memory flat and the summation order fixed
    for v in xi:
        lap = f.laplacian(x, v)
        if not np.any(lap):
            continue
        total += float(np.sum(log_abs2(x + 1j * v) * lap))
    return total * hx * hxi / (4 * math.pi * lam)


def reference_current(f: TestFunction, n_quad: int = 4096) -> float:
    """(1/pi) int_0^{2pi} f(x, 0) dx, the limit pairing for zeros on the real line."""
    x = (np.arange(n_quad) + 0.5) * TWO_PI / n_quad
    return float(np.sum(f.f(x, 0.0)) * TWO_PI / n_quad / math.pi)


def check_pairings(zs: ZeroSet, poly: TrigPoly, lam: float, f: TestFunction, grid=(2048, 512), xi_max: float = 1.0, tol: float = 1e-3):
    """Both pairings; GridTooCoarse when they disagree by more than tol."""
    direct = zero_current_pairing(zs, lam, f)
    smeared = ddbar_log_pairing(poly.log_abs2, lam, f, grid, xi_max)
    if abs(direct - smeared) > tol:
        raise GridTooCoarse(f"root-sum {direct:.6g} vs log-Laplacian {smeared:.6g}")
    return direct, smeared


# ---------------------------------------------------------------- random waves


@dataclass(frozen=True)
class RandomWave:
    coeffs: np.ndarray  # in the basis order of the window
    poly: TrigPoly
    seed: int


def random_wave(basis: Eigenbasis, lo: float, hi: float, seed) -> RandomWave:
    """Unit-norm Gaussian combination of the circle modes with lo < lambda <= hi."""
    if basis.model.kind != "circle":
        raise ModelUnsupported("random waves are built on the circle")
    mask = basis.restrict(lo, hi)
    modes = [m for m, keep in zip(basis.modes, mask) if keep]
    if not modes:
        raise EmptyWindow(f"no frequencies in ({lo}, {hi}]")
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(len(modes))
    c /= np.linalg.norm(c)
    N = max(m.quantum[0] for m in modes)
    a = np.zeros(N + 1)
    b = np.zeros(N)
    period = basis.model.period
    if not math.isclose(period, TWO_PI):
        raise ModelUnsupported("trigonometric conversion assumes the 2 pi circle")
    for coef, m in zip(c, modes):
        k = m.quantum[0]
        if m.parity == "const":
            a[0] += coef / math.sqrt(TWO_PI)
        elif m.parity == "cos":
            a[k] += coef / math.sqrt(math.pi)
        elif m.parity == "sin":
            b[k - 1] += coef / math.sqrt(math.pi)
        else:
            raise ModelUnsupported("random waves use the real basis")
    return RandomWave(c, TrigPoly(a, b), int(seed) if np.isscalar(seed) else 0)


def gaussian_trig(N: int, seed, complex_coefficients: bool = False) -> TrigPoly:
    """Random wave over the full window [0, N] without building an Eigenbasis.

    With ``complex_coefficients`` the real and imaginary parts of every
    coefficient are independent, which makes the wave a circularly symmetric
    Gaussian analytic function (no zeros pinned to the real line).
    """
    from .eigenbasis import EigenbasisSpec
    from .geometry import ModelManifold

    if not complex_coefficients:
        return random_wave(Eigenbasis(EigenbasisSpec(ModelManifold.circle(), N)), 0.0, N, seed).poly
    rng = np.random.default_rng(seed)
    sd = np.r_[1 / math.sqrt(TWO_PI), np.full(N, 1 / math.sqrt(math.pi))]
    a = sd * (rng.standard_normal(N + 1) + 1j * rng.standard_normal(N + 1))
    b = sd[1:] * (rng.standard_normal(N) + 1j * rng.standard_normal(N))
    return TrigPoly(a, b)


def mean_abs_imag(N: int, seeds, complex_coefficients: bool = False) -> float:
    """Ensemble mean of (1/N) sum_k |Im zeta_k| over random degree-N waves."""
    vals = []
    for s in seeds:
        zs = complex_zeros(*_ab(gaussian_trig(N, s, complex_coefficients)))
        vals.append(np.sum(np.abs(zs.zeros.imag)) / N)
    return float(np.mean(vals))


def _ab(poly: TrigPoly):
    return poly.a, poly.b


def _log_variance(N: int, xi: float) -> tuple[float, float]:
    """log K and (log K)' for K(xi) = 1/2 + sum_k cosh(2 k xi), xi >= 0.

    K is the covariance E|p(x + i xi)|^2 of the Gaussian wave, up to a constant.
    """
    k = np.arange(1, N + 1)
    u = 2 * k * xi
    logs = np.append(u + np.log1p(np.exp(-2 * u)) - math.log(2), -math.log(2))
    top = logs.max()
    w = np.exp(logs - top)
    F = top + math.log(w.sum())
    dF = float(np.sum(w[:-1] * 2 * k * np.tanh(u)) / w.sum())
    return float(F), dF


def expected_mean_abs_imag(N: int, xi_max: float = 40.0) -> float:
    """Exact ensemble mean of (1/N) sum_k |Im zeta_k| for the complex Gaussian wave.

    Valid for ``gaussian_trig(N, seed, complex_coefficients=True)`` only; real
    waves keep a fraction of about 1/sqrt(3) of their zeros on the real line.

    The expected zero density is (1/(4 pi)) Delta log K, so integrating over x
    leaves F''(xi)/2 with F = log K. Integrating |xi| F''/2 by parts over the
    whole line gives (X F'(X) - F(X) + F(0)) / N for large X.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    F0, _ = _log_variance(N, 0.0)
    FX, dFX = _log_variance(N, xi_max)
    return (xi_max * dFX - FX + F0) / N
