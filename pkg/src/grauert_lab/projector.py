"""Complexified and tempered spectral projections and what is built on them.

Given an orthonormal basis {phi_j} and a frequency window I,

    Pi_I(zeta)      = sum_{lambda_j in I} |phi_j^C(zeta)|^2
    P^tau_I(zeta)   = sum_{lambda_j in I} exp(-2 tau lambda_j) |phi_j^C(zeta)|^2

Pi_I(zeta) is also the largest value of |sum_j a_j phi_j^C(zeta)|^2 over unit
coefficient vectors a, attained by a_j = conj(phi_j^C(zeta)) / sqrt(Pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from scipy.special import logsumexp

from .eigenbasis import Eigenbasis, EigenbasisSpec, Eigenmode, eval_coords
from .errors import DegeneratePoint, EmptyWindow, InsufficientRange, ModelUnsupported, NoiseFloor, OutsideTube
from .fits import fit_loglog
from .geometry import ComplexPoint, ModelManifold, grauert_rho

BasisLike = Union[Eigenbasis, EigenbasisSpec]


@dataclass(frozen=True)
class SpectralWindow:
    """Frequency interval; membership is lo < lambda <= hi, lo = 0 keeps lambda_0."""

    lo: float
    hi: float

    def __post_init__(self):
        if self.lo < 0 or not self.hi > self.lo:
            raise ValueError(f"invalid window [{self.lo}, {self.hi}]")

    @classmethod
    def upto(cls, lam: float) -> "SpectralWindow":
        return cls(0.0, lam)


@dataclass(frozen=True)
class ProjectionSample:
    zeta: ComplexPoint
    tau: float
    window: SpectralWindow
    value: float
    mode_count: int

    @property
    def empty(self) -> bool:
        return self.mode_count == 0


def as_basis(basis: BasisLike, window: Optional[SpectralWindow] = None) -> Eigenbasis:
    if isinstance(basis, EigenbasisSpec):
        basis = Eigenbasis(basis)
    if window is not None and window.hi > basis.spec.lambda_max * (1 + 1e-12):
        raise ValueError(f"window upper end {window.hi} exceeds the enumerated range {basis.spec.lambda_max}")
    return basis


def _log_weighted_sum(basis: Eigenbasis, window: SpectralWindow, zeta: ComplexPoint, tau: float):
    levels, logs = basis.log_frequency_sums(zeta.coords, tau)
    lo_ok = levels >= 0 if window.lo <= 0 else levels > window.lo * (1 + 1e-12)
    mask = lo_ok & (levels <= window.hi * (1 + 1e-12))
    count = int(np.count_nonzero(basis.restrict(window.lo, window.hi)))
    if not np.any(mask):
        return -math.inf, count
    return float(logsumexp(logs[mask])), count


def log_projection(basis: BasisLike, window: SpectralWindow, zeta: ComplexPoint, tau: float = 0.0) -> float:
    """log P^tau_I(zeta); stays finite where the projection itself would overflow."""
    b = as_basis(basis, window)
    return _log_weighted_sum(b, window, zeta, tau)[0]


def sample_projection(basis: BasisLike, window: SpectralWindow, zeta: ComplexPoint, tau: float = 0.0) -> ProjectionSample:
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    b = as_basis(basis, window)
    logv, count = _log_weighted_sum(b, window, zeta, tau)
    return ProjectionSample(zeta, tau, window, math.exp(logv) if logv < 709 else math.inf, count)


def pi_complex(basis: BasisLike, window: SpectralWindow, zeta: ComplexPoint, strict: bool = False) -> float:
    """Pi_I(zeta, conj zeta); an empty window gives 0 (or EmptyWindow when strict)."""
    s = sample_projection(basis, window, zeta)
    if s.empty and strict:
        raise EmptyWindow(f"no frequencies in ({window.lo}, {window.hi}]")
    return s.value


def p_tempered(basis: BasisLike, window: SpectralWindow, tau: float, zeta: ComplexPoint) -> float:
    return sample_projection(basis, window, zeta, tau).value


def _window_values(basis: Eigenbasis, window: SpectralWindow, zeta: ComplexPoint) -> np.ndarray:
    mask = basis.restrict(window.lo, window.hi)
    return basis.values(zeta.coords)[mask]


def coherent_state(basis: BasisLike, window: SpectralWindow, zeta: ComplexPoint) -> np.ndarray:
    """Unit coefficient vector a_j = conj(phi_j^C(zeta)) / sqrt(Pi(zeta))."""
    b = as_basis(basis, window)
    phi = _window_values(b, window, zeta)
    total = float(np.sum(np.abs(phi) ** 2))
    if total == 0.0:
        raise DegeneratePoint("every mode in the window vanishes at this point")
    return np.conj(phi) / math.sqrt(total)


def synthesize(basis: BasisLike, window: SpectralWindow, coeffs, zeta: ComplexPoint) -> complex:
    b = as_basis(basis, window)
    phi = _window_values(b, window, zeta)
    return complex(np.asarray(coeffs) @ phi)


def random_unit_tuples(n_samples: int, dim: int, seed, complex_coefficients: bool = True) -> np.ndarray:
    """Uniform samples from the unit sphere of C^dim (or R^dim), one per row."""
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n_samples, dim))
    if complex_coefficients:
        a = a + 1j * rng.standard_normal((n_samples, dim))
    return a / np.linalg.norm(a, axis=1, keepdims=True)


def siciak_bruteforce(
    basis: BasisLike,
    window: SpectralWindow,
    zeta: ComplexPoint,
    n_samples: int,
    seed=0,
    include_coherent: bool = False,
    complex_coefficients: bool = True,
) -> float:
    """max over random unit tuples a of |sum_j a_j phi_j^C(zeta)|^2."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    b = as_basis(basis, window)
    phi = _window_values(b, window, zeta)
    a = random_unit_tuples(n_samples, len(phi), seed, complex_coefficients)
    best = float(np.max(np.abs(a @ phi) ** 2))
    if include_coherent:
        coh = coherent_state(b, window, zeta)
        best = max(best, abs(complex(coh @ phi)) ** 2)
    return best


def siciak_extremal(basis: BasisLike, lam: float, zeta: ComplexPoint) -> float:
    """log of the extremal function at degree lam: (1/lam) log sqrt(Pi_[0,lam]).

    Tends to sqrt(rho)(zeta) as lam grows.
    """
    return log_projection(basis, SpectralWindow.upto(lam), zeta) / (2 * lam)


@dataclass(frozen=True)
class WeylFit:
    slope: float
    prefactor: float
    residual: float
    lambdas: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    tau: float = 0.0

    @property
    def ok(self) -> bool:
        return self.residual <= 0.05


def weyl_fit(basis: BasisLike, zeta: ComplexPoint, lambda_grid, tau_rule="on-shell") -> WeylFit:
    """Slope of log P^tau_[0,lambda](zeta) against log lambda.

    ``tau_rule`` is ``"on-shell"`` (tau = sqrt(rho)(zeta)) or a fixed number.
    Grid points below a tenth of the largest lambda are discarded.
    """
    lams = np.sort(np.asarray(lambda_grid, dtype=float))
    if len(lams) < 5 or lams[-1] < 4 * lams[0]:
        raise InsufficientRange("need at least 5 grid points spanning a factor of 4")
    lams = lams[lams >= lams[-1] / 10]
    if tau_rule == "on-shell":
        tau = grauert_rho(zeta.model, zeta)
    else:
        tau = float(tau_rule)
    b = as_basis(basis, SpectralWindow.upto(lams[-1]))
    levels, logs = b.log_frequency_sums(zeta.coords, tau)
    cum = np.logaddexp.accumulate(logs)
    idx = np.searchsorted(levels, lams * (1 + 1e-12), side="right") - 1
    vals = np.exp(cum[idx])
    fit = fit_loglog(lams, vals)
    return WeylFit(fit.slope, math.exp(fit.intercept), fit.residual, lams, vals, tau)


# ------------------------------------------------------------------ sup norms


@dataclass(frozen=True)
class SupScan:
    sup: float
    rate: float
    argmax: np.ndarray


def tube_boundary_grid(model: ModelManifold, tau: float, resolution: int) -> np.ndarray:
    """Points of {sqrt(rho) = tau} on a product grid (base points x directions)."""
    if not tau < model.tube_bound:
        raise OutsideTube(f"tau = {tau} is beyond the {model.kind} tube bound")
    res = int(resolution)
    if model.kind == "circle":
        x = np.linspace(0, model.period, res, endpoint=False)
        z = np.concatenate([x + 1j * tau, x - 1j * tau])
        return z[:, None]
    if model.kind == "torus":
        if model.dim > 2:
            raise ModelUnsupported("boundary grids are implemented for tori of dimension <= 2")
        x = np.linspace(0, model.period, res, endpoint=False)
        if model.dim == 1:
            return np.concatenate([x + 1j * tau, x - 1j * tau])[:, None]
        ang = 2 * math.pi * np.arange(res) / res
        X1, X2, A = np.meshgrid(x, x, ang, indexing="ij")
        return np.stack([X1 + 1j * tau * np.cos(A), X2 + 1j * tau * np.sin(A)], axis=-1).reshape(-1, 2)
    if model.kind == "sphere" and model.dim == 2:
        th = np.linspace(0, math.pi, res)
        ph = 2 * math.pi * np.arange(2 * res) / (2 * res)
        al = 2 * math.pi * np.arange(res) / res
        TH, PH, AL = np.meshgrid(th, ph, al, indexing="ij")
        x = np.stack([np.sin(TH) * np.cos(PH), np.sin(TH) * np.sin(PH), np.cos(TH)], axis=-1)
        e_th = np.stack([np.cos(TH) * np.cos(PH), np.cos(TH) * np.sin(PH), -np.sin(TH)], axis=-1)
        e_ph = np.stack([-np.sin(PH), np.cos(PH), np.zeros_like(PH)], axis=-1)
        v = np.cos(AL)[..., None] * e_th + np.sin(AL)[..., None] * e_ph
        return (math.cosh(tau) * x + 1j * math.sinh(tau) * v).reshape(-1, 3)
    raise ModelUnsupported(f"no boundary grid for {model.kind} of dimension {model.dim}")


def supnorm_scan(mode: Eigenmode, tau: float, resolution: int = 32) -> SupScan:
    """sup of |phi^C| over a grid on the tube boundary, and (1/lambda) log sup."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    pts = tube_boundary_grid(mode.model, tau, resolution)
    vals = np.abs(eval_coords(mode, pts))
    i = int(np.argmax(vals))
    sup = float(vals[i])
    rate = math.log(sup) / mode.frequency if mode.frequency > 0 else 0.0
    return SupScan(sup, rate, pts[i])


# -------------------------------------------------------------- analytic decay


@dataclass(frozen=True)
class DecayScan:
    tau_hat: float
    intercept: float
    ks: np.ndarray = field(repr=False)
    amplitudes: np.ndarray = field(repr=False)
    truncated: bool = False


def circle_fourier(f: Callable, k_max: int, n_quad: Optional[int] = None) -> np.ndarray:
    """Coefficients c_k = (1/2pi) int f(x) e^{-ikx} dx for k = -k_max..k_max.

    Uses the trapezoid rule, which is spectrally accurate for periodic
    analytic integrands.
    """
    n = n_quad or max(1024, 8 * k_max)
    x = 2 * math.pi * np.arange(n) / n
    c = np.fft.fft(np.asarray(f(x), dtype=complex)) / n
    ks = np.arange(-k_max, k_max + 1)
    return c[ks % n]


def analytic_decay_scan(f: Callable, k_max: int, n_quad: Optional[int] = None, floor: float = 1e-13) -> DecayScan:
    """Exponential decay rate of the Fourier coefficients of f on the circle.

    The amplitude at |k| combines both signs, sqrt(|c_k|^2 + |c_-k|^2).  The
    fit stops at the first k where the amplitude drops below ``floor`` times
    the largest one; ``truncated`` reports that this happened.
    """
    if k_max < 16:
        raise ValueError("k_max must be >= 16")
    c = circle_fourier(f, k_max, n_quad)
    pos = c[k_max + 1 :]
    neg = c[:k_max][::-1]
    amp = np.sqrt(np.abs(pos) ** 2 + np.abs(neg) ** 2)
    ks = np.arange(1, k_max + 1)
    scale = max(float(np.max(amp)), abs(c[k_max]))
    below = np.nonzero(amp < floor * scale)[0]
    truncated = below.size > 0
    stop = int(below[0]) if truncated else k_max
    if stop < 3:
        raise NoiseFloor(f"coefficients hit the quadrature floor at k = {stop + 1}")
    ks, amp = ks[:stop], amp[:stop]
    A = np.stack([ks, np.ones(stop)], axis=1)
    (slope, icpt), *_ = np.linalg.lstsq(A, np.log(amp), rcond=None)
    return DecayScan(float(-slope), float(icpt), ks, amp, truncated)


def circle_mode_function(k: int, parity: str) -> Callable:
    """Normalized circle eigenfunction as a plain callable of x."""
    if k == 0 or parity == "const":
        return lambda x: np.full(np.shape(x), 1 / math.sqrt(2 * math.pi))
    trig = np.cos if parity == "cos" else np.sin
    return lambda x: trig(k * np.asarray(x)) / math.sqrt(math.pi)


def triple_products(k: int, j_max: int, n_quad: int = 4096) -> np.ndarray:
    """<phi_k^2, phi_j> on the circle for the cosine modes j = 0..j_max."""
    x = 2 * math.pi * np.arange(n_quad) / n_quad
    fk = circle_mode_function(k, "cos")(x) ** 2
    out = np.empty(j_max + 1)
    for j in range(j_max + 1):
        out[j] = np.sum(fk * circle_mode_function(j, "cos")(x)) * (2 * math.pi / n_quad)
    return out
