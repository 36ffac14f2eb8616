"""Orthonormal Laplace eigenbases on the circle, flat tori and the 2-sphere.

Every basis function is a polynomial (sphere) or trigonometric polynomial
(tori) in the ambient coordinates, so evaluating the same expression at
complex coordinates gives the holomorphic continuation directly.

Sphere harmonics use the fully normalized associated-Legendre recurrence
written without the ``(1 - t^2)^{m/2}`` factor: with ``u = z1 + i z2``,
``v = z1 - i z2`` and ``t = z3``,

    Y_l^0  = q_l^0(t)
    Y_l^m  = sqrt(2) q_l^m(t) (u^m + v^m) / 2        (m > 0, cosine type)
    Y_l^-m = sqrt(2) q_l^m(t) (u^m - v^m) / (2i)     (m > 0, sine type)

where ``q_l^m`` is a polynomial of degree ``l - m``.  On the real sphere
``(u^m + v^m)/2 = sin^m(theta) cos(m phi)``, so these are the usual real
spherical harmonics.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ModelUnsupported
from .geometry import ComplexPoint, ModelManifold

_EPS = 1e-12

PARITIES = ("const", "cos", "sin", "exp")


@dataclass(frozen=True)
class Eigenmode:
    """One orthonormal eigenfunction.

    ``quantum`` is the lattice vector ``k`` on tori and ``(l, m)`` on the
    sphere, where negative ``m`` marks the sine-type harmonic.
    """

    model: ModelManifold
    frequency: float
    quantum: tuple
    parity: str

    def __call__(self, coords):
        return eval_coords(self, coords)


@dataclass(frozen=True)
class EigenbasisSpec:
    model: ModelManifold
    lambda_max: float
    complex_exponential: bool = False

    def __post_init__(self):
        if not self.lambda_max > 0:
            raise ValueError("lambda_max must be positive")


def legendre_complex(l: int, w):
    """Legendre polynomial P_l(w) by the forward three-term recurrence.

    >>> complex(legendre_complex(2, 1.5 + 0.5j))
    (2.5+2.25j)
    """
    if l < 0:
        raise ValueError("degree must be nonnegative")
    w = np.asarray(w, dtype=complex)
    p_prev = np.ones_like(w)
    if l == 0:
        return p_prev
    p = w.copy()
    for j in range(2, l + 1):
        p_prev, p = p, ((2 * j - 1) * w * p - (j - 1) * p_prev) / j
    return p


def legendre_table(L: int, w) -> np.ndarray:
    """All P_0(w) ... P_L(w); the leading axis indexes the degree."""
    w = np.asarray(w, dtype=complex)
    out = np.empty((L + 1,) + w.shape, dtype=complex)
    out[0] = 1.0
    if L >= 1:
        out[1] = w
    for j in range(2, L + 1):
        out[j] = ((2 * j - 1) * w * out[j - 1] - (j - 1) * out[j - 2]) / j
    return out


# ---------------------------------------------------------------- enumeration


def _lattice_vectors(dim: int, kmax: int):
    rng = range(-kmax, kmax + 1)
    for k in itertools.product(rng, repeat=dim):
        yield k


def _canonical(k) -> bool:
    # keep one of each +-k pair: the first nonzero entry is positive
    for c in k:
        if c != 0:
            return c > 0
    return False


def sphere_frequency(l: int, n: int = 2) -> float:
    return math.sqrt(l * (l + n - 1))


def enumerate_spectrum(spec: EigenbasisSpec) -> list[Eigenmode]:
    """All modes with frequency <= lambda_max, sorted, ties broken by quantum numbers."""
    model = spec.model
    lam = spec.lambda_max * (1 + _EPS)
    if model.kind == "hyperbolic":
        raise ModelUnsupported("hyperbolic space has no discrete orthonormal eigenbasis")
    if model.kind == "sphere":
        if model.dim != 2:
            raise ModelUnsupported("full harmonic bases are implemented on S^2 only")
        modes = []
        l = 0
        while l * (l + 1) <= lam * lam:
            freq = sphere_frequency(l)
            for m in range(-l, l + 1):
                parity = "const" if m == 0 else ("cos" if m > 0 else "sin")
                modes.append(Eigenmode(model, freq, (l, m), parity))
            l += 1
        return modes

    P = model.period
    kmax = int(math.floor(lam * P / (2 * math.pi)))
    bound = (lam * P / (2 * math.pi)) ** 2
    entries = []
    for k in _lattice_vectors(model.dim, kmax):
        k2 = sum(c * c for c in k)
        if k2 > bound:
            continue
        freq = 2 * math.pi * math.sqrt(k2) / P
        if spec.complex_exponential:
            entries.append((k2, k, 3, Eigenmode(model, freq, k, "exp")))
        elif k2 == 0:
            entries.append((0, k, 0, Eigenmode(model, 0.0, k, "const")))
        elif _canonical(k):
            entries.append((k2, k, 1, Eigenmode(model, freq, k, "cos")))
            entries.append((k2, k, 2, Eigenmode(model, freq, k, "sin")))
    entries.sort(key=lambda e: e[:3])
    return [e[3] for e in entries]


# ----------------------------------------------------------------- evaluation


def _as_coords(model: ModelManifold, z) -> np.ndarray:
    if isinstance(z, ComplexPoint):
        return z.coords
    z = np.asarray(z, dtype=complex)
    if z.ndim == 0:
        z = z.reshape(1)
    if z.shape[-1] != model.coord_dim:
        raise ValueError(f"expected trailing coordinate axis of length {model.coord_dim}")
    return z


def _sphere_q(l: int, m: int, t):
    """Normalized q_l^m(t) for a single (l, m), any array t."""
    t = np.asarray(t, dtype=complex)
    c = 1 / math.sqrt(4 * math.pi)
    for j in range(1, m + 1):
        c *= math.sqrt((2 * j + 1) / (2 * j))
    q_prev = np.full_like(t, c)
    if l == m:
        return q_prev
    q = math.sqrt(2 * m + 3) * t * c
    for j in range(m + 2, l + 1):
        a = math.sqrt((4 * j * j - 1) / (j * j - m * m))
        b = math.sqrt(((j - 1) ** 2 - m * m) / (4 * (j - 1) ** 2 - 1))
        q_prev, q = q, a * (t * q - b * q_prev)
    return q


def eval_coords(mode: Eigenmode, coords):
    """Evaluate one mode at raw coordinates (trailing axis = coordinates)."""
    model = mode.model
    z = _as_coords(model, coords)
    if model.kind == "sphere":
        l, m = mode.quantum
        am = abs(m)
        q = _sphere_q(l, am, z[..., 2])
        if m == 0:
            return q
        u = z[..., 0] + 1j * z[..., 1]
        v = z[..., 0] - 1j * z[..., 1]
        if m > 0:
            return math.sqrt(2) * q * (u ** am + v ** am) / 2
        return math.sqrt(2) * q * (u ** am - v ** am) / 2j
    vol = model.volume
    phase = (2 * math.pi / model.period) * (z @ np.asarray(mode.quantum, dtype=float))
    if mode.parity == "const":
        return np.full(phase.shape, 1 / math.sqrt(vol), dtype=complex)
    if mode.parity == "exp":
        return np.exp(1j * phase) / math.sqrt(vol)
    trig = np.cos if mode.parity == "cos" else np.sin
    return math.sqrt(2 / vol) * trig(phase)


def eval_complex(mode: Eigenmode, zeta: ComplexPoint) -> complex:
    """Holomorphic continuation phi^C(zeta)."""
    if zeta.model != mode.model:
        raise ValueError("point and mode belong to different models")
    return complex(np.asarray(eval_coords(mode, zeta.coords)).reshape(()))


def eval_real(mode: Eigenmode, x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.real(np.asarray(eval_coords(mode, x)).reshape(())))


class Eigenbasis:
    """Vectorised evaluation of a whole enumerated basis.

    ``values`` returns an array of shape ``points + (n_modes,)`` in the order
    of ``modes``; ``frequency_sums`` groups squared moduli by frequency, which
    is all that spectral projections need.
    """

    def __init__(self, spec: EigenbasisSpec):
        self.spec = spec
        self.model = spec.model
        self.modes = enumerate_spectrum(spec)
        self.frequencies = np.array([md.frequency for md in self.modes])
        uniq, inverse = np.unique(self.frequencies, return_inverse=True)
        self.levels = uniq
        self._level_index = inverse
        if self.model.kind == "sphere":
            self.max_degree = self.modes[-1].quantum[0]
        else:
            self._k = np.array([md.quantum for md in self.modes], dtype=float).reshape(len(self.modes), -1)
            self._parity = np.array([PARITIES.index(md.parity) for md in self.modes])

    def __len__(self):
        return len(self.modes)

    def restrict(self, lo: float, hi: float) -> np.ndarray:
        """Boolean mask of modes with lo < lambda <= hi (lo = 0 keeps lambda_0)."""
        f = self.frequencies
        upper = f <= hi * (1 + _EPS)
        if lo <= 0:
            return upper
        return upper & (f > lo * (1 + _EPS))

    def _sphere_tables(self, z):
        L = self.max_degree
        t = z[..., 2]
        u = z[..., 0] + 1j * z[..., 1]
        v = z[..., 0] - 1j * z[..., 1]
        ms = np.arange(L + 1)
        upow = u[..., None] ** ms
        vpow = v[..., None] ** ms
        c = np.empty(L + 1)
        c[0] = 1 / math.sqrt(4 * math.pi)
        for j in range(1, L + 1):
            c[j] = c[j - 1] * math.sqrt((2 * j + 1) / (2 * j))
        return t, upow, vpow, c

    def _sphere_q_rows(self, z):
        """Yield (l, q_l^m for m = 0..l) with shape points + (l+1,)."""
        t, upow, vpow, c = self._sphere_tables(z)
        L = self.max_degree
        shape = t.shape
        q_m2 = np.zeros(shape + (L + 1,), dtype=complex)
        q_m1 = np.zeros(shape + (L + 1,), dtype=complex)
        tt = t[..., None]
        for l in range(L + 1):
            q = np.zeros(shape + (L + 1,), dtype=complex)
            if l >= 2:
                m = np.arange(l - 1)
                a = np.sqrt((4.0 * l * l - 1) / (l * l - m * m))
                b = np.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1) ** 2 - 1))
                q[..., : l - 1] = a * (tt * q_m1[..., : l - 1] - b * q_m2[..., : l - 1])
            if l >= 1:
                q[..., l - 1] = math.sqrt(2 * l + 1) * t * c[l - 1]
            q[..., l] = c[l]
            yield l, q[..., : l + 1], upow[..., : l + 1], vpow[..., : l + 1]
            q_m2, q_m1 = q_m1, q

    def values(self, coords) -> np.ndarray:
        z = _as_coords(self.model, coords)
        if self.model.kind == "sphere":
            out = np.empty(z.shape[:-1] + (len(self.modes),), dtype=complex)
            pos = 0
            for l, q, up, vp in self._sphere_q_rows(z):
                cos_part = math.sqrt(2) * q[..., 1:] * (up[..., 1:] + vp[..., 1:]) / 2
                sin_part = math.sqrt(2) * q[..., 1:] * (up[..., 1:] - vp[..., 1:]) / 2j
                # order m = -l..-1 (sine, descending |m|), 0, 1..l (cosine)
                out[..., pos : pos + l] = sin_part[..., ::-1]
                out[..., pos + l] = q[..., 0]
                out[..., pos + l + 1 : pos + 2 * l + 1] = cos_part
                pos += 2 * l + 1
            return out
        vol = self.model.volume
        phase = (2 * math.pi / self.model.period) * (z @ self._k.T)
        par = self._parity
        out = np.empty(phase.shape, dtype=complex)
        out[..., par == 0] = 1 / math.sqrt(vol)
        out[..., par == 1] = math.sqrt(2 / vol) * np.cos(phase[..., par == 1])
        out[..., par == 2] = math.sqrt(2 / vol) * np.sin(phase[..., par == 2])
        out[..., par == 3] = np.exp(1j * phase[..., par == 3]) / math.sqrt(vol)
        return out

    def degree_sums(self, coords) -> np.ndarray:
        """Sphere only: sum over m of |Y_l^m|^2 for each degree l (last axis)."""
        if self.model.kind != "sphere":
            raise ModelUnsupported("degree sums are defined for the sphere basis")
        z = _as_coords(self.model, coords)
        out = np.empty(z.shape[:-1] + (self.max_degree + 1,))
        for l, q, up, vp in self._sphere_q_rows(z):
            q2 = np.abs(q) ** 2
            s = q2[..., 0] + np.sum(q2[..., 1:] * (np.abs(up[..., 1:]) ** 2 + np.abs(vp[..., 1:]) ** 2), axis=-1)
            out[..., l] = s
        return out

    def log_frequency_sums(self, coords, tau: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
        """(distinct frequencies, log of exp(-2 tau lambda) * summed |phi_j|^2).

        On tori the squared moduli have the closed forms
        |cos(a + ib)|^2 = (cosh 2b + cos 2a)/2 and |sin(a + ib)|^2 =
        (cosh 2b - cos 2a)/2, evaluated here in log form so that deep tube
        points at high frequency do not overflow.
        """
        z = _as_coords(self.model, coords)
        if self.model.kind == "sphere":
            with np.errstate(divide="ignore"):
                logs = np.log(self.degree_sums(z))
            return self.levels, logs - 2 * tau * self.levels
        vol = self.model.volume
        phase = (2 * math.pi / self.model.period) * (z @ self._k.T)
        a, b = phase.real, np.abs(phase.imag)
        damp = -2 * tau * self.frequencies - math.log(vol)
        par = self._parity
        e1 = np.exp(-2 * b)
        with np.errstate(divide="ignore"):
            trig_cos = np.log1p(e1 * e1 + 2 * e1 * np.cos(2 * a)) + 2 * b - math.log(2)
            trig_sin = np.log(np.maximum(1 + e1 * e1 - 2 * e1 * np.cos(2 * a), 0.0)) + 2 * b - math.log(2)
        # |sqrt(2/V) cos(a + ib)|^2 = (cosh 2b + cos 2a)/V; the 1/V enters through damp
        logs = np.where(par == 1, trig_cos, np.where(par == 2, trig_sin, 0.0))
        logs = np.where(par == 3, -2 * phase.imag, logs) + damp
        # group contiguous equal frequencies (modes are sorted by frequency)
        starts = np.flatnonzero(np.r_[True, np.diff(self._level_index) != 0])
        peak = np.maximum.reduceat(logs, starts, axis=-1)
        safe = np.where(np.isfinite(peak), peak, 0.0)
        rep = np.repeat(safe, np.diff(np.r_[starts, len(self.modes)]), axis=-1)
        with np.errstate(divide="ignore"):
            out = np.log(np.add.reduceat(np.exp(logs - rep), starts, axis=-1)) + safe
        return self.levels, out

    def frequency_sums(self, coords) -> tuple[np.ndarray, np.ndarray]:
        """(distinct frequencies, summed |phi_j|^2 per frequency)."""
        if self.model.kind == "sphere":
            return self.levels, self.degree_sums(coords)
        vals = np.abs(self.values(coords)) ** 2
        sums = np.zeros(vals.shape[:-1] + (len(self.levels),))
        for idx in range(len(self.levels)):
            sums[..., idx] = np.sum(vals[..., self._level_index == idx], axis=-1)
        return self.levels, sums


def zonal_mode(l: int) -> Eigenmode:
    """The normalized S^2 harmonic Y_l^0 = sqrt((2l+1)/4pi) P_l(z3)."""
    return Eigenmode(ModelManifold.sphere(2), sphere_frequency(l), (l, 0), "const")


def sphere_quadrature(n_theta: int, n_phi: Optional[int] = None):
    """Gauss-Legendre x uniform-phi product rule on S^2: (points, weights)."""
    n_phi = n_phi or 2 * n_theta
    t, wt = np.polynomial.legendre.leggauss(n_theta)
    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    T, PH = np.meshgrid(t, phi, indexing="ij")
    s = np.sqrt(1 - T ** 2)
    pts = np.stack([s * np.cos(PH), s * np.sin(PH), T], axis=-1).reshape(-1, 3)
    w = (wt[:, None] * np.full(n_phi, 2 * math.pi / n_phi)[None, :]).reshape(-1)
    return pts, w
