"""Model manifolds, their complexifications and the Grauert tube function.

Four solvable geometries are supported: the circle, flat tori, the round
sphere (as the complex quadric ``z.z = 1``) and hyperbolic space (as the
complexified Lorentz hyperboloid ``<z, z>_L = -1``).  All bilinear forms on
complex points are the holomorphic (non-Hermitian) extensions of the real
ones.

The complexified squared distance is computed from the chord ``d = zeta - w``:
on the quadric ``1 - zeta.w = (d.d) / 2``, so

    sphere      r^2 = (2 arcsin(sqrt(d.d) / 2))^2
    hyperbolic  r^2 = (2 arcsinh(sqrt(<d,d>_L) / 2))^2
    flat        r^2 = d.d

which agree with ``arccos(zeta.w)^2`` resp. ``arccosh(-<zeta,w>_L)^2`` but do
not lose digits near the diagonal.  Each expression is even in the square
root, hence independent of its branch.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import BranchAmbiguity, FiberTooLarge, ModelUnsupported, OutsideTube

KINDS = ("circle", "torus", "sphere", "hyperbolic")

QUADRIC_TOL = 1e-12
TANGENCY_TOL = 1e-10
_CUT_TOL = 1e-12


class CutLocusWarning(UserWarning):
    """Torus points equidistant to two lattice representatives."""


@dataclass(frozen=True)
class ModelManifold:
    """A solvable model geometry.

    ``scale`` is the period of each coordinate for the circle and tori; the
    sphere and hyperbolic models always have curvature +1 / -1.
    """

    kind: str
    dim: int
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.kind == "circle" and self.dim != 1:
            raise ValueError("circle requires dim = 1")
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if self.kind in ("sphere", "hyperbolic") and self.scale != 1.0:
            raise ValueError("sphere and hyperbolic models have unit radius")

    @classmethod
    def circle(cls, period: float = 2 * math.pi) -> "ModelManifold":
        return cls("circle", 1, period)

    @classmethod
    def torus(cls, dim: int, period: float = 1.0) -> "ModelManifold":
        return cls("torus", dim, period)

    @classmethod
    def sphere(cls, dim: int = 2) -> "ModelManifold":
        return cls("sphere", dim)

    @classmethod
    def hyperbolic(cls, dim: int = 2) -> "ModelManifold":
        return cls("hyperbolic", dim)

    @property
    def is_flat(self) -> bool:
        return self.kind in ("circle", "torus")

    @property
    def period(self) -> float:
        if not self.is_flat:
            raise ModelUnsupported(f"{self.kind} has no period")
        return self.scale

    @property
    def coord_dim(self) -> int:
        return self.dim if self.is_flat else self.dim + 1

    @property
    def curvature(self) -> int:
        return {"sphere": 1, "hyperbolic": -1}.get(self.kind, 0)

    @property
    def tube_bound(self) -> float:
        """Largest fiber length for which the imaginary exponential map is used."""
        if self.kind == "sphere":
            return math.pi
        if self.kind == "hyperbolic":
            return math.pi / 2
        return math.inf

    @property
    def injectivity_radius(self) -> float:
        if self.kind == "sphere":
            return math.pi
        if self.kind == "hyperbolic":
            return math.inf
        return self.scale / 2

    @property
    def volume(self) -> float:
        if self.is_flat:
            return self.scale ** self.dim
        if self.kind == "sphere":
            n = self.dim
            return 2 * math.pi ** ((n + 1) / 2) / math.gamma((n + 1) / 2)
        return math.inf


def bilinear(model: ModelManifold, a, b):
    """Holomorphic extension of the ambient metric pairing, over the last axis."""
    a = np.asarray(a)
    b = np.asarray(b)
    if model.kind == "hyperbolic":
        return np.sum(a[..., :-1] * b[..., :-1], axis=-1) - a[..., -1] * b[..., -1]
    return np.sum(a * b, axis=-1)


def _reduce_flat(model: ModelManifold, coords: np.ndarray) -> np.ndarray:
    p = model.period
    re = np.mod(coords.real, p)
    return re + 1j * coords.imag


@dataclass(frozen=True)
class TubeCoords:
    x: np.ndarray
    xi: np.ndarray


@dataclass(frozen=True, eq=False)
class ComplexPoint:
    """A point of the complexified model in ambient (or torus) coordinates."""

    model: ModelManifold
    coords: np.ndarray
    tube: Optional[TubeCoords] = field(default=None)

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coords, dtype=complex)).copy()
        if c.shape != (self.model.coord_dim,):
            raise ValueError(
                f"{self.model.kind} points need {self.model.coord_dim} coordinates, got shape {c.shape}"
            )
        if self.model.is_flat:
            c = _reduce_flat(self.model, c)
        else:
            target = 1.0 if self.model.kind == "sphere" else -1.0
            resid = abs(bilinear(self.model, c, c) - target)
            if resid > QUADRIC_TOL * max(1.0, float(np.sum(np.abs(c) ** 2))):
                raise ValueError(f"point is off the complexified {self.model.kind} (residual {resid:.3g})")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @classmethod
    def real(cls, model: ModelManifold, x) -> "ComplexPoint":
        return cls(model, np.asarray(x, dtype=float).reshape(model.coord_dim))

    def conj(self) -> "ComplexPoint":
        return ComplexPoint(self.model, np.conj(self.coords))

    @property
    def is_real(self) -> bool:
        return bool(np.all(np.abs(self.coords.imag) == 0))

    def __repr__(self):
        return f"ComplexPoint({self.model.kind}, {np.array2string(self.coords, precision=6)})"


@dataclass(frozen=True, eq=False)
class PhasePoint:
    """A point (Z, W) of the complexified cotangent bundle."""

    model: ModelManifold
    position: np.ndarray
    momentum: np.ndarray

    def __post_init__(self):
        z = np.atleast_1d(np.asarray(self.position, dtype=complex))
        w = np.atleast_1d(np.asarray(self.momentum, dtype=complex))
        if z.shape != (self.model.coord_dim,) or w.shape != z.shape:
            raise ValueError("position and momentum must match the model's coordinate dimension")
        if not self.model.is_flat:
            scale = max(1.0, float(np.linalg.norm(z) * np.linalg.norm(w)))
            if abs(bilinear(self.model, z, w)) > TANGENCY_TOL * scale:
                raise ValueError("momentum is not tangent to the quadric (Z.W != 0)")
        object.__setattr__(self, "position", z)
        object.__setattr__(self, "momentum", w)


def _check_real_tangent(model, x, xi):
    x = np.asarray(x, dtype=float).reshape(model.coord_dim)
    xi = np.asarray(xi, dtype=float).reshape(model.coord_dim)
    if model.is_flat:
        return x, xi, float(np.linalg.norm(xi))
    target = 1.0 if model.kind == "sphere" else -1.0
    if abs(bilinear(model, x, x) - target) > TANGENCY_TOL * max(1.0, x @ x):
        raise ValueError(f"base point is not on the real {model.kind}")
    if abs(bilinear(model, x, xi)) > TANGENCY_TOL * max(1.0, np.linalg.norm(x) * np.linalg.norm(xi)):
        raise ValueError("fiber vector is not tangent at the base point")
    sq = float(bilinear(model, xi, xi))
    return x, xi, math.sqrt(max(sq, 0.0))


def exp_imaginary(model: ModelManifold, x, xi) -> ComplexPoint:
    """Imaginary-time exponential map E(x, xi) = exp_x(i xi).

    >>> exp_imaginary(ModelManifold.circle(), [1.0], [0.25]).coords
    array([1.+0.25j])
    """
    x, xi, s = _check_real_tangent(model, x, xi)
    if s >= model.tube_bound:
        raise FiberTooLarge(f"|xi| = {s:.6g} exceeds the {model.kind} bound {model.tube_bound:.6g}")
    if model.is_flat:
        z = x + 1j * xi
    elif s == 0.0:
        z = x.astype(complex)
    elif model.kind == "sphere":
        z = math.cosh(s) * x + 1j * math.sinh(s) * (xi / s)
    else:
        z = math.cos(s) * x + 1j * math.sin(s) * (xi / s)
    return ComplexPoint(model, z, TubeCoords(x.copy(), xi.copy()))


def _on_cut(q, lower=None, upper=None):
    q = complex(q)
    scale = max(1.0, abs(q))
    if abs(q.imag) > _CUT_TOL * scale:
        return False
    if lower is not None:
        return q.real >= lower - _CUT_TOL * scale
    return q.real <= upper + _CUT_TOL * scale


def chord_to_r2(model: ModelManifold, q):
    """Squared complex distance as a function of the chord square q = d.d."""
    q = np.asarray(q, dtype=complex)
    if model.is_flat:
        return q
    half = np.sqrt(q) / 2
    if model.kind == "sphere":
        return (2 * np.arcsin(half)) ** 2
    return (2 * np.arcsinh(half)) ** 2


def r2_complex(model: ModelManifold, zeta: ComplexPoint, w: ComplexPoint) -> complex:
    """Holomorphic extension of the squared geodesic distance r^2(zeta, w)."""
    if zeta.model != model or w.model != model:
        raise ValueError("points belong to a different model")
    d = zeta.coords - w.coords
    if model.is_flat:
        p = model.period
        shift = np.round(d.real / p)
        d = d - p * shift
        if np.any(np.abs(np.abs(d.real) - p / 2) <= 1e-12 * p):
            warnings.warn("points lie on the torus cut locus; r^2 is not smooth here", CutLocusWarning, stacklevel=2)
        return complex(np.sum(d * d))
    q = complex(bilinear(model, d, d))
    # sphere: cut zeta.w in (-inf, -1]  <=>  q in [4, inf)
    # hyperbolic: cut -<zeta,w>_L in (-inf, -1]  <=>  q in (-inf, -4]
    if model.kind == "sphere" and _on_cut(q, lower=4.0):
        raise BranchAmbiguity(f"zeta.w = {1 - q / 2:.6g} lies on the branch cut (-inf, -1]")
    if model.kind == "hyperbolic" and _on_cut(q, upper=-4.0):
        raise BranchAmbiguity(f"-<zeta,w>_L = {1 + q / 2:.6g} lies on the branch cut (-inf, -1]")
    return complex(chord_to_r2(model, q))


def grauert_rho(model: ModelManifold, zeta: ComplexPoint) -> float:
    """Grauert tube function sqrt(rho)(zeta) = sqrt(r^2(zeta, conj zeta)) / (2i)."""
    try:
        r2 = r2_complex(model, zeta, zeta.conj())
    except BranchAmbiguity as exc:
        raise OutsideTube(str(exc)) from exc
    if model.kind == "hyperbolic" and not zeta.coords[-1].real > 0:
        # r^2 cannot tell the tube over the upper sheet from the one over the lower sheet
        raise OutsideTube("real part is not future timelike (tube over the other sheet)")
    if abs(r2.imag) > 1e-8 * (1.0 + abs(r2)) or r2.real > 1e-12 * (1.0 + abs(r2)):
        raise OutsideTube(f"r^2(zeta, conj zeta) = {r2:.6g} is not a nonpositive real")
    return math.sqrt(max(-r2.real, 0.0)) / 2


def grauert_rho_coords(model: ModelManifold, coords) -> np.ndarray:
    """Vectorised sqrt(rho) over an array of points (last axis = coordinates)."""
    c = np.asarray(coords, dtype=complex)
    if model.is_flat:
        return np.sqrt(np.sum(c.imag ** 2, axis=-1))
    d = 2j * c.imag
    q = bilinear(model, d, d)
    r2 = chord_to_r2(model, q)
    out = np.sqrt(np.maximum(-r2.real, 0.0)) / 2
    if model.kind == "hyperbolic":
        out = np.where(c[..., -1].real > 0, out, np.nan)
    return out


def _flow_factors(omega2, t, hyperbolic=False):
    # cos(t w), sin(t w)/w, w sin(t w) as entire functions of w^2 (cosh/sinh for hyperbolic)
    omega = np.sqrt(complex(omega2))
    if abs(t * omega) < 1e-8:
        u = t * t * omega2
        sign = 1 if hyperbolic else -1
        c = 1 + sign * u / 2
        s_over = t * (1 + sign * u / 6)
        ws = t * omega2 * (1 + sign * u / 6)
        return c, s_over, ws
    if hyperbolic:
        return np.cosh(t * omega), np.sinh(t * omega) / omega, omega * np.sinh(t * omega)
    return np.cos(t * omega), np.sin(t * omega) / omega, omega * np.sin(t * omega)


def geodesic_flow_complex(model: ModelManifold, p: PhasePoint, t) -> PhasePoint:
    """Closed-form holomorphic geodesic flow G^t(Z, W) at complex time t."""
    t = complex(t)
    z, w = p.position, p.momentum
    if model.is_flat:
        return PhasePoint(model, z + t * w, w)
    omega2 = complex(bilinear(model, w, w))
    if model.kind == "sphere":
        c, s_over, ws = _flow_factors(omega2, t)
        return PhasePoint(model, c * z + s_over * w, -ws * z + c * w)
    c, s_over, ws = _flow_factors(omega2, t, hyperbolic=True)
    return PhasePoint(model, c * z + s_over * w, ws * z + c * w)


def lift(model: ModelManifold, x, xi) -> PhasePoint:
    """The complex phase point G^i(x, xi); its position is E(x, xi)."""
    x, xi, _ = _check_real_tangent(model, x, xi)
    return geodesic_flow_complex(model, PhasePoint(model, x, xi), 1j)


def geodesic_distance(model: ModelManifold, x, y) -> float:
    """Real geodesic distance, straight from the model formulas."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if model.is_flat:
        d = x - y
        d = d - model.period * np.round(d / model.period)
        return float(np.linalg.norm(d))
    if model.kind == "sphere":
        return float(np.arccos(np.clip(x @ y, -1.0, 1.0)))
    return float(np.arccosh(max(-float(bilinear(model, x, y)), 1.0)))


def tangent_frame(model: ModelManifold, x) -> np.ndarray:
    """Orthonormal basis (rows) of the tangent space at a real point."""
    x = np.asarray(x, dtype=float)
    if model.is_flat:
        return np.eye(model.dim)
    if model.kind == "sphere":
        # Gram-Schmidt against x in the Euclidean metric
        basis = []
        for e in np.eye(model.dim + 1):
            v = e - (e @ x) * x
            for b in basis:
                v = v - (v @ b) * b
            nv = np.linalg.norm(v)
            if nv > 1e-8:
                basis.append(v / nv)
            if len(basis) == model.dim:
                break
        return np.array(basis)
    basis = []
    for e in np.eye(model.dim + 1):
        v = e + bilinear(model, e, x) * x
        for b in basis:
            v = v - bilinear(model, v, b) * b
        nv2 = bilinear(model, v, v)
        if nv2 > 1e-12:
            basis.append(v / math.sqrt(nv2))
        if len(basis) == model.dim:
            break
    return np.array(basis)
