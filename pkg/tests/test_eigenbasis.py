import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from grauert_lab import eigenbasis as eb
from grauert_lab import geometry as geo
from grauert_lab.errors import ModelUnsupported
from grauert_lab.experiments import random_tangent

CIRCLE = geo.ModelManifold.circle()
S2 = geo.ModelManifold.sphere(2)
T2 = geo.ModelManifold.torus(2)


# -------------------------------------------------------------- enumeration


def test_circle_enumeration():
    modes = eb.enumerate_spectrum(eb.EigenbasisSpec(CIRCLE, 2.5))
    assert [(m.quantum, m.parity) for m in modes] == [
        ((0,), "const"),
        ((1,), "cos"),
        ((1,), "sin"),
        ((2,), "cos"),
        ((2,), "sin"),
    ]


def test_sphere_enumeration_counts():
    modes = eb.enumerate_spectrum(eb.EigenbasisSpec(S2, math.sqrt(6)))
    assert len(modes) == 9
    assert [m.quantum[0] for m in modes] == [0, 1, 1, 1, 2, 2, 2, 2, 2]


def test_torus_enumeration_matches_lattice_count():
    modes = eb.enumerate_spectrum(eb.EigenbasisSpec(T2, 2 * math.pi))
    assert len(modes) == 5
    assert {m.quantum for m in modes if m.parity != "const"} == {(1, 0), (0, 1)}


@given(st.floats(0.5, 40.0))
def test_torus_enumeration_against_brute_force(lam):
    modes = eb.enumerate_spectrum(eb.EigenbasisSpec(T2, lam))
    r = lam / (2 * math.pi)
    kmax = int(r) + 1
    count = sum(1 for i in range(-kmax, kmax + 1) for j in range(-kmax, kmax + 1) if i * i + j * j <= r * r * (1 + 1e-12))
    # each nonzero +-k pair gives cos and sin, the zero vector gives one mode
    assert len(modes) == count


def test_complex_exponential_flag():
    modes = eb.enumerate_spectrum(eb.EigenbasisSpec(CIRCLE, 2.0, complex_exponential=True))
    assert len(modes) == 5
    assert all(m.parity == "exp" for m in modes)


def test_hyperbolic_and_higher_spheres_unsupported():
    with pytest.raises(ModelUnsupported):
        eb.enumerate_spectrum(eb.EigenbasisSpec(geo.ModelManifold.hyperbolic(2), 5.0))
    with pytest.raises(ModelUnsupported):
        eb.enumerate_spectrum(eb.EigenbasisSpec(geo.ModelManifold.sphere(3), 5.0))


def test_frequencies_sorted():
    for m in (CIRCLE, T2, S2, geo.ModelManifold.torus(3)):
        f = eb.Eigenbasis(eb.EigenbasisSpec(m, 15.0)).frequencies
        assert np.all(np.diff(f) >= 0)


# ---------------------------------------------------------------- Legendre


def test_legendre_low_degrees():
    w = 0.3 - 1.7j
    assert complex(eb.legendre_complex(0, w)) == 1
    assert complex(eb.legendre_complex(1, w)) == w
    # (3 w^2 - 1)/2 at w = 1.5 + 0.5i, where w^2 = 2 + 1.5i
    assert complex(eb.legendre_complex(2, 1.5 + 0.5j)) == pytest.approx(2.5 + 2.25j, abs=1e-14)
    assert complex(eb.legendre_complex(3, w)) == pytest.approx((5 * w**3 - 3 * w) / 2, abs=1e-13)


def test_legendre_normalization():
    vals = eb.legendre_table(500, 1.0)
    assert np.max(np.abs(vals - 1)) < 1e-12


@given(st.integers(0, 60), st.floats(-1, 1))
def test_legendre_matches_scipy_on_real_line(l, x):
    assert abs(complex(eb.legendre_complex(l, x)) - special.eval_legendre(l, x)) < 1e-11


def test_legendre_table_matches_single_degree():
    w = np.array([0.2 + 0.9j, 1.3, -2.0 + 0.1j])
    tab = eb.legendre_table(12, w)
    for l in (0, 5, 12):
        assert np.allclose(tab[l], eb.legendre_complex(l, w), rtol=1e-13)


# --------------------------------------------------------------- evaluation


def test_circle_cos3_continuation():
    mode = eb.Eigenmode(CIRCLE, 3.0, (3,), "cos")
    z = geo.ComplexPoint(CIRCLE, [0.1 + 0.2j])
    val = eb.eval_complex(mode, z) / math.sqrt(1 / math.pi)
    assert val == pytest.approx(cmath.cos(0.3 + 0.6j), abs=1e-14)
    assert val == pytest.approx(1.1325 - 0.1881j, abs=1e-4)


def test_real_point_gives_real_value(rng):
    basis = eb.Eigenbasis(eb.EigenbasisSpec(S2, 12.0))
    x, _ = random_tangent(S2, 0.0, rng)
    vals = basis.values(x)
    assert np.max(np.abs(vals.imag)) < 1e-14


def test_sphere_zonal_is_legendre_of_dot_product(rng):
    x, xi = random_tangent(S2, 0.7, rng)
    z = geo.exp_imaginary(S2, x, xi)
    for l in (0, 1, 3, 10):
        val = eb.eval_complex(eb.zonal_mode(l), z)
        ref = math.sqrt((2 * l + 1) / (4 * math.pi)) * complex(eb.legendre_complex(l, z.coords[2]))
        assert val == pytest.approx(ref, rel=1e-12, abs=1e-14)


@pytest.mark.parametrize("l,m", [(1, 1), (2, -1), (3, 2), (7, -5), (12, 12)])
def test_sphere_harmonics_match_associated_legendre(l, m, rng):
    # independent oracle: scipy's associated Legendre functions in spherical angles
    theta = rng.uniform(0.1, 3.0, 8)
    phi = rng.uniform(0, 2 * math.pi, 8)
    pts = np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=-1)
    am = abs(m)
    norm = math.sqrt((2 * l + 1) / (4 * math.pi) * math.factorial(l - am) / math.factorial(l + am))
    # scipy includes the Condon-Shortley phase; the real basis here does not
    plm = (-1) ** am * special.lpmv(am, l, np.cos(theta))
    ang = np.cos(am * phi) if m > 0 else np.sin(am * phi)
    ref = math.sqrt(2) * norm * plm * ang
    mode = eb.Eigenmode(S2, eb.sphere_frequency(l), (l, m), "cos" if m > 0 else "sin")
    assert np.allclose(mode(pts).real, ref, atol=1e-12)


def test_basis_values_agree_with_single_modes(rng):
    for model, lam in ((S2, 6.0), (T2, 15.0), (CIRCLE, 6.0)):
        basis = eb.Eigenbasis(eb.EigenbasisSpec(model, lam))
        x, xi = random_tangent(model, 0.4, rng)
        z = geo.exp_imaginary(model, x, xi)
        vals = basis.values(z.coords)
        single = np.array([eb.eval_complex(m, z) for m in basis.modes])
        assert np.allclose(vals, single, rtol=1e-12, atol=1e-14)


def test_gram_matrix_sphere():
    basis = eb.Eigenbasis(eb.EigenbasisSpec(S2, eb.sphere_frequency(4)))
    assert len(basis) == 25
    pts, w = eb.sphere_quadrature(24)
    V = basis.values(pts)
    G = (V.conj().T * w) @ V
    assert np.max(np.abs(G - np.eye(25))) < 1e-8


def test_gram_matrix_torus():
    basis = eb.Eigenbasis(eb.EigenbasisSpec(T2, 2 * math.pi * 2.3))
    n = 24
    g = (np.arange(n) + 0.5) / n
    X, Y = np.meshgrid(g, g, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], axis=-1)
    V = basis.values(pts)[:, :25]
    G = V.conj().T @ V / n**2
    assert np.max(np.abs(G - np.eye(V.shape[1]))) < 1e-8


def test_addition_theorem_degree_sums(rng):
    basis = eb.Eigenbasis(eb.EigenbasisSpec(S2, eb.sphere_frequency(30)))
    x, xi = random_tangent(S2, 0.5, rng)
    z = geo.exp_imaginary(S2, x, xi)
    sums = basis.degree_sums(z.coords)
    # sum_m |Y_l^m(z)|^2 = (2l+1)/(4 pi) P_l(z . conj z)
    w = complex(np.sum(z.coords * np.conj(z.coords)))
    ref = np.array([(2 * l + 1) / (4 * math.pi) * complex(eb.legendre_complex(l, w)).real for l in range(31)])
    assert np.allclose(sums, ref, rtol=1e-11)


def _deriv(f, z0, e):
    # fourth-order centered difference
    return (-f(z0 + 2 * e) + 8 * f(z0 + e) - 8 * f(z0 - e) + f(z0 - 2 * e)) / (12 * np.max(np.abs(e)))


@given(seed=st.integers(0, 2**31), lam=st.sampled_from([5.0, 20.0]))
def test_holomorphy_cauchy_riemann(seed, lam):
    rng = np.random.default_rng(seed)
    model = [CIRCLE, T2][seed % 2]
    basis = eb.Eigenbasis(eb.EigenbasisSpec(model, lam))
    z0 = rng.uniform(0, 1, model.coord_dim) + 1j * rng.uniform(-0.2, 0.2, model.coord_dim)
    h = 1e-4
    e = np.zeros(model.coord_dim)
    e[0] = h
    d_re = _deriv(basis.values, z0, e)
    d_im = _deriv(basis.values, z0, 1j * e)
    scale = max(1.0, float(np.max(np.abs(d_re))))
    assert np.max(np.abs(d_im - 1j * d_re)) / scale < 1e-6


def test_sphere_holomorphy(rng):
    basis = eb.Eigenbasis(eb.EigenbasisSpec(S2, eb.sphere_frequency(8)))
    z0 = geo.exp_imaginary(S2, *random_tangent(S2, 0.5, rng)).coords
    h = 1e-4
    for axis in range(3):
        e = np.zeros(3)
        e[axis] = h
        d_re = _deriv(basis.values, z0, e)
        d_im = _deriv(basis.values, z0, 1j * e)
        assert np.max(np.abs(d_im - 1j * d_re)) / max(1, np.max(np.abs(d_re))) < 1e-6


def test_eigenvalue_equation_on_circle():
    # second difference of cos(kx)/sqrt(pi) against -k^2
    x = np.linspace(0, 2 * math.pi, 50)
    h = 1e-3
    for k in (1, 4, 9):
        mode = eb.Eigenmode(CIRCLE, float(k), (k,), "cos")
        lap = -(mode(x[:, None] + h) - 2 * mode(x[:, None]) + mode(x[:, None] - h)) / h**2
        assert np.max(np.abs(lap.real - k * k * mode(x[:, None]).real)) < 1e-4 * k**4


def test_eigenvalue_equation_on_sphere(rng):
    # spherical Laplacian through the ambient harmonic extension r^l Y(x/r)
    for l, m in ((2, 1), (5, -3), (9, 0)):
        mode = eb.Eigenmode(S2, eb.sphere_frequency(l), (l, m), "cos" if m > 0 else ("sin" if m < 0 else "const"))
        x, _ = random_tangent(S2, 0.0, rng)
        h = 1e-3

        def F(p):
            r = np.linalg.norm(p)
            return (r**l * mode(p / r)).real

        lap = sum((F(x + h * e) - 2 * F(x) + F(x - h * e)) / h**2 for e in np.eye(3))
        # the homogeneous extension is harmonic in R^3 exactly when Y is an eigenfunction
        assert abs(lap) < 1e-4 * (l + 1) ** 2


@given(seed=st.integers(0, 2**31), frac=st.floats(0.05, 0.9))
def test_growth_bound(seed, frac):
    rng = np.random.default_rng(seed)
    basis = eb.Eigenbasis(eb.EigenbasisSpec(S2, eb.sphere_frequency(25)))
    x, xi = random_tangent(S2, 2 * frac, rng)
    z = geo.exp_imaginary(S2, x, xi)
    rho = geo.grauert_rho(S2, z)
    vals = np.abs(basis.values(z.coords))
    bound = (1 + basis.frequencies) ** 2 * np.exp(basis.frequencies * rho)
    assert np.all(vals <= bound)


def test_restrict_window_semantics():
    basis = eb.Eigenbasis(eb.EigenbasisSpec(CIRCLE, 5.0))
    assert basis.restrict(0, 2).sum() == 5
    assert basis.restrict(2, 4).sum() == 4
    assert basis.restrict(1.5, 1.9).sum() == 0
