import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from grauert_lab.errors import NonPositiveValue
from grauert_lab.fits import fit_loglog


def test_exact_power_law():
    lams = np.geomspace(10, 1000, 9)
    fit = fit_loglog(lams, 2.0 * lams**1.5)
    assert fit.slope == pytest.approx(1.5, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(2.0), abs=1e-10)
    assert fit.residual < 1e-12


def test_two_points_are_enough():
    fit = fit_loglog([1.0, 10.0], [3.0, 300.0])
    assert fit.slope == pytest.approx(2.0, abs=1e-14)


def test_noisy_power_law(rng):
    lams = np.geomspace(50, 400, 20)
    vals = lams**2 * (1 + 0.01 * rng.standard_normal(lams.size))
    assert fit_loglog(lams, vals).slope == pytest.approx(2.0, abs=0.05)


@pytest.mark.parametrize("lams, vals", [([1, 2], [1, 0]), ([0, 2], [1, 1]), ([1, 2], [-1, 1])])
def test_nonpositive_samples_rejected(lams, vals):
    with pytest.raises(NonPositiveValue):
        fit_loglog(lams, vals)


def test_shape_checks():
    with pytest.raises(ValueError):
        fit_loglog([1.0], [1.0])
    with pytest.raises(ValueError):
        fit_loglog([1.0, 2.0], [1.0])


@given(st.floats(-3, 3), st.floats(-5, 5))
def test_recovers_any_exponent(p, c):
    lams = np.geomspace(1, 100, 6)
    fit = fit_loglog(lams, math.exp(c) * lams**p)
    assert abs(fit.slope - p) < 1e-10 and abs(fit.intercept - c) < 1e-9
