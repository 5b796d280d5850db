import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pointflux.numerics import (
    Envelope,
    FaddeevaRangeError,
    QuadratureSpec,
    erfc_complex,
    faddeeva,
    faddeeva_derivatives,
    fit_power_law,
    integrate_improper_time,
    integrate_oscillatory,
)


def test_faddeeva_origin():
    assert faddeeva(0j) == pytest.approx(1 + 0j, abs=1e-16)


def test_faddeeva_imaginary_asymptote():
    y = 100.0
    assert abs(faddeeva(1j * y) * math.sqrt(math.pi) * y - 1) < 1e-4
    # next order of the continued fraction: 1/(sqrt(pi) y) (1 - 1/(2 y^2))
    asym = (1 - 1 / (2 * y * y)) / (math.sqrt(math.pi) * y)
    assert abs(faddeeva(1j * y) - asym) / asym < 1e-6


# frozen 40-digit values computed with mpmath before the build
W_1P1I = complex(0.30474420525691259245713884106959, 0.20821893820283162728743734725471)
ERFC_HALF_P_I = complex(-0.20484755831421800270211268209701, -1.02440088160844588172486045441089)


def test_faddeeva_frozen_value():
    assert abs(faddeeva(1 + 1j) - W_1P1I) / abs(W_1P1I) < 1e-12


def test_erfc_frozen_value():
    z = (1 + 2j) / 2
    assert abs(erfc_complex(z) - ERFC_HALF_P_I) / abs(ERFC_HALF_P_I) < 1e-12


def test_faddeeva_against_frozen_table(faddeeva_oracle):
    z, w, _ = faddeeva_oracle
    rel = np.abs(faddeeva(z) - w) / np.abs(w)
    assert rel.max() < 1e-12


def test_erfc_against_frozen_table(faddeeva_oracle):
    z, _, e = faddeeva_oracle
    rel = np.abs(erfc_complex(z) - e) / np.abs(e)
    assert rel.max() < 1e-12


def test_faddeeva_live_mpmath_points():
    mp.mp.dps = 30
    for z in (0.3 + 0.1j, -4.2 + 0.7j, 6.5 + 6.5j, 2.0 - 1.5j, -0.01 - 3j):
        ref = complex(mp.exp(-mp.mpc(z) ** 2) * mp.erfc(-1j * mp.mpc(z)))
        assert abs(faddeeva(z) - ref) / abs(ref) < 1e-12


def test_erfc_origin_and_reflection():
    assert erfc_complex(0j) == pytest.approx(1.0, abs=1e-16)
    for x in (0.1, 0.9, 2.5, 5.0):
        assert erfc_complex(-x + 0j) == pytest.approx(2 - erfc_complex(x + 0j), abs=1e-15)
        assert erfc_complex(x + 0j).real == pytest.approx(math.erfc(x), rel=1e-13)


def test_faddeeva_overflow_raises():
    with pytest.raises(FaddeevaRangeError):
        faddeeva(-40j)


def test_faddeeva_derivative_recurrence():
    z = np.array([0.4 + 0.2j, 3.0 + 1.0j])
    d = faddeeva_derivatives(z, 2)
    w = faddeeva(z)
    assert np.allclose(d[1], -2 * z * w + 2j / math.sqrt(math.pi), rtol=1e-13)
    h = 1e-5
    fd = (faddeeva(z + h) - faddeeva(z - h)) / (2 * h)
    assert np.allclose(d[1], fd, rtol=1e-8)


@given(st.floats(-10, 10), st.floats(-10, 10))
def test_faddeeva_conjugate_symmetry(x, y):
    z = complex(x, y)
    if abs(z) > 10:
        return
    a, b = faddeeva(-z.conjugate()), np.conj(faddeeva(z))
    assert abs(a - b) <= 1e-13 * max(1.0, abs(b))


def test_oscillatory_plain_exponential():
    res = integrate_oscillatory(lambda y: np.exp(-y), 0.0, (0.0, math.inf), QuadratureSpec(),
                                Envelope("exponential", 1.0, 1.0))
    assert res.value == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("s", [0.5, 3.0, 40.0])
def test_oscillatory_laplace_oracle(s):
    res = integrate_oscillatory(lambda y: np.exp(-y), s, (0.0, math.inf), QuadratureSpec(),
                                Envelope("exponential", 1.0, 1.0))
    assert abs(res.value - 1 / (1 - 1j * s)) < 1e-9
    assert res.converged


def test_oscillatory_against_dense_simpson():
    from scipy.integrate import simpson

    y = np.linspace(0.0, 12.0, 400001)
    f = y * np.exp(-y * y) * np.exp(3j * y)
    ref = simpson(f.real, x=y) + 1j * simpson(f.imag, x=y)
    res = integrate_oscillatory(lambda v: v * np.exp(-v * v), 3.0, (0.0, math.inf), QuadratureSpec(),
                                Envelope("gaussian", 1.0, 0.9))
    assert abs(res.value - ref) < 1e-9


def test_oscillatory_filon_strategy_agrees():
    spec = QuadratureSpec(oscillation_strategy="filon_phase_extraction")
    res = integrate_oscillatory(lambda y: np.exp(-y), 25.0, (0.0, 60.0), spec)
    assert abs(res.value - 1 / (1 - 25j)) < 1e-9


def test_improper_power_tail():
    res = integrate_improper_time(lambda t: t ** -3.0, 1.0, QuadratureSpec(), "power_law_fit", T_max=50.0)
    assert res.value.real == pytest.approx(0.5, abs=1e-6)
    assert abs(res.exponent - 3) < 0.05
    assert not res.divergent


def test_improper_harmonic_is_flagged():
    res = integrate_improper_time(lambda t: 1.0 / t, 1.0, QuadratureSpec(), "power_law_fit", T_max=100.0)
    assert res.divergent
    assert any("divergent" in f for f in res.flags)


def test_improper_exponential_from_zero():
    res = integrate_improper_time(lambda t: np.exp(-t), 0.0, QuadratureSpec(), "none", T_max=60.0)
    assert res.value.real == pytest.approx(1.0, abs=1e-8)


def test_fit_power_law_exact():
    t = np.geomspace(1, 100, 10)
    p, c, resid = fit_power_law(t, 3.0 * t ** -2.5)
    assert p == pytest.approx(2.5, abs=1e-12) and c == pytest.approx(3.0, rel=1e-12)
    assert resid < 1e-12


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(abs_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureSpec(oscillation_strategy="nope")
