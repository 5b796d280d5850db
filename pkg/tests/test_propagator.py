import csv
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pointflux.flux import current
from pointflux.model import PointInteraction, bound_overlap, bound_state, make_preset_state
from pointflux.propagator import (
    decompose,
    decomposition_terms,
    evolve,
    evolve_negative,
    evolve_positive,
    evolve_resonant,
    free_gaussian,
    kernel_evolve,
    norm_at,
    write_batch_csv,
)

from conftest import ALPHA_NEG

REGIMES = [0.0, 1.0, ALPHA_NEG]


def _state(alpha, gauss, ortho):
    return ortho if alpha < 0 else gauss


def test_free_limit_matches_closed_form(gauss):
    r = np.array([0.5, 2.0, 7.0, 15.0])
    for t in (0.3, 2.0, 9.0):
        f = decompose(gauss, PointInteraction(0.0), r, t, free=True)
        assert np.max(np.abs(f.value - free_gaussian(r, t, 1.0))) < 1e-8


@pytest.mark.parametrize("alpha", REGIMES)
def test_decomposition_matches_direct_kernel(alpha, gauss, ortho):
    s = _state(alpha, gauss, ortho)
    inter = PointInteraction(alpha)
    r = np.array([1.0, 4.0, 12.0])
    for t in (0.7, 4.0):
        a = decompose(s, inter, r, t).value
        b = kernel_evolve(s, inter, r, t)
        assert np.max(np.abs(a - b) / np.abs(b)) < 1e-8


@pytest.mark.parametrize("alpha", REGIMES)
def test_radial_derivative_finite_difference(alpha, gauss, ortho):
    s = _state(alpha, gauss, ortho)
    inter = PointInteraction(alpha)
    r, t = 10.0, 5.0
    h = 1e-4 * r
    f = decompose(s, inter, [r - h, r, r + h], t)
    fd = (f.value[2] - f.value[0]) / (2 * h)
    assert abs(f.radial_derivative[1] - fd) / abs(fd) < 1e-5


def test_large_alpha_is_nearly_free(gauss):
    w = evolve_positive(gauss, 5.0, 2.0, 1e3).value
    assert abs(w - free_gaussian(np.array([5.0]), 2.0, 1.0)[0]) <= 1e-2


def test_bound_state_evolves_by_phase():
    inter = PointInteraction(ALPHA_NEG)
    b = bound_state(inter)
    w = evolve_negative(b, 2.0, 3.0, ALPHA_NEG)
    expected = np.exp(3j) * b.psi(2.0)
    assert abs(w.value - expected) / abs(expected) < 1e-5


def test_orthogonal_state_has_no_bound_term(ortho):
    inter = PointInteraction(ALPHA_NEG)
    assert abs(bound_overlap(ortho, inter)) <= 1e-8
    d = decomposition_terms(ortho, 3.0, 2.0, inter)
    assert abs(d.bound_term) <= 1e-8


def test_bound_term_for_state_with_bound_component(gauss):
    inter = PointInteraction(ALPHA_NEG)
    d = decomposition_terms(gauss, 3.0, 2.0, inter)
    b = bound_state(inter)
    expected = np.exp(1j * 2.0) * b.psi(3.0) * bound_overlap(gauss, inter)
    assert abs(d.bound_term - expected) < 1e-12


def test_resonant_has_no_r3(gauss):
    d = evolve_resonant(gauss, 3.0, 2.0).decomposition
    assert d.R3 == 0 and d.grad_R3 == 0


def test_regime_wrappers_check_sign(gauss):
    with pytest.raises(ValueError):
        evolve_positive(gauss, 1.0, 1.0, -1.0)
    with pytest.raises(ValueError):
        evolve_negative(gauss, 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        decompose(gauss, PointInteraction(0.0), [0.0], 1.0)
    with pytest.raises(ValueError):
        decompose(gauss, PointInteraction(0.0), [1.0], 0.0)


@pytest.mark.parametrize("alpha", REGIMES)
def test_norm_conserved(alpha, gauss, ortho):
    s = _state(alpha, gauss, ortho)
    n, _ = norm_at(s, PointInteraction(alpha), 5.0)
    assert abs(n - 1.0) < 1e-3


def test_a0_is_real_and_positive(expo):
    d = decomposition_terms(expo, 6.0, 2.0, PointInteraction(0.0))
    assert abs(d.A0_or_Aalpha.imag) <= 1e-12
    assert d.A0_or_Aalpha.real > 0


def test_a0_radial_scaling(expo):
    from scipy.integrate import quad as scipy_quad

    # r^2 A_0 = |F(r/2t)|^2 / (2 t r) (2 pi)^-3: divide out |F| from an independent quadrature
    t = 1.0
    r = np.geomspace(20, 200, 10)
    f = decompose(expo, PointInteraction(0.0), r, t)
    F2 = []
    for x in r:
        k = x / (2 * t)
        re = scipy_quad(lambda y: expo.u(y) * math.cos(k * y), 0, 60, limit=500)[0]
        im = scipy_quad(lambda y: expo.u(y) * math.sin(k * y), 0, 60, limit=500)[0]
        F2.append((4 * math.pi) ** 2 * (re * re + im * im))
    scaled = r**2 * f.A.real / np.array(F2)
    assert abs(np.polyfit(np.log(r), np.log(scaled), 1)[0] + 1) < 0.1


@pytest.mark.parametrize("alpha", REGIMES)
def test_current_from_decomposition_matches_total(alpha, gauss, ortho):
    s = _state(alpha, gauss, ortho)
    w = evolve(s, PointInteraction(alpha), 8.0, 3.0)
    fs = current(w)
    j = 2 * np.imag(np.conj(w.value) * w.radial_derivative)
    assert abs(fs.main_term + fs.remainder_term - j) <= 1e-8 * abs(j)
    assert fs.radial_current == pytest.approx(j, rel=1e-12)


@pytest.mark.parametrize("alpha", REGIMES)
@given(r=st.floats(0.5, 30.0), t=st.floats(0.2, 30.0))
def test_terms_sum_to_value(alpha, r, t):
    s = make_preset_state("gaussian", sigma=1.0)
    inter = PointInteraction(alpha)
    f = decompose(s, inter, [r], t)
    ref = kernel_evolve(s, inter, [r], t)[0]
    assert abs(f.value[0] - ref) <= max(10 * f.quad_error[0], 1e-9 * abs(ref))


def test_batch_csv_deterministic(tmp_path, gauss):
    fields = [decompose(gauss, PointInteraction(1.0), [1.0, 2.0], t) for t in (1.0, 2.0)]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_batch_csv(a, fields)
    write_batch_csv(b, [decompose(gauss, PointInteraction(1.0), [1.0, 2.0], t) for t in (1.0, 2.0)])
    assert a.read_bytes() == b.read_bytes()
    rows = list(csv.reader(open(a)))
    assert rows[0][:3] == ["alpha", "r", "t"] and len(rows) == 5
