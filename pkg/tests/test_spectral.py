import csv
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pointflux.analysis import decay_fit
from pointflux.model import PointInteraction, make_preset_state
from pointflux.propagator import decompose, free_gaussian
from pointflux.spectral import (
    C3,
    SingularityError,
    b2_integrals,
    b2_integrals_quadrature,
    b2_term,
    eigenfunction_value,
    export_profile_csv,
    outgoing_state,
    parseval_norm,
    psi_out_hat,
    resonant_b_split,
    spectral_evolve,
    spectral_field,
)

from conftest import ALPHA_NEG


def test_eigenfunction_resonant_value():
    v = eigenfunction_value(PointInteraction(0.0), [0, 0, 1.0], [1.0, 0, 0])
    assert abs(v - complex(1 - math.sin(1), math.cos(1))) < 1e-14
    assert abs(v - (0.158529 + 0.540302j)) < 1e-6


def test_eigenfunction_strong_coupling_is_plane_wave():
    k, x = np.array([0.3, -0.2, 1.1]), np.array([1.0, 2.0, -0.5])
    v = eigenfunction_value(PointInteraction(1e6), k, x)
    assert abs(v - np.exp(1j * k @ x)) < 1e-6


@given(st.lists(st.floats(-3, 3), min_size=6, max_size=6), st.floats(-2, 2))
def test_eigenfunction_conjugation(v, alpha):
    k, x = np.array(v[:3]), np.array(v[3:])
    if np.linalg.norm(x) < 1e-3 or (alpha == 0 and np.linalg.norm(k) < 1e-6):
        return
    inter = PointInteraction(alpha)
    plus = eigenfunction_value(inter, k, x, "plus")
    assert abs(plus - np.conj(eigenfunction_value(inter, -k, x, "minus"))) < 1e-14


def test_eigenfunction_singularities():
    with pytest.raises(SingularityError):
        eigenfunction_value(PointInteraction(1.0), [1, 0, 0], [0, 0, 0])
    with pytest.raises(SingularityError):
        eigenfunction_value(PointInteraction(0.0), [0, 0, 0], [1, 0, 0])


def test_eigenfunction_off_centre():
    inter = PointInteraction(1.0, center=(0.5, 0.0, 0.0))
    k, x = np.array([0.0, 0.0, 2.0]), np.array([1.5, 0.0, 0.0])
    expect = np.exp(1j * k @ x) + np.exp(1j * 2.0 * 1.0) / ((4 * math.pi - 2j) * 1.0)
    assert abs(eigenfunction_value(inter, k, x) - expect) < 1e-14


@pytest.mark.parametrize("alpha", [1.0, ALPHA_NEG])
def test_psi_out_against_eigenfunction_integral(alpha, gauss):
    """<Phi_+(., k), psi_0> by brute-force quadrature over r and cos(theta)."""
    inter = PointInteraction(alpha)
    kk = 0.7
    xr, wr = np.polynomial.legendre.leggauss(60)
    r = 4.0 * (xr + 1)
    wr = 4.0 * wr
    mu, wm = np.polynomial.legendre.leggauss(40)
    total = 0j
    for ri, wi in zip(r, wr):
        for m, w in zip(mu, wm):
            x = ri * np.array([math.sqrt(1 - m * m), 0.0, m])
            phi = eigenfunction_value(inter, [0, 0, kk], x, "plus")
            total += np.conj(phi) * gauss.psi(ri) * 2 * math.pi * ri**2 * wi * w
    assert abs(C3 * total - psi_out_hat(gauss, inter, kk)) < 1e-8


def test_parseval_alpha_one(gauss):
    assert parseval_norm(outgoing_state(gauss, PointInteraction(1.0))) == pytest.approx(1.0, abs=1e-4)


def test_singularity_classification(expo, wproj):
    out = outgoing_state(expo, PointInteraction(0.0))
    assert out.singular_at_zero and abs(out.residue_estimate) > 1e-3
    with pytest.raises(SingularityError):
        out.value_at_zero()
    outw = outgoing_state(wproj, PointInteraction(0.0))
    assert not outw.singular_at_zero
    assert np.all(np.abs(outw.k_profile(np.array([1e-3, 1e-4, 1e-5]))) < 1e-5)
    assert outw.value_at_zero() == 0
    assert not outgoing_state(expo, PointInteraction(1.0)).singular_at_zero


def test_spectral_matches_free_gaussian(gauss):
    prof = outgoing_state(gauss, PointInteraction(0.0), free=True)
    r = np.array([1.0, 3.0, 8.0])
    for t in (0.5, 3.0):
        f = spectral_field(prof, r, t)
        assert np.max(np.abs(f.value - free_gaussian(r, t, 1.0))) < 1e-8


@pytest.mark.parametrize("alpha", [0.0, 1.0, ALPHA_NEG])
def test_spectral_agrees_with_propagator(alpha, gauss, ortho):
    s = ortho if alpha < 0 else gauss
    inter = PointInteraction(alpha)
    prof = outgoing_state(s, inter)
    r = np.array([2.0, 9.0])
    f = spectral_field(prof, r, 3.0)
    d = decompose(s, inter, r, 3.0)
    assert np.max(np.abs(f.value - d.value) / np.abs(d.value)) < 1e-6
    assert np.max(np.abs(f.radial_derivative - d.radial_derivative) / np.abs(d.radial_derivative)) < 1e-6


def test_short_time_limit(gauss):
    prof = outgoing_state(gauss, PointInteraction(1.0))
    w = spectral_evolve(prof, 3.0, 1e-3)
    assert abs(w.value - gauss.psi(3.0)) < 1e-3


def test_b2_closed_form_against_quadrature():
    i1, i2 = b2_integrals(10.0, 5.0)
    q1, q2 = b2_integrals_quadrature(10.0, 5.0)
    assert abs(i1 - q1) / abs(q1) < 1e-9
    assert abs(i2 - q2) / abs(q2) < 1e-9


def test_b2_vanishes_for_w_state(wproj):
    split = resonant_b_split(outgoing_state(wproj, PointInteraction(0.0)), 5.0, 2.0)
    assert split.b2 == 0 and split.grad_b2 == 0


def test_b_split_recombines(wproj):
    prof = outgoing_state(wproj, PointInteraction(0.0))
    split = resonant_b_split(prof, 6.0, 2.0)
    f = spectral_field(prof, [6.0], 2.0)
    assert abs(split.b - f.b[0]) < 1e-10 * max(1.0, abs(f.b[0]))
    assert abs(split.grad_b - f.grad_b[0]) < 1e-10 * max(1.0, abs(f.grad_b[0]))
    with pytest.raises(ValueError):
        resonant_b_split(outgoing_state(wproj, PointInteraction(1.0)), 6.0, 2.0)


def test_b2_prefactor_linear():
    a = b2_term(7.0, 3.0, 1.0)
    b = b2_term(7.0, 3.0, 2.5 - 1j)
    assert abs(b[0] - (2.5 - 1j) * a[0]) < 1e-15


def test_b2_fixed_radius_late_time_exponent(gauss):
    # the C2/(R t) branch takes over once t >> R^2
    est = decay_fit("b2", PointInteraction(0.0), gauss, window=(1000.0, 10000.0), fixed_radius=5.0)
    assert abs(est.fitted_exponent + 1.0) < 0.1
    # on t in [10, 200] at R = 20 the profile is still in transition (see notes)
    early = decay_fit("b2", PointInteraction(0.0), gauss, window=(10.0, 200.0), fixed_radius=20.0)
    assert early.fitted_exponent > -1.0


def test_export_profile(tmp_path, gauss):
    p = tmp_path / "k.csv"
    export_profile_csv(outgoing_state(gauss, PointInteraction(1.0)), p, np.linspace(0.1, 2, 5))
    rows = list(csv.reader(open(p)))
    assert rows[0] == ["k", "re", "im", "abs2"] and len(rows) == 6
