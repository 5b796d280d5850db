"""Generalized eigenfunctions, the outgoing state and eigenfunction-expansion evolution.

Fourier convention is unitary: f^(k) = (2 pi)^(-3/2) int exp(-ik.x) f(x) d^3x.
For a radial state with u(r) = r psi_0(r), kappa = 4 pi alpha,

    psi_out^(k) = (2 pi)^(-3/2) 4 pi (kappa S(k) + C(k)) / (kappa - ik)

with S(k) = int u sin(ks)/k ds and C(k) = int u cos(ks) ds. At alpha = 0
this carries a 1/k pole unless int u ds = 0 (the state lies in W), so the
quadratures below work with k * psi_out^(k), which is bounded.

Evolution uses psi_t = a + b with

    a = (2 pi)^(-3/2) 4 pi int k^2 exp(-ik^2 t) psi_out^(k) j0(kr) dk
    b = (2 pi)^(-3/2) (4 pi / r) int k^2 exp(-ik^2 t) psi_out^(k) exp(-ikr) / (kappa + ik) dk
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import spherical_jn

from .model import PointInteraction, RadialState
from .numerics.faddeeva import faddeeva
from .numerics.quadrature import (
    QuadratureSpec,
    composite_rule,
    oscillation_edges,
    panel_error,
)

C3 = (2 * math.pi) ** -1.5


class SingularityError(ValueError):
    """Evaluation requested at a singular point."""


def eigenfunction_value(interaction: PointInteraction, k, x, kind: str = "minus") -> complex:
    """psi(x, k) = exp(ik.x) + exp(ik.y) exp(i|k||x-y|) / ((kappa - i|k|) |x-y|).

    ``kind="plus"`` returns Phi_+(x, k) = conj(psi(x, -k)).
    """
    k = np.asarray(k, dtype=float)
    x = np.asarray(x, dtype=float)
    if kind == "plus":
        return complex(np.conj(eigenfunction_value(interaction, -k, x, "minus")))
    if kind != "minus":
        raise ValueError("kind must be 'minus' or 'plus'")
    y = np.asarray(interaction.center)
    d = float(np.linalg.norm(x - y))
    if d == 0.0:
        raise SingularityError("eigenfunction is singular at the interaction centre")
    kn = float(np.linalg.norm(k))
    denom = interaction.kappa - 1j * kn
    if denom == 0:
        raise SingularityError("scattering amplitude has a pole at k = 0 for alpha = 0")
    return complex(np.exp(1j * k @ x) + np.exp(1j * k @ y) * np.exp(1j * kn * d) / (denom * d))


# --------------------------------------------------------------------------
# outgoing state


def _cs(state: RadialState, k, order: int = 0):
    """(S, C) or their k-derivatives, valid for real or complex k.

    On the real axis the closed-form sine transform avoids the cancellation in
    (T(k) - T(-k)) / 2ik at small k. Off the axis T(+-k) are continued analytically.
    """
    k = np.asarray(k)
    if not np.iscomplexobj(k) or not np.any(k.imag):
        kr = np.real(k).astype(float)
        return state.sinc_u(kr, order) + 0j, np.real(state.fourier_u(kr, order)) + 0j
    tp, tm = state.fourier_u(k), state.fourier_u(-k)
    if order == 0:
        return (tp - tm) / (2j * k), 0.5 * (tp + tm)
    dp, dm = state.fourier_u(k, 1), state.fourier_u(-k, 1)
    return (dp + dm) / (2j * k) - (tp - tm) / (2j * k**2), 0.5 * (dp - dm)


def psi_out_hat(state: RadialState, interaction: PointInteraction, k, free: bool = False):
    """Radial profile of psi_out^(k) (the free transform psi_0^ when ``free``)."""
    kappa = interaction.kappa
    s0, c0 = _cs(state, k)
    if free:
        return C3 * 4 * math.pi * s0
    return C3 * 4 * math.pi * (kappa * s0 + c0) / (kappa - 1j * np.asarray(k))


def k_psi_out_hat(state: RadialState, interaction: PointInteraction, k, free: bool = False):
    """k * psi_out^(k), finite at k = 0 in every regime."""
    kappa = interaction.kappa
    k = np.asarray(k)
    s0, c0 = _cs(state, k)
    if free:
        return C3 * 4 * math.pi * k * s0
    if kappa == 0:
        return 1j * C3 * 4 * math.pi * c0
    return C3 * 4 * math.pi * k * (kappa * s0 + c0) / (kappa - 1j * k)


def psi_out_hat_derivative(state: RadialState, interaction: PointInteraction, k, free: bool = False):
    """d/dk psi_out^(k)."""
    kappa = interaction.kappa
    k = np.asarray(k)
    s1, c1 = _cs(state, k, 1)
    if free:
        return C3 * 4 * math.pi * s1
    s0, c0 = _cs(state, k)
    d = kappa - 1j * k
    return C3 * 4 * math.pi * ((kappa * s1 + c1) / d + 1j * (kappa * s0 + c0) / d**2)


@dataclass(frozen=True)
class MomentumProfile:
    state: RadialState
    interaction: PointInteraction
    singular_at_zero: bool
    residue_estimate: complex
    free: bool = False
    flags: tuple[str, ...] = ()

    def profile(self, k):
        return psi_out_hat(self.state, self.interaction, k, self.free)

    def k_profile(self, k):
        return k_psi_out_hat(self.state, self.interaction, k, self.free)

    def derivative(self, k):
        return psi_out_hat_derivative(self.state, self.interaction, k, self.free)

    def value_at_zero(self) -> complex:
        """psi_out^(0); raises if the profile has a pole there."""
        if self.singular_at_zero:
            raise SingularityError("psi_out^ has a 1/k pole at the origin")
        kappa = self.interaction.kappa
        s0 = float(self.state.sinc_u(0.0))
        if self.free:
            return complex(C3 * 4 * math.pi * s0)
        if kappa == 0:
            # i C(k) / k with C(0) = 0 (state in W) and C'(0) = 0 identically
            return 0j
        c0 = float(np.real(self.state.fourier_u(0.0)))
        return complex(C3 * 4 * math.pi * (kappa * s0 + c0) / kappa)


def outgoing_state(state: RadialState, interaction: PointInteraction,
                   quad: QuadratureSpec | None = None, free: bool = False) -> MomentumProfile:
    """Build psi_out^ and classify its behaviour at k = 0.

    The residue lim k psi_out^(k) is Richardson-extrapolated from
    k in {1e-2, 1e-3, 1e-4}.
    """
    quad = quad or QuadratureSpec()
    ks = np.array([1e-2, 1e-3, 1e-4])
    g = k_psi_out_hat(state, interaction, ks, free)
    # g(k) = g0 + g1 k + ...: eliminate the linear term twice
    r1 = (10 * g[1] - g[0]) / 9
    r2 = (10 * g[2] - g[1]) / 9
    residue = complex((100 * r2 - r1) / 99)
    scale = float(np.max(np.abs(k_psi_out_hat(state, interaction, np.linspace(0.05, 5, 50), free))))
    singular = abs(residue) > max(1e-9, 1e-7 * scale)
    flags = []
    if singular:
        flags.append("psi_out not in S(R^3): 1/k pole at the origin")
    return MomentumProfile(state, interaction, bool(singular), residue, free, tuple(flags))


def parseval_norm(profile: MomentumProfile, split: float = 40.0) -> float:
    """4 pi int_0^inf k^2 |psi_out^(k)|^2 dk.

    The algebraic tail beyond ``split`` is mapped to a finite interval by x = 1/k.
    """
    edges = oscillation_edges(0.0, split, 0.0, scale=0.25, grading=1e-6)
    k, w = composite_rule(edges, 20)
    head = np.sum(np.abs(profile.k_profile(k)) ** 2 * w)
    x, wx = composite_rule(np.linspace(0.0, 1.0 / split, 9), 20)
    tail = np.sum(np.abs(profile.k_profile(1.0 / x)) ** 2 / x**2 * wx)
    return float(4 * math.pi * (head + tail))


def export_profile_csv(profile: MomentumProfile, path: str | Path, k) -> None:
    k = np.asarray(k, dtype=float)
    v = profile.profile(k)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["k", "re", "im", "abs2"])
        for kk, vv in zip(k, v):
            wr.writerow([f"{kk:.12e}", f"{vv.real:.12e}", f"{vv.imag:.12e}", f"{abs(vv)**2:.12e}"])


# --------------------------------------------------------------------------
# evolution by eigenfunction expansion


@dataclass(frozen=True)
class SpectralTerms:
    a: complex
    b: complex
    grad_a: complex
    grad_b: complex


@dataclass
class SpectralField:
    r: np.ndarray
    t: float
    a: np.ndarray
    b: np.ndarray
    grad_a: np.ndarray
    grad_b: np.ndarray
    quad_error: np.ndarray
    converged: bool
    flags: list[str] = field(default_factory=list)

    @property
    def value(self):
        return self.a + self.b

    @property
    def radial_derivative(self):
        return self.grad_a + self.grad_b


def _k_rule(profile: MomentumProfile, r_max: float, t: float, quad: QuadratureSpec):
    """Nodes and weights on [0, K] plus the ray K + rho exp(-i pi/4).

    psi_out^ decays only like k^-3, so the real-axis integral is closed by
    rotating the tail into the lower half-plane, where exp(-ik^2 t) decays
    and, for K > r/2t, dominates exp(ikr). The singularities of the
    integrand (at -i rate for exponential atoms and at -+i kappa) lie on the
    imaginary axis and are not crossed.
    """
    flags = []
    if not profile.state.atoms:
        flags.append("profile-only state: tail truncated without contour rotation")
    K = max(6.0, 1.5 * r_max / (2 * t) + 3.0 / math.sqrt(t))
    rate = lambda k: 2 * np.asarray(k) * t + r_max  # noqa: E731
    edges = oscillation_edges(0.0, K, rate, scale=0.25, phase_per_panel=3.0, grading=1e-8)
    k1, w1 = composite_rule(edges, quad.order)
    half1 = 0.5 * np.diff(edges)
    if flags:
        return k1 + 0j, w1 + 0j, half1, flags
    c = math.sqrt(2) * K * t - r_max / math.sqrt(2)
    rho_max = (-c + math.sqrt(c * c + 4 * t * 45.0)) / (2 * t)
    redges = oscillation_edges(0.0, rho_max, math.sqrt(2) * K * t + r_max + 2 * rho_max * t,
                               scale=0.25, phase_per_panel=3.0)
    rho, w2 = composite_rule(redges, quad.order)
    rot = np.exp(-0.25j * math.pi)
    k = np.concatenate([k1 + 0j, K + rho * rot])
    w = np.concatenate([w1 + 0j, w2 * rot])
    half = np.concatenate([half1, 0.5 * np.diff(redges)])
    return k, w, half, flags


def spectral_field(profile: MomentumProfile, r, t: float,
                   quad: QuadratureSpec | None = None, block: int = 64) -> SpectralField:
    """Vectorised a, b and their radial derivatives on an array of radii."""
    quad = quad or QuadratureSpec()
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r <= 0) or t <= 0:
        raise ValueError("spectral evolution needs r > 0 and t > 0")
    k, w, half, flags = _k_rule(profile, float(r.max()), t, quad)
    kpsi = profile.k_profile(k)
    base = C3 * 4 * math.pi * k * kpsi * np.exp(-1j * k**2 * t)  # k^2 psi_out^ e^{-ik^2 t}
    kappa = profile.interaction.kappa
    amp = None if profile.free else 1.0 / (kappa + 1j * k)
    out = {n: np.empty(r.size, complex) for n in ("a", "b", "ga", "gb")}
    err = np.empty(r.size)
    for i0 in range(0, r.size, block):
        rr = r[i0:i0 + block, None, None]
        kr = k[None] * rr
        fa = base * np.sin(kr) / kr
        fga = base * (-k) * spherical_jn(1, kr)
        pieces = [fa, fga]
        if amp is not None:
            eb = base * amp * np.exp(-1j * kr)
            fb = eb / rr
            fgb = -fb / rr + eb * (-1j * k) / rr
            pieces += [fb, fgb]
        vals = [np.sum(p * w, axis=(-2, -1)) for p in pieces]
        out["a"][i0:i0 + block] = vals[0]
        out["ga"][i0:i0 + block] = vals[1]
        if amp is not None:
            out["b"][i0:i0 + block] = vals[2]
            out["gb"][i0:i0 + block] = vals[3]
        else:
            out["b"][i0:i0 + block] = 0
            out["gb"][i0:i0 + block] = 0
        e = sum(np.sum(panel_error(p, half), axis=-1) for p in pieces[::2])
        err[i0:i0 + block] = e
    if flags:
        # truncation: one integration by parts bounds what lies beyond K
        err = err + float(np.abs(base[-1, -1])) / (2 * abs(k[-1, -1]) * t)
    tol = np.maximum(quad.abs_tol, quad.rel_tol * np.abs(out["a"] + out["b"]))
    converged = bool(np.all(err <= 1e3 * tol)) and not flags
    if not converged and not flags:
        flags.append("spectral quadrature error above tolerance")
    return SpectralField(r, t, out["a"], out["b"], out["ga"], out["gb"], err, converged, flags)


def spectral_evolve(profile: MomentumProfile, r: float, t: float,
                    quad: QuadratureSpec | None = None):
    """psi_t(r) from the eigenfunction expansion, as a WaveSample."""
    from .propagator import WaveSample

    f = spectral_field(profile, [r], t, quad)
    terms = SpectralTerms(complex(f.a[0]), complex(f.b[0]), complex(f.grad_a[0]), complex(f.grad_b[0]))
    return WaveSample(float(r), float(t), complex(f.value[0]), complex(f.radial_derivative[0]),
                      terms, float(f.quad_error[0]), f.converged, tuple(f.flags))


# --------------------------------------------------------------------------
# resonant split of b


def b2_integrals(R: float, t: float):
    """Closed forms of int_0^inf k^n exp(-(1+it) k^2 - iRk) dk for n = 1, 2.

    With xi = 1 + it, eta = iR and z = -R / (2 sqrt(xi)):
        I1 = 1/(2 xi) - i R sqrt(pi) w(z) / (4 xi^(3/2))
        I2 = i dI1/dR
    """
    xi = 1 + 1j * t
    sx = np.sqrt(xi)
    z = -R / (2 * sx)
    wz = faddeeva(z)
    i1 = 1 / (2 * xi) - 1j * R * math.sqrt(math.pi) * wz / (4 * xi * sx)
    dw = -2 * z * wz + 2j / math.sqrt(math.pi)
    di1 = -1j * math.sqrt(math.pi) / (4 * xi * sx) * (wz + R * dw * (-1 / (2 * sx)))
    return complex(i1), complex(1j * di1)


def b2_integrals_quadrature(R: float, t: float, order: int = 20):
    kmax = 7.0
    edges = oscillation_edges(0.0, kmax, lambda k: 2 * np.asarray(k) * t + R,
                              scale=0.25, phase_per_panel=2.0)
    k, w = composite_rule(edges, order)
    e = np.exp(-(1 + 1j * t) * k**2 - 1j * R * k)
    return complex(np.sum(k * e * w)), complex(np.sum(k**2 * e * w))


def b2_term(R: float, t: float, psi0: complex = 1.0, closed_form: bool = True):
    """(b2, d b2/dR) = (c/R) Psi(0) I1 and its derivative, c = -i (2 pi)^(-3/2).

    Psi(0) enters only as a prefactor. An initial state with finite moments
    gives Psi(0) = 0 (state in W) or a pole, so a prescribed outgoing value
    is the natural input here.
    """
    c = -1j * C3
    i1, i2 = b2_integrals(R, t) if closed_form else b2_integrals_quadrature(R, t)
    b2 = c / R * psi0 * i1
    gb2 = -c / R**2 * psi0 * i1 - 1j * c / R * psi0 * i2
    return complex(b2), complex(gb2)


@dataclass(frozen=True)
class BSplit:
    b1: complex
    b2: complex
    b2_quadrature: complex
    grad_b1: complex
    grad_b2: complex
    grad_b2_quadrature: complex
    psi0: complex

    @property
    def b(self) -> complex:
        return self.b1 + self.b2

    @property
    def grad_b(self) -> complex:
        return self.grad_b1 + self.grad_b2


def resonant_b_split(profile: MomentumProfile, r: float, t: float,
                     quad: QuadratureSpec | None = None) -> BSplit:
    """b = b1 + b2 at alpha = 0, isolating psi_out^(0).

    Here Psi(k) is the angular integral 4 pi psi_out^(k) and c = -i (2 pi)^(-3/2),
    the constant produced by k^2 / (ik) = -ik in the radial reduction of b.
    """
    quad = quad or QuadratureSpec()
    if profile.interaction.alpha != 0:
        raise ValueError("resonant_b_split applies only at alpha = 0")
    psi0 = 4 * math.pi * profile.value_at_zero()
    b2, gb2 = b2_term(r, t, psi0)
    b2q, gb2q = b2_term(r, t, psi0, closed_form=False)
    c = -1j * C3

    k, w, half, _ = _k_rule(profile, r, t, quad)
    big = 4 * math.pi * profile.profile(k)
    e = np.exp(-1j * k**2 * t - 1j * r * k)
    g = e * k * (big - psi0 * np.exp(-(k**2)))
    b1 = c / r * np.sum(g * w)
    gb1 = -b1 / r + c / r * np.sum(-1j * k * g * w)
    return BSplit(complex(b1), complex(b2), complex(b2q), complex(gb1), complex(gb2),
                  complex(gb2q), complex(psi0))
