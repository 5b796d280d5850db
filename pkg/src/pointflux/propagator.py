"""Time evolution of radial states through the explicit propagator decomposition.

Everything is reduced to u(s) = s psi_0(s). With K(z) = exp(iz^2/4t) / (4 pi i t)^(1/2),
E = exp(ir^2/4t) and k = r/2t the terms are

    P   = E (2it)^(-3/2) psi_out^(k)
    R1  = -2i E / (r c) int sin(ks) (exp(is^2/4t) - 1) u(s) ds
    R2  =  2  E / (r c) int exp(iks) (exp(is^2/4t) - 1) u(s) ds
    R3  = -2 kappa E / (r c) int exp(ikw) (exp(iw^2/4t) - 1) phi(w) dw

with c = (4 pi i t)^(1/2) and kappa = 4 pi alpha. For kappa > 0,
phi(w) = int_0^w u(s) exp(-kappa (w - s)) ds on w > 0. For kappa < 0 the
continuum part of the kernel is 2 kappa int_0^inf exp(kappa v) K(r+s-v) dv,
which gives phi(w) = -int_{max(w,0)}^inf u(s) exp(kappa (s - w)) ds on the
whole line, plus the bound-state term

    B = exp(i kappa^2 t) psi_a(r) <psi_a, psi_0>,   psi_a = sqrt(-2 alpha) exp(kappa r) / r.

Radial derivatives are analytic: d/dr E = (ir/2t) E and d/dr k = 1/2t.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import PointInteraction, RadialState
from .numerics.faddeeva import faddeeva
from .numerics.quadrature import QuadratureSpec, composite_rule, gauss_legendre, panel_error
from .spectral import C3, SpectralTerms, psi_out_hat, psi_out_hat_derivative


@dataclass(frozen=True)
class PropagatorDecomposition:
    P: complex
    Q: complex
    R1: complex
    R2: complex
    R3: complex
    bound_term: complex
    grad_P: complex
    grad_R1: complex
    grad_R2: complex
    grad_R3: complex
    grad_bound: complex
    A0_or_Aalpha: complex

    @property
    def value(self) -> complex:
        return self.P + self.R1 + self.R2 + self.R3 + self.bound_term

    @property
    def radial_derivative(self) -> complex:
        return self.grad_P + self.grad_R1 + self.grad_R2 + self.grad_R3 + self.grad_bound

    @property
    def R(self) -> complex:
        """Everything except P."""
        return self.R1 + self.R2 + self.R3 + self.bound_term

    @property
    def grad_R(self) -> complex:
        return self.grad_R1 + self.grad_R2 + self.grad_R3 + self.grad_bound


@dataclass(frozen=True)
class WaveSample:
    position_radius: float
    time: float
    value: complex
    radial_derivative: complex
    decomposition: PropagatorDecomposition | SpectralTerms
    quad_error: float
    converged: bool = True
    flags: tuple[str, ...] = ()


_TERMS = ("P", "R1", "R2", "R3", "bound_term")


@dataclass
class DecompositionField:
    """Decomposition terms on an array of radii at a single time."""

    r: np.ndarray
    t: float
    alpha: float
    terms: dict[str, np.ndarray]
    grads: dict[str, np.ndarray]
    A: np.ndarray
    quad_error: np.ndarray
    converged: bool = True
    flags: list[str] = field(default_factory=list)

    @property
    def value(self) -> np.ndarray:
        return sum(self.terms[n] for n in _TERMS)

    @property
    def radial_derivative(self) -> np.ndarray:
        return sum(self.grads[n] for n in _TERMS)

    @property
    def Q(self) -> np.ndarray:
        return self.grads["P"] - 0.5j * self.r / self.t * self.terms["P"]

    def sample(self, i: int) -> WaveSample:
        d = PropagatorDecomposition(
            P=complex(self.terms["P"][i]), Q=complex(self.Q[i]),
            R1=complex(self.terms["R1"][i]), R2=complex(self.terms["R2"][i]),
            R3=complex(self.terms["R3"][i]), bound_term=complex(self.terms["bound_term"][i]),
            grad_P=complex(self.grads["P"][i]), grad_R1=complex(self.grads["R1"][i]),
            grad_R2=complex(self.grads["R2"][i]), grad_R3=complex(self.grads["R3"][i]),
            grad_bound=complex(self.grads["bound_term"][i]), A0_or_Aalpha=complex(self.A[i]),
        )
        return WaveSample(float(self.r[i]), self.t, d.value, d.radial_derivative, d,
                          float(self.quad_error[i]), self.converged, tuple(self.flags))


# --------------------------------------------------------------------------
# quadrature grids


def _panel_edges(lo: float, hi: float, width, marks=()) -> np.ndarray:
    """Edges on [lo, hi] with local width ``width(x)`` and forced break points."""
    pts = [lo]
    x = lo
    while x < hi:
        x = min(hi, x + float(width(x)))
        pts.append(x)
    pts = np.asarray(pts)
    m = [v for v in marks if lo < v < hi]
    if m:
        pts = np.unique(np.concatenate([pts, m]))
    return pts


def _phi_marks(kappa: float, origin: float = 0.0, sign: float = 1.0, limit: float = 40.0):
    if kappa == 0:
        return []
    a = 1.0 / abs(kappa)
    return [origin + sign * a * m for m in (0.125, 0.25, 0.5, 1, 2, 4, 8, 16) if a * m < limit]


def _phi_values(state: RadialState, kappa: float, w: np.ndarray, cut: float) -> np.ndarray:
    """phi(w) as defined in the module docstring, at arbitrary points."""
    a = abs(kappa)
    span = min(40.0 / a, cut)
    # template in the offset x >= 0, refined near x = 0 where exp(-a x) varies fastest
    marks = [m / a for m in (0.25, 0.5, 1, 2, 4, 8, 16, 24, 32) if m / a < span]
    tmpl = np.unique(np.concatenate([[0.0, span], marks, np.arange(0.0, span, 0.25)]))
    x, gw = gauss_legendre(20)
    lo_e, hi_e = tmpl[:-1], tmpl[1:]
    out = np.zeros(w.shape, dtype=float)
    wf = w.ravel()
    res = np.zeros(wf.size)
    for lo, hi in zip(lo_e, hi_e):
        if kappa > 0:
            hi_c = np.minimum(hi, np.maximum(wf, 0.0))
        else:
            hi_c = np.full(wf.shape, hi)
        half = 0.5 * (hi_c - lo)
        ok = half > 0
        if not ok.any():
            continue
        xs = lo + half[ok, None] * (1 + x[None, :])
        if kappa > 0:
            s = wf[ok, None] - xs
        else:
            s = np.maximum(wf[ok, None], 0.0) + xs
        vals = state.u(s) * np.exp(-a * xs)
        res[ok] += half[ok] * (vals @ gw)
    if kappa < 0:
        neg = wf < 0
        res[neg] *= np.exp(a * wf[neg])
        res = -res
    out[...] = res.reshape(w.shape)
    return out


# --------------------------------------------------------------------------
# the decomposition


def decompose(state: RadialState, interaction: PointInteraction, r, t: float,
              quad: QuadratureSpec | None = None, free: bool = False,
              block: int = 32) -> DecompositionField:
    """All decomposition terms and their r-derivatives on an array of radii.

    ``free=True`` drops the interaction (free evolution of psi_0).
    """
    quad = quad or QuadratureSpec()
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r <= 0):
        raise ValueError("r must be strictly positive (the origin is excluded)")
    if not t > 0:
        raise ValueError("t must be strictly positive")
    kappa = 0.0 if free else interaction.kappa
    k = r / (2 * t)
    E = np.exp(1j * r**2 / (4 * t))
    ct = np.sqrt(4j * math.pi * t)
    pref32 = np.sqrt(2j * t) ** 3

    # leading term
    out = psi_out_hat(state, interaction, k, free=free)
    dout = psi_out_hat_derivative(state, interaction, k, free=free)
    P = E / pref32 * out
    gP = 0.5j * r / t * P + E / pref32 * dout / (2 * t)

    # remainder grids
    cut = state.cutoff(min(1e-18, quad.abs_tol * 1e-6))
    kmax = float(k.max())
    width = lambda s: min(0.25, 3.0 / (kmax + abs(s) / (2 * t) + 1e-300))  # noqa: E731
    marks = _phi_marks(kappa) if (kappa > 0 and not free) else []
    s_edges = _panel_edges(0.0, cut, width, marks)
    s, sw = composite_rule(s_edges, quad.order)
    s_half = 0.5 * np.diff(s_edges)
    g = (np.exp(1j * s**2 / (4 * t)) - 1.0) * state.u(s)

    use_r3 = (not free) and kappa != 0
    if use_r3:
        w_lo = 0.0
        if kappa < 0:
            w_lo = -min(40.0 / abs(kappa), 1e3)
        m3 = _phi_marks(kappa) if kappa > 0 else _phi_marks(kappa, 0.0, -1.0)
        w_edges = _panel_edges(w_lo, cut, width, m3 + [0.0] if w_lo < 0 else m3)
        wn, ww = composite_rule(w_edges, quad.order)
        w_half = 0.5 * np.diff(w_edges)
        h = (np.exp(1j * wn**2 / (4 * t)) - 1.0) * _phi_values(state, kappa, wn, cut)

    I1 = np.empty(r.size, complex); dI1 = np.empty_like(I1)
    I2 = np.zeros_like(I1); dI2 = np.zeros_like(I1)
    I3 = np.zeros_like(I1); dI3 = np.zeros_like(I1)
    err = np.zeros(r.size)
    for i0 in range(0, r.size, block):
        kk = k[i0:i0 + block, None, None]
        ek = np.exp(1j * kk * s)
        f1 = ek.imag * g
        f1d = s * ek.real * g
        I1[i0:i0 + block] = np.sum(f1 * sw, axis=(-2, -1))
        dI1[i0:i0 + block] = np.sum(f1d * sw, axis=(-2, -1))
        e = np.sum(panel_error(f1, s_half), axis=-1)
        if not free:
            f2 = ek * g
            I2[i0:i0 + block] = np.sum(f2 * sw, axis=(-2, -1))
            dI2[i0:i0 + block] = np.sum(1j * s * f2 * sw, axis=(-2, -1))
            e = e + np.sum(panel_error(f2, s_half), axis=-1)
        if use_r3:
            f3 = np.exp(1j * kk * wn) * h
            I3[i0:i0 + block] = np.sum(f3 * ww, axis=(-2, -1))
            dI3[i0:i0 + block] = np.sum(1j * wn * f3 * ww, axis=(-2, -1))
            e = e + abs(kappa) * np.sum(panel_error(f3, w_half), axis=-1)
        err[i0:i0 + block] = e
    scale_r = 2.0 / (r * abs(ct))
    quad_error = scale_r * err + state.tail(cut) * scale_r * 2

    lead = E / (r * ct)
    dlead = lambda F, dF: (0.5j * r / t - 1.0 / r) * F + lead * dF / (2 * t)  # noqa: E731
    terms = {}
    grads = {}
    R1 = -2j * lead * I1
    terms["R1"], grads["R1"] = R1, dlead(R1, -2j * dI1)
    R2 = 2 * lead * I2
    terms["R2"], grads["R2"] = R2, dlead(R2, 2 * dI2)
    R3 = -2 * kappa * lead * I3
    terms["R3"], grads["R3"] = R3, dlead(R3, -2 * kappa * dI3)
    terms["P"], grads["P"] = P, gP

    bound = np.zeros(r.size, complex)
    gbound = np.zeros(r.size, complex)
    if kappa < 0 and not free:
        lap = state.laplace_u(-kappa)
        bound = -2 * kappa * np.exp(1j * kappa**2 * t) * np.exp(kappa * r) / r * lap
        gbound = (kappa - 1.0 / r) * bound
    terms["bound_term"], grads["bound_term"] = bound, gbound

    A = real_term(state, interaction, r, t, free=free)
    tol = np.maximum(quad.abs_tol, quad.rel_tol * np.abs(sum(terms.values())))
    converged = bool(np.all(quad_error <= 1e3 * tol))
    flags = [] if converged else ["remainder quadrature error above tolerance"]
    return DecompositionField(r, t, interaction.alpha, terms, grads, A, quad_error, converged, flags)


def real_term(state: RadialState, interaction: PointInteraction, r, t: float,
              free: bool = False) -> np.ndarray:
    """The term of P* Q that is real at alpha = 0 (A_0), and its alpha != 0 analogue.

    A(r, t) = -|(2 pi)^(-3/2) F(k)|^2 / (16 t^4) * i / ((kappa + ik)(kappa - ik)^2),
    with F(k) = 4 pi int exp(iky) u(y) dy and k = r/2t. At kappa = 0 this is
    (2 pi)^(-3) |F|^2 / (2 t r^3) > 0.
    """
    r = np.asarray(r, dtype=float)
    if free:
        return np.zeros(r.shape, complex)
    kappa = interaction.kappa
    k = r / (2 * t)
    F = 4 * math.pi * state.fourier_u(k)
    if kappa == 0:
        return (2 * math.pi) ** -3 * np.abs(F) ** 2 / (2 * t * r**3) + 0j
    return -np.abs(C3 * F) ** 2 / (16 * t**4) * 1j / ((kappa + 1j * k) * (kappa - 1j * k) ** 2)


# --------------------------------------------------------------------------
# public single-point API


def _checked(regime: str, interaction: PointInteraction):
    if interaction.regime != regime:
        raise ValueError(f"{regime} evolution called with alpha={interaction.alpha}")


def evolve(state: RadialState, interaction: PointInteraction, r: float, t: float,
           quad: QuadratureSpec | None = None, free: bool = False) -> WaveSample:
    return decompose(state, interaction, [r], t, quad, free).sample(0)


def evolve_resonant(state: RadialState, r: float, t: float,
                    quad: QuadratureSpec | None = None, free: bool = False) -> WaveSample:
    return evolve(state, PointInteraction(0.0), r, t, quad, free)


def evolve_positive(state: RadialState, r: float, t: float, alpha: float,
                    quad: QuadratureSpec | None = None, free: bool = False) -> WaveSample:
    inter = PointInteraction(alpha)
    _checked("positive", inter)
    return evolve(state, inter, r, t, quad, free)


def evolve_negative(state: RadialState, r: float, t: float, alpha: float,
                    quad: QuadratureSpec | None = None, free: bool = False) -> WaveSample:
    inter = PointInteraction(alpha)
    _checked("negative", inter)
    return evolve(state, inter, r, t, quad, free)


def decomposition_terms(state: RadialState, r: float, t: float, interaction: PointInteraction,
                        quad: QuadratureSpec | None = None) -> PropagatorDecomposition:
    return decompose(state, interaction, [r], t, quad).sample(0).decomposition


# --------------------------------------------------------------------------
# independent route: the full radial kernel


def radial_kernel(interaction: PointInteraction, r, s, t: float, free: bool = False):
    """G(r, s, t) with u_t(r) = int_0^inf G(r, s, t) u_0(s) ds.

    G = K(r-s) + K(r+s) - kappa exp(iz^2/4t) w(exp(i pi/4)(z + 2i kappa t) / (2 sqrt t)),
    z = r + s, for every real kappa (the bound state, when present, emerges
    from the reflection of w into the lower half-plane). ``free`` gives the
    Dirichlet kernel K(r-s) - K(r+s).
    """
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    ct = np.sqrt(4j * math.pi * t)
    km = np.exp(1j * (r - s) ** 2 / (4 * t)) / ct
    z = r + s
    kp = np.exp(1j * z**2 / (4 * t)) / ct
    if free:
        return km - kp
    kappa = interaction.kappa
    g = km + kp
    if kappa != 0:
        arg = np.exp(0.25j * math.pi) * (z + 2j * kappa * t) / (2 * math.sqrt(t))
        g = g - kappa * np.exp(1j * z**2 / (4 * t)) * faddeeva(arg)
    return g


def kernel_evolve(state: RadialState, interaction: PointInteraction, r, t: float,
                  free: bool = False, order: int = 20) -> np.ndarray:
    """psi_t(r) = (1/r) int G(r, s, t) u_0(s) ds by direct quadrature."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    cut = state.cutoff(1e-18)
    rate = (float(r.max()) + cut) / (2 * t)
    marks = [float(v) for v in r if v < cut]
    edges = _panel_edges(0.0, cut, lambda x: min(0.25, 3.0 / (rate + 1e-300)), marks)
    s, w = composite_rule(edges, order)
    s, w = s.ravel(), w.ravel()
    uw = state.u(s) * w
    out = np.empty(r.size, complex)
    for i, rv in enumerate(r):
        out[i] = np.sum(radial_kernel(interaction, rv, s, t, free) * uw) / rv
    return out


def free_gaussian(r, t: float, sigma: float) -> np.ndarray:
    """Closed-form free evolution of (pi sigma^2)^(-3/4) exp(-r^2 / 2 sigma^2)."""
    r = np.asarray(r, dtype=float)
    d = sigma**2 + 2j * t
    return (math.pi * sigma**2) ** -0.75 * (sigma**2 / d) ** 1.5 * np.exp(-(r**2) / (2 * d))


def norm_at(state: RadialState, interaction: PointInteraction, t: float,
            quad: QuadratureSpec | None = None, tail_target: float = 1e-4,
            free: bool = False) -> tuple[float, float]:
    """(||psi_t||, tail) by radial quadrature of 4 pi r^2 |psi_t|^2.

    The grid grows in blocks until the last block contributes less than
    ``tail_target``.
    """
    quad = quad or QuadratureSpec(abs_tol=1e-9, rel_tol=1e-9)
    x, gw = gauss_legendre(20)
    total = 0.0
    lo = 0.0
    width = max(1.0, 0.5 * math.sqrt(1 + 4 * t * t))
    block_contrib = math.inf
    while block_contrib > tail_target**2 or lo < 4 * width:
        hi = lo + width
        edges = np.linspace(lo, hi, 9)
        rr, ww = composite_rule(edges, 20)
        psi = decompose(state, interaction, rr.ravel(), t, quad, free).value
        block_contrib = float(np.sum(4 * math.pi * rr.ravel() ** 2 * np.abs(psi) ** 2 * ww.ravel()))
        total += block_contrib
        lo = hi
        if lo > 1e4:
            break
    return math.sqrt(total), math.sqrt(max(block_contrib, 0.0))


def write_batch_csv(path: str | Path, fields: list[DecompositionField]) -> None:
    """CSV rows: alpha, r, t, value, derivative, per-term magnitudes, quad_error."""
    head = ["alpha", "r", "t", "re_value", "im_value", "re_dr", "im_dr",
            "abs_P", "abs_R1", "abs_R2", "abs_R3", "abs_bound", "quad_error"]
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(head)
        for f in fields:
            v, d = f.value, f.radial_derivative
            for i in range(f.r.size):
                row = [f.alpha, f.r[i], f.t, v[i].real, v[i].imag, d[i].real, d[i].imag]
                row += [abs(f.terms[n][i]) for n in _TERMS] + [f.quad_error[i]]
                wr.writerow([f"{x:.12e}" for x in row])
