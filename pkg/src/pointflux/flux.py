"""Probability current, flux through spheres and cones, and the two sides of FAS.

Radial states only: the current is radial, so a cone of solid angle Omega
sees Omega / (4 pi) of the flux through the full sphere regardless of axis.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .model import ConeSurface, PointInteraction, RadialState
from .numerics.quadrature import (
    QuadratureSpec,
    composite_rule,
    integrate_improper_time,
    oscillation_edges,
)
from .propagator import PropagatorDecomposition, WaveSample, decompose
from .spectral import MomentumProfile, SpectralTerms, outgoing_state, psi_out_hat


@dataclass(frozen=True)
class FluxSample:
    radius: float
    time: float
    radial_current: float
    main_term: float
    remainder_term: float


@dataclass
class FluxReport:
    radius: float
    T: float
    T_max: float
    cone: ConeSurface
    lhs_truncated: float
    tail_estimate: float
    rhs: float
    relative_error: float
    tail_divergent: bool
    tail_exponent: float = math.nan
    evaluations: int = 0
    flags: list[str] = field(default_factory=list)

    @property
    def lhs(self) -> float:
        return self.lhs_truncated + (0.0 if self.tail_divergent else self.tail_estimate)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["cone"] = {"solid_angle": self.cone.solid_angle, "axis": list(self.cone.axis)}
        return {k: d[k] for k in sorted(d)}


def current(sample: WaveSample) -> FluxSample:
    """j.n = 2 Im(psi* d_r psi), split into (r/t)|P|^2 and the rest.

    For eigenfunction-expansion samples the split is j_0 = 2 Im(a* d_r a)
    versus everything involving b.
    """
    v, d = sample.value, sample.radial_derivative
    j = 2.0 * float(np.imag(np.conj(v) * d))
    dec = sample.decomposition
    if isinstance(dec, PropagatorDecomposition):
        P = dec.P
        main = sample.position_radius / sample.time * abs(P) ** 2
        R, gR, gP = dec.R, dec.grad_R, dec.grad_P
        rem = 2.0 * float(np.imag(np.conj(P) * dec.Q + np.conj(P) * gR
                                  + np.conj(R) * gP + np.conj(R) * gR))
    elif isinstance(dec, SpectralTerms):
        main = 2.0 * float(np.imag(np.conj(dec.a) * dec.grad_a))
        rem = j - main
    else:
        raise TypeError("sample carries no decomposition")
    return FluxSample(sample.position_radius, sample.time, j, float(main), rem)


def radial_current(state: RadialState, interaction: PointInteraction, radius: float, t,
                   quad: QuadratureSpec | None = None, free: bool = False) -> np.ndarray:
    """2 Im(psi* d_r psi) at a fixed radius for an array of times."""
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty(ts.size)
    for i, tv in enumerate(ts):
        f = decompose(state, interaction, [radius], float(tv), quad, free)
        out[i] = 2.0 * np.imag(np.conj(f.value[0]) * f.radial_derivative[0])
    return out


def surface_flux(interaction: PointInteraction, state: RadialState, radius: float, time: float,
                 cone: ConeSurface | None = None, quad: QuadratureSpec | None = None,
                 free: bool = False) -> float:
    """int over the cone's cap of the sphere S_R of j.n."""
    if radius <= 0 or time <= 0:
        raise ValueError("radius and time must be positive")
    cone = cone or ConeSurface()
    j = radial_current(state, interaction, radius, time, quad, free)[0]
    return float(cone.solid_angle * radius**2 * j)


def fas_rhs(out: MomentumProfile, cone: ConeSurface | None = None,
            k_max: float = math.inf) -> float:
    """Omega int_0^k_max k^2 |psi_out^(k)|^2 dk.

    Works with k psi_out^, so the 1/k pole at the resonance is harmless; the
    algebraic tail beyond k = 40 is mapped onto a finite interval by x = 1/k.
    """
    cone = cone or ConeSurface()
    split = min(40.0, k_max)
    edges = oscillation_edges(0.0, split, 0.0, scale=0.125, grading=1e-8)
    k, w = composite_rule(edges, 20)
    total = float(np.sum(np.abs(out.k_profile(k)) ** 2 * w))
    if k_max > split:
        x, wx = composite_rule(np.linspace(1.0 / k_max if math.isfinite(k_max) else 0.0,
                                           1.0 / split, 17), 20)
        total += float(np.sum(np.abs(out.k_profile(1.0 / x)) ** 2 / x**2 * wx))
    return cone.solid_angle * total


def main_term_identity(state: RadialState, interaction: PointInteraction, radius: float,
                       T: float, cone: ConeSurface | None = None,
                       quad: QuadratureSpec | None = None, free: bool = False):
    """(lhs_main, rhs_partial) for the change of variables k = R/2t.

    lhs_main = int_T^inf dt Omega R^2 (R/t) |P(R, t)|^2, computed in t with
    the integrand R^3 |psi_out^(R/2t)|^2 / (8 t^4) and a fitted power tail;
    rhs_partial = Omega int_0^{R/2T} k^2 |psi_out^(k)|^2 dk, computed in k.
    """
    cone = cone or ConeSurface()
    quad = quad or QuadratureSpec(abs_tol=1e-13, rel_tol=1e-12)
    R = float(radius)

    def g(t):
        t = np.asarray(t, dtype=float)
        out = psi_out_hat(state, interaction, R / (2 * t), free)
        return cone.solid_angle * R**3 * np.abs(out) ** 2 / (8 * t**4)

    T_max = max(1e7 * T, 1e5 * R)
    res = integrate_improper_time(g, T, quad, "power_law_fit", T_max=T_max)
    lhs = float(res.value.real) if isinstance(res.value, complex) else float(res.value)
    prof = outgoing_state(state, interaction, quad, free)
    rhs = fas_rhs(prof, cone, k_max=R / (2 * T))
    return lhs, rhs


def default_t_max(out: MomentumProfile, radius: float) -> float:
    """max(50, 10 R / (2 k_low)), k_low the 1st percentile of k^2 |psi_out^|^2."""
    edges = oscillation_edges(0.0, 40.0, 0.0, scale=0.05, grading=1e-8)
    k, w = composite_rule(edges, 20)
    k, w = k.ravel(), w.ravel()
    dens = np.abs(out.k_profile(k)) ** 2 * w
    cdf = np.cumsum(dens) / np.sum(dens)
    k_low = float(k[np.searchsorted(cdf, 0.01)])
    return max(50.0, 10.0 * radius / (2.0 * max(k_low, 1e-6)))


def fas_lhs(interaction: PointInteraction, state: RadialState, radius: float, T: float,
            T_max: float | None = None, cone: ConeSurface | None = None,
            quad: QuadratureSpec | None = None, free: bool = False,
            rhs: float | None = None, tail_fraction: float | None = 1e-3,
            max_doublings: int = 6) -> FluxReport:
    """Left side of FAS at a finite radius.

    With ``tail_fraction`` set, T_max is doubled (up to ``max_doublings``
    times) until the fitted tail is at most ``tail_fraction * rhs``.
    """
    cone = cone or ConeSurface()
    quad = quad or QuadratureSpec(abs_tol=1e-9, rel_tol=1e-6)
    prof = outgoing_state(state, interaction, quad, free)
    if rhs is None:
        rhs = fas_rhs(prof, cone)
    if T_max is None:
        T_max = default_t_max(prof, radius)
    if not 0 < T < T_max:
        raise ValueError("need 0 < T < T_max")

    cache: dict[float, float] = {}

    def g(t):
        t = np.asarray(t, dtype=float)
        out = np.empty(t.shape)
        for idx, tv in np.ndenumerate(t):
            key = float(tv)
            if key not in cache:
                cache[key] = float(cone.solid_angle * radius**2
                                   * radial_current(state, interaction, radius, key, quad, free)[0])
            out[idx] = cache[key]
        return out

    flags: list[str] = []
    evaluations = 0
    for attempt in range(max_doublings + 1):
        res = integrate_improper_time(g, T, quad, "power_law_fit", T_max=T_max)
        evaluations += res.evaluations
        if res.divergent or tail_fraction is None:
            break
        if abs(res.tail) <= tail_fraction * abs(rhs):
            break
        if attempt < max_doublings:
            T_max *= 2.0
    flags.extend(res.flags)
    if not res.divergent and tail_fraction is not None and abs(res.tail) > tail_fraction * abs(rhs):
        flags.append(f"tail {res.tail:.3e} above {tail_fraction:g} * rhs after T_max doubling")
    lhs_trunc = float(np.real(res.truncated))
    tail = float(np.real(res.tail))
    lhs = lhs_trunc + (0.0 if res.divergent else tail)
    rel = abs(lhs - rhs) / max(abs(rhs), 1e-300)
    return FluxReport(radius=float(radius), T=float(T), T_max=float(T_max), cone=cone,
                      lhs_truncated=lhs_trunc, tail_estimate=tail, rhs=float(rhs),
                      relative_error=float(rel), tail_divergent=bool(res.divergent),
                      tail_exponent=float(res.exponent), evaluations=evaluations, flags=flags)


def write_reports(reports: list[FluxReport], csv_path: str | Path, json_path: str | Path | None = None):
    with open(csv_path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["R", "lhs", "tail", "rhs", "rel_error"])
        for r in reports:
            wr.writerow([f"{r.radius:.12e}", f"{r.lhs:.12e}", f"{r.tail_estimate:.12e}",
                         f"{r.rhs:.12e}", f"{r.relative_error:.12e}"])
    if json_path is not None:
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump([r.to_dict() for r in reports], fh, indent=2, sort_keys=True)
