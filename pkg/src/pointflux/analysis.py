"""FAS convergence sweeps, decay-rate fits and the zero-energy resonance diagnostics."""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

from .flux import FluxReport, fas_lhs, fas_rhs
from .model import ConeSurface, PointInteraction, RadialState
from .numerics.quadrature import QuadratureSpec, composite_rule
from .propagator import decompose, real_term
from .spectral import MomentumProfile, b2_term, outgoing_state, spectral_field

Quantity = Literal["R1", "R2", "R3", "P", "b", "b2",
                   "grad_R1", "grad_R2", "grad_R3", "grad_P", "grad_b", "grad_b2"]

# total t-exponent of each estimate along the ray x = v t
CLAIMED_EXPONENT: dict[str, float] = {
    "R1": -2.5, "grad_R1": -2.5,
    "R2": -2.5, "grad_R2": -2.5,
    "R3": -2.5, "grad_R3": -2.5,
    "P": -1.5, "grad_P": -1.5,
    "b": -2.0, "grad_b": -2.0,
    "b2": -2.0, "grad_b2": -2.0,
}

# the same estimates read at fixed x as t grows
CLAIMED_EXPONENT_FIXED_RADIUS: dict[str, float] = {
    "R1": -2.5, "grad_R1": -3.5,
    "R2": -1.5, "grad_R2": -1.5,
    "R3": -1.5, "grad_R3": -1.5,
    "P": -1.5, "grad_P": -1.5,
    "b": -1.0, "grad_b": -1.0,
    "b2": -1.0, "grad_b2": -1.0,
}


# --------------------------------------------------------------------------
# FAS sweep


@dataclass
class FasSweep:
    reports: list[FluxReport]
    decreasing: bool
    flags: list[str] = field(default_factory=list)

    def __iter__(self):
        return iter(self.reports)

    def __len__(self):
        return len(self.reports)

    @property
    def relative_errors(self) -> list[float]:
        return [r.relative_error for r in self.reports]


def fas_sweep(interaction: PointInteraction, state: RadialState, R_list, T: float = 1.0,
              cone: ConeSurface | None = None, quad: QuadratureSpec | None = None,
              free: bool = False, workers: int = 1) -> FasSweep:
    """One FluxReport per radius against a single shared right-hand side."""
    R_list = [float(R) for R in R_list]
    if any(R <= 1 for R in R_list) or any(b <= a for a, b in zip(R_list, R_list[1:])):
        raise ValueError("R_list must be strictly increasing with every R > 1")
    cone = cone or ConeSurface()
    quad = quad or QuadratureSpec(abs_tol=1e-9, rel_tol=1e-6)
    rhs = fas_rhs(outgoing_state(state, interaction, quad, free), cone)

    def one(R):
        return fas_lhs(interaction, state, R, T, cone=cone, quad=quad, free=free, rhs=rhs)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            reports = list(ex.map(one, R_list))
    else:
        reports = [one(R) for R in R_list]
    flags: list[str] = []
    errs = [r.relative_error for r in reports]
    decreasing = all(b < a for a, b in zip(errs, errs[1:]))
    if not decreasing:
        flags.append("relative error not decreasing in R")
    for r in reports:
        flags.extend(f"R={r.radius:g}: {f}" for f in r.flags)
    return FasSweep(reports, decreasing, flags)


# --------------------------------------------------------------------------
# decay fits


@dataclass(frozen=True)
class DecayEstimate:
    """ray_speed is nan for a fixed-radius fit; the radius is then in ``fixed_radius``."""
    quantity: str
    ray_speed: float
    fitted_exponent: float
    fit_residual: float
    window: tuple[float, float]
    claimed_exponent: float
    times: tuple[float, ...] = ()
    magnitudes: tuple[float, ...] = ()
    intercept: float = math.nan
    flags: tuple[str, ...] = ()
    fixed_radius: float | None = None

    @property
    def reliable(self) -> bool:
        return self.fit_residual <= 0.2

    @property
    def deviation(self) -> float:
        return self.fitted_exponent - self.claimed_exponent


def quantity_value(quantity: str, interaction: PointInteraction, state: RadialState,
                   x: float, t: float, quad: QuadratureSpec | None = None,
                   profile: MomentumProfile | None = None) -> complex:
    """A single decomposition or spectral term at (x, t).

    b2 is evaluated with unit Psi(0): only its (x, t) shape is state-free.
    """
    if quantity not in CLAIMED_EXPONENT:
        raise ValueError(f"unknown quantity {quantity!r}")
    grad = quantity.startswith("grad_")
    base = quantity[5:] if grad else quantity
    if base in ("P", "R1", "R2", "R3"):
        f = decompose(state, interaction, [x], t, quad)
        return complex((f.grads if grad else f.terms)[base][0])
    if base == "b":
        profile = profile or outgoing_state(state, interaction, quad)
        f = spectral_field(profile, [x], t, quad)
        return complex((f.grad_b if grad else f.b)[0])
    b2, gb2 = b2_term(x, t, 1.0)
    return gb2 if grad else b2


def decay_fit(quantity: str, interaction: PointInteraction, state: RadialState,
              ray_speed: float = 1.0, window: tuple[float, float] = (10.0, 1000.0),
              quad: QuadratureSpec | None = None, n_points: int = 12,
              fixed_radius: float | None = None) -> DecayEstimate:
    """Log-log slope of |F(v t, t)| over a window of times.

    With ``fixed_radius`` the fit runs at x = fixed_radius instead of along
    the ray. The residual is the root-mean-square deviation of log |F| from
    the fitted line; above 0.2 the estimate is flagged unreliable.
    """
    t0, t1 = map(float, window)
    if not (10.0 <= t0 < t1 <= 1e4):
        raise ValueError("window must satisfy 10 <= t_min < t_max <= 1e4")
    if fixed_radius is None and not ray_speed > 0:
        raise ValueError("ray_speed must be positive")
    if fixed_radius is not None and not fixed_radius > 0:
        raise ValueError("fixed_radius must be positive")
    if n_points < 8:
        raise ValueError("at least 8 points are required")
    if quantity not in CLAIMED_EXPONENT:
        raise ValueError(f"unknown quantity {quantity!r}")
    quad = quad or QuadratureSpec()
    if fixed_radius is None:
        claimed, speed = CLAIMED_EXPONENT[quantity], float(ray_speed)
        where = lambda t: speed * t  # noqa: E731
    else:
        claimed, speed = CLAIMED_EXPONENT_FIXED_RADIUS[quantity], math.nan
        where = lambda t: float(fixed_radius)  # noqa: E731
    profile = None
    if quantity.endswith("b"):
        profile = outgoing_state(state, interaction, quad)
    ts = np.geomspace(t0, t1, n_points)
    mags = np.array([abs(quantity_value(quantity, interaction, state, where(t), t, quad, profile))
                     for t in ts])
    flags = []
    if np.any(mags == 0):
        flags.append("quantity vanishes identically on the window")
        return DecayEstimate(quantity, speed, math.nan, math.inf, (t0, t1), claimed,
                             tuple(ts), tuple(mags), math.nan, tuple(flags), fixed_radius)
    lt, lm = np.log(ts), np.log(mags)
    slope, icept = np.polyfit(lt, lm, 1)
    resid = float(np.sqrt(np.mean((lm - (slope * lt + icept)) ** 2)))
    if resid > 0.2:
        flags.append(f"fit residual {resid:.3f} > 0.2: estimate unreliable")
    return DecayEstimate(quantity, speed, float(slope), resid, (t0, t1), claimed,
                         tuple(ts), tuple(mags), float(icept), tuple(flags), fixed_radius)


# --------------------------------------------------------------------------
# resonance diagnostics


@dataclass
class DivergenceDemo:
    """Truncated integrals of |A . n| over spheres.

    ``truncated_values[i]`` is the integral over [T, T_max_i] at R_i (the
    joint schedule). ``table[i][j]`` holds R_i against T_max_j, so growth in
    T_max at fixed R can be read off each row. The verdict is ``growing``
    when every row keeps increasing without saturating.
    """
    state: RadialState
    alpha: float
    schedule: list[tuple[float, float]]
    truncated_values: list[float]
    growth_verdict: Literal["bounded", "growing"]
    table: list[list[float]] = field(default_factory=list)
    T: float = 1.0
    flags: list[str] = field(default_factory=list)


def _abs_a_integral(state: RadialState, interaction: PointInteraction, R: float, T: float,
                    T_max: float, solid_angle: float, order: int = 20) -> float:
    """solid_angle R^2 int_T^T_max |A(R, t)| dt on a log-t composite rule."""
    decades = math.log10(T_max / T)
    edges = np.linspace(math.log(T), math.log(T_max), max(2, int(math.ceil(16 * decades))) + 1)
    u, w = composite_rule(edges, order)
    t = np.exp(u)
    a = np.abs(np.array([real_term(state, interaction, [R], float(tv))[0] for tv in t.ravel()]))
    return float(solid_angle * R**2 * np.sum(a.reshape(t.shape) * t * w))


def _growing(values) -> bool:
    inc = np.diff(np.asarray(values, dtype=float))
    if inc.size < 2:
        return bool(inc.size == 1 and inc[0] > 0)
    return bool(inc[-2] > 0 and inc[-1] >= 0.5 * inc[-2])


def divergence_demo(state: RadialState, alpha: float = 0.0,
                    schedule=((10.0, 1e2), (20.0, 1e3), (40.0, 1e4)), T: float = 1.0,
                    cone: ConeSurface | None = None, order: int = 20) -> DivergenceDemo:
    """Probe whether int_T^inf dt int_{S_R} |A . n| stays finite.

    A is A_0 at alpha = 0 and A_alpha otherwise; both are closed-form in
    the Fourier transform of u, so only the time integral is numerical.
    """
    schedule = [(float(R), float(Tm)) for R, Tm in schedule]
    if any(b[0] <= a[0] or b[1] <= a[1] for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be strictly increasing in both R and T_max")
    if any(Tm <= T for _, Tm in schedule):
        raise ValueError("every T_max must exceed T")
    cone = cone or ConeSurface()
    inter = PointInteraction(alpha)
    Rs = [R for R, _ in schedule]
    Tms = [Tm for _, Tm in schedule]
    table = [[_abs_a_integral(state, inter, R, T, Tm, cone.solid_angle, order) for Tm in Tms]
             for R in Rs]
    diag = [table[i][i] for i in range(len(Rs))]
    verdict = "growing" if all(_growing(row) for row in table) else "bounded"
    flags = []
    if verdict == "growing" and not _growing(diag):
        flags.append("growth is in T_max only; the joint schedule decreases through the 1/R prefactor")
    return DivergenceDemo(state, float(alpha), schedule, diag, verdict, table, float(T), flags)


@dataclass(frozen=True)
class SingularityScan:
    exponent_at_zero: float
    residue: complex
    fit_residual: float
    ks: tuple[float, ...] = ()
    magnitudes: tuple[float, ...] = ()
    flags: tuple[str, ...] = ()

    def __iter__(self):
        return iter((self.exponent_at_zero, self.residue))


def singularity_scan(out: MomentumProfile, k_range=(1e-5, 1e-2), n_points: int = 16) -> SingularityScan:
    """Log-log slope of |psi_out^(k)| as k -> 0 and the residue of the pole."""
    ks = np.geomspace(*k_range, n_points)
    mags = np.abs(out.profile(ks))
    lk, lm = np.log(ks), np.log(mags)
    slope, icept = np.polyfit(lk, lm, 1)
    resid = float(np.sqrt(np.mean((lm - (slope * lk + icept)) ** 2)))
    flags = []
    if resid > 0.05:
        flags.append(f"fit residual {resid:.3f} > 0.05")
    return SingularityScan(float(slope), complex(out.residue_estimate), resid,
                           tuple(ks), tuple(mags), tuple(flags))


# --------------------------------------------------------------------------
# artifacts


def artifact_stem(name: str, alpha: float, state: RadialState) -> str:
    return f"experiment_{name}_{alpha:g}_{state.preset}"


def write_decay(estimates: list[DecayEstimate], csv_path, json_path=None) -> None:
    with open(csv_path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["quantity", "t", "log_t", "abs_value", "log_abs_value"])
        for e in estimates:
            for t, m in zip(e.times, e.magnitudes):
                wr.writerow([e.quantity, f"{t:.12e}", f"{math.log(t):.12e}", f"{m:.12e}",
                             f"{math.log(m) if m > 0 else -math.inf:.12e}"])
    if json_path is not None:
        rows = [{"quantity": e.quantity, "ray_speed": e.ray_speed, "fitted_exponent": e.fitted_exponent,
                 "claimed_exponent": e.claimed_exponent, "fit_residual": e.fit_residual,
                 "intercept": e.intercept, "window": list(e.window), "flags": list(e.flags)}
                for e in estimates]
        Path(json_path).write_text(json.dumps(rows, indent=2, sort_keys=True), encoding="utf-8")
