"""Quadrature primitives: composite Gauss-Legendre rules, adaptive
oscillatory integration and improper time integrals with power-law tails.

Every integral in the package is one-dimensional (or nested 1D) after the
radial reduction, so everything here works on panels of an interval.

Oscillatory panels use a Filon-Legendre rule: the amplitude ``f`` is
expanded in Legendre polynomials on the panel and the moments are exact,

    int_{-1}^{1} P_j(x) exp(i w x) dx = 2 i^j j_j(w),

with ``j_j`` the spherical Bessel function. The rule is exact for
polynomial amplitudes of degree < order regardless of ``w``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Literal

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy.special import spherical_jn

__all__ = [
    "QuadratureSpec",
    "QuadResult",
    "ImproperResult",
    "Envelope",
    "gauss_legendre",
    "composite_rule",
    "oscillation_edges",
    "panel_error",
    "integrate_oscillatory",
    "integrate_improper_time",
    "fit_power_law",
]

OscillationStrategy = Literal["adaptive_panel", "filon_phase_extraction"]
TailPolicy = Literal["fixed_length", "bound_driven"]


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_subdivisions: int = 4000
    oscillation_strategy: OscillationStrategy = "adaptive_panel"
    tail_cutoff_policy: TailPolicy = "bound_driven"
    cutoff_length: float = 60.0
    order: int = 20

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError(f"abs_tol must be positive, got {self.abs_tol}")
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if self.oscillation_strategy not in ("adaptive_panel", "filon_phase_extraction"):
            raise ValueError(f"unknown oscillation_strategy {self.oscillation_strategy!r}")
        if self.tail_cutoff_policy not in ("fixed_length", "bound_driven"):
            raise ValueError(f"unknown tail_cutoff_policy {self.tail_cutoff_policy!r}")
        if self.order < 4:
            raise ValueError("order must be >= 4")

    def tolerance(self, value: complex | float) -> float:
        return max(self.abs_tol, self.rel_tol * abs(value))


@dataclass
class QuadResult:
    value: complex
    error_estimate: float
    evaluations: int
    converged: bool


@dataclass
class ImproperResult(QuadResult):
    """Time integral over [T, T_max] plus a fitted power-law tail."""

    truncated: float = 0.0
    tail: float = 0.0
    exponent: float = math.nan
    coefficient: float = math.nan
    divergent: bool = False
    t_max: float = math.nan
    fit_residual: float = math.nan
    flags: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class Envelope:
    """Pointwise bound |f(y)| <= scale * y**power * decay(y) used to cut tails.

    kind="exponential":           decay = exp(-rate*y)
    kind="gaussian":              decay = exp(-rate*y**2)
    kind="algebraic_exponential": decay = exp(-rate*y), with y**power
    """

    kind: Literal["exponential", "gaussian", "algebraic_exponential"]
    scale: float
    rate: float
    power: float = 0.0

    def __post_init__(self):
        if self.rate <= 0 or self.scale < 0:
            raise ValueError("Envelope needs rate > 0 and scale >= 0")

    def tail_bound(self, cut: float) -> float:
        """Upper bound on int_cut^inf |f|."""
        c = self.rate
        if self.kind == "exponential":
            return self.scale * math.exp(-c * cut) / c
        if self.kind == "gaussian":
            return self.scale * 0.5 * math.sqrt(math.pi / c) * math.erfc(math.sqrt(c) * cut)
        p = self.power
        if cut <= p / c:
            return math.inf
        return self.scale * cut**p * math.exp(-c * cut) / (c - p / cut)

    def cutoff(self, target: float) -> float:
        """Smallest power-of-two-refined length whose tail bound is below target."""
        hi = 1.0
        while self.tail_bound(hi) > target:
            hi *= 2.0
            if hi > 1e8:
                raise ValueError("envelope decays too slowly for the requested tolerance")
        lo = hi / 2.0
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            if self.tail_bound(mid) > target:
                lo = mid
            else:
                hi = mid
        return hi


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = npleg.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=None)
def _legendre_projection(order: int) -> np.ndarray:
    """Matrix mapping values at GL nodes to Legendre coefficients."""
    x, w = gauss_legendre(order)
    P = npleg.legvander(x, order - 1)  # (node, degree)
    scale = (2.0 * np.arange(order) + 1.0) / 2.0
    M = (P * w[:, None]).T * scale[:, None]
    M.setflags(write=False)
    return M


def composite_rule(edges: np.ndarray, order: int = 20) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the composite GL rule on the given panel edges.

    Returned arrays have shape (n_panels, order).
    """
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(order)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = mid[:, None] + half[:, None] * x[None, :]
    weights = half[:, None] * w[None, :]
    return nodes, weights


def oscillation_edges(
    a: float,
    b: float,
    rate: Callable[[np.ndarray], np.ndarray] | float,
    scale: float,
    phase_per_panel: float = 2.0,
    grading: float | None = None,
) -> np.ndarray:
    """Panel edges on [a, b] so each panel spans at most ``phase_per_panel``
    radians of phase and at most ``scale`` in length.

    ``rate`` is the local phase rate (rad per unit length), either a constant
    or a non-decreasing callable. With ``grading`` set, panels are refined
    geometrically (ratio 1/2) towards ``a`` down to width ``grading``.
    """
    edges = [a]
    if grading is not None:
        w = grading
        while a + 2 * w < a + min(scale, (b - a)) and a + 2 * w < b:
            edges.append(a + w)
            w *= 2.0
    x = edges[-1]
    while x < b:
        r = float(rate(np.asarray(x + 0.0))) if callable(rate) else float(rate)
        h = scale if r <= 0 else min(scale, phase_per_panel / r)
        if callable(rate) and r > 0:
            # re-check at the far end for increasing rates
            r2 = float(rate(np.asarray(x + h)))
            if r2 > r:
                h = min(h, phase_per_panel / r2)
        x = min(b, x + h)
        edges.append(x)
    return np.asarray(edges)


def panel_error(values: np.ndarray, half_widths: np.ndarray) -> np.ndarray:
    """Per-panel error estimate from the trailing Legendre coefficients.

    ``values`` has shape (..., n_panels, order). The estimate is
    half_width * (|c_{n-1}| + |c_{n-2}|), which bounds the interpolation
    error of the panel polynomial and hence the integration error.
    """
    order = values.shape[-1]
    M = _legendre_projection(order)
    coef = values @ M.T
    tail = np.abs(coef[..., -1]) + np.abs(coef[..., -2])
    return half_widths * tail


def _filon_moments(omega: np.ndarray, order: int) -> np.ndarray:
    """int_{-1}^{1} P_j(x) e^{i omega x} dx for j < order; shape (len(omega), order)."""
    j = np.arange(order)
    jn = spherical_jn(j[None, :], np.abs(omega)[:, None])
    phase = (1j) ** j
    mom = 2.0 * phase[None, :] * jn
    # spherical_jn(j, |w|) with negative w: j_j(-w) = (-1)^j j_j(w)
    sign = np.where(omega[:, None] < 0, (-1.0) ** j[None, :], 1.0)
    return mom * sign


def _resolve_domain(domain, spec: QuadratureSpec, decay: Envelope | None):
    if isinstance(domain, str):
        if domain not in ("semi_infinite", "[0,inf)"):
            raise ValueError(f"invalid domain {domain!r}")
        domain = (0.0, math.inf)
    try:
        a, b = (float(domain[0]), float(domain[1]))
    except (TypeError, IndexError, ValueError) as exc:
        raise ValueError(f"invalid domain {domain!r}") from exc
    if not math.isfinite(a) or math.isnan(b) or b <= a:
        raise ValueError(f"invalid domain {domain!r}")
    tail = 0.0
    if math.isinf(b):
        if spec.tail_cutoff_policy == "fixed_length":
            b = a + spec.cutoff_length
            tail = decay.tail_bound(b) if decay is not None else 0.0
        else:
            if decay is None:
                raise ValueError("semi-infinite domain needs a decay envelope")
            b = max(a + 1.0, decay.cutoff(spec.abs_tol / 10.0))
            tail = decay.tail_bound(b)
    return a, b, tail


def integrate_oscillatory(
    f: Callable[[np.ndarray], np.ndarray],
    phase_rate: float,
    domain,
    spec: QuadratureSpec | None = None,
    decay: Envelope | None = None,
) -> QuadResult:
    """Adaptive evaluation of int f(y) exp(i*phase_rate*y) dy.

    ``f`` must be vectorised. ``domain`` is ``(a, b)`` with ``b`` possibly
    ``inf`` (then ``decay`` supplies the tail bound used to truncate; the
    bound is added to the error estimate). Panels spanning more than 2*pi of
    phase are integrated with the Filon-Legendre rule, others with plain
    Gauss-Legendre. Non-convergence is reported via ``converged=False``.
    """
    spec = spec or QuadratureSpec()
    s = float(phase_rate)
    if not math.isfinite(s):
        raise ValueError("phase_rate must be finite")
    a, b, tail = _resolve_domain(domain, spec, decay)
    order = spec.order
    x, w = gauss_legendre(order)
    always_filon = spec.oscillation_strategy == "filon_phase_extraction"

    n0 = max(1, min(8, spec.max_subdivisions // 2))
    active = np.linspace(a, b, n0 + 1)
    active = np.stack([active[:-1], active[1:]], axis=1)
    total = 0.0 + 0.0j
    err_total = 0.0
    evaluations = 0
    n_panels = len(active)
    length = b - a
    converged = True

    while len(active):
        lo, hi = active[:, 0], active[:, 1]
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        nodes = mid[:, None] + half[:, None] * x[None, :]
        amp = np.asarray(f(nodes), dtype=complex)
        evaluations += nodes.size
        omega = s * half
        use_filon = always_filon | (np.abs(2 * omega) > 2 * math.pi)
        vals = np.empty(len(active), dtype=complex)
        errs = np.empty(len(active))
        if (~use_filon).any():
            m = ~use_filon
            full = amp[m] * np.exp(1j * s * nodes[m])
            vals[m] = half[m] * (full @ w)
            errs[m] = panel_error(full, half[m])
        if use_filon.any():
            m = use_filon
            coef = amp[m] @ _legendre_projection(order).T
            mom = _filon_moments(omega[m], order)
            vals[m] = half[m] * np.exp(1j * s * mid[m]) * np.sum(coef * mom, axis=1)
            errs[m] = 2.0 * half[m] * (np.abs(coef[:, -1]) + np.abs(coef[:, -2]))
        # a panel is accepted when its error is below its share of the budget
        budget = spec.tolerance(total + vals.sum()) * (2 * half) / length
        ok = errs <= 0.5 * budget
        total += vals[ok].sum()
        err_total += errs[ok].sum()
        bad = active[~ok]
        if not len(bad):
            break
        if n_panels + len(bad) > spec.max_subdivisions:
            total += vals[~ok].sum()
            err_total += errs[~ok].sum()
            converged = False
            break
        mids = 0.5 * (bad[:, 0] + bad[:, 1])
        active = np.concatenate(
            [np.stack([bad[:, 0], mids], axis=1), np.stack([mids, bad[:, 1]], axis=1)]
        )
        n_panels += len(bad)

    err_total += tail
    if converged and err_total > spec.tolerance(total):
        converged = False
    return QuadResult(value=complex(total), error_estimate=float(err_total),
                      evaluations=evaluations, converged=converged)


def fit_power_law(t: np.ndarray, g: np.ndarray) -> tuple[float, float, float]:
    """Least-squares fit of log|g| = log c - p log t.

    Returns ``(p, c, residual)`` where residual is the RMS deviation in the
    log-log plane.
    """
    t = np.asarray(t, dtype=float)
    g = np.abs(np.asarray(g, dtype=float))
    keep = g > 0
    if keep.sum() < 2:
        return math.nan, 0.0, math.inf
    lt, lg = np.log(t[keep]), np.log(g[keep])
    A = np.stack([np.ones_like(lt), -lt], axis=1)
    (logc, p), *_ = np.linalg.lstsq(A, lg, rcond=None)
    resid = float(np.sqrt(np.mean((A @ np.array([logc, p]) - lg) ** 2)))
    return float(p), float(math.exp(logc)), resid


def _power_tail(p: float, c: float, t_max: float) -> float:
    return c * t_max ** (1.0 - p) / (p - 1.0)


def integrate_improper_time(
    g: Callable[[np.ndarray], np.ndarray],
    T: float,
    spec: QuadratureSpec | None = None,
    tail_model: Literal["none", "power_law_fit"] = "power_law_fit",
    T_max: float | None = None,
    panels_per_decade: int = 12,
    fit_points: int = 12,
) -> ImproperResult:
    """int_T^inf g(t) dt as [T, T_max] quadrature plus a power-law tail.

    ``g`` is vectorised over t. The finite part uses adaptive Gauss-Legendre
    on log-spaced panels. With ``tail_model="power_law_fit"`` the integrand
    is sampled on ``fit_points`` log-spaced points of [T_max/10, T_max] and
    fitted to c*t^-p; if p <= 1 the tail is flagged divergent and only the
    truncated value is reported.
    """
    spec = spec or QuadratureSpec()
    if T < 0 or (T == 0 and tail_model == "power_law_fit"):
        raise ValueError("T must be positive for a power-law tail")
    if T_max is None:
        T_max = max(50.0, 100.0 * T)
    if not T_max > T:
        raise ValueError("T_max must exceed T")
    order = spec.order
    x, w = gauss_legendre(order)

    if T > 0:
        n_dec = math.log10(T_max / T)
        n0 = max(4, int(math.ceil(n_dec * panels_per_decade)))
        edges = T * (T_max / T) ** np.linspace(0.0, 1.0, n0 + 1)
    else:
        edges = np.linspace(0.0, T_max, 4 * panels_per_decade + 1)
    active = np.stack([edges[:-1], edges[1:]], axis=1)
    total = 0.0
    err_total = 0.0
    evaluations = 0
    n_panels = len(active)
    converged = True
    flags: list[str] = []
    scale_est = None

    while len(active):
        mid = 0.5 * (active[:, 0] + active[:, 1])
        half = 0.5 * (active[:, 1] - active[:, 0])
        nodes = mid[:, None] + half[:, None] * x[None, :]
        vals_at = np.asarray(g(nodes.ravel()), dtype=float).reshape(nodes.shape)
        evaluations += nodes.size
        vals = half * (vals_at @ w)
        errs = panel_error(vals_at, half)
        if scale_est is None:
            scale_est = float(np.sum(np.abs(vals)))
        budget = spec.tolerance(scale_est) * (2 * half) / (T_max - T)
        ok = errs <= budget
        total += float(vals[ok].sum())
        err_total += float(errs[ok].sum())
        bad = active[~ok]
        if not len(bad):
            break
        if n_panels + len(bad) > spec.max_subdivisions:
            total += float(vals[~ok].sum())
            err_total += float(errs[~ok].sum())
            converged = False
            flags.append("time quadrature hit max_subdivisions")
            break
        mids = 0.5 * (bad[:, 0] + bad[:, 1])
        active = np.concatenate(
            [np.stack([bad[:, 0], mids], axis=1), np.stack([mids, bad[:, 1]], axis=1)]
        )
        n_panels += len(bad)

    res = ImproperResult(value=total, error_estimate=err_total, evaluations=evaluations,
                         converged=converged, truncated=total, t_max=T_max, flags=flags)
    if tail_model == "none":
        return res
    if tail_model != "power_law_fit":
        raise ValueError(f"unknown tail_model {tail_model!r}")

    t_fit = np.geomspace(T_max / 10.0, T_max, fit_points)
    g_fit = np.asarray(g(t_fit), dtype=float)
    res.evaluations += fit_points
    p, c, resid = fit_power_law(t_fit, g_fit)
    res.exponent, res.coefficient, res.fit_residual = p, c, resid
    if not math.isfinite(p) or p <= 1.0:
        res.divergent = True
        res.converged = False
        res.flags.append(f"tail divergent: fitted exponent {p:.3g} <= 1")
        return res
    sign = 1.0 if np.sum(g_fit[-fit_points // 2:]) >= 0 else -1.0
    tail = sign * _power_tail(p, c, T_max)
    # model sensitivity: refit on the upper half-decade only
    half_idx = fit_points // 2
    p2, c2, _ = fit_power_law(t_fit[half_idx:], g_fit[half_idx:])
    tail_err = abs(tail - sign * _power_tail(p2, c2, T_max)) if p2 > 1 else abs(tail)
    res.tail = tail
    res.value = total + tail
    res.error_estimate = err_total + tail_err
    if res.error_estimate > spec.tolerance(res.value):
        res.converged = False
    return res
