"""Couplings, radial initial states, detector cones and run configuration.

Conventions: hbar = 1, m = 1/2, so H_0 = -Laplacian. The point interaction
sits at the origin with coupling ``alpha``; in the s-wave it acts as the
boundary condition u'(0) = 4*pi*alpha * u(0) on u(r) = r*psi(r).

A :class:`RadialState` is stored analytically. Presets are sums of
:class:`GaussAtom` / :class:`ExpAtom` terms whose momentum transforms are
known in closed form; arbitrary callables fall back to quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Literal, Sequence

import numpy as np

from .numerics.faddeeva import faddeeva_derivatives
from .numerics.quadrature import Envelope, QuadratureSpec, integrate_oscillatory

Regime = Literal["resonant", "positive", "negative"]
DecayClass = Literal["gaussian", "exponential", "compact_support"]
PresetKind = Literal["gaussian", "exponential_decay", "w_projected_exponential"]

_SQRT_HALF_PI = math.sqrt(math.pi / 2.0)


@dataclass(frozen=True)
class PointInteraction:
    alpha: float
    center: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if not math.isfinite(self.alpha):
            raise ValueError("alpha must be finite")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if len(self.center) != 3:
            raise ValueError("center must be a 3-vector")

    @property
    def regime(self) -> Regime:
        if self.alpha == 0:
            return "resonant"
        return "positive" if self.alpha > 0 else "negative"

    @property
    def kappa(self) -> float:
        """Boundary-condition constant 4*pi*alpha."""
        return 4.0 * math.pi * self.alpha

    @property
    def bound_energy(self) -> float | None:
        """lambda_alpha = -(4 pi alpha)^2 for alpha < 0, else None."""
        if self.alpha < 0:
            return -(self.kappa**2)
        return None


# --------------------------------------------------------------------------
# analytic building blocks


@dataclass(frozen=True)
class GaussAtom:
    """psi(r) = coef * r**power * exp(-r^2 / (2 sigma^2)), power in {0, 2}."""

    coef: float
    sigma: float
    power: int = 0

    def __post_init__(self):
        if self.power not in (0, 2):
            raise ValueError("GaussAtom power must be 0 or 2")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    @property
    def _m(self) -> int:
        return self.power + 1

    def psi(self, r):
        return self.coef * r**self.power * np.exp(-(r**2) / (2 * self.sigma**2))

    def u(self, y):
        return self.coef * y**self._m * np.exp(-(y**2) / (2 * self.sigma**2))

    def tail(self, cut: float) -> float:
        beta = 1.0 / (2 * self.sigma**2)
        e = math.exp(-beta * cut**2)
        if self._m == 1:
            return abs(self.coef) * e / (2 * beta)
        return abs(self.coef) * (cut**2 + 1.0 / beta) * e / (2 * beta)

    def transform(self, k, order: int = 0):
        """d^order/dk^order of int_0^inf u(y) exp(iky) dy (k may be complex)."""
        s = self.sigma / math.sqrt(2.0)
        k = np.asarray(k, dtype=complex)
        m = self._m
        w = faddeeva_derivatives(k * s, m + order)[m + order]
        return self.coef * (-1j) ** m * self.sigma * _SQRT_HALF_PI * s ** (m + order) * w

    def sinc_transform(self, k, order: int = 0):
        """d^order/dk^order of int_0^inf u(y) sin(ky)/k dy, order in {0, 1}."""
        k = np.asarray(k, dtype=float)
        b = self.sigma**2 / 2.0
        g = np.exp(-b * k**2)
        pref = self.coef * _SQRT_HALF_PI * self.sigma**3
        if self._m == 1:
            return pref * g if order == 0 else pref * (-2 * b * k) * g
        if order == 0:
            return pref * (6 * b - 4 * b**2 * k**2) * g
        return pref * g * (-8 * b**2 * k - 2 * b * k * (6 * b - 4 * b**2 * k**2))

    def moment(self) -> float:
        """int_0^inf u(y) dy."""
        s2 = self.sigma**2
        return self.coef * (s2 if self._m == 1 else 2 * s2**2)


@dataclass(frozen=True)
class ExpAtom:
    """psi(r) = coef * r**power * exp(-rate * r), power in {-1, 0, 1}."""

    coef: float
    rate: float
    power: int = 0

    def __post_init__(self):
        if self.power not in (-1, 0, 1):
            raise ValueError("ExpAtom power must be -1, 0 or 1")
        if not self.rate > 0:
            raise ValueError("rate must be positive")

    @property
    def _m(self) -> int:
        return self.power + 1

    def psi(self, r):
        return self.coef * r**self.power * np.exp(-self.rate * r)

    def u(self, y):
        return self.coef * y**self._m * np.exp(-self.rate * y)

    def tail(self, cut: float) -> float:
        a, m = self.rate, self._m
        s = sum(math.factorial(m) / math.factorial(j) * cut**j / a ** (m - j + 1) for j in range(m + 1))
        return abs(self.coef) * math.exp(-a * cut) * s

    def transform(self, k, order: int = 0):
        k = np.asarray(k, dtype=complex)
        a, m = self.rate, self._m
        # d^n/dk^n (a - ik)^-(m+1) = i^n (m+n)!/m! (a - ik)^-(m+1+n)
        return (self.coef * math.factorial(m + order) * (1j) ** order
                / (a - 1j * k) ** (m + 1 + order))

    def sinc_transform(self, k, order: int = 0):
        k = np.asarray(k, dtype=float)
        a, m = self.rate, self._m
        d = a**2 + k**2
        if order == 0:
            val = (1.0 / d, 2 * a / d**2, 2 * (3 * a**2 - k**2) / d**3)[m]
        else:
            val = (-2 * k / d**2, -8 * a * k / d**3, -8 * k * (5 * a**2 - k**2) / d**4)[m]
        return self.coef * val

    def moment(self) -> float:
        return self.coef * math.factorial(self._m) / self.rate ** (self._m + 1)


Atom = GaussAtom | ExpAtom


@dataclass(frozen=True)
class RadialState:
    """Spherically symmetric initial state psi_0(r).

    ``atoms`` (when non-empty) define the profile exactly and enable closed
    form transforms. ``profile`` is then derived from them. For arbitrary
    profiles, pass ``profile`` plus an ``envelope`` bounding |r psi_0(r)|.
    """

    profile: Callable[[np.ndarray], np.ndarray] | None = None
    decay_class: DecayClass = "gaussian"
    preset: str | None = None
    smoothness_note: str = ""
    atoms: tuple[Atom, ...] = ()
    envelope: Envelope | None = None
    params: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        if not self.atoms and self.profile is None:
            raise ValueError("RadialState needs atoms or a profile")
        if not self.atoms and self.envelope is None:
            raise ValueError("a profile-only RadialState needs an envelope for |r psi(r)|")

    # -- evaluation -------------------------------------------------------
    def psi(self, r):
        r = np.asarray(r, dtype=float)
        if self.atoms:
            return sum(a.psi(r) for a in self.atoms)
        return np.asarray(self.profile(r))

    def u(self, y):
        """Reduced radial function u(y) = y * psi_0(y)."""
        y = np.asarray(y, dtype=float)
        if self.atoms:
            return sum(a.u(y) for a in self.atoms)
        return y * np.asarray(self.profile(y))

    def tail(self, cut: float) -> float:
        """Bound on int_cut^inf |u(y)| dy."""
        if self.atoms:
            return sum(a.tail(cut) for a in self.atoms)
        return self.envelope.tail_bound(cut)

    def cutoff(self, target: float = 1e-17) -> float:
        """Radius beyond which int |u| < target."""
        hi = 1.0
        while self.tail(hi) > target:
            hi *= 1.5
            if hi > 1e6:
                raise ValueError("state decays too slowly")
        lo = hi / 1.5
        for _ in range(30):
            mid = 0.5 * (lo + hi)
            if self.tail(mid) > target:
                lo = mid
            else:
                hi = mid
        return hi

    def scaled(self, factor: float) -> "RadialState":
        if self.atoms:
            atoms = tuple(replace(a, coef=a.coef * factor) for a in self.atoms)
            return replace(self, atoms=atoms)
        prof = self.profile
        env = self.envelope
        return replace(self, profile=lambda r: factor * prof(r),
                       envelope=replace(env, scale=env.scale * abs(factor)))

    def combine(self, other: "RadialState", a: float = 1.0, b: float = 1.0) -> "RadialState":
        """a*self + b*other."""
        if self.atoms and other.atoms:
            atoms = tuple(replace(x, coef=a * x.coef) for x in self.atoms) + tuple(
                replace(x, coef=b * x.coef) for x in other.atoms)
            decay = "exponential" if "exponential" in (self.decay_class, other.decay_class) else self.decay_class
            return RadialState(decay_class=decay, atoms=atoms,
                               smoothness_note="linear combination of analytic atoms")
        p, q = self.psi, other.psi
        env1 = self.envelope or _atoms_envelope(self.atoms)
        env2 = other.envelope or _atoms_envelope(other.atoms)
        env = env1 if env1.rate <= env2.rate else env2
        env = replace(env, scale=abs(a) * env1.scale + abs(b) * env2.scale,
                      rate=min(env1.rate, env2.rate), kind="algebraic_exponential"
                      if env.kind != "gaussian" else env.kind)
        return RadialState(profile=lambda r: a * p(r) + b * q(r),
                           decay_class=self.decay_class, envelope=env,
                           smoothness_note="linear combination")

    # -- transforms of u ---------------------------------------------------
    def fourier_u(self, k, order: int = 0):
        """d^order/dk^order of int_0^inf u(y) exp(iky) dy."""
        if self.atoms:
            return sum(a.transform(k, order) for a in self.atoms)
        return _quad_transform(self, np.asarray(k, dtype=float), order, kind="exp")

    def sinc_u(self, k, order: int = 0):
        """d^order/dk^order of int_0^inf u(y) sin(ky)/k dy (order 0 or 1)."""
        if self.atoms:
            return sum(a.sinc_transform(k, order) for a in self.atoms)
        return _quad_transform(self, np.asarray(k, dtype=float), order, kind="sinc")

    def moment_u(self) -> float:
        """int_0^inf u(y) dy; the W-integral is 4*pi times this."""
        if self.atoms:
            return float(sum(a.moment() for a in self.atoms))
        res = integrate_oscillatory(self.u, 0.0, (0.0, math.inf),
                                    QuadratureSpec(abs_tol=1e-14, rel_tol=1e-13), self.envelope)
        return float(res.value.real)

    def laplace_u(self, decay: float) -> float:
        """int_0^inf u(y) exp(-decay*y) dy, decay > 0."""
        if self.atoms:
            return float(np.real(self.fourier_u(1j * decay)))
        res = integrate_oscillatory(lambda y: self.u(y) * np.exp(-decay * y), 0.0,
                                    (0.0, math.inf), QuadratureSpec(abs_tol=1e-14, rel_tol=1e-13),
                                    self.envelope)
        return float(res.value.real)


def _atoms_envelope(atoms: Sequence[Atom]) -> Envelope:
    rates = []
    scale = 0.0
    for a in atoms:
        if isinstance(a, GaussAtom):
            # y^m e^{-y^2/2s^2} <= C_m e^{-y/s} for a crude exponential bound
            rates.append(1.0 / a.sigma)
            scale += abs(a.coef) * (a.sigma ** a._m) * math.exp(2.0 * a._m)
        else:
            rates.append(a.rate)
            scale += abs(a.coef)
    return Envelope("algebraic_exponential", scale, 0.5 * min(rates), power=2.0)


def _quad_transform(state: RadialState, k: np.ndarray, order: int, kind: str):
    from .numerics.quadrature import composite_rule, oscillation_edges

    cut = state.cutoff(1e-16)
    kmax = float(np.max(np.abs(k))) if k.size else 0.0
    edges = oscillation_edges(0.0, cut, kmax, scale=min(0.5, cut / 8))
    y, w = composite_rule(edges, 20)
    y, w = y.ravel(), w.ravel()
    uw = state.u(y) * w
    kk = k.reshape(-1, 1)
    ky = kk * y[None, :]
    if kind == "exp":
        kern = (1j * y[None, :]) ** order * np.exp(1j * ky)
    elif order == 0:
        kern = y[None, :] * np.sinc(ky / np.pi)
    else:
        from scipy.special import spherical_jn
        kern = -(y[None, :] ** 2) * spherical_jn(1, ky)
    return (kern @ uw).reshape(k.shape)


# --------------------------------------------------------------------------
# presets and helpers


def make_preset_state(kind: PresetKind, **params) -> RadialState:
    """Normalised analytic presets.

    gaussian(sigma):           psi = (pi sigma^2)^(-3/4) exp(-r^2 / 2 sigma^2)
    exponential_decay:         psi = pi^(-1/2) exp(-r)
    w_projected_exponential:   psi = 2 pi^(-1/2) exp(-r) (1 - r/2), inside W
    """
    if kind == "gaussian":
        sigma = float(params.get("sigma", 1.0))
        if not sigma > 0 or not math.isfinite(sigma):
            raise ValueError(f"state.sigma must be positive, got {sigma}")
        norm = (math.pi * sigma**2) ** -0.75
        return RadialState(decay_class="gaussian", preset="gaussian",
                           atoms=(GaussAtom(norm, sigma, 0),),
                           smoothness_note="Schwartz class",
                           params=(("sigma", sigma),))
    if params:
        raise ValueError(f"preset {kind!r} takes no parameters, got {sorted(params)}")
    if kind == "exponential_decay":
        return RadialState(decay_class="exponential", preset="exponential_decay",
                           atoms=(ExpAtom(1.0 / math.sqrt(math.pi), 1.0, 0),),
                           smoothness_note="cusp at the origin; not in W")
    if kind == "w_projected_exponential":
        c = 2.0 / math.sqrt(math.pi)
        return RadialState(decay_class="exponential", preset="w_projected_exponential",
                           atoms=(ExpAtom(c, 1.0, 0), ExpAtom(-c / 2, 1.0, 1)),
                           smoothness_note="cusp at the origin; in W")
    raise ValueError(f"unknown preset {kind!r}")


def bound_state(interaction: PointInteraction) -> RadialState:
    """Normalised eigenfunction sqrt(-2 alpha) exp(4 pi alpha r)/r (alpha < 0)."""
    if interaction.alpha >= 0:
        raise ValueError("a bound state exists only for alpha < 0")
    a = interaction.alpha
    return RadialState(decay_class="exponential", preset=None,
                       atoms=(ExpAtom(math.sqrt(-2 * a), -interaction.kappa, -1),),
                       smoothness_note="1/r singularity at the origin (operator domain)")


def bound_overlap(state: RadialState, interaction: PointInteraction) -> float:
    """<psi_alpha, psi_0> = 4 pi sqrt(-2 alpha) int u(y) exp(4 pi alpha y) dy."""
    a = interaction.alpha
    if a >= 0:
        return 0.0
    return 4 * math.pi * math.sqrt(-2 * a) * state.laplace_u(-interaction.kappa)


def orthogonal_gaussian(sigma: float, interaction: PointInteraction) -> RadialState:
    """Normalised (1 - beta r^2) exp(-r^2/2 sigma^2) orthogonal to the bound state.

    Smooth and rapidly decaying, so it lies in S(R^3) and in H_ac.
    """
    if interaction.alpha >= 0:
        raise ValueError("orthogonal_gaussian needs alpha < 0")
    g0 = GaussAtom(1.0, sigma, 0)
    g2 = GaussAtom(1.0, sigma, 2)
    d = -interaction.kappa
    l0 = float(np.real(g0.transform(1j * d)))
    l2 = float(np.real(g2.transform(1j * d)))
    beta = l0 / l2
    raw = RadialState(decay_class="gaussian", atoms=(g0, GaussAtom(-beta, sigma, 2)),
                      smoothness_note="Schwartz class, orthogonal to the bound state")
    out = raw.scaled(1.0 / norm(raw))
    return replace(out, params=(("sigma", sigma), ("beta", beta)))


def norm(state: RadialState) -> float:
    """||psi_0|| = sqrt(4 pi int |u|^2 dy)."""
    spec = QuadratureSpec(abs_tol=1e-15, rel_tol=1e-14)
    cut = state.cutoff(1e-16)
    res = integrate_oscillatory(lambda y: np.abs(state.u(y)) ** 2, 0.0, (0.0, cut), spec)
    return math.sqrt(4 * math.pi * max(res.value.real, 0.0))


def w_membership(state: RadialState, quad: QuadratureSpec | None = None):
    """Return (4 pi int psi_0(r) r dr, in_W).

    The integral is evaluated by adaptive quadrature of u(y) = y psi_0(y),
    independently of the closed-form atom moments.
    """
    quad = quad or QuadratureSpec(abs_tol=1e-12, rel_tol=1e-12)
    cut = state.cutoff(quad.abs_tol / 100.0)
    res = integrate_oscillatory(lambda y: state.u(y).astype(complex), 0.0, (0.0, cut), quad)
    value = 4 * math.pi * res.value
    return value, bool(abs(value) < 10 * quad.abs_tol)


@dataclass(frozen=True)
class ConeSurface:
    """Detector cone C(Sigma); for radial states only the solid angle matters."""

    solid_angle: float = 4 * math.pi
    axis: tuple[float, float, float] = (0.0, 0.0, 1.0)

    def __post_init__(self):
        if not (0 < self.solid_angle <= 4 * math.pi + 1e-15):
            raise ValueError(f"solid_angle must lie in (0, 4pi], got {self.solid_angle}")
        ax = np.asarray(self.axis, dtype=float)
        n = float(np.linalg.norm(ax))
        if ax.shape != (3,) or n == 0:
            raise ValueError("axis must be a non-zero 3-vector")
        object.__setattr__(self, "axis", tuple(float(v) for v in ax / n))


@dataclass(frozen=True)
class EvolutionConfig:
    interaction: PointInteraction
    state: RadialState
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)
    grid_r: tuple[float, ...] = (1.0,)
    grid_t: tuple[float, ...] = (1.0,)

    def __post_init__(self):
        for name in ("grid_r", "grid_t"):
            g = tuple(float(v) for v in getattr(self, name))
            if not g:
                raise ValueError(f"{name} must be non-empty")
            if any(v <= 0 for v in g):
                raise ValueError(f"{name} must be strictly positive")
            if any(b <= a for a, b in zip(g, g[1:])):
                raise ValueError(f"{name} must be strictly increasing")
            object.__setattr__(self, name, g)
