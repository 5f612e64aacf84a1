"""Model parameters and the closed-form quantities attached to them.

The model couples a cell density u and a chemical concentration v,

    du/dt = Lap(u) - chi * div(u grad v) + u * (a(x,t) - b(x,t) * u),
    0     = Lap(v) - lam * v + mu * u,

with a and b strictly positive, bounded, space-time periodic coefficients.
Everything in this module is exact arithmetic on the parameter set: regime
predicates, the attracting rectangle for the density, the sandwiching
recursion that produces it, spreading-speed bounds for front propagation,
and short-time lower bounds used by the persistence checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "CoefficientSpec",
    "ParameterSet",
    "TheoreticalBounds",
    "HypothesisError",
    "check_h1",
    "check_h2",
    "check_h3",
    "m_plus",
    "rectangle_bounds",
    "mn_sequence",
    "spreading_speeds",
    "finite_time_floor",
    "small_mass_threshold",
    "comparison_envelope",
    "cube_principal_pair",
]


class HypothesisError(ValueError):
    """A closed-form quantity was requested outside its validity regime."""


@dataclass(frozen=True)
class CoefficientSpec:
    """Separable space-time profile for a logistic coefficient.

    The coefficient is

        c(x, t) = base
                + space_amplitude * prod_i cos(2 pi x_i / space_wavelength)
                + time_amplitude * cos(2 pi t / time_period)

    so its infimum and supremum over all of space-time are available in
    closed form:

        inf c = base - |space_amplitude| - |time_amplitude|
        sup c = base + |space_amplitude| + |time_amplitude|

    The infimum must be strictly positive.
    """

    base: float
    space_amplitude: float = 0.0
    space_wavelength: float = 1.0
    time_amplitude: float = 0.0
    time_period: float = 1.0

    def __post_init__(self):
        if not math.isfinite(self.base):
            raise ValueError("coefficient base must be finite")
        if self.space_wavelength <= 0:
            raise ValueError("space_wavelength must be positive")
        if self.time_period <= 0:
            raise ValueError("time_period must be positive")
        if self.inf <= 0:
            raise ValueError(
                "coefficient must stay strictly positive: "
                f"base - |space_amplitude| - |time_amplitude| = {self.inf:g} <= 0"
            )

    @property
    def inf(self) -> float:
        return self.base - abs(self.space_amplitude) - abs(self.time_amplitude)

    @property
    def sup(self) -> float:
        return self.base + abs(self.space_amplitude) + abs(self.time_amplitude)

    def space_factor(self, axes: tuple[np.ndarray, ...]) -> np.ndarray:
        """Product of per-axis cosines, broadcast over a sparse mesh."""
        out = np.cos(2.0 * np.pi * axes[0] / self.space_wavelength)
        for x in axes[1:]:
            out = out * np.cos(2.0 * np.pi * x / self.space_wavelength)
        return out

    def time_factor(self, t: float) -> float:
        return math.cos(2.0 * math.pi * t / self.time_period)

    def sample(self, axes: tuple[np.ndarray, ...], t: float) -> np.ndarray:
        """Evaluate the coefficient on a sparse coordinate mesh at time t."""
        val = self.base + self.time_amplitude * self.time_factor(t)
        return val + self.space_amplitude * self.space_factor(axes)

    @classmethod
    def constant(cls, value: float) -> "CoefficientSpec":
        return cls(base=value)


@dataclass(frozen=True)
class ParameterSet:
    """Complete description of one model instance.

    chi is the chemotactic sensitivity, lam the chemical decay rate, mu the
    chemical production rate, dims the spatial dimension (1 or 2), and a, b
    the logistic growth and self-limitation coefficients.
    """

    chi: float
    lam: float
    mu: float
    dims: int
    a: CoefficientSpec
    b: CoefficientSpec

    def __post_init__(self):
        if self.chi <= 0:
            raise ValueError("chi must be strictly positive (use a tiny value, "
                             "e.g. 1e-9, for a chemotaxis-free baseline)")
        if self.lam <= 0:
            raise ValueError("lam must be strictly positive")
        if self.mu <= 0:
            raise ValueError("mu must be strictly positive")
        if self.dims not in (1, 2):
            raise ValueError(f"dims must be 1 or 2, got {self.dims}")

    @property
    def chimu(self) -> float:
        return self.chi * self.mu

    @property
    def a_inf(self) -> float:
        return self.a.inf

    @property
    def a_sup(self) -> float:
        return self.a.sup

    @property
    def b_inf(self) -> float:
        return self.b.inf

    @property
    def b_sup(self) -> float:
        return self.b.sup


def check_h1(p: ParameterSet) -> bool:
    """Self-limitation dominates chemotactic amplification: b_inf > chi*mu."""
    return p.b_inf > p.chimu


def check_h2(p: ParameterSet) -> bool:
    """Stronger margin accounting for the growth contrast a_sup/a_inf."""
    return p.b_inf > (1.0 + p.a_sup / p.a_inf) * p.chimu


def check_h3(p: ParameterSet) -> bool:
    """Strongest margin; additionally controls the chemotactic drift so the
    lower spreading-speed bound stays positive."""
    root = math.sqrt(1.0 + p.dims * p.a_inf / (4.0 * p.lam))
    return p.b_inf > (1.0 + (1.0 + root) * p.a_sup / (2.0 * p.a_inf)) * p.chimu


def m_plus(p: ParameterSet) -> float:
    """Eventual uniform upper bound a_sup / (b_inf - chi*mu). Needs H1."""
    if not check_h1(p):
        raise HypothesisError("m_plus requires b_inf > chi*mu (H1)")
    return p.a_sup / (p.b_inf - p.chimu)


def rectangle_bounds(p: ParameterSet) -> tuple[float, float]:
    """Extremes of the attracting rectangle for the density.

    Returns
    -------
    (m_lower, m_upper) : tuple of float
        Every positive bounded solution eventually satisfies
        m_lower <= u <= m_upper uniformly in space.  With cm = chi*mu,

            m_lower = ((b_inf - cm) a_inf - cm a_sup) / D,
            m_upper = ((b_sup - cm) a_sup - cm a_inf) / D,
            D = (b_sup - cm)(b_inf - cm) - cm^2.

    Raises
    ------
    HypothesisError
        If H2 fails; the pair is only defined (and positive) under H2.
    """
    if not check_h2(p):
        raise HypothesisError(
            "rectangle_bounds requires b_inf > (1 + a_sup/a_inf) chi*mu (H2)")
    cm = p.chimu
    denom = (p.b_sup - cm) * (p.b_inf - cm) - cm * cm
    lower = ((p.b_inf - cm) * p.a_inf - cm * p.a_sup) / denom
    upper = ((p.b_sup - cm) * p.a_sup - cm * p.a_inf) / denom
    return lower, upper


def mn_sequence(p: ParameterSet, n: int) -> list[tuple[float, float]]:
    """Sandwiching recursion that contracts onto rectangle_bounds.

    Starting from lo_0 = 0,

        hi_k     = (a_sup - chi*mu * lo_k) / (b_inf - chi*mu)
        lo_{k+1} = (a_inf - chi*mu * hi_k) / (b_sup - chi*mu)

    The lo_k increase strictly, the hi_k decrease strictly, and both
    converge geometrically (ratio (chi*mu)^2 / ((b_inf-chi*mu)(b_sup-chi*mu)))
    to rectangle_bounds.  Returns the pairs (lo_k, hi_k) for k = 0..n.
    Iteration stops once successive pairs differ by less than 1e-14 in both
    components; the converged pair is then repeated so the list always has
    n+1 entries.  Needs H2.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if not check_h2(p):
        raise HypothesisError(
            "mn_sequence requires b_inf > (1 + a_sup/a_inf) chi*mu (H2)")
    cm = p.chimu
    pairs = []
    lo = 0.0
    for _ in range(n + 1):
        hi = (p.a_sup - cm * lo) / (p.b_inf - cm)
        if pairs and abs(lo - pairs[-1][0]) < 1e-14 and abs(hi - pairs[-1][1]) < 1e-14:
            break
        pairs.append((lo, hi))
        lo = (p.a_inf - cm * hi) / (p.b_sup - cm)
    while len(pairs) < n + 1:
        pairs.append(pairs[-1])
    return pairs


def _upper_speed(p: ParameterSet) -> float:
    # fast-side bound; the root(N)/root(lam) term is the chemotactic drift excess
    cm = p.chimu
    drift = cm * math.sqrt(p.dims) * p.a_sup / (2.0 * (p.b_inf - cm) * math.sqrt(p.lam))
    return 2.0 * math.sqrt(p.a_sup) + drift


def spreading_speeds(p: ParameterSet) -> tuple[float, float]:
    """Lower and upper bounds on the propagation speed of invasion fronts.

    Returns
    -------
    (c_minus, c_plus) : tuple of float
        With cm = chi*mu and drift = cm sqrt(N) a_sup / (2 sqrt(lam) (b_inf - cm)),

            c_plus  = 2 sqrt(a_sup) + drift
            c_minus = 2 sqrt(a_inf - cm a_sup / (b_inf - cm)) - drift

        Fronts emerging from compactly supported (or front-like) data
        eventually travel no slower than c_minus and no faster than c_plus.

    Raises
    ------
    HypothesisError
        If H3 fails.  c_minus is positive exactly when H3 holds, so outside
        that regime the pair is reported as undefined rather than negative.
    """
    if not check_h3(p):
        raise HypothesisError(
            "spreading_speeds requires H3; the lower bound degenerates otherwise")
    cm = p.chimu
    drift = cm * math.sqrt(p.dims) * p.a_sup / (2.0 * math.sqrt(p.lam) * (p.b_inf - cm))
    c_minus = 2.0 * math.sqrt(p.a_inf - cm * p.a_sup / (p.b_inf - cm)) - drift
    return c_minus, _upper_speed(p)


def finite_time_floor(p: ParameterSet, u0_inf: float, u0_sup: float,
                      horizon: float, t: float) -> float:
    """Pointwise lower bound for the density on a finite time window.

    For initial data with infimum u0_inf >= 0 and supremum u0_sup, the
    density satisfies, for 0 <= t <= horizon,

        u(t) >= u0_inf * exp(t * (a_inf - b_sup * u0_sup * exp(horizon * a_sup)))

    which is the bound returned here.  Zero initial infimum gives zero.
    """
    if u0_inf < 0:
        raise ValueError("u0_inf must be nonnegative")
    if u0_sup < u0_inf:
        raise ValueError("u0_sup must be >= u0_inf")
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    if not 0.0 <= t <= horizon:
        raise ValueError(f"t must lie in [0, horizon], got t={t:g}, horizon={horizon:g}")
    if u0_inf == 0.0:
        return 0.0
    rate = p.a_inf - p.b_sup * u0_sup * math.exp(horizon * p.a_sup)
    return u0_inf * math.exp(t * rate)


def small_mass_threshold(p: ParameterSet, horizon: float) -> float:
    """Largest u0_sup for which finite_time_floor never dips below u0_inf.

    Equals a_inf * exp(-a_sup * horizon) / b_sup: below this level the
    exponent in finite_time_floor is nonnegative on the whole window.
    """
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    return p.a_inf * math.exp(-p.a_sup * horizon) / p.b_sup


def comparison_envelope(p: ParameterSet, u0_sup: float, t) -> np.ndarray | float:
    """Closed-form logistic envelope dominating the density supremum.

    Solves ubar' = ubar * (a_sup - (b_inf - chi*mu) * ubar), ubar(0) = u0_sup.
    Every solution of the full system started below u0_sup stays below
    ubar(t) for all later times.  Needs H1 (the damping must be positive).
    Accepts scalar or array t; t must be nonnegative.
    """
    if not check_h1(p):
        raise HypothesisError("comparison_envelope requires H1")
    if u0_sup < 0:
        raise ValueError("u0_sup must be nonnegative")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be nonnegative")
    if u0_sup == 0.0:
        out = np.zeros_like(t)
        return float(out) if out.ndim == 0 else out
    r = p.a_sup
    s = p.b_inf - p.chimu
    out = r * u0_sup / (s * u0_sup + (r - s * u0_sup) * np.exp(-r * t))
    return float(out) if out.ndim == 0 else out


def cube_principal_pair(a0: float, half_width: float, dims: int,
                        ) -> tuple[float, Callable[..., np.ndarray]]:
    """Principal value and profile of Lap + a0 on a cube with absorbing walls.

    On the cube {|x_i| < half_width, i = 1..dims} the operator Lap + a0 with
    zero boundary values has principal value

        sigma = a0 - dims * pi^2 / (4 half_width^2)

    attained by phi(x) = prod_i cos(pi x_i / (2 half_width)), which is 1 at
    the origin and vanishes on the walls.  Returns (sigma, phi); phi takes
    one coordinate array per axis.
    """
    if half_width <= 0:
        raise ValueError("half_width must be positive")
    if dims not in (1, 2):
        raise ValueError("dims must be 1 or 2")
    sigma = a0 - dims * math.pi ** 2 / (4.0 * half_width ** 2)

    def phi(*axes: np.ndarray) -> np.ndarray:
        if len(axes) != dims:
            raise ValueError(f"phi expects {dims} coordinate array(s)")
        out = np.cos(np.pi * np.asarray(axes[0], dtype=float) / (2.0 * half_width))
        for x in axes[1:]:
            out = out * np.cos(np.pi * np.asarray(x, dtype=float) / (2.0 * half_width))
        return out

    return sigma, phi


@dataclass(frozen=True)
class TheoreticalBounds:
    """Every closed-form target for one parameter set, gated by regime.

    Fields that are undefined in the parameter regime are None: m_plus and
    c_plus need H1, the rectangle needs H2, c_minus needs H3.
    """

    h1: bool
    h2: bool
    h3: bool
    m_plus: float | None
    m_lower: float | None
    m_upper: float | None
    c_minus: float | None
    c_plus: float | None

    @classmethod
    def from_params(cls, p: ParameterSet) -> "TheoreticalBounds":
        h1, h2, h3 = check_h1(p), check_h2(p), check_h3(p)
        mp = m_plus(p) if h1 else None
        ml, mu_ = rectangle_bounds(p) if h2 else (None, None)
        cm, cp = spreading_speeds(p) if h3 else (None, None)
        if cp is None and h1:
            cp = _upper_speed(p)
        bounds = cls(h1=h1, h2=h2, h3=h3, m_plus=mp, m_lower=ml, m_upper=mu_,
                     c_minus=cm, c_plus=cp)
        bounds._validate()
        return bounds

    def _validate(self):
        if self.h2:
            assert self.m_lower is not None and self.m_upper is not None
            if not (0.0 < self.m_lower <= self.m_upper <= self.m_plus):
                raise AssertionError(
                    f"rectangle ordering violated: {self.m_lower!r} <= "
                    f"{self.m_upper!r} <= {self.m_plus!r} expected under H2")
        if self.h3:
            assert self.c_minus is not None and self.c_plus is not None
            if not (0.0 < self.c_minus <= self.c_plus):
                raise AssertionError(
                    f"speed ordering violated: 0 < {self.c_minus!r} <= {self.c_plus!r} "
                    "expected under H3")

    def to_dict(self) -> dict:
        return {
            "h1": self.h1, "h2": self.h2, "h3": self.h3,
            "m_plus": self.m_plus,
            "m_lower": self.m_lower, "m_upper": self.m_upper,
            "c_minus": self.c_minus, "c_plus": self.c_plus,
        }
