"""Node-weight generation and tail-dependence truth values.

Two families of bivariate (or multivariate) weight laws are provided:

* ``GumbelCopula`` — identical Pareto marginals coupled through a Gumbel
  copula with parameter ``theta >= 1``.  Sampling goes through the
  positive-stable frailty construction, which is exact (no approximation,
  no rejection loop).
* ``PolarMRV`` — a polar construction ``(W1, W2) = (V * Theta, V * (1 - Theta))``
  with a Pareto radial part ``V`` and an angular variable ``Theta`` on [0, 1].
  This family is multivariate-regularly-varying by construction and its true
  upper tail dependence admits both a quadrature route and a Monte Carlo
  route (see :func:`mrv_true_utd`).

All sampling takes an explicit ``numpy.random.Generator`` so callers own
reproducibility.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from scipy import integrate, stats

from .errors import (
    ConvergenceError,
    ParameterError,
    UnsupportedScenarioError,
)

__all__ = [
    "ParetoTail",
    "Constant",
    "ScaledBeta",
    "Beta",
    "Bernoulli",
    "ThetaLaw",
    "GumbelCopula",
    "PolarMRV",
    "DependenceScenario",
    "WeightMatrix",
    "pareto_quantile",
    "sample_gumbel_uniforms",
    "sample_weights",
    "gumbel_true_utd",
    "mrv_true_utd",
    "scenario_true_utd",
    "scenario_label",
    "parse_scenario",
]

# Largest double strictly below 1; uniforms are clamped into [tiny, _UNIT_HI]
# before hitting quantile transforms so Pareto draws stay finite.
_UNIT_HI = 1.0 - 2.0**-53
_UNIT_LO = np.finfo(float).tiny

_SYM_TOL = 1e-12


@dataclass(frozen=True)
class ParetoTail:
    """Pareto marginal with survival ``(k / v) ** alpha`` for ``v >= k``.

    ``alpha`` is the tail index (heavier tail for smaller values), ``k`` the
    left endpoint / scale.  The defaults match the simulation study's
    marginal (infinite-variance regime with finite mean).
    """

    alpha: float = 1.1
    k: float = 20.0

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ParameterError(f"tail index alpha must be positive, got {self.alpha}")
        if not (self.k > 0 and math.isfinite(self.k)):
            raise ParameterError(f"scale k must be positive, got {self.k}")

    def quantile(self, u):
        return pareto_quantile(u, self)

    def survival(self, v):
        """P(V > v); equals 1 below the support endpoint k."""
        v = np.asarray(v, dtype=float)
        out = np.where(v <= self.k, 1.0, (self.k / np.maximum(v, self.k)) ** self.alpha)
        return out if out.ndim else float(out)


def pareto_quantile(u, tail: ParetoTail = ParetoTail()):
    """Quantile ``k * (1 - u) ** (-1 / alpha)`` of the Pareto tail.

    Accepts scalars or arrays with every entry in ``[0, 1)``; strictly
    increasing in ``u`` and bounded below by ``k``.
    """
    arr = np.asarray(u, dtype=float)
    if arr.size and (np.any(arr < 0.0) or np.any(arr >= 1.0)):
        raise ParameterError("quantile argument must lie in [0, 1)")
    out = tail.k * (1.0 - arr) ** (-1.0 / tail.alpha)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Angular (Theta) laws for the polar construction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Constant:
    """Degenerate angular law Theta = value, 0 < value < 1."""

    value: float

    def __post_init__(self):
        if not (0.0 < self.value < 1.0):
            raise ParameterError(f"constant angle must lie in (0, 1), got {self.value}")

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return np.full(n, self.value)

    def expect(self, fn: Callable[[float], float]) -> float:
        return float(fn(self.value))

    @property
    def is_symmetric(self) -> bool:
        return abs(self.value - 0.5) <= _SYM_TOL

    def label(self) -> str:
        return f"constant={self.value:g}"


@dataclass(frozen=True)
class Beta:
    """Theta ~ Beta(b1, b2) on (0, 1)."""

    b1: float
    b2: float

    def __post_init__(self):
        if not (self.b1 > 0 and self.b2 > 0):
            raise ParameterError("beta shape parameters must be positive")

    def sample(self, n, rng):
        return rng.beta(self.b1, self.b2, n)

    def expect(self, fn):
        return _beta_expect(fn, self.b1, self.b2)

    @property
    def is_symmetric(self):
        return abs(self.b1 - self.b2) <= _SYM_TOL

    def label(self):
        return f"beta={self.b1:g},{self.b2:g}"


@dataclass(frozen=True)
class ScaledBeta:
    """Theta = lo + (hi - lo) * X with X ~ Beta(b1, b2), 0 <= lo < hi <= 1."""

    b1: float
    b2: float
    lo: float
    hi: float

    def __post_init__(self):
        if not (self.b1 > 0 and self.b2 > 0):
            raise ParameterError("beta shape parameters must be positive")
        if not (0.0 <= self.lo < self.hi <= 1.0):
            raise ParameterError(
                f"scaled-beta range must satisfy 0 <= lo < hi <= 1, got [{self.lo}, {self.hi}]"
            )

    def sample(self, n, rng):
        return self.lo + (self.hi - self.lo) * rng.beta(self.b1, self.b2, n)

    def expect(self, fn):
        span = self.hi - self.lo
        return _beta_expect(lambda x: fn(self.lo + span * x), self.b1, self.b2)

    @property
    def is_symmetric(self):
        return (
            abs(self.b1 - self.b2) <= _SYM_TOL
            and abs(self.lo + self.hi - 1.0) <= _SYM_TOL
        )

    def label(self):
        return f"scaledbeta={self.b1:g},{self.b2:g},{self.lo:g},{self.hi:g}"


@dataclass(frozen=True)
class Bernoulli:
    """Theta ~ Bernoulli(p); mass splits between the two axes."""

    p: float

    def __post_init__(self):
        if not (0.0 < self.p < 1.0):
            raise ParameterError(f"bernoulli probability must lie in (0, 1), got {self.p}")

    def sample(self, n, rng):
        return (rng.random(n) < self.p).astype(float)

    def expect(self, fn):
        return (1.0 - self.p) * float(fn(0.0)) + self.p * float(fn(1.0))

    @property
    def is_symmetric(self):
        return abs(self.p - 0.5) <= _SYM_TOL

    def label(self):
        return f"bernoulli={self.p:g}"


ThetaLaw = Union[Constant, Beta, ScaledBeta, Bernoulli]


def _beta_expect(fn, b1, b2):
    """E[fn(X)] for X ~ Beta(b1, b2) by adaptive quadrature.

    The density may blow up at the endpoints (b < 1); QUADPACK's
    extrapolation handles those integrable singularities, and the error
    estimate is checked rather than trusted blindly.
    """
    dist = stats.beta(b1, b2)
    value, abserr = integrate.quad(
        lambda x: fn(x) * dist.pdf(x), 0.0, 1.0, limit=500, epsabs=1e-11, epsrel=1e-10
    )
    if abserr > 1e-6 * max(1.0, abs(value)):
        raise ConvergenceError(
            f"beta-expectation quadrature did not converge (abserr={abserr:g})"
        )
    return float(value)


# ---------------------------------------------------------------------------
# Scenarios
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GumbelCopula:
    """Layers coupled by a Gumbel copula, identical Pareto marginals.

    ``theta = 1`` is the independence copula; dependence increases with
    ``theta``.  ``layers`` may exceed 2 (the copula is exchangeable).
    """

    theta: float
    marginal: ParetoTail = field(default_factory=ParetoTail)
    layers: int = 2

    def __post_init__(self):
        if not (self.theta >= 1.0 and math.isfinite(self.theta)):
            raise ParameterError(f"gumbel theta must be >= 1, got {self.theta}")
        if self.layers < 2:
            raise ParameterError("a dependence scenario needs at least 2 layers")


@dataclass(frozen=True)
class PolarMRV:
    """Bivariate polar weights (V*Theta, V*(1-Theta)) with Pareto radial part."""

    theta_law: ThetaLaw
    marginal: ParetoTail = field(default_factory=ParetoTail)

    @property
    def layers(self) -> int:
        return 2


DependenceScenario = Union[GumbelCopula, PolarMRV]


@dataclass(frozen=True)
class WeightMatrix:
    """Sampled node weights, one row per node and one column per layer."""

    values: np.ndarray
    scenario: DependenceScenario | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[1] < 1 or v.shape[0] < 1:
            raise ParameterError("weight matrix must be 2-D with at least one layer")
        if not np.all(np.isfinite(v)) or np.any(v < 0.0):
            raise ParameterError("weights must be finite and non-negative")
        object.__setattr__(self, "values", v)

    @property
    def n_nodes(self) -> int:
        return self.values.shape[0]

    @property
    def n_layers(self) -> int:
        return self.values.shape[1]


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def _positive_stable(index: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """One-sided stable variates with Laplace transform exp(-t**index).

    Kanter's representation: with U ~ Unif(0, pi), E ~ Exp(1) and a = index,

        a(U) = sin((1-a)U) * sin(a U)**(a/(1-a)) / sin(U)**(1/(1-a)),
        S = (a(U) / E) ** ((1-a)/a).

    Exact for 0 < index < 1.
    """
    u = rng.uniform(0.0, np.pi, n)
    e = rng.standard_exponential(n)
    one_minus = 1.0 - index
    ratio = (
        np.sin(one_minus * u)
        * np.sin(index * u) ** (index / one_minus)
        / np.sin(u) ** (1.0 / one_minus)
    )
    return (ratio / e) ** (one_minus / index)


def sample_gumbel_uniforms(
    n: int, dim: int, theta: float, rng: np.random.Generator
) -> np.ndarray:
    """Draw ``n`` rows from the ``dim``-variate Gumbel copula.

    Uses the shared-frailty construction: S positive stable with index
    1/theta, E_j independent unit exponentials, U_j = exp(-(E_j / S)**(1/theta)).
    For theta == 1 this degenerates to independent uniforms and is special-cased.
    Output entries are clamped into the open unit interval so downstream
    quantile transforms never see 0 or 1.
    """
    if n < 1:
        raise ParameterError("need at least one sample")
    if dim < 2:
        raise ParameterError("copula dimension must be at least 2")
    if not (theta >= 1.0 and math.isfinite(theta)):
        raise ParameterError(f"gumbel theta must be >= 1, got {theta}")
    if theta == 1.0:
        u = rng.random((n, dim))
    else:
        s = _positive_stable(1.0 / theta, n, rng)
        e = rng.standard_exponential((n, dim))
        u = np.exp(-((e / s[:, None]) ** (1.0 / theta)))
    return np.clip(u, _UNIT_LO, _UNIT_HI)


def sample_weights(
    scenario: DependenceScenario, n: int, rng: np.random.Generator
) -> WeightMatrix:
    """Sample a node-weight matrix for ``n`` nodes under ``scenario``."""
    if n < 1:
        raise ParameterError("need at least one node")
    if isinstance(scenario, GumbelCopula):
        u = sample_gumbel_uniforms(n, scenario.layers, scenario.theta, rng)
        values = pareto_quantile(u, scenario.marginal)
    elif isinstance(scenario, PolarMRV):
        v = pareto_quantile(rng.random(n), scenario.marginal)
        th = np.asarray(scenario.theta_law.sample(n, rng), dtype=float)
        # Compute the second coordinate as v * (1 - th), not v - v*th: the
        # direct product keeps tiny angles exact instead of cancelling.
        values = np.column_stack((v * th, v * (1.0 - th)))
    else:
        raise ParameterError(f"unknown scenario type {type(scenario).__name__}")
    return WeightMatrix(values=values, scenario=scenario)


# ---------------------------------------------------------------------------
# Truth values
# ---------------------------------------------------------------------------


def gumbel_true_utd(theta: float) -> float:
    """Upper tail dependence of the bivariate Gumbel copula: 2 - 2**(1/theta)."""
    if not (theta >= 1.0 and math.isfinite(theta)):
        raise ParameterError(f"gumbel theta must be >= 1, got {theta}")
    return 2.0 - 2.0 ** (1.0 / theta)


def mrv_true_utd(
    theta_law: ThetaLaw,
    tail: ParetoTail = ParetoTail(),
    tol: float = 5e-3,
    method: str = "quadrature",
    draws: int = 10_000_000,
    rng: np.random.Generator | None = None,
) -> float:
    """True upper tail dependence of the polar construction.

    For Theta symmetric about 1/2 (so both coordinates share a marginal law)
    and a Pareto(alpha, k) radial part, the conditional exceedance ratio at
    any common threshold ``u >= k`` equals

        E[min(Theta, 1 - Theta)**alpha] / E[Theta**alpha],

    independent of the threshold.  ``method="quadrature"`` integrates that
    ratio directly.  ``method="montecarlo"`` estimates the same quantity from
    joint draws at quantile level q = 1 - 1e-4: a raw pass supplies the
    empirical thresholds and a coarse estimate, then a second pass resamples
    the radial part conditionally above the realized threshold (exact by the
    Pareto tail's memorylessness), which shrinks the standard error far below
    ``tol``.  Disagreement between the two passes beyond 4 combined standard
    errors raises :class:`ConvergenceError`.

    Raises :class:`UnsupportedScenarioError` for non-symmetric Theta laws.
    """
    if not tol > 0:
        raise ParameterError("tol must be positive")
    if not theta_law.is_symmetric:
        raise UnsupportedScenarioError(
            "true-UTD routines require a Theta law symmetric about 1/2; "
            f"got {theta_law.label()}"
        )
    if method == "quadrature":
        alpha = tail.alpha
        num = theta_law.expect(lambda x: min(x, 1.0 - x) ** alpha)
        den = theta_law.expect(lambda x: x**alpha)
        if den <= 0.0:
            raise ConvergenceError("degenerate angular law: E[Theta**alpha] = 0")
        return num / den
    if method != "montecarlo":
        raise ParameterError(f"unknown method {method!r}")
    return _mrv_utd_montecarlo(theta_law, tail, tol, int(draws), rng)


def _mrv_utd_montecarlo(theta_law, tail, tol, draws, rng):
    if draws < 10_000:
        raise ParameterError("montecarlo route needs at least 10_000 draws")
    if rng is None:
        rng = np.random.default_rng()
    q = 1.0 - 1e-4
    top = max(int(round(draws * (1.0 - q))), 1)

    # Raw pass: empirical thresholds and a low-precision direct estimate.
    v = pareto_quantile(rng.random(draws), tail)
    th = np.asarray(theta_law.sample(draws, rng), dtype=float)
    w1 = v * th
    w2 = v * (1.0 - th)
    u1 = np.partition(w1, draws - top - 1)[draws - top - 1]
    u2 = np.partition(w2, draws - top - 1)[draws - top - 1]
    exceed1 = w1 > u1
    n_marg = int(np.count_nonzero(exceed1))
    if n_marg == 0:
        raise ConvergenceError("raw pass produced no marginal exceedances")
    lam_raw = float(np.count_nonzero(exceed1 & (w2 > u2))) / n_marg
    se_raw = math.sqrt(lam_raw * (1.0 - lam_raw) / n_marg)
    del v, th, w1, w2, exceed1

    if u1 < tail.k:
        raise ConvergenceError(
            "raw-pass threshold fell below the Pareto support endpoint; "
            "increase draws"
        )

    # Conditional pass: V | V > u1 is again Pareto with scale u1, so fresh
    # draws above the realized threshold estimate the same conditional ratio
    # without the 1e-4 rarity penalty.  The symmetric Theta law makes a
    # single common threshold valid for both coordinates.
    vb = u1 * (1.0 - rng.random(draws)) ** (-1.0 / tail.alpha)
    thb = np.asarray(theta_law.sample(draws, rng), dtype=float)
    w1b = vb * thb
    w2b = vb * (1.0 - thb)
    marg = w1b > u1
    n_boost = int(np.count_nonzero(marg))
    if n_boost == 0:
        raise ConvergenceError("conditional pass produced no marginal exceedances")
    lam = float(np.count_nonzero(marg & (w2b > u1))) / n_boost
    se_boost = math.sqrt(lam * (1.0 - lam) / n_boost)

    band = 4.0 * math.sqrt(se_raw**2 + se_boost**2) + 1e-9
    if abs(lam - lam_raw) > band:
        raise ConvergenceError(
            f"montecarlo passes disagree: raw={lam_raw:.5f}, "
            f"conditional={lam:.5f}, band={band:.5f}"
        )
    if 2.0 * se_boost > tol:
        raise ConvergenceError(
            f"montecarlo standard error {se_boost:.2e} too large for tol={tol:g}; "
            "increase draws"
        )
    return lam


def scenario_true_utd(scenario: DependenceScenario) -> float:
    """True UTD for a scenario: closed form for Gumbel, quadrature for polar."""
    if isinstance(scenario, GumbelCopula):
        return gumbel_true_utd(scenario.theta)
    if isinstance(scenario, PolarMRV):
        return mrv_true_utd(scenario.theta_law, tail=scenario.marginal)
    raise ParameterError(f"unknown scenario type {type(scenario).__name__}")


# ---------------------------------------------------------------------------
# Labels (stable keys for CSV output and the CLI grammar)
# ---------------------------------------------------------------------------


def scenario_label(scenario: DependenceScenario) -> str:
    """Canonical text form, e.g. ``gumbel:theta=2`` or ``polar:beta=0.5,0.5``."""
    if isinstance(scenario, GumbelCopula):
        lab = f"gumbel:theta={scenario.theta:g}"
        if scenario.layers != 2:
            lab += f",layers={scenario.layers}"
        return lab
    if isinstance(scenario, PolarMRV):
        return "polar:" + scenario.theta_law.label()
    raise ParameterError(f"unknown scenario type {type(scenario).__name__}")


_LAW_ARITY = {"constant": 1, "beta": 2, "scaledbeta": 4, "bernoulli": 1}


def parse_scenario(text: str, marginal: ParetoTail | None = None) -> DependenceScenario:
    """Parse a scenario label back into a scenario object.

    Grammar: ``gumbel:theta=<t>[,layers=<L>]`` or ``polar:<law>=<args>`` with
    law one of constant, beta, scaledbeta, bernoulli and comma-separated
    numeric args.  The Pareto marginal is supplied separately.
    """
    marginal = marginal if marginal is not None else ParetoTail()
    head, sep, rest = text.strip().partition(":")
    if not sep or not rest:
        raise ParameterError(f"malformed scenario {text!r}; expected 'family:params'")
    family = head.strip().lower()
    if family == "gumbel":
        theta = None
        layers = 2
        for part in rest.split(","):
            key, eq, val = part.partition("=")
            if not eq:
                raise ParameterError(f"malformed scenario parameter {part!r}")
            key = key.strip().lower()
            try:
                if key == "theta":
                    theta = float(val)
                elif key == "layers":
                    layers = int(val)
                else:
                    raise ParameterError(f"unknown gumbel parameter {key!r}")
            except ValueError as exc:
                raise ParameterError(f"bad value in scenario {text!r}: {exc}") from exc
        if theta is None:
            raise ParameterError(f"gumbel scenario {text!r} is missing theta")
        return GumbelCopula(theta=theta, marginal=marginal, layers=layers)
    if family == "polar":
        name, eq, args = rest.partition("=")
        name = name.strip().lower()
        if not eq or name not in _LAW_ARITY:
            raise ParameterError(
                f"malformed polar scenario {text!r}; expected one of "
                + ", ".join(sorted(_LAW_ARITY))
            )
        try:
            vals = [float(x) for x in args.split(",")]
        except ValueError as exc:
            raise ParameterError(f"bad value in scenario {text!r}: {exc}") from exc
        if len(vals) != _LAW_ARITY[name]:
            raise ParameterError(
                f"polar law {name!r} takes {_LAW_ARITY[name]} argument(s), got {len(vals)}"
            )
        law: ThetaLaw
        if name == "constant":
            law = Constant(vals[0])
        elif name == "beta":
            law = Beta(vals[0], vals[1])
        elif name == "scaledbeta":
            law = ScaledBeta(vals[0], vals[1], vals[2], vals[3])
        else:
            law = Bernoulli(vals[0])
        return PolarMRV(theta_law=law, marginal=marginal)
    raise ParameterError(f"unknown scenario family {family!r}")
