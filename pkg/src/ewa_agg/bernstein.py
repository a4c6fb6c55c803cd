"""Bernstein-type moment profiles for the coupling companions.

Each noise family carries a variance proxy v(alpha), a tail scale b(alpha),
and a normalization c in {1, 2} such that the companion zeta built by the
coupling satisfies, conditionally on its record,

    E[exp(t * zeta) | record] <= exp( v(alpha) t^2 / (c (1 - b(alpha) |t|)) )

for |t| < 1/b(alpha) (all t when b = 0). The per-family table:

    family                  v(alpha)                      b(alpha)              c
    centered_bernoulli      alpha (1 + alpha)             (1 + alpha) / 3       2
    gaussian                (2 alpha + alpha^2) sigma^2   0                     2
    bounded_binary_mixture  (A + B)^2 alpha (1 + alpha)   (A + B)(1 + alpha)/3  2
    centered_binomial       a^2 k alpha (1 + alpha)       a (1 + alpha) / 3     2
    laplace                 alpha (2 + alpha) mu^2        (1 + alpha) mu        1

with sigma and mu taken as the largest coordinate scale. Two derived
quantities drive the oracle-inequality harness: the temperature threshold
2 v'(0) + 2 b(0) d0 and, below it, the variance penalty coefficient
2 v'(0) / (beta - 2 b(0) d0) - 1.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .coupling import conditional_zeta_laws, couple_gaussian, couple_laplace, _check_alpha
from .noise import DISCRETE_FAMILIES, DiscreteLaw, Gaussian, Laplace

MGF_RATIO_TOL = 1e-12
MGF_SE_MULTIPLIER = 5.0
DEFAULT_T_POINTS = 64
DOMAIN_COVERAGE = 0.95


@dataclass(frozen=True)
class BernsteinProfile:
    family: str
    v: Callable[[float], float]
    b: Callable[[float], float]
    v_prime_0: float
    b_0: float
    mgf_normalization: float  # the c in the denominator


def profile_for(model):
    """The moment profile of a noise model's coupling companions."""
    if model.family == "centered_bernoulli":
        return BernsteinProfile(
            family=model.family,
            v=lambda alpha: alpha * (1.0 + alpha),
            b=lambda alpha: (1.0 + alpha) / 3.0,
            v_prime_0=1.0,
            b_0=1.0 / 3.0,
            mgf_normalization=2.0,
        )
    if model.family == "gaussian":
        s2 = float(np.max(model.sigma) ** 2)
        return BernsteinProfile(
            family=model.family,
            v=lambda alpha: (2.0 * alpha + alpha * alpha) * s2,
            b=lambda alpha: 0.0,
            v_prime_0=2.0 * s2,
            b_0=0.0,
            mgf_normalization=2.0,
        )
    if model.family == "bounded_binary_mixture":
        span = model.a_max + model.b_max
        return BernsteinProfile(
            family=model.family,
            v=lambda alpha: span * span * alpha * (1.0 + alpha),
            b=lambda alpha: span * (1.0 + alpha) / 3.0,
            v_prime_0=span * span,
            b_0=span / 3.0,
            mgf_normalization=2.0,
        )
    if model.family == "centered_binomial":
        a, k = model.a, model.k
        return BernsteinProfile(
            family=model.family,
            v=lambda alpha: a * a * k * alpha * (1.0 + alpha),
            b=lambda alpha: a * (1.0 + alpha) / 3.0,
            v_prime_0=a * a * k,
            b_0=a / 3.0,
            mgf_normalization=2.0,
        )
    if model.family == "laplace":
        mu = float(np.max(model.mu))
        return BernsteinProfile(
            family=model.family,
            v=lambda alpha: alpha * (2.0 + alpha) * mu * mu,
            b=lambda alpha: (1.0 + alpha) * mu,
            v_prime_0=2.0 * mu * mu,
            b_0=mu,
            mgf_normalization=1.0,
        )
    raise ValueError(f"no moment profile for noise family {model.family!r}")


def beta_threshold(profile, d0):
    """Smallest temperature at which the clean oracle inequality is
    certified: 2 v'(0) + 2 b(0) d0."""
    d0 = float(d0)
    if d0 < 0.0 or not math.isfinite(d0):
        raise ValueError("d0 must be a finite nonnegative diameter")
    return 2.0 * profile.v_prime_0 + 2.0 * profile.b_0 * d0


def variance_penalty_coefficient(beta, profile, d0):
    """2 v'(0) / (beta - 2 b(0) d0) - 1; zero exactly at the threshold.

    Requires beta > 2 b(0) d0, strictly.
    """
    d0 = float(d0)
    if d0 < 0.0 or not math.isfinite(d0):
        raise ValueError("d0 must be a finite nonnegative diameter")
    beta = float(beta)
    if not beta > 2.0 * profile.b_0 * d0:
        raise ValueError("beta must exceed 2 * b(0) * d0 for the penalty form")
    return 2.0 * profile.v_prime_0 / (beta - 2.0 * profile.b_0 * d0) - 1.0


def default_t_grid(v, b, points=DEFAULT_T_POINTS, coverage=DOMAIN_COVERAGE):
    """Symmetric t-grid inside the profile's admissible domain.

    With b > 0 the domain is (-1/b, 1/b) and the grid covers the stated
    fraction of it; with b = 0 the domain is the whole line and the grid
    spans |t| <= 2 / sqrt(v), where the bound is exp(2) at the edge.
    """
    v = float(v)
    b = float(b)
    if points < 2:
        raise ValueError("points must be at least 2")
    if not 0.0 < coverage < 1.0:
        raise ValueError("coverage must lie in (0, 1)")
    if b > 0.0:
        t_max = coverage / b
    else:
        if v <= 0.0:
            raise ValueError("v must be positive when b = 0")
        t_max = 2.0 / math.sqrt(v)
    return np.linspace(-t_max, t_max, points)


def mgf_bound(t, v, b, c):
    """exp(v t^2 / (c (1 - b |t|))) on the admissible domain."""
    t = np.asarray(t, dtype=np.float64)
    if np.any(b * np.abs(t) >= 1.0):
        raise ValueError("t must satisfy b * |t| < 1")
    return np.exp(v * t * t / (c * (1.0 - b * np.abs(t))))


@dataclass(frozen=True)
class MgfCheckReport:
    family: str
    alpha: float
    method: str
    max_ratio: float
    worst_t: float
    passed: bool
    points: int

    def to_json(self):
        return {
            "family": self.family,
            "alpha": self.alpha,
            "method": self.method,
            "max_ratio": self.max_ratio,
            "worst_t": self.worst_t,
            "verdict": "pass" if self.passed else "fail",
            "points": self.points,
        }


def mgf_bound_check(law, v, b, c, t_grid, family="", alpha=float("nan")):
    """Compare E[exp(t zeta)] against the profile bound over a t-grid.

    ``law`` may be a DiscreteLaw (exact moments), a 1-D sample array
    (empirical mean, credited a 5-standard-error margin), or a callable
    returning the exact MGF at t.
    """
    t_grid = np.asarray(t_grid, dtype=np.float64)
    bound = mgf_bound(t_grid, v, b, c)  # also validates the domain
    if isinstance(law, DiscreteLaw):
        mgf = law.mgf(t_grid)
        margin = np.zeros_like(bound)
        method = "exact"
    elif callable(law):
        mgf = np.asarray([float(law(t)) for t in t_grid])
        margin = np.zeros_like(bound)
        method = "exact"
    else:
        samples = np.asarray(law, dtype=np.float64)
        if samples.ndim != 1 or samples.size < 2:
            raise ValueError("sampled laws need a 1-D array with at least 2 draws")
        mgf = np.empty_like(bound)
        margin = np.empty_like(bound)
        root_n = math.sqrt(samples.size)
        for idx, t in enumerate(t_grid):
            values = np.exp(t * samples)
            mgf[idx] = values.mean()
            margin[idx] = MGF_SE_MULTIPLIER * values.std(ddof=1) / root_n
        method = "sampled"
    ratio = (mgf - margin) / bound
    worst = int(np.argmax(ratio))
    max_ratio = float(ratio[worst])
    return MgfCheckReport(
        family=family,
        alpha=alpha,
        method=method,
        max_ratio=max_ratio,
        worst_t=float(t_grid[worst]),
        passed=max_ratio <= 1.0 + MGF_RATIO_TOL,
        points=int(t_grid.size),
    )


def check_noise_mgf(
    model,
    alpha,
    points=DEFAULT_T_POINTS,
    coverage=DOMAIN_COVERAGE,
    sample_size=1_000_000,
    rng=None,
):
    """Run the profile bound over every conditional companion law of a
    noise model: exactly for the discrete families, from samples for the
    continuous ones. Returns the worst-case report."""
    alpha = _check_alpha(alpha)
    profile = profile_for(model)
    v = profile.v(alpha)
    b = profile.b(alpha)
    c = profile.mgf_normalization
    t_grid = default_t_grid(v, b, points=points, coverage=coverage)
    worst = None
    if isinstance(model, DISCRETE_FAMILIES):
        for law in conditional_zeta_laws(model, alpha):
            report = mgf_bound_check(law, v, b, c, t_grid, family=model.family, alpha=alpha)
            if worst is None or report.max_ratio > worst.max_ratio:
                worst = report
    else:
        if rng is None:
            rng = np.random.default_rng()
        n = int(sample_size)
        if n < 2:
            raise ValueError("sample_size must be at least 2")
        for i in range(model.dim):
            if isinstance(model, Gaussian):
                zeta = couple_gaussian(np.full(n, float(model.sigma[i])), alpha, rng)
            elif isinstance(model, Laplace):
                zeta = couple_laplace(np.full(n, float(model.mu[i])), alpha, rng)
            else:
                raise ValueError(f"unsupported noise model: {type(model).__name__}")
            report = mgf_bound_check(zeta, v, b, c, t_grid, family=model.family, alpha=alpha)
            if worst is None or report.max_ratio > worst.max_ratio:
                worst = report
    return worst


def laplace_coupling_mgf(mu, alpha):
    """Exact MGF of the Laplace companion: a point mass at zero mixed with
    a Laplace((1+alpha) mu), i.e.
    1/(1+alpha)^2 + (1 - 1/(1+alpha)^2) / (1 - (1+alpha)^2 mu^2 t^2)."""
    alpha = _check_alpha(alpha)
    mu = float(mu)
    stay = 1.0 / (1.0 + alpha) ** 2
    scale = (1.0 + alpha) * mu

    def mgf(t):
        t = float(t)
        if abs(t) * scale >= 1.0:
            raise ValueError("t outside the admissible domain")
        return stay + (1.0 - stay) / (1.0 - scale * scale * t * t)

    return mgf
