"""Exponentially weighted aggregation over a finite dictionary.

Given an observation y, atoms theta_1..theta_m, a prior pi0, and a
temperature beta > 0, the posterior weight of atom j is proportional to

    exp(-||y - theta_j||^2 / beta) * pi0(j),

computed in log space with the max-shift trick. The aggregate estimate is
the posterior mean of the atoms. The same posterior is the unique
minimizer of the Gibbs objective

    sum_j w_j ||y - theta_j||^2 + beta * KL(w || pi0)

over probability vectors w, which `dv_minimality_test` probes empirically.
beta = +inf is the degenerate no-data limit: the posterior is the prior.
"""

from dataclasses import dataclass

import math

import numpy as np
from scipy.special import logsumexp

from .model import Dictionary, WeightVector, _as_weight_array, as_signal

DV_TOLERANCE = 1e-9


@dataclass(frozen=True)
class PosteriorWeights:
    weights: WeightVector
    beta: float


@dataclass(frozen=True)
class DvMinimalityReport:
    passed: bool
    worst_violation: float
    trials: int


def _check_beta(beta):
    beta = float(beta)
    if math.isnan(beta) or beta <= 0.0:
        raise ValueError("beta must be positive")
    return beta


def _atom_sq_distances(y, dictionary):
    diff = dictionary.atoms - y
    return np.einsum("ij,ij->i", diff, diff)


def posterior_weights(y, dictionary, prior, beta):
    """Exponential-weight posterior over the dictionary atoms.

    Atoms with zero prior mass keep exactly zero posterior mass. With
    beta = +inf the prior is returned unchanged.
    """
    beta = _check_beta(beta)
    y = as_signal(y, dictionary.n)
    if len(prior) != dictionary.m:
        raise ValueError("prior length must match the number of atoms")
    if not np.any(prior.weights > 0.0):
        raise ValueError("prior must put positive mass on at least one atom")
    if math.isinf(beta):
        return PosteriorWeights(prior, beta)
    log_shift = -_atom_sq_distances(y, dictionary) / beta
    return PosteriorWeights(WeightVector.from_log_weights(prior.log_weights + log_shift), beta)


def aggregate(dictionary, w):
    """Weighted mean of the atoms; accepts PosteriorWeights, WeightVector,
    or a plain probability vector."""
    arr = _as_weight_array(w, dictionary.m)
    return arr @ dictionary.atoms


def posterior_variance(dictionary, w):
    """sum_j w_j ||theta_j||^2 - ||sum_j w_j theta_j||^2, clamped at 0."""
    arr = _as_weight_array(w, dictionary.m)
    atoms = dictionary.atoms
    second = float(arr @ np.einsum("ij,ij->i", atoms, atoms))
    mean = arr @ atoms
    return max(second - float(mean @ mean), 0.0)


def kl_divergence(p, q):
    """KL(p || q) with the 0 log 0 = 0 convention; +inf when p charges an
    atom q does not."""
    p_arr = _as_weight_array(p)
    q_arr = _as_weight_array(q)
    if p_arr.size != q_arr.size:
        raise ValueError("p and q must have the same length")
    mask = p_arr > 0.0
    if np.any(q_arr[mask] == 0.0):
        return float("inf")
    pm = p_arr[mask]
    return float(pm @ (np.log(pm) - np.log(q_arr[mask])))


def gibbs_objective(w, y, dictionary, prior, beta):
    """Expected squared distance under w plus beta times KL(w || prior)."""
    beta = _check_beta(beta)
    arr = _as_weight_array(w, dictionary.m)
    y = as_signal(y, dictionary.n)
    expected = float(arr @ _atom_sq_distances(y, dictionary))
    kl = kl_divergence(arr, prior)
    if kl == 0.0:
        return expected
    if math.isinf(beta) or math.isinf(kl):
        return float("inf")
    return expected + beta * kl


def ewa_estimate(y, dictionary, prior, beta):
    """Posterior weights and the aggregate estimate in one call."""
    w = posterior_weights(y, dictionary, prior, beta)
    return aggregate(dictionary, w), w


def sampled_prior_ewa(y, prior_sampler, beta, s, rng):
    """Aggregation against a sampled prior.

    ``prior_sampler(rng, s)`` must return s candidate signals as an (s, n)
    array. The estimate is the self-normalized exponentially weighted mean
    of the draws; beta = +inf degenerates to the plain sample mean.
    """
    beta = _check_beta(beta)
    s = int(s)
    if s < 1:
        raise ValueError("s must be a positive integer")
    draws = np.asarray(prior_sampler(rng, s), dtype=np.float64)
    if draws.ndim != 2 or draws.shape[0] != s:
        raise ValueError("prior_sampler must return an (s, n) array")
    if not np.all(np.isfinite(draws)):
        raise ValueError("sampled atoms must be finite")
    y = as_signal(y, draws.shape[1])
    if math.isinf(beta):
        return draws.mean(axis=0)
    diff = draws - y
    log_w = -np.einsum("ij,ij->i", diff, diff) / beta
    log_w -= logsumexp(log_w)
    return np.exp(log_w) @ draws


def dv_minimality_test(y, dictionary, prior, beta, trials, rng):
    """Check that no perturbed weight vector beats the posterior on the
    Gibbs objective, up to DV_TOLERANCE.

    Alternates Dirichlet jitter concentrated near the posterior with
    uniform draws from the simplex over the prior's support (mass outside
    the support makes the objective infinite, so nothing is lost).
    """
    trials = int(trials)
    if trials < 1:
        raise ValueError("trials must be a positive integer")
    post = posterior_weights(y, dictionary, prior, beta)
    base = gibbs_objective(post.weights, y, dictionary, prior, beta)
    support = prior.support
    k = int(support.sum())
    w_star = post.weights.weights[support]
    worst = -math.inf
    for t in range(trials):
        if t % 2 == 0:
            cand_sub = rng.dirichlet(1.0 + 50.0 * k * w_star)
        else:
            cand_sub = rng.dirichlet(np.ones(k))
        cand = np.zeros(len(prior))
        cand[support] = cand_sub
        violation = base - gibbs_objective(cand, y, dictionary, prior, beta)
        if violation > worst:
            worst = violation
    return DvMinimalityReport(passed=worst <= DV_TOLERANCE, worst_violation=worst, trials=trials)
