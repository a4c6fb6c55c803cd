"""Centered noise families with independent coordinates.

Five families are supported, each with per-coordinate parameters:

* ``centered_bernoulli``: coordinate i takes 1 - rho_i with probability
  rho_i and -rho_i otherwise.
* ``gaussian``: coordinate i is N(0, sigma_i^2).
* ``bounded_binary_mixture``: coordinate i first draws a pair (a, b) from a
  finite mixing law on [0, a_max] x [0, b_max], then takes a with
  probability b/(a+b) and -b with probability a/(a+b).
* ``centered_binomial``: coordinate i is a * (eta_1 + ... + eta_k) with
  i.i.d. centered Bernoulli(rho_i) terms, i.e. a * (Binomial(k, rho_i) -
  k*rho_i).
* ``laplace``: coordinate i is Laplace with scale mu_i (density
  exp(-|x|/mu_i) / (2 mu_i)).

Every coordinate has mean zero exactly. Discrete families expose their
exact finite law; continuous ones return the ``CONTINUOUS`` marker.
Sampling consumes only the caller's generator, so draws are reproducible
from a seed.
"""

import math

import numpy as np

CONTINUOUS = "continuous"

LAW_ATOL = 1e-12
MERGE_ATOL = 1e-9


class DiscreteLaw:
    """A finite law on the reals, stored as sorted distinct atoms."""

    def __init__(self, values, probs):
        values = np.asarray(values, dtype=np.float64)
        probs = np.asarray(probs, dtype=np.float64)
        if values.ndim != 1 or values.shape != probs.shape or values.size == 0:
            raise ValueError("a discrete law needs matching non-empty value and probability arrays")
        if not (np.all(np.isfinite(values)) and np.all(np.isfinite(probs))):
            raise ValueError("law atoms must be finite")
        if np.any(probs < 0.0):
            raise ValueError("atom probabilities must be nonnegative")
        keep = probs > 0.0
        values, probs = values[keep], probs[keep]
        if values.size == 0:
            raise ValueError("a discrete law needs at least one atom of positive mass")
        order = np.argsort(values)
        values, probs = values[order], probs[order]
        if np.any(np.diff(values) <= 0.0):
            raise ValueError("atom values must be distinct")
        if abs(float(probs.sum()) - 1.0) > LAW_ATOL:
            raise ValueError("atom probabilities must sum to 1")
        self.values = values
        self.probs = probs
        self.values.setflags(write=False)
        self.probs.setflags(write=False)

    @classmethod
    def from_atoms(cls, values, probs, merge_atol=MERGE_ATOL):
        """Build a law from possibly repeated atoms, merging values closer
        than ``merge_atol`` (mass-weighted mean) and dropping zero mass."""
        values = np.asarray(values, dtype=np.float64).ravel()
        probs = np.asarray(probs, dtype=np.float64).ravel()
        keep = probs > 0.0
        values, probs = values[keep], probs[keep]
        order = np.argsort(values)
        values, probs = values[order], probs[order]
        # new cluster wherever the gap to the previous atom exceeds the tolerance
        cluster = np.zeros(values.size, dtype=np.int64)
        if values.size > 1:
            cluster[1:] = np.cumsum(np.diff(values) > merge_atol)
        k = int(cluster[-1]) + 1 if values.size else 0
        mass = np.bincount(cluster, weights=probs, minlength=k)
        merged = np.bincount(cluster, weights=probs * values, minlength=k) / mass
        return cls(merged, mass)

    def __len__(self):
        return int(self.values.size)

    def atoms(self):
        return list(zip(self.values.tolist(), self.probs.tolist()))

    def mean(self):
        return float(self.probs @ self.values)

    def variance(self):
        mu = self.probs @ self.values
        return float(self.probs @ (self.values - mu) ** 2)

    def moment(self, order):
        return float(self.probs @ self.values**order)

    def mgf(self, t):
        """E[exp(t X)] for scalar or array t."""
        t = np.asarray(t, dtype=np.float64)
        out = np.exp(np.multiply.outer(t, self.values)) @ self.probs
        return float(out) if out.ndim == 0 else out

    def scale(self, c):
        """Law of c * X."""
        c = float(c)
        if c == 0.0:
            return DiscreteLaw([0.0], [1.0])
        return DiscreteLaw.from_atoms(c * self.values, self.probs, merge_atol=0.0)

    def convolve(self, other, merge_atol=MERGE_ATOL):
        """Law of X + Y for independent X ~ self, Y ~ other."""
        v = np.add.outer(self.values, other.values).ravel()
        p = np.multiply.outer(self.probs, other.probs).ravel()
        return DiscreteLaw.from_atoms(v, p, merge_atol=merge_atol)


def max_atom_probability_error(law_a, law_b, value_atol=MERGE_ATOL):
    """Largest mass discrepancy between two discrete laws after aligning
    atoms whose values agree within ``value_atol``."""
    values = np.concatenate([law_a.values, law_b.values])
    mass_a = np.concatenate([law_a.probs, np.zeros(len(law_b))])
    mass_b = np.concatenate([np.zeros(len(law_a)), law_b.probs])
    order = np.argsort(values)
    values, mass_a, mass_b = values[order], mass_a[order], mass_b[order]
    cluster = np.zeros(values.size, dtype=np.int64)
    if values.size > 1:
        cluster[1:] = np.cumsum(np.diff(values) > value_atol)
    k = int(cluster[-1]) + 1
    pa = np.bincount(cluster, weights=mass_a, minlength=k)
    pb = np.bincount(cluster, weights=mass_b, minlength=k)
    return float(np.max(np.abs(pa - pb)))


def laplace_inverse_cdf(u, scale):
    """Quantile transform of the centered Laplace law with the given scale."""
    u = np.asarray(u, dtype=np.float64)
    scale = np.asarray(scale, dtype=np.float64)
    lo = np.maximum(2.0 * u, 1e-300)  # u = 0.0 has probability 0 but would log to -inf
    hi = np.maximum(2.0 * (1.0 - u), 1e-300)
    return np.where(u < 0.5, scale * np.log(lo), -scale * np.log(hi))


def _coordinate_array(values, name, low=None, high=None, open_low=True, open_high=True):
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D array")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    if low is not None and np.any(arr < low if not open_low else arr <= low):
        raise ValueError(f"{name} must be {'>' if open_low else '>='} {low}")
    if high is not None and np.any(arr > high if not open_high else arr >= high):
        raise ValueError(f"{name} must be {'<' if open_high else '<='} {high}")
    arr.setflags(write=False)
    return arr


class NoiseModel:
    """Base class: a family name, a dimension, sampling, and exact laws."""

    family = ""

    @property
    def dim(self):
        raise NotImplementedError

    def sample(self, rng):
        raise NotImplementedError

    def sample_with_latents(self, rng):
        """Draw one noise vector together with the conditioning record the
        coupling constructions need. Default: the vector itself."""
        xi = self.sample(rng)
        return xi, {"xi": xi}

    def exact_law(self, i):
        raise NotImplementedError

    def params_json(self):
        raise NotImplementedError


class CenteredBernoulli(NoiseModel):
    """Coordinate i equals 1 - rho_i w.p. rho_i, else -rho_i."""

    family = "centered_bernoulli"

    def __init__(self, rho):
        self.rho = _coordinate_array(rho, "rho", low=0.0, high=1.0)

    @classmethod
    def homogeneous(cls, n, rho):
        return cls(np.full(n, float(rho)))

    @property
    def dim(self):
        return int(self.rho.size)

    def sample(self, rng):
        u = rng.random(self.dim)
        return np.where(u < self.rho, 1.0 - self.rho, -self.rho)

    def exact_law(self, i):
        rho = float(self.rho[i])
        return DiscreteLaw([1.0 - rho, -rho], [rho, 1.0 - rho])

    def params_json(self):
        return {"rho": self.rho.tolist()}


class Gaussian(NoiseModel):
    """Coordinate i is N(0, sigma_i^2)."""

    family = "gaussian"

    def __init__(self, sigma):
        self.sigma = _coordinate_array(sigma, "sigma", low=0.0)

    @classmethod
    def homogeneous(cls, n, sigma):
        return cls(np.full(n, float(sigma)))

    @property
    def dim(self):
        return int(self.sigma.size)

    def sample(self, rng):
        return rng.normal(0.0, self.sigma)

    def exact_law(self, i):
        return CONTINUOUS

    def params_json(self):
        return {"sigma": self.sigma.tolist()}


class BoundedBinaryMixture(NoiseModel):
    """Mixture of binary laws: coordinate i draws (a, b) from a finite
    mixing law, then takes a w.p. b/(a+b) and -b w.p. a/(a+b).

    ``mixing`` is a per-coordinate list of ((a, b), prob) entries with
    0 <= a <= a_max, 0 <= b <= b_max, a + b > 0.
    """

    family = "bounded_binary_mixture"

    def __init__(self, a_max, b_max, mixing):
        self.a_max = float(a_max)
        self.b_max = float(b_max)
        if not (math.isfinite(self.a_max) and math.isfinite(self.b_max)):
            raise ValueError("a_max and b_max must be finite")
        if self.a_max < 0.0 or self.b_max < 0.0 or self.a_max + self.b_max <= 0.0:
            raise ValueError("a_max and b_max must be nonnegative with a_max + b_max > 0")
        if len(mixing) == 0:
            raise ValueError("mixing must list at least one coordinate")
        width = max(len(entry) for entry in mixing)
        n = len(mixing)
        self._a = np.zeros((n, width))
        self._b = np.zeros((n, width))
        self._p = np.zeros((n, width))
        for i, entries in enumerate(mixing):
            if len(entries) == 0:
                raise ValueError("each coordinate needs at least one mixing atom")
            for j, ((a, b), p) in enumerate(entries):
                a, b, p = float(a), float(b), float(p)
                if not (0.0 <= a <= self.a_max and 0.0 <= b <= self.b_max):
                    raise ValueError("mixing atoms must satisfy 0 <= a <= a_max and 0 <= b <= b_max")
                if a + b <= 0.0:
                    raise ValueError("mixing atoms must satisfy a + b > 0")
                if p < 0.0:
                    raise ValueError("mixing probabilities must be nonnegative")
                self._a[i, j], self._b[i, j], self._p[i, j] = a, b, p
            if abs(self._p[i].sum() - 1.0) > LAW_ATOL:
                raise ValueError("mixing probabilities must sum to 1")
        # padding columns keep zero mass; give them a valid (a, b) so vectorized
        # arithmetic below never divides by zero
        pad = self._p == 0.0
        self._a[pad & (self._a + self._b == 0.0)] = 1.0
        self._cum = np.cumsum(self._p, axis=1)
        self.mixing = [
            [((float(a), float(b)), float(p)) for (a, b), p in entries] for entries in mixing
        ]
        for arr in (self._a, self._b, self._p, self._cum):
            arr.setflags(write=False)

    @classmethod
    def homogeneous(cls, n, a_max, b_max, mixing):
        return cls(a_max, b_max, [list(mixing) for _ in range(n)])

    @property
    def dim(self):
        return int(self._a.shape[0])

    def _draw_pairs(self, rng):
        u = rng.random(self.dim)
        idx = np.sum(self._cum < u[:, None], axis=1)
        idx = np.minimum(idx, self._a.shape[1] - 1)
        rows = np.arange(self.dim)
        return self._a[rows, idx], self._b[rows, idx]

    def sample(self, rng):
        xi, _ = self.sample_with_latents(rng)
        return xi

    def sample_with_latents(self, rng):
        a, b = self._draw_pairs(rng)
        u = rng.random(self.dim)
        xi = np.where(u < b / (a + b), a, -b)
        return xi, {"a": a, "b": b, "eta": xi}

    def exact_law(self, i):
        values, probs = [], []
        for (a, b), p in self.mixing[i]:
            values.extend([a, -b])
            probs.extend([p * b / (a + b), p * a / (a + b)])
        return DiscreteLaw.from_atoms(values, probs)

    def params_json(self):
        return {
            "a_max": self.a_max,
            "b_max": self.b_max,
            "mixing": [[[[a, b], p] for (a, b), p in entries] for entries in self.mixing],
        }


class CenteredBinomial(NoiseModel):
    """Coordinate i is a * (Binomial(k, rho_i) - k * rho_i), realized as a
    sum of k centered Bernoulli terms scaled by a."""

    family = "centered_binomial"

    def __init__(self, a, k, rho):
        self.a = float(a)
        if not (math.isfinite(self.a) and self.a > 0.0):
            raise ValueError("a must be positive")
        self.k = int(k)
        if self.k < 1 or self.k != k:
            raise ValueError("k must be a positive integer")
        self.rho = _coordinate_array(rho, "rho", low=0.0, high=1.0)

    @classmethod
    def homogeneous(cls, n, a, k, rho):
        return cls(a, k, np.full(n, float(rho)))

    @property
    def dim(self):
        return int(self.rho.size)

    def sample(self, rng):
        xi, _ = self.sample_with_latents(rng)
        return xi

    def sample_with_latents(self, rng):
        u = rng.random((self.k, self.dim))
        eta = np.where(u < self.rho, 1.0 - self.rho, -self.rho)
        return self.a * eta.sum(axis=0), {"eta": eta}

    def exact_law(self, i):
        rho = float(self.rho[i])
        j = np.arange(self.k + 1)
        values = self.a * (j - self.k * rho)
        probs = np.array(
            [math.comb(self.k, jj) * rho**jj * (1.0 - rho) ** (self.k - jj) for jj in j]
        )
        return DiscreteLaw(values, probs / probs.sum())

    def params_json(self):
        return {"a": self.a, "k": self.k, "rho": self.rho.tolist()}


class Laplace(NoiseModel):
    """Coordinate i is centered Laplace with scale mu_i."""

    family = "laplace"

    def __init__(self, mu):
        self.mu = _coordinate_array(mu, "mu", low=0.0)

    @classmethod
    def homogeneous(cls, n, mu):
        return cls(np.full(n, float(mu)))

    @property
    def dim(self):
        return int(self.mu.size)

    def sample(self, rng):
        return laplace_inverse_cdf(rng.random(self.dim), self.mu)

    def exact_law(self, i):
        return CONTINUOUS

    def params_json(self):
        return {"mu": self.mu.tolist()}


DISCRETE_FAMILIES = (CenteredBernoulli, BoundedBinaryMixture, CenteredBinomial)
CONTINUOUS_FAMILIES = (Gaussian, Laplace)

_FAMILY_TAGS = {
    "centered_bernoulli": CenteredBernoulli,
    "gaussian": Gaussian,
    "bounded_binary_mixture": BoundedBinaryMixture,
    "centered_binomial": CenteredBinomial,
    "laplace": Laplace,
}


def sample_noise(model, rng):
    """One noise vector from the model, using only the given generator."""
    return model.sample(rng)


def exact_law(model, i):
    """Exact law of coordinate i, or the CONTINUOUS marker."""
    return model.exact_law(i)


def law_mean_and_variance(law):
    return law.mean(), law.variance()


def noise_to_json(model):
    return {"family": model.family, "params": model.params_json()}


def _require(params, key, family):
    if key not in params:
        raise ValueError(f"missing key: noise.params.{key} (family {family})")
    return params[key]


def noise_from_json(doc):
    if not isinstance(doc, dict) or "family" not in doc or "params" not in doc:
        raise ValueError('noise must be an object with keys "family" and "params"')
    family = doc["family"]
    if family not in _FAMILY_TAGS:
        known = ", ".join(sorted(_FAMILY_TAGS))
        raise ValueError(f"noise.family must be one of: {known}")
    params = doc["params"]
    if not isinstance(params, dict):
        raise ValueError("noise.params must be an object")
    try:
        if family == "centered_bernoulli":
            return CenteredBernoulli(_require(params, "rho", family))
        if family == "gaussian":
            return Gaussian(_require(params, "sigma", family))
        if family == "bounded_binary_mixture":
            mixing_doc = _require(params, "mixing", family)
            mixing = [[((a, b), p) for (a, b), p in entries] for entries in mixing_doc]
            return BoundedBinaryMixture(
                _require(params, "a_max", family), _require(params, "b_max", family), mixing
            )
        if family == "centered_binomial":
            return CenteredBinomial(
                _require(params, "a", family),
                _require(params, "k", family),
                _require(params, "rho", family),
            )
        return Laplace(_require(params, "mu", family))
    except (TypeError, IndexError) as exc:
        raise ValueError(f"noise.params is malformed for family {family}: {exc}") from None
