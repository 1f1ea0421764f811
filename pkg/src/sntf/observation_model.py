"""Bernoulli sampling, noisy observation synthesis and negative log-likelihoods.

Randomness comes from numpy's counter-based Philox generator. A user seed
and a purpose label (``"mask"``, ``"noise"``, ``"init"``, ``"instance"``)
together select an independent stream, so for instance drawing a different
mask never changes the noise realised at a given entry.
"""

from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.special import gammaln

from .errors import NumericError, ShapeError
from .tensor_algebra import as_tensor3

#: below this, Gaussian/Laplace synthesis is noiseless
NOISELESS_EPS = 1e-15
#: Poisson rates are clamped to this floor inside the likelihood only
POISSON_FLOOR = 1e-12

_PURPOSES = {"mask": 0, "noise": 1, "init": 2, "instance": 3}


def rng_stream(seed, purpose):
    """Philox generator for ``(seed, purpose)``.

    The stream is a pure function of its two arguments and is stable
    across platforms.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(_PURPOSES[purpose],))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class Gaussian:
    """Additive zero-mean Gaussian noise with standard deviation ``sigma``."""

    sigma: float
    tag = "gaussian"

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    @property
    def param(self):
        return self.sigma


@dataclass(frozen=True)
class Laplace:
    """Additive Laplace(0, tau) noise."""

    tau: float
    tag = "laplace"

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")

    @property
    def param(self):
        return self.tau


@dataclass(frozen=True)
class Poisson:
    """Poisson observations with the true entry as rate."""

    tag = "poisson"

    @property
    def param(self):
        return 0.0


NoiseModel = Union[Gaussian, Laplace, Poisson]


def make_noise(tag, param=None):
    """Build a noise model from its tag (``gaussian``/``laplace``/``poisson``)."""
    tag = tag.lower()
    if tag in ("gaussian", "laplace") and param is None:
        raise ValueError(f"{tag} noise needs a scale parameter")
    if tag == "gaussian":
        return Gaussian(float(param))
    if tag == "laplace":
        return Laplace(float(param))
    if tag == "poisson":
        return Poisson()
    raise ValueError(f"unknown noise model {tag!r}")


@dataclass(frozen=True)
class ObservationSet:
    """Observed entries ``Y_Omega`` of an ``n1 x n2 x n3`` tensor.

    ``indices`` is an ``(m, 3)`` integer array of 0-based ``(i, j, k)``
    triples in strictly increasing lexicographic order; ``values`` holds
    the matching observations.
    """

    shape: tuple
    indices: np.ndarray
    values: np.ndarray
    noise: NoiseModel
    gamma: float = field(default=None)

    def __post_init__(self):
        shape = tuple(int(n) for n in self.shape)
        if len(shape) != 3 or min(shape) < 1:
            raise ShapeError(f"invalid tensor shape {self.shape}")
        idx = np.asarray(self.indices, dtype=np.int64).reshape(-1, 3)
        vals = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if len(idx) != len(vals):
            raise ShapeError(f"{len(idx)} indices but {len(vals)} values")
        if np.any(idx < 0) or np.any(idx >= np.array(shape)):
            raise ShapeError("observation index out of bounds")
        flat = np.ravel_multi_index(idx.T, shape) if len(idx) else idx[:, 0]
        if np.any(np.diff(flat) <= 0):
            raise ValueError("indices must be strictly sorted without duplicates")
        if not np.all(np.isfinite(vals)):
            raise NumericError("observations contain non-finite values")
        if isinstance(self.noise, Poisson):
            if np.any(vals < 0) or np.any(vals != np.round(vals)):
                raise ValueError("Poisson observations must be nonnegative integers")
        gamma = self.gamma
        if gamma is None:
            gamma = len(idx) / float(np.prod(shape))
        idx.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "gamma", float(gamma))

    @property
    def m(self):
        return len(self.values)

    @property
    def flat_indices(self):
        return np.ravel_multi_index(self.indices.T, self.shape)

    @property
    def mask(self):
        """Boolean tensor, ``True`` on Omega."""
        out = np.zeros(self.shape, dtype=bool)
        out.flat[self.flat_indices] = True
        return out

    def dense(self, fill=0.0):
        """Observations scattered into a full tensor; ``fill`` off Omega."""
        out = np.full(self.shape, fill, dtype=np.float64)
        out.flat[self.flat_indices] = self.values
        return out


def sample_mask(shape, gamma, seed):
    """Bernoulli(``gamma``) index set, as a sorted ``(m, 3)`` array.

    Every entry gets one uniform draw from the ``"mask"`` stream and is kept
    when the draw is below ``gamma``, so masks for the same seed are nested
    in ``gamma``.
    """
    if not 0 < gamma <= 1:
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    u = rng_stream(seed, "mask").random(tuple(shape))
    return np.argwhere(u < gamma)


def synthesize(xstar, indices, noise, seed, gamma=None):
    """Draw noisy observations of ``xstar`` at ``indices``.

    Gaussian noise has standard deviation ``sigma`` (variance ``sigma**2``,
    matching the likelihood). Noise is drawn for every entry of the tensor
    and then restricted to the index set.
    """
    xstar = as_tensor3(xstar, "xstar")
    idx = np.asarray(indices, dtype=np.int64).reshape(-1, 3)
    rng = rng_stream(seed, "noise")
    if isinstance(noise, Gaussian):
        full = xstar if noise.sigma < NOISELESS_EPS else xstar + noise.sigma * rng.standard_normal(xstar.shape)
    elif isinstance(noise, Laplace):
        full = xstar if noise.tau < NOISELESS_EPS else xstar + rng.laplace(0.0, noise.tau, xstar.shape)
    elif isinstance(noise, Poisson):
        if np.any(xstar[tuple(idx.T)] < 0):
            raise ValueError("Poisson rates must be nonnegative on the index set")
        full = rng.poisson(np.maximum(xstar, 0.0)).astype(np.float64)
    else:
        raise TypeError(f"unsupported noise model {noise!r}")
    return ObservationSet(xstar.shape, idx, full[tuple(idx.T)], noise, gamma)


def neg_log_likelihood(x, obs):
    """``-log p_{X_Omega}(Y_Omega)`` under ``obs.noise``.

    Poisson rates are floored at ``POISSON_FLOOR`` before taking logs.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != obs.shape:
        raise ShapeError(f"tensor shape {x.shape} does not match observations {obs.shape}")
    xo = x.flat[obs.flat_indices]
    y = obs.values
    noise = obs.noise
    if isinstance(noise, Gaussian):
        terms = (y - xo) ** 2 / (2 * noise.sigma**2) + 0.5 * np.log(2 * np.pi * noise.sigma**2)
    elif isinstance(noise, Laplace):
        terms = np.abs(y - xo) / noise.tau + np.log(2 * noise.tau)
    elif isinstance(noise, Poisson):
        rate = np.maximum(xo, POISSON_FLOOR)
        terms = rate - y * np.log(rate) + gammaln(y + 1)
    else:
        raise TypeError(f"unsupported noise model {noise!r}")
    bad = ~np.isfinite(terms)
    if np.any(bad):
        where = tuple(int(i) for i in obs.indices[np.argmax(bad)])
        raise NumericError(f"non-finite likelihood term at index {where}")
    return float(np.sum(terms))
