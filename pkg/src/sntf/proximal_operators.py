"""Proximal maps and box projections used by the ADMM iterations.

The data-fit proxes evaluate ``Prox_{-(1/(2 rho)) log p}(s)`` for the three
noise models: they act on the observed entries and pass ``s`` through
unchanged everywhere else.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NoiseModelError, ShapeError
from .observation_model import Gaussian, Laplace, Poisson


@dataclass(frozen=True)
class BoxBounds:
    lo: float
    hi: float

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)) or self.lo > self.hi:
            raise ValueError(f"invalid box [{self.lo}, {self.hi}]")


def _split(s, obs, kind):
    if not isinstance(obs.noise, kind):
        raise NoiseModelError(f"expected {kind.__name__} observations, got {obs.noise!r}")
    s = np.asarray(s, dtype=np.float64)
    if s.shape != obs.shape:
        raise ShapeError(f"tensor shape {s.shape} does not match observations {obs.shape}")
    flat = obs.flat_indices
    return s.copy(), flat, s.flat[flat], obs.values


def prox_gaussian(s, obs, rho):
    """``(y + 2 rho sigma^2 s) / (1 + 2 rho sigma^2)`` on Omega."""
    out, flat, so, y = _split(s, obs, Gaussian)
    w = 2 * rho * obs.noise.sigma**2
    out.flat[flat] = (y + w * so) / (1 + w)
    return out


def prox_laplace(s, obs, rho):
    """Soft-threshold ``s - y`` at ``1 / (2 rho tau)`` and shift back by ``y`` on Omega."""
    out, flat, so, y = _split(s, obs, Laplace)
    d = so - y
    out.flat[flat] = y + np.sign(d) * np.maximum(np.abs(d) - 1 / (2 * rho * obs.noise.tau), 0.0)
    return out


def prox_poisson(s, obs, rho):
    """Positive root of ``2 rho x^2 + (1 - 2 rho s) x - y = 0`` on Omega.

    When ``2 rho s - 1`` is negative the textbook formula cancels, so the
    root is taken from Vieta's relation ``x+ x- = -y / (2 rho)`` instead.
    """
    out, flat, so, y = _split(s, obs, Poisson)
    a = 2 * rho * so - 1
    disc = a * a + 8 * rho * y
    assert np.all(disc >= 0), "negative discriminant in Poisson prox"
    d = np.sqrt(disc)
    with np.errstate(divide="ignore", invalid="ignore"):
        small = np.where(d - a > 0, 2 * y / (d - a), 0.0)
    out.flat[flat] = np.where(a >= 0, (a + d) / (4 * rho), small)
    return out


_DATA_PROX = {Gaussian: prox_gaussian, Laplace: prox_laplace, Poisson: prox_poisson}


def prox_data(s, obs, rho):
    """Dispatch to the data-fit prox matching ``obs.noise``."""
    return _DATA_PROX[type(obs.noise)](s, obs, rho)


def prox_l0(y, t):
    """Hard threshold at ``sqrt(2 t)``; ties go to zero."""
    if not t > 0:
        raise ValueError(f"threshold weight must be positive, got {t}")
    y = np.asarray(y, dtype=np.float64)
    return np.where(np.abs(y) > np.sqrt(2 * t), y, 0.0)


def project_box(x, bounds):
    return np.clip(np.asarray(x, dtype=np.float64), bounds.lo, bounds.hi)
