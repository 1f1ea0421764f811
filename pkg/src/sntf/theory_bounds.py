"""Closed-form error-bound quantities for sparse nonnegative t-product completion.

Everything here is plain arithmetic on problem sizes and noise parameters:
the discretization exponent ``beta`` and level count ``vartheta``, the KL
cap ``kappa``, the regularization weight ``lam``, the per-entry upper
bounds on the mean squared error for each noise model, the minimax lower
bounds, and the scalar KL divergences / Hellinger quantities those bounds
are built from.

The lower bounds carry unspecified constants ``C`` and ``beta_c``; they are
inputs here (default 1), so the lower-bound values are order-of-magnitude
statements only.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .observation_model import Gaussian, Laplace, Poisson

#: largest exponent accepted when building vartheta = 2**exponent
MAX_LEVEL_EXPONENT = 4096


@dataclass(frozen=True)
class BoundInputs:
    """Problem description fed to the bound evaluators.

    ``b0_norm`` is the nonzero count of the sparse factor (upper bounds);
    ``s`` is the sparsity budget (lower bounds); ``zeta`` is the smallest
    Poisson rate and is required exactly when ``noise`` is Poisson.
    """

    n1: int
    n2: int
    n3: int
    r: int
    m: int
    b: float
    c: float
    noise: object
    b0_norm: Optional[int] = None
    s: Optional[int] = None
    zeta: Optional[float] = None
    beta_override: Optional[float] = None

    def __post_init__(self):
        if not 4 <= self.m <= self.n1 * self.n2 * self.n3:
            raise ValueError(f"need 4 <= m <= n1*n2*n3, got m={self.m}")
        if not 1 <= self.r <= min(self.n1, self.n2):
            raise ValueError(f"need 1 <= r <= min(n1, n2), got r={self.r}")
        if not (self.b > 0 and self.c > 0):
            raise ValueError("b and c must be positive")
        is_poisson = isinstance(self.noise, Poisson)
        if is_poisson and not (self.zeta is not None and self.zeta > 0):
            raise ValueError("Poisson bounds need a positive zeta")
        if not is_poisson and self.zeta is not None:
            raise ValueError("zeta only applies to Poisson observations")

    @property
    def nmax(self):
        return max(self.n1, self.n2)


def beta_param(inputs):
    """``max(3, 1 + log(3 r n3^1.5 b / c) / log(n1 v n2))`` unless overridden."""
    if inputs.beta_override is not None:
        return float(inputs.beta_override)
    ratio = 3 * inputs.r * inputs.n3**1.5 * inputs.b / inputs.c
    return max(3.0, 1 + math.log(ratio) / math.log(inputs.nmax))


def discretization_levels(inputs):
    """Number of quantization bins, ``2 ** ceil(beta * log2(n1 v n2))``, as an int."""
    beta = beta_param(inputs)
    if beta < 3:
        raise ValueError(f"beta must be >= 3, got {beta}")
    exponent = math.ceil(beta * math.log2(inputs.nmax))
    if exponent > MAX_LEVEL_EXPONENT:
        raise OverflowError(f"2**{exponent} levels is beyond the supported range")
    return 2**exponent


def kappa_param(inputs, poisson_variant="proposition"):
    """Per-entry KL cap.

    For Poisson, ``poisson_variant="proposition"`` gives ``c / zeta`` and
    ``"appendix"`` gives ``c**2 / zeta`` (the value the Poisson upper-bound
    constants are actually consistent with).
    """
    noise, c = inputs.noise, inputs.c
    if isinstance(noise, Gaussian):
        return c**2 / (2 * noise.sigma**2)
    if isinstance(noise, Laplace):
        return c**2 / (2 * noise.tau**2)
    if isinstance(noise, Poisson):
        if poisson_variant == "proposition":
            return c / inputs.zeta
        if poisson_variant == "appendix":
            return c**2 / inputs.zeta
        raise ValueError(f"unknown Poisson kappa variant {poisson_variant!r}")
    raise TypeError(f"unsupported noise model {noise!r}")


def lambda_param(inputs, kappa=None, beta=None, theorem_log=False):
    """``4 (beta + 2) (1 + 2 kappa / 3) log(n1 v n2)``.

    ``theorem_log=True`` swaps the logarithm for ``log((n1 v n2) sqrt(n3))``,
    the weaker condition under which the general upper bound holds.
    """
    kappa = kappa_param(inputs) if kappa is None else kappa
    beta = beta_param(inputs) if beta is None else beta
    log_term = math.log(inputs.nmax * math.sqrt(inputs.n3)) if theorem_log else math.log(inputs.nmax)
    return 4 * (beta + 2) * (1 + 2 * kappa / 3) * log_term


def upper_bound(inputs):
    """Bound on ``E ||X_hat - X*||_F^2 / (n1 n2 n3)`` for the inputs' noise model."""
    if inputs.b0_norm is None:
        raise ValueError("upper bounds need b0_norm")
    c, m = inputs.c, inputs.m
    beta = beta_param(inputs)
    logn, logm = math.log(inputs.nmax), math.log(m)
    dof = (inputs.r * inputs.n1 * inputs.n3 + inputs.b0_norm) / m
    noise = inputs.noise
    if isinstance(noise, Gaussian):
        s2 = noise.sigma**2
        return 22 * c**2 * logm / m + 16 * (3 * s2 + 2 * c**2) * (beta + 2) * dof * logn
    if isinstance(noise, Laplace):
        tau = noise.tau
        w = (2 * tau + c) ** 2
        return (3 * c**2 * w * logm / (m * tau**2)
                + 2 * (3 + c**2 / tau**2) * w * (beta + 2) * dof * logn)
    if isinstance(noise, Poisson):
        z = inputs.zeta
        return (4 * c**3 * (3 + 8 * logm) / (z * m)
                + 48 * c * (1 + 4 * c**2 / (3 * z)) * (beta + 2) * dof * logn)
    raise TypeError(f"unsupported noise model {noise!r}")


def minimax_lower_bound(inputs, beta_c=1.0, C=1.0):
    """Minimax risk floor ``C min(Delta b^2, beta_c^2 nu^2 (s + r n1 n3) / m)``.

    Poisson uses the shifted form with ``s - n2 n3`` and ``nu^2 = zeta``.
    """
    s = inputs.s
    if s is None:
        raise ValueError("lower bounds need the sparsity budget s")
    n1, n2, n3, r, m, b = inputs.n1, inputs.n2, inputs.n3, inputs.r, inputs.m, inputs.b
    face = n2 * n3
    noise = inputs.noise
    if isinstance(noise, Poisson):
        if not face < s <= r * face:
            raise ValueError(f"Poisson lower bound needs n2*n3 < s <= r*n2*n3, got s={s}")
        if inputs.zeta > b:
            raise ValueError("Poisson lower bound needs zeta <= b")
        varsigma = inputs.zeta / b
        delta = min((1 - varsigma) ** 2, min(1.0, (s - face) / face))
        return C * min(delta * b**2, beta_c**2 * inputs.zeta * (s - face + r * n1 * n3) / m)
    if not r <= s <= r * face:
        raise ValueError(f"lower bound needs r <= s <= r*n2*n3, got s={s}")
    if isinstance(noise, Gaussian):
        nu = noise.sigma
    elif isinstance(noise, Laplace):
        nu = noise.tau
    else:
        raise TypeError(f"unsupported noise model {noise!r}")
    delta = min(1.0, s / face)
    return C * min(delta * b**2, beta_c**2 * nu**2 * (s + r * n1 * n3) / m)


class Divergence(NamedTuple):
    kl: float
    neg2logH: float


def divergences(noise, x1, x2):
    """KL divergence and ``-2 log`` Hellinger affinity between two scalar
    observation laws of the same family, with parameters (means/rates)
    ``x1`` and ``x2``.

    The Laplace KL includes the ``-1`` term, so that it vanishes at
    ``x1 == x2``.
    """
    if isinstance(noise, Gaussian):
        d2 = (x1 - x2) ** 2
        return Divergence(d2 / (2 * noise.sigma**2), d2 / (4 * noise.sigma**2))
    if isinstance(noise, Laplace):
        u = abs(x1 - x2) / noise.tau
        # u - (1 - e^-u), written to keep precision for small u
        return Divergence(u + math.expm1(-u), u - 2 * math.log1p(u / 2))
    if isinstance(noise, Poisson):
        if not (x1 > 0 and x2 > 0):
            raise ValueError(f"Poisson rates must be positive, got {x1}, {x2}")
        kl = x1 * math.log(x1 / x2) - x1 + x2
        return Divergence(max(kl, 0.0), (math.sqrt(x1) - math.sqrt(x2)) ** 2)
    raise TypeError(f"unsupported noise model {noise!r}")


def poisson_kl_bound(x1, x2):
    """The quadratic KL upper bound ``(x1 - x2)**2 / x2`` for Poisson laws."""
    if not (x1 > 0 and x2 > 0):
        raise ValueError(f"Poisson rates must be positive, got {x1}, {x2}")
    return (x1 - x2) ** 2 / x2


def bound_table(inputs, beta_c=1.0, C=1.0):
    """Labelled values for the ``bound`` CLI command; lower bound only when ``s`` is set."""
    beta = beta_param(inputs)
    kappa = kappa_param(inputs)
    rows = [
        ("beta", beta),
        ("vartheta", discretization_levels(inputs)),
        ("kappa", kappa),
        ("lambda", lambda_param(inputs, kappa=kappa, beta=beta)),
        ("upper", upper_bound(inputs)),
    ]
    if inputs.s is not None:
        rows.append(("lower", minimax_lower_bound(inputs, beta_c=beta_c, C=C)))
    return rows
