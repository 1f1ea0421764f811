import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sntf.observation_model import Gaussian, Laplace, Poisson
from sntf.theory_bounds import (
    MAX_LEVEL_EXPONENT,
    BoundInputs,
    beta_param,
    bound_table,
    discretization_levels,
    divergences,
    kappa_param,
    lambda_param,
    minimax_lower_bound,
    poisson_kl_bound,
    upper_bound,
)

from oracles import (
    BETA_100,
    FREE,
    GAUSS_100,
    SAT,
    close,
    gauss_quad,
    laplace_kl_as_printed,
    laplace_quad,
    poisson_series,
)


def inputs(noise, case="sat", **kw):
    base = dict(n1=60, n2=80, n3=20, r=5, m=40000, b=2.0, c=3.0, b0_norm=3000, noise=noise)
    if case == "free":
        base.update(b=50.0, c=1.0)
    if isinstance(noise, Poisson):
        base["zeta"] = 0.5
    base.update(kw)
    return BoundInputs(**base)


def rel(x, y):
    return abs(x - y) / abs(y)


# ---- beta / vartheta / kappa / lambda --------------------------------------


def test_beta_example():
    b = BoundInputs(n1=100, n2=100, n3=100, r=10, m=500000, b=2.0, c=5.0, noise=Gaussian(0.1))
    assert rel(beta_param(b), BETA_100) < 1e-12


@pytest.mark.parametrize("case,want", [("sat", SAT), ("free", FREE)])
def test_beta_and_levels(case, want):
    b = inputs(Gaussian(0.3), case)
    assert rel(beta_param(b), want["beta"]) < 1e-12
    assert discretization_levels(b) == want["levels"]


def test_beta_saturates_and_is_scale_invariant():
    b = inputs(Gaussian(0.3), b=1.0, c=1.0)
    # 3 r n3^1.5 b / c = 1341.6 <= 80^2
    assert beta_param(b) == 3.0
    f1 = inputs(Gaussian(0.3), "free")
    f2 = inputs(Gaussian(0.3), "free", b=500.0, c=10.0)
    assert beta_param(f1) == pytest.approx(beta_param(f2), rel=1e-15)


def test_levels_examples():
    for n, want in ((4, 64), (2, 8)):
        b = BoundInputs(n1=n, n2=n, n3=n, r=1, m=4, b=1.0, c=1.0, noise=Gaussian(1.0),
                        beta_override=3.0)
        assert discretization_levels(b) == want


def test_levels_monotone_and_guarded():
    def lv(beta, n):
        return discretization_levels(BoundInputs(n1=n, n2=n, n3=2, r=1, m=4, b=1.0, c=1.0,
                                                 noise=Gaussian(1.0), beta_override=beta))
    assert lv(3, 4) <= lv(3.5, 4) <= lv(4, 4)
    assert lv(3, 4) <= lv(3, 5) <= lv(3, 9)
    assert isinstance(lv(100, 64), int)
    with pytest.raises(OverflowError):
        lv(MAX_LEVEL_EXPONENT, 4)
    with pytest.raises(ValueError):
        lv(2.5, 4)


def test_kappa_examples():
    assert kappa_param(inputs(Gaussian(1.0), c=2.0)) == 2.0
    assert kappa_param(inputs(Laplace(1.0), c=2.0)) == 2.0
    assert kappa_param(inputs(Poisson(), c=2.0)) == 4.0
    assert kappa_param(inputs(Poisson(), c=2.0), poisson_variant="appendix") == 8.0
    with pytest.raises(ValueError):
        kappa_param(inputs(Poisson()), poisson_variant="other")


def test_lambda_examples():
    b = BoundInputs(n1=3, n2=3, n3=2, r=1, m=4, b=1.0, c=1.0, noise=Gaussian(1.0))
    assert lambda_param(b, kappa=1.5, beta=3.0) == pytest.approx(40 * math.log(3), rel=1e-15)
    assert lambda_param(b, kappa=0.0, beta=3.0) == pytest.approx(20 * math.log(3), rel=1e-15)
    assert lambda_param(b, kappa=1.0) < lambda_param(b, kappa=2.0)


@pytest.mark.parametrize("case,want", [("sat", SAT), ("free", FREE)])
def test_kappa_lambda_fixtures(case, want):
    g = inputs(Gaussian(0.3), case)
    assert rel(kappa_param(g), want["kappa_g"]) < 1e-12
    assert rel(lambda_param(g), want["lambda_g"]) < 1e-12
    if case == "sat":
        assert rel(lambda_param(g, theorem_log=True), want["lambda_g_thm"]) < 1e-12
    else:
        assert rel(lambda_param(inputs(Laplace(0.2), case)), want["lambda_l"]) < 1e-12
        assert rel(kappa_param(inputs(Laplace(0.2), case)), want["kappa_l"]) < 1e-12
        assert rel(kappa_param(inputs(Poisson(), case)), want["kappa_p"]) < 1e-12
        assert rel(lambda_param(inputs(Poisson(), case)), want["lambda_p"]) < 1e-12


# ---- upper bounds ----------------------------------------------------------


def test_gaussian_upper_bound_fixture():
    b = BoundInputs(n1=100, n2=100, n3=100, r=10, m=500000, b=1.0, c=1.0, noise=Gaussian(0.1),
                    b0_norm=30000, beta_override=3.0)
    assert rel(upper_bound(b), GAUSS_100) < 1e-12


@pytest.mark.parametrize("case,want", [("sat", SAT), ("free", FREE)])
def test_upper_bound_fixtures(case, want):
    assert rel(upper_bound(inputs(Gaussian(0.3), case)), want["gauss"]) < 1e-12
    assert rel(upper_bound(inputs(Laplace(0.2), case)), want["laplace"]) < 1e-12
    assert rel(upper_bound(inputs(Poisson(), case)), want["poisson"]) < 1e-12


def test_gaussian_bound_without_noise_term():
    b = inputs(Gaussian(1e-300), beta_override=3.0)
    logn, m = math.log(80), 40000
    dof = (5 * 60 * 20 + 3000) / m
    want = 22 * 9 * math.log(m) / m + 16 * 2 * 9 * 5 * dof * logn
    assert rel(upper_bound(b), want) < 1e-14


@pytest.mark.parametrize("noise", [Gaussian(0.3), Laplace(0.2), Poisson()])
def test_upper_bound_decreases_in_m(noise):
    for m in (8, 50, 400, 4000, 20000):
        assert upper_bound(inputs(noise, m=2 * m)) < upper_bound(inputs(noise, m=m))


def test_upper_bound_needs_b0():
    with pytest.raises(ValueError):
        upper_bound(inputs(Gaussian(0.3), b0_norm=None))


def test_input_validation():
    with pytest.raises(ValueError):
        inputs(Gaussian(0.3), m=3)
    with pytest.raises(ValueError):
        inputs(Gaussian(0.3), m=60 * 80 * 20 + 1)
    with pytest.raises(ValueError):
        inputs(Gaussian(0.3), r=61)
    with pytest.raises(ValueError):
        inputs(Poisson(), zeta=None)
    with pytest.raises(ValueError):
        inputs(Gaussian(0.3), zeta=0.5)


# ---- lower bounds ----------------------------------------------------------


def test_lower_bound_fixtures():
    assert rel(minimax_lower_bound(inputs(Gaussian(0.3), s=2000)), SAT["lower_g"]) < 1e-12
    assert rel(minimax_lower_bound(inputs(Laplace(0.2), s=2000)), SAT["lower_l"]) < 1e-12
    assert rel(minimax_lower_bound(inputs(Poisson(), s=3000)), SAT["lower_p"]) < 1e-12


def test_lower_bound_constants_scale():
    b = inputs(Gaussian(0.3), s=2000)
    assert minimax_lower_bound(b, C=2.0) == pytest.approx(2 * SAT["lower_g"], rel=1e-14)
    # beta_c shrinks the noise branch only
    assert minimax_lower_bound(b, beta_c=0.5) == pytest.approx(SAT["lower_g"] / 4, rel=1e-14)


def test_lower_bound_delta_saturates():
    # s >= n2 n3 gives Delta = 1, and with few samples the b^2 branch is active
    b = inputs(Gaussian(0.3), s=80 * 20, m=4)
    assert minimax_lower_bound(b) == 4.0
    b = inputs(Gaussian(0.3), s=80 * 20 * 5, m=4)
    assert minimax_lower_bound(b) == 4.0


def test_poisson_lower_bound_degenerate_contrast():
    b = inputs(Poisson(), s=3000, zeta=2.0)
    assert minimax_lower_bound(b) == 0.0


def test_lower_bound_preconditions():
    with pytest.raises(ValueError):
        minimax_lower_bound(inputs(Gaussian(0.3)))
    with pytest.raises(ValueError):
        minimax_lower_bound(inputs(Gaussian(0.3), s=4))
    with pytest.raises(ValueError):
        minimax_lower_bound(inputs(Poisson(), s=1600))
    with pytest.raises(ValueError):
        minimax_lower_bound(inputs(Poisson(), s=3000, zeta=2.5))


def test_lower_never_exceeds_upper_times_log():
    rng = np.random.default_rng(2024)
    for i in range(100):
        n1, n2, n3 = (int(v) for v in rng.integers(5, 101, 3))
        r = int(rng.integers(1, min(n1, n2) + 1))
        N = n1 * n2 * n3
        m = int(rng.integers(4, N + 1))
        b, c = rng.uniform(0.1, 10, 2)
        kind = i % 3
        if kind == 2:
            # the Poisson construction needs room above one full n2 x n3 slab
            r = max(r, 2)
            noise, zeta = Poisson(), float(rng.uniform(0.01, 1) * min(b, c))
            s = int(rng.integers(n2 * n3 + 1, r * n2 * n3 + 1))
        else:
            noise = Gaussian(rng.uniform(0.01, 2)) if kind == 0 else Laplace(rng.uniform(0.01, 2))
            zeta = None
            s = int(rng.integers(r, r * n2 * n3 + 1))
        b_in = BoundInputs(n1=n1, n2=n2, n3=n3, r=r, m=m, b=b, c=c, noise=noise,
                           b0_norm=s, s=s, zeta=zeta)
        assert minimax_lower_bound(b_in) <= upper_bound(b_in) * math.log(max(n1, n2))


# ---- divergences -----------------------------------------------------------


def test_laplace_divergences_match_quadrature():
    rng = np.random.default_rng(7)
    for _ in range(100):
        mu1, mu2 = rng.uniform(-2, 2, 2)
        tau = rng.uniform(0.1, 2)
        kl, h = laplace_quad(mu1, mu2, tau)
        got = divergences(Laplace(tau), mu1, mu2)
        assert close(got.kl, kl) and close(got.neg2logH, h)


def test_gaussian_divergences_match_quadrature():
    rng = np.random.default_rng(8)
    for _ in range(100):
        mu1, mu2 = rng.uniform(-2, 2, 2)
        sigma = rng.uniform(0.1, 2)
        kl, h = gauss_quad(mu1, mu2, sigma)
        got = divergences(Gaussian(sigma), mu1, mu2)
        assert close(got.kl, kl) and close(got.neg2logH, h)


def test_poisson_divergences_match_series():
    rng = np.random.default_rng(9)
    for _ in range(100):
        x1, x2 = rng.uniform(0.05, 50, 2)
        kl, h = poisson_series(x1, x2)
        got = divergences(Poisson(), x1, x2)
        assert close(got.kl, kl) and close(got.neg2logH, h)


def test_gaussian_divergence_example():
    d = divergences(Gaussian(1.0), 1.0, 2.0)
    assert d.kl == 0.5 and d.neg2logH == 0.25


@pytest.mark.parametrize("noise", [Gaussian(0.4), Laplace(0.4), Poisson()])
@pytest.mark.parametrize("x", [0.3, 1.0, 7.5])
def test_divergences_vanish_on_equal_parameters(noise, x):
    d = divergences(noise, x, x)
    assert d.kl == 0.0 and d.neg2logH == 0.0


def test_lemma_as_printed_fails_identity_of_indiscernibles():
    assert laplace_kl_as_printed(1.0, 1.0, 0.5) == 1.0
    kl, _ = laplace_quad(1.0, 1.7, 0.5)
    assert not close(laplace_kl_as_printed(1.0, 1.7, 0.5), kl)
    assert close(divergences(Laplace(0.5), 1.0, 1.7).kl, kl)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3), st.floats(1e-2, 10))
def test_divergences_nonnegative(x1, x2, p):
    for noise in (Gaussian(p), Laplace(p), Poisson()):
        d = divergences(noise, x1, x2)
        assert d.kl >= 0 and d.neg2logH >= 0
        if x1 != x2 and abs(x1 - x2) > 1e-6 * max(x1, x2):
            assert d.kl > 0 and d.neg2logH > 0


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_poisson_kl_below_quadratic_bound(x1, x2):
    assert divergences(Poisson(), x1, x2).kl <= poisson_kl_bound(x1, x2) * (1 + 1e-12) + 1e-15


def test_poisson_rates_must_be_positive():
    with pytest.raises(ValueError):
        divergences(Poisson(), 0.0, 1.0)
    with pytest.raises(ValueError):
        poisson_kl_bound(1.0, -1.0)


# ---- table -----------------------------------------------------------------


def test_bound_table():
    rows = dict(bound_table(inputs(Gaussian(0.3), s=2000)))
    assert list(rows) == ["beta", "vartheta", "kappa", "lambda", "upper", "lower"]
    assert rows["vartheta"] == SAT["levels"]
    assert rel(rows["upper"], SAT["gauss"]) < 1e-12
    assert "lower" not in dict(bound_table(inputs(Gaussian(0.3))))
