"""Seven-block ADMM for sparse nonnegative t-product factorization/completion.

Solves

    min  -log p_{X_Omega}(Y_Omega) + lam * ||N||_0
    s.t. X = A * B, Q = X, M = A, N = B, Z = B,
         Q in [0, c], M in [0, 1], Z in [0, b]

where ``*`` is the t-product. Each sweep updates X, A, B, then the splitting
blocks Q, M, N, Z, then the five multipliers T1..T5.
"""

import csv
import time
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import NumericError, ShapeError
from .observation_model import neg_log_likelihood, rng_stream
from .proximal_operators import BoxBounds, project_box, prox_data, prox_l0
from .tensor_algebra import identity_tensor, tinverse, tprod, ttranspose

#: per-noise l0 weights picked on a coarse pilot grid {1e-3, 1e-2, 1e-1, 1}
DEFAULT_LAMBDA = {"gaussian": 1e-3, "laplace": 1e-3, "poisson": 1.0}

ETA_NAMES = ("eta1", "eta2", "eta3", "eta4", "eta5", "eta6")


@dataclass(frozen=True)
class SolverConfig:
    """ADMM hyperparameters.

    ``lam=None`` picks the per-noise default from :data:`DEFAULT_LAMBDA`;
    ``c=None`` uses twice the largest observed magnitude.
    """

    r: int
    b: float
    lam: Optional[float] = None
    rho: float = 0.1
    c: Optional[float] = None
    max_iters: int = 300
    tol: float = 1e-4
    seed: int = 0
    kkt_every: int = 1

    def __post_init__(self):
        if self.r < 1:
            raise ValueError(f"rank must be >= 1, got {self.r}")
        for name in ("rho", "b"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not self.tol >= 0:
            raise ValueError(f"tol must be >= 0, got {self.tol}")
        for name in ("lam", "c"):
            val = getattr(self, name)
            if val is not None and not val > 0:
                raise ValueError(f"{name} must be positive, got {val}")
        if self.max_iters < 0:
            raise ValueError(f"max_iters must be >= 0, got {self.max_iters}")
        if self.kkt_every < 1:
            raise ValueError(f"kkt_every must be >= 1, got {self.kkt_every}")

    def resolved(self, obs):
        """Copy with ``lam`` and ``c`` filled in for these observations."""
        lam = DEFAULT_LAMBDA[obs.noise.tag] if self.lam is None else self.lam
        c = self.c
        if c is None:
            c = 2 * float(np.max(np.abs(obs.values), initial=0.0)) or 1.0
        return replace(self, lam=lam, c=c)


@dataclass
class SolverState:
    X: np.ndarray
    A: np.ndarray
    B: np.ndarray
    Q: np.ndarray
    M: np.ndarray
    N: np.ndarray
    Z: np.ndarray
    T1: np.ndarray
    T2: np.ndarray
    T3: np.ndarray
    T4: np.ndarray
    T5: np.ndarray
    iter: int = 0
    eta: Optional[np.ndarray] = None
    # A * B for the current A and B, filled in by admm_step; None means unknown
    AB: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def dims(self):
        n1, r, n3 = self.A.shape
        return n1, self.B.shape[1], n3, r

    def check_shapes(self, shape, r):
        n1, n2, n3 = shape
        want = {
            "X": (n1, n2, n3), "Q": (n1, n2, n3), "T1": (n1, n2, n3), "T2": (n1, n2, n3),
            "A": (n1, r, n3), "M": (n1, r, n3), "T3": (n1, r, n3),
            "B": (r, n2, n3), "N": (r, n2, n3), "Z": (r, n2, n3),
            "T4": (r, n2, n3), "T5": (r, n2, n3),
        }
        for name, shp in want.items():
            got = getattr(self, name).shape
            if got != shp:
                raise ShapeError(f"block {name} has shape {got}, expected {shp}")


@dataclass
class SolveReport:
    state: SolverState
    config: SolverConfig
    iters_run: int
    eta_history: np.ndarray
    objective_history: np.ndarray
    converged: bool
    wall_time: float = field(default=0.0)

    @property
    def estimate(self):
        """Final X clipped to ``[0, c]``."""
        return np.clip(self.state.X, 0.0, self.config.c)

    @property
    def estimates(self):
        """The three candidate reconstructions: raw X, Q and A * B."""
        s = self.state
        return {"X": s.X, "Q": s.Q, "AB": tprod(s.A, s.B) if s.AB is None else s.AB}


def init_state(obs, cfg):
    """Random nonnegative start; Q, X, T1, T2 start at the zero-filled observations."""
    n1, n2, n3 = obs.shape
    r = cfg.r
    rng = rng_stream(cfg.seed, "init")
    a_shape, b_shape = (n1, r, n3), (r, n2, n3)
    A = rng.random(a_shape)
    B = cfg.b * rng.random(b_shape)
    M = rng.random(a_shape)
    N = cfg.b * rng.random(b_shape)
    Z = cfg.b * rng.random(b_shape)
    T3 = rng.random(a_shape)
    T4 = rng.random(b_shape)
    T5 = rng.random(b_shape)
    Y = obs.dense()
    return SolverState(
        X=Y.copy(), A=A, B=B, Q=Y.copy(), M=M, N=N, Z=Z,
        T1=Y.copy(), T2=Y.copy(), T3=T3, T4=T4, T5=T5,
    )


def _product(state, ab):
    if ab is not None:
        return ab
    return state.AB if state.AB is not None else tprod(state.A, state.B)


def update_x(state, obs, cfg, ab=None):
    s = 0.5 * (state.Q + _product(state, ab) + (state.T1 - state.T2) / cfg.rho)
    return prox_data(s, obs, cfg.rho)


def update_a(state, cfg):
    """Closed-form minimizer of the augmented Lagrangian in A (uses the current X)."""
    rho = cfg.rho
    Bt = ttranspose(state.B)
    rhs = state.M + tprod(state.X - state.T1 / rho, Bt) - state.T3 / rho
    gram = tprod(state.B, Bt) + identity_tensor(state.B.shape[0], state.B.shape[2])
    return tprod(rhs, tinverse(gram))


def update_b(state, cfg):
    """Closed-form minimizer in B (uses the current X and A)."""
    rho = cfg.rho
    At = ttranspose(state.A)
    rhs = tprod(At, state.X) + state.N + state.Z - (tprod(At, state.T1) + state.T4 + state.T5) / rho
    gram = tprod(At, state.A) + 2 * identity_tensor(state.A.shape[1], state.A.shape[2])
    return tprod(tinverse(gram), rhs)


def update_auxiliaries(state, obs, cfg):
    rho = cfg.rho
    Q = project_box(state.X + state.T2 / rho, BoxBounds(0.0, cfg.c))
    M = project_box(state.A + state.T3 / rho, BoxBounds(0.0, 1.0))
    N = prox_l0(state.B + state.T4 / rho, cfg.lam / rho)
    Z = project_box(state.B + state.T5 / rho, BoxBounds(0.0, cfg.b))
    return Q, M, N, Z


def update_multipliers(state, cfg, ab=None):
    rho = cfg.rho
    T1 = state.T1 - rho * (state.X - _product(state, ab))
    T2 = state.T2 - rho * (state.Q - state.X)
    T3 = state.T3 - rho * (state.M - state.A)
    T4 = state.T4 - rho * (state.N - state.B)
    T5 = state.T5 - rho * (state.Z - state.B)
    return T1, T2, T3, T4, T5


def _fro(x):
    return float(np.linalg.norm(x.ravel()))


def kkt_residuals(state, obs, cfg, ab=None):
    """Relative KKT residuals ``eta1..eta6`` and their maximum."""
    s = state
    ab = _product(state, ab)
    x_box = BoxBounds(0.0, cfg.c)
    # unscaled prox of -log p: the 1/(2 rho)-scaled prox with rho = 1/2
    px = prox_data(s.T1 - s.T2 + s.X, obs, 0.5)
    eta = np.array([
        _fro(s.X - px) / (1 + _fro(s.X) + _fro(s.T1) + _fro(s.T2)),
        _fro(s.Q - project_box(s.T2 + s.Q, x_box)) / (1 + _fro(s.T2) + _fro(s.Q)),
        _fro(s.M - project_box(s.T3 + s.M, BoxBounds(0.0, 1.0))) / (1 + _fro(s.T3) + _fro(s.M)),
        _fro(s.N - prox_l0(s.T4 + s.N, cfg.lam)) / (1 + _fro(s.T4) + _fro(s.N)),
        _fro(s.Z - project_box(s.T5 + s.Z, BoxBounds(0.0, cfg.b))) / (1 + _fro(s.T5) + _fro(s.Z)),
        _fro(s.X - ab) / (1 + _fro(s.X) + _fro(s.A) + _fro(s.B)),
    ])
    return eta, float(eta.max())


def _guard(x, name, k):
    if not np.all(np.isfinite(x)):
        raise NumericError(f"non-finite values in block {name} at iteration {k}")
    return x


def _block(name, k, fn, *args):
    """Evaluate one block update, tagging numeric failures with the block and iteration."""
    try:
        out = fn(*args)
    except NumericError as exc:
        raise NumericError(f"{exc} (block {name} at iteration {k})") from exc
    return _guard(out, name, k)


def admm_step(state, obs, cfg):
    """One full sweep; returns a new state and leaves ``state`` untouched."""
    k = state.iter + 1
    st = replace(state)
    st.X = _block("X", k, update_x, st, obs, cfg)
    st.A = _block("A", k, update_a, st, cfg)
    st.B = _block("B", k, update_b, st, cfg)
    st.AB = tprod(st.A, st.B)
    st.Q, st.M, st.N, st.Z = (_guard(v, n, k) for v, n in zip(update_auxiliaries(st, obs, cfg), "QMNZ"))
    T = update_multipliers(st, cfg)
    st.T1, st.T2, st.T3, st.T4, st.T5 = (_guard(v, f"T{i + 1}", k) for i, v in enumerate(T))
    st.iter = k
    st.eta = None
    return st


def solve(obs, cfg, init=None, trace=None):
    """Run ADMM until ``eta_max <= tol`` or ``max_iters`` sweeps.

    Parameters
    ----------
    obs : ObservationSet
    cfg : SolverConfig
    init : SolverState, optional
        Starting point; defaults to :func:`init_state`.
    trace : path-like, optional
        Write one CSV line ``iter,eta1..eta6,eta_max,objective`` per sweep.

    Returns
    -------
    SolveReport
        Histories have one row per sweep; skipped KKT evaluations
        (``kkt_every > 1``) are recorded as NaN.
    """
    t0 = time.perf_counter()
    n1, n2, n3 = obs.shape
    if cfg.r > min(n1, n2):
        raise ShapeError(f"rank {cfg.r} exceeds min(n1, n2) = {min(n1, n2)}")
    cfg = cfg.resolved(obs)
    state = init_state(obs, cfg) if init is None else init
    state.check_shapes(obs.shape, cfg.r)

    etas, objs = [], []
    converged = False
    fh = open(trace, "w", newline="") if trace is not None else None
    try:
        writer = None
        if fh is not None:
            writer = csv.writer(fh)
            writer.writerow(("iter",) + ETA_NAMES + ("eta_max", "objective"))
        for _ in range(cfg.max_iters):
            state = admm_step(state, obs, cfg)
            if state.iter % cfg.kkt_every == 0:
                eta, eta_max = kkt_residuals(state, obs, cfg)
                state.eta = np.append(eta, eta_max)
            else:
                state.eta = None
            row = state.eta if state.eta is not None else np.full(7, np.nan)
            obj = neg_log_likelihood(state.X, obs) + cfg.lam * np.count_nonzero(state.N)
            etas.append(row)
            objs.append(obj)
            if writer is not None:
                writer.writerow([state.iter] + [repr(float(v)) for v in row] + [repr(obj)])
            if state.eta is not None and state.eta[-1] <= cfg.tol:
                converged = True
                break
    finally:
        if fh is not None:
            fh.close()

    return SolveReport(
        state=state,
        config=cfg,
        iters_run=len(etas),
        eta_history=np.array(etas).reshape(-1, 7),
        objective_history=np.array(objs),
        converged=converged,
        wall_time=time.perf_counter() - t0,
    )


def relative_error(xhat, xstar):
    """``||xhat - xstar||_F / ||xstar||_F``."""
    xhat = np.asarray(xhat, dtype=np.float64)
    xstar = np.asarray(xstar, dtype=np.float64)
    if xhat.shape != xstar.shape:
        raise ShapeError(f"shapes {xhat.shape} and {xstar.shape} differ")
    denom = _fro(xstar)
    if denom == 0:
        raise ZeroDivisionError("ground truth has zero norm")
    return _fro(xhat - xstar) / denom
