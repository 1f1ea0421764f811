"""Synthetic instances and sampling-ratio / rank / size sweeps.

Every run is keyed by ``(axis value, seed)``. The ground truth depends only
on the seed and the problem size, and masks for one seed are nested in the
sampling ratio, so a sweep varies one factor at a time.
"""

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional

import numpy as np

from .admm_solver import SolverConfig, relative_error, solve
from .observation_model import Gaussian, rng_stream, sample_mask, synthesize
from .tensor_algebra import tprod

CSV_COLUMNS = ("axis", "seed", "m", "re", "iters", "converged", "ms")


class Instance(NamedTuple):
    A: np.ndarray
    B: np.ndarray
    X: np.ndarray
    c: float


def generate_instance(dims, r_true, s, b, seed):
    """Random ``X* = A* * B*`` with dense ``A*`` and sparse ``B*``.

    ``A*`` is uniform on [0, 1). ``B*`` has exactly ``floor(s * r * n2 * n3)``
    nonzeros at distinct uniform positions, with values ``b * U[0, 1)``.
    The returned bound is ``c = 2 * max(X*)``.
    """
    if not 0 < s <= 1:
        raise ValueError(f"sparsity ratio must lie in (0, 1], got {s}")
    n1, n2, n3 = dims
    rng = rng_stream(seed, "instance")
    A = rng.random((n1, r_true, n3))
    size = r_true * n2 * n3
    # guard against s * size landing a hair below an integer
    nnz = min(size, int(math.floor(s * size * (1 + 1e-12))))
    flat = np.zeros(size)
    pos = rng.choice(size, size=nnz, replace=False)
    flat[pos] = b * rng.random(nnz)
    B = flat.reshape(r_true, n2, n3)
    X = tprod(A, B)
    return Instance(A, B, X, 2 * float(np.max(np.abs(X))))


@dataclass(frozen=True)
class SweepRow:
    axis_value: float
    seed: int
    realized_m: int
    re: float
    iters: int
    converged: bool
    wall_time_ms: float
    error: Optional[str] = None

    def as_csv(self):
        re = "nan" if math.isnan(self.re) else repr(self.re)
        return [_fmt_axis(self.axis_value), self.seed, self.realized_m, re,
                self.iters, int(self.converged), f"{self.wall_time_ms:.0f}"]


def _fmt_axis(v):
    return str(int(v)) if float(v).is_integer() else repr(float(v))


@dataclass(frozen=True)
class ExperimentSpec:
    """One sweep: exactly one of ``sr_list``, ``r_list`` or ``n_list`` is nonempty.

    ``sr`` and ``r_true`` are the fixed values used when they are not the
    swept axis; ``solver`` supplies everything but the rank, ``b`` and ``c``,
    which come from the instance.
    """

    dims: tuple = (50, 50, 50)
    r_true: int = 10
    s: float = 0.3
    b: float = 2.0
    noise: object = field(default_factory=lambda: Gaussian(0.1))
    sr: float = 0.5
    sr_list: tuple = ()
    r_list: tuple = ()
    n_list: tuple = ()
    seeds: tuple = (0, 1, 2)
    solver: SolverConfig = field(default_factory=lambda: SolverConfig(r=1, b=1.0))
    output_path: Optional[str] = None

    def __post_init__(self):
        axes = [a for a in (self.sr_list, self.r_list, self.n_list) if len(a)]
        if len(axes) != 1:
            raise ValueError("exactly one of sr_list, r_list, n_list must be nonempty")
        if not len(self.seeds):
            raise ValueError("at least one seed is required")

    @property
    def axis(self):
        if len(self.sr_list):
            return "sr", tuple(self.sr_list)
        if len(self.r_list):
            return "r", tuple(self.r_list)
        return "n", tuple(self.n_list)


def run_one(spec, value, seed):
    """Generate, observe, solve and score a single ``(axis value, seed)`` cell."""
    name, _ = spec.axis
    dims, r, sr = tuple(spec.dims), spec.r_true, spec.sr
    if name == "sr":
        sr = value
    elif name == "r":
        r = int(value)
    else:
        dims = (int(value),) * 3
    t0 = time.perf_counter()
    m, re, iters, converged, err = 0, float("nan"), 0, False, None
    try:
        inst = generate_instance(dims, r, spec.s, spec.b, seed)
        idx = sample_mask(dims, sr, seed)
        m = len(idx)
        obs = synthesize(inst.X, idx, spec.noise, seed, gamma=sr)
        cfg = replace(spec.solver, r=r, b=spec.b, c=inst.c, seed=seed)
        rep = solve(obs, cfg)
        re = relative_error(rep.estimate, inst.X)
        iters, converged = rep.iters_run, rep.converged
    except (ArithmeticError, ValueError) as exc:
        err = f"{type(exc).__name__}: {exc}"
    ms = 1000 * (time.perf_counter() - t0)
    return SweepRow(value, seed, m, re, iters, converged, ms, err)


def _run_cell(args):
    return run_one(*args)


def run_sweep(spec, workers=1):
    """Run every ``(axis value, seed)`` cell; rows come back sorted by (axis, seed).

    Failed runs keep their row with ``re = nan`` and the error message.
    """
    _, values = spec.axis
    cells = [(spec, v, s) for v in values for s in spec.seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_cell, cells))
    else:
        rows = [run_one(*c) for c in cells]
    rows.sort(key=lambda row: (row.axis_value, row.seed))
    if spec.output_path:
        write_csv(rows, spec.output_path)
    return rows


def write_csv(rows, path, timing=True):
    """Write sweep rows with the fixed ``axis,seed,m,re,iters,converged,ms`` header.

    ``timing=False`` blanks the ``ms`` column so repeated sweeps give
    byte-identical files. ``path`` may also be an open text stream.
    """
    if hasattr(path, "write"):
        _write_rows(path, rows, timing)
        return
    with open(path, "w", newline="") as fh:
        _write_rows(fh, rows, timing)


def _write_rows(fh, rows, timing):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        line = row.as_csv()
        if not timing:
            line[-1] = ""
        w.writerow(line)


def mean_re_by_axis(rows):
    """Mean RE over seeds for each axis value, skipping failed runs."""
    out = {}
    for v in sorted({row.axis_value for row in rows}):
        res = [row.re for row in rows if row.axis_value == v and not math.isnan(row.re)]
        out[v] = float(np.mean(res)) if res else float("nan")
    return out
