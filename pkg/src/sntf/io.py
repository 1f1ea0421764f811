"""Text formats for tensors (NT3) and observation sets (OBS).

NT3 v1::

    nt3 1 <n1> <n2> <n3>
    <n1*n2*n3 values, frontal slice k outermost, then row i, then column j>

OBS v1::

    obs 1 <n1> <n2> <n3> <m> <noise-tag> <param>
    <i> <j> <k> <value>        (m lines, 1-based indices)

Poisson files carry ``0`` as their parameter.
"""

import numpy as np

from .observation_model import ObservationSet, make_noise
from .tensor_algebra import as_tensor3


class FormatError(ValueError):
    """A file does not follow the expected layout."""


def _fmt(v):
    return f"{v:.17g}"


def write_nt3(path, x):
    x = as_tensor3(x)
    n1, n2, n3 = x.shape
    with open(path, "w") as fh:
        fh.write(f"nt3 1 {n1} {n2} {n3}\n")
        for k in range(n3):
            for i in range(n1):
                fh.write(" ".join(_fmt(v) for v in x[i, :, k]) + "\n")


def read_nt3(path):
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 5 or header[:2] != ["nt3", "1"]:
            raise FormatError(f"{path}: not an NT3 v1 file")
        n1, n2, n3 = (int(v) for v in header[2:])
        data = np.array(fh.read().split(), dtype=np.float64)
    if data.size != n1 * n2 * n3:
        raise FormatError(f"{path}: expected {n1 * n2 * n3} values, found {data.size}")
    return as_tensor3(data.reshape(n3, n1, n2).transpose(1, 2, 0).copy())


def write_obs(path, obs):
    n1, n2, n3 = obs.shape
    with open(path, "w") as fh:
        fh.write(f"obs 1 {n1} {n2} {n3} {obs.m} {obs.noise.tag} {_fmt(obs.noise.param)}\n")
        for (i, j, k), v in zip(obs.indices, obs.values):
            fh.write(f"{i + 1} {j + 1} {k + 1} {_fmt(v)}\n")


def read_obs(path):
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 8 or header[:2] != ["obs", "1"]:
            raise FormatError(f"{path}: not an OBS v1 file")
        n1, n2, n3, m = (int(v) for v in header[2:6])
        noise = make_noise(header[6], float(header[7]))
        body = np.array(fh.read().split(), dtype=np.float64)
    if body.size != 4 * m:
        raise FormatError(f"{path}: expected {m} observation lines")
    body = body.reshape(m, 4)
    idx = body[:, :3].astype(np.int64) - 1
    return ObservationSet((n1, n2, n3), idx, body[:, 3], noise)
