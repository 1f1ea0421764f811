"""Third-order tensors under the tensor-tensor product (t-product).

Tensors are plain ``float64`` numpy arrays of shape ``(n1, n2, n3)``; the
third axis holds the tubes. The t-product of ``a`` (n1 x r x n3) and ``b``
(r x n2 x n3) is the block-circulant product

    Fold(Circ(Unfold(a)) @ Unfold(b)),

which the DFT along the tubes diagonalizes into ``n3`` independent face
products. Real inputs have conjugate-symmetric faces, so only
``n3 // 2 + 1`` faces are ever multiplied; the rest are mirrored before the
inverse transform.
"""

from typing import NamedTuple

import numpy as np

from .errors import NumericError, ShapeError, SingularityError

#: entries with ``|x| <= L0_EPS`` do not count as nonzeros
L0_EPS = 1e-12
#: maximum tolerated imaginary residue after the inverse FFT, relative to scale
IMAG_TOL = 1e-9
#: relative smallest-singular-value threshold for inverting a Fourier face
SINGULAR_TOL = 1e-12


def as_tensor3(x, name="tensor"):
    """Return ``x`` as a finite float64 array with exactly three axes."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 3:
        raise ShapeError(f"{name} must be third-order, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"{name} contains non-finite entries")
    return arr


def _half_faces(x):
    # (n3 // 2 + 1, n1, n2) complex faces of the real tensor x
    return np.moveaxis(np.fft.rfft(x, axis=2), 2, 0)


def _mirror(half, n3):
    tail = np.conj(half[1:n3 - n3 // 2][::-1])
    return np.concatenate([half, tail], axis=0)


def _from_half_faces(half, n3):
    full = np.fft.ifft(_mirror(half, n3), axis=0)
    real = full.real
    scale = max(1.0, float(np.max(np.abs(real), initial=0.0)))
    resid = float(np.max(np.abs(full.imag), initial=0.0))
    if resid >= IMAG_TOL * scale:
        raise NumericError(f"imaginary residue {resid:.3e} after inverse FFT")
    return np.ascontiguousarray(np.moveaxis(real, 0, 2))


def fourier_faces(x):
    """Mode-3 DFT of ``x`` as an ``(n3, n1, n2)`` complex array of faces.

    Face ``k`` and face ``n3 - k`` are complex conjugates for real input.
    """
    x = as_tensor3(x)
    return _mirror(_half_faces(x), x.shape[2])


def from_fourier_faces(faces):
    """Inverse of :func:`fourier_faces`; the imaginary residue must be negligible."""
    faces = np.asarray(faces)
    n3 = faces.shape[0]
    return _from_half_faces(faces[: n3 // 2 + 1], n3)


def _check_product_shapes(a, b):
    if a.shape[1] != b.shape[0] or a.shape[2] != b.shape[2]:
        raise ShapeError(f"cannot t-multiply shapes {a.shape} and {b.shape}")


def tprod(a, b):
    """t-product of ``a`` (n1 x r x n3) and ``b`` (r x n2 x n3).

    Computed face-by-face in the Fourier domain.

    Examples
    --------
    >>> tprod(np.array([[[1., 2.]]]), np.array([[[3., 4.]]]))
    array([[[11., 10.]]])
    """
    a = as_tensor3(a, "a")
    b = as_tensor3(b, "b")
    _check_product_shapes(a, b)
    faces = np.matmul(_half_faces(a), _half_faces(b))
    return _from_half_faces(faces, a.shape[2])


def unfold(x):
    """Stack frontal slices vertically: ``(n1 * n3, n2)``."""
    return np.concatenate([x[:, :, k] for k in range(x.shape[2])], axis=0)


def fold(mat, shape):
    """Inverse of :func:`unfold` for a tensor of the given shape."""
    n1, n2, n3 = shape
    return np.stack([mat[k * n1:(k + 1) * n1] for k in range(n3)], axis=2)


def circ(x):
    """Block-circulant matrix of the frontal slices of ``x``: ``(n1*n3, n2*n3)``."""
    n1, n2, n3 = x.shape
    out = np.empty((n1 * n3, n2 * n3))
    for p in range(n3):
        for q in range(n3):
            out[p * n1:(p + 1) * n1, q * n2:(q + 1) * n2] = x[:, :, (p - q) % n3]
    return out


def tprod_oracle(a, b):
    """Reference t-product through the explicit block-circulant matrix.

    Quadratic in ``n3``; meant for testing :func:`tprod`.
    """
    a = as_tensor3(a, "a")
    b = as_tensor3(b, "b")
    _check_product_shapes(a, b)
    return fold(circ(a) @ unfold(b), (a.shape[0], b.shape[1], a.shape[2]))


def ttranspose(a):
    """Tensor transpose: transpose every slice, reverse slices 2..n3."""
    a = as_tensor3(a)
    order = (-np.arange(a.shape[2])) % a.shape[2]
    return np.ascontiguousarray(a.transpose(1, 0, 2)[:, :, order])


def identity_tensor(n, n3):
    """``n x n x n3`` identity: first slice is ``eye(n)``, the others are zero."""
    if n < 1 or n3 < 1:
        raise ShapeError(f"identity tensor needs n, n3 >= 1, got {n}, {n3}")
    out = np.zeros((n, n, n3))
    out[:, :, 0] = np.eye(n)
    return out


def tinverse(a):
    """Inverse under the t-product, by inverting each Fourier face.

    Raises
    ------
    SingularityError
        If some face has smallest singular value ``<= 1e-12`` times its
        largest one.
    """
    a = as_tensor3(a)
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"only square tensors are invertible, got {a.shape}")
    half = _half_faces(a)
    sv = np.linalg.svd(half, compute_uv=False)
    for k, s in enumerate(sv):
        if s[-1] <= SINGULAR_TOL * s[0]:
            cond = np.inf if s[-1] == 0 else s[0] / s[-1]
            raise SingularityError(k, cond)
    return _from_half_faces(np.linalg.inv(half), a.shape[2])


class Norms(NamedTuple):
    fro: float
    linf: float
    l0: int


def norms(a):
    """Frobenius, max-abs and nonzero-count of ``a``."""
    a = np.asarray(a, dtype=np.float64)
    absa = np.abs(a)
    return Norms(
        fro=float(np.sqrt(np.sum(a * a))),
        linf=float(np.max(absa, initial=0.0)),
        l0=int(np.count_nonzero(absa > L0_EPS)),
    )


def inner(a, b):
    """Sum of elementwise products of two equally shaped tensors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"inner product of shapes {a.shape} and {b.shape}")
    return float(np.sum(a * b))
