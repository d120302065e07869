"""Small-dimension complex Hermitian linear algebra.

Everything here works on plain ``numpy`` arrays.  The eigensolver is a cyclic
complex Jacobi iteration that is vectorised over leading batch axes, so the
survey code can diagonalise a few hundred thousand 3x3 states in one call.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import ConvergenceError, RankDeficient

MAX_DIM = 8
MAX_SWEEPS = 100
OFFDIAG_TOL = 1e-13
HERMITICITY_TOL = 1e-9
RANK_FLOOR = 1e-10


class EigenDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    """Real eigenvalues in ascending order, shape ``(..., d)``."""
    eigenvectors: np.ndarray
    """Unitary matrix whose columns are the matching eigenvectors."""


def _as_square(a, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(a, dtype=complex)
    if arr.ndim < 2 or arr.shape[-1] != arr.shape[-2] or arr.shape[-1] < 1:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def hermitian(a, tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Return ``(a + a^H) / 2`` with exactly real diagonal.

    Raises ``ValueError`` when the symmetrisation would move any entry by more
    than ``tol``, so rounding noise is absorbed but a genuinely non-Hermitian
    input is not.
    """
    arr = _as_square(a)
    adj = np.conj(np.swapaxes(arr, -1, -2))
    correction = np.max(np.abs(arr - adj)) / 2 if arr.size else 0.0
    if correction > tol:
        raise ValueError(f"matrix is not Hermitian (asymmetry {correction:.3g} > {tol:g})")
    h = (arr + adj) / 2
    d = h.shape[-1]
    idx = np.arange(d)
    h[..., idx, idx] = h[..., idx, idx].real
    return h


def _offdiag_norm(a: np.ndarray) -> np.ndarray:
    d = a.shape[-1]
    mask = ~np.eye(d, dtype=bool)
    return np.sqrt(np.sum(np.abs(a[:, mask]) ** 2, axis=-1))


def _rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    """Apply one complex Jacobi rotation zeroing ``a[:, p, q]`` in place."""
    apq = a[:, p, q]
    mag = np.abs(apq)
    nz = mag > 0.0
    safe = np.where(nz, mag, 1.0)
    phase = np.where(nz, apq / safe, 1.0)
    tau = (a[:, q, q].real - a[:, p, p].real) / (2.0 * safe)
    t = np.where(tau >= 0.0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
    t = np.where(nz, t, 0.0)
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    # R = diag-phase * real Givens: columns p, q of R
    r_pp = c
    r_pq = s
    r_qp = -s * np.conj(phase)
    r_qq = c * np.conj(phase)

    colp = a[:, :, p].copy()
    colq = a[:, :, q].copy()
    a[:, :, p] = colp * r_pp[:, None] + colq * r_qp[:, None]
    a[:, :, q] = colp * r_pq[:, None] + colq * r_qq[:, None]
    rowp = a[:, p, :].copy()
    rowq = a[:, q, :].copy()
    a[:, p, :] = np.conj(r_pp)[:, None] * rowp + np.conj(r_qp)[:, None] * rowq
    a[:, q, :] = np.conj(r_pq)[:, None] * rowp + np.conj(r_qq)[:, None] * rowq
    a[:, p, q] = 0.0
    a[:, q, p] = 0.0
    a[:, p, p] = a[:, p, p].real
    a[:, q, q] = a[:, q, q].real

    colp = v[:, :, p].copy()
    colq = v[:, :, q].copy()
    v[:, :, p] = colp * r_pp[:, None] + colq * r_qp[:, None]
    v[:, :, q] = colp * r_pq[:, None] + colq * r_qq[:, None]


def eigh_batch(h, tol: float = OFFDIAG_TOL, max_sweeps: int = MAX_SWEEPS) -> EigenDecomposition:
    """Cyclic Jacobi diagonalisation of a stack of Hermitian matrices.

    ``h`` has shape ``(..., d, d)`` and is assumed Hermitian (use
    :func:`hermitian` first on untrusted input).  A matrix is converged once
    its off-diagonal Frobenius norm drops below ``tol`` times its Frobenius
    norm.  Converged matrices are dropped from later sweeps.
    """
    arr = _as_square(h)
    d = arr.shape[-1]
    if d > MAX_DIM:
        raise ValueError(f"dimension {d} exceeds the supported maximum {MAX_DIM}")
    batch_shape = arr.shape[:-2]
    a = arr.reshape(-1, d, d).copy()
    v = np.broadcast_to(np.eye(d, dtype=complex), a.shape).copy()
    thresh = tol * np.linalg.norm(a, axis=(1, 2))
    pairs = [(p, q) for p in range(d - 1) for q in range(p + 1, d)]

    active = np.nonzero(_offdiag_norm(a) > thresh)[0]
    sweeps = 0
    while active.size:
        if sweeps == max_sweeps:
            worst = float(np.max(_offdiag_norm(a[active])))
            raise ConvergenceError(
                f"Jacobi did not converge for d={d} after {max_sweeps} sweeps "
                f"(off-diagonal norm {worst:.3g})"
            )
        sub_a = a[active]
        sub_v = v[active]
        for p, q in pairs:
            _rotate(sub_a, sub_v, p, q)
        a[active] = sub_a
        v[active] = sub_v
        sweeps += 1
        still = _offdiag_norm(sub_a) > thresh[active]
        active = active[still]

    w = np.real(np.diagonal(a, axis1=1, axis2=2)).copy()
    order = np.argsort(w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1)
    v = np.take_along_axis(v, order[:, None, :], axis=-1)
    return EigenDecomposition(w.reshape(batch_shape + (d,)), v.reshape(batch_shape + (d, d)))


def eig_hermitian(h) -> EigenDecomposition:
    """Eigen-decomposition of a single Hermitian matrix, eigenvalues ascending."""
    H = hermitian(h)
    if H.ndim != 2:
        raise ValueError(f"expected a single matrix, got shape {H.shape}")
    return eigh_batch(H)


def inverse_posdef(h, floor: float = RANK_FLOOR) -> np.ndarray:
    """Inverse of a positive definite Hermitian matrix via its eigenbasis.

    Raises :class:`RankDeficient` if any eigenvalue is ``<= floor``.
    """
    w, v = eig_hermitian(h)
    if w[0] <= floor:
        raise RankDeficient(f"smallest eigenvalue {w[0]:.3g} is not above the floor {floor:g}")
    inv = (v / w) @ np.conj(v.T)
    return hermitian(inv, tol=math.inf)


def commutator(a, b) -> np.ndarray:
    """``AB - BA``; works on stacks as long as the shapes broadcast."""
    A = np.asarray(a)
    B = np.asarray(b)
    if A.shape[-2:] != B.shape[-2:]:
        raise ValueError(f"dimension mismatch: {A.shape} vs {B.shape}")
    return A @ B - B @ A


def dagger(a) -> np.ndarray:
    return np.conj(np.swapaxes(np.asarray(a), -1, -2))


# -- JSON encoding ---------------------------------------------------------


def encode_matrix(a) -> dict:
    """``{"dim": d, "entries": [[re, im], ...]}`` in row-major order."""
    arr = _as_square(a)
    if arr.ndim != 2:
        raise ValueError("only single matrices can be encoded")
    return {
        "dim": int(arr.shape[0]),
        "entries": [[float(z.real), float(z.imag)] for z in arr.ravel()],
    }


def _finite_number(x) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ValueError(f"matrix entry component {x!r} is not a number")
    val = float(x)
    if not math.isfinite(val):
        raise ValueError(f"matrix entry component {x!r} is not finite")
    return val


def decode_matrix(obj) -> np.ndarray:
    """Inverse of :func:`encode_matrix`; strict about shape and finiteness."""
    if not isinstance(obj, dict) or "dim" not in obj or "entries" not in obj:
        raise ValueError("matrix must be an object with 'dim' and 'entries'")
    dim = obj["dim"]
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise ValueError(f"invalid dim {dim!r}")
    entries = obj["entries"]
    if not isinstance(entries, list) or len(entries) != dim * dim:
        got = len(entries) if isinstance(entries, list) else type(entries).__name__
        raise ValueError(f"expected {dim * dim} entries, got {got}")
    vals = []
    for e in entries:
        if not isinstance(e, (list, tuple)) or len(e) != 2:
            raise ValueError(f"entry {e!r} is not a [re, im] pair")
        vals.append(complex(_finite_number(e[0]), _finite_number(e[1])))
    return np.array(vals, dtype=complex).reshape(dim, dim)
