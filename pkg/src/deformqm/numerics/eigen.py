"""Lowest eigenpairs of real symmetric banded matrices.

Eigenvalues come from LAPACK's banded solver (reduction to tridiagonal form
followed by bisection). Eigenvectors are then obtained by shifted inverse
iteration on the band, so no dense ``N x N`` matrix is ever formed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sps

from ..errors import ConvergenceFailure, ParameterRange
from ..fdeform import GridOperator

BACKWARD_TOL = 1e-10


@dataclass(frozen=True)
class EigenResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    residuals: np.ndarray
    matrix_norm: float
    iterations: int = 0

    def __len__(self) -> int:
        return len(self.eigenvalues)

    @property
    def backward_stable(self) -> bool:
        return bool(np.all(self.residuals <= BACKWARD_TOL * self.matrix_norm))


def _band_storage(mat: sps.spmatrix, kd: int) -> np.ndarray:
    n = mat.shape[0]
    ab = np.zeros((kd + 1, n))
    dia = sps.csr_matrix(mat)
    for d in range(kd + 1):
        ab[kd - d, d:] = dia.diagonal(d)
    return ab


def _general_band(upper: np.ndarray, kd: int) -> np.ndarray:
    # (l, u) storage for solve_banded from symmetric upper storage
    n = upper.shape[1]
    full = np.zeros((2 * kd + 1, n))
    full[: kd + 1] = upper
    for d in range(1, kd + 1):
        full[kd + d, : n - d] = upper[kd - d, d:]
    return full


def _inf_norm(mat: sps.spmatrix) -> float:
    return float(np.abs(mat).sum(axis=1).max())


def _start_vector(n: int, j: int) -> np.ndarray:
    t = np.arange(1, n + 1, dtype=float) / (n + 1)
    return 1.0 + 0.5 * np.sin((j + 1) * np.pi * t) + 0.25 * np.cos(7.0 * (j + 1) * t)


def eigensolve(
    op: GridOperator | sps.spmatrix | np.ndarray,
    k_lowest: int,
    *,
    vectors: bool = True,
    max_iter: int = 6,
) -> EigenResult:
    """``k_lowest`` smallest eigenpairs with per-pair residuals ``||Hv - lambda v||``.

    Deterministic for fixed input. Raises ``ConvergenceFailure`` if LAPACK
    fails or inverse iteration cannot reach the backward-stability target.
    """
    mat = op.matrix if isinstance(op, GridOperator) else sps.csr_matrix(op)
    if isinstance(op, GridOperator) and op.symmetry != 1:
        raise ParameterRange("eigensolve needs a symmetric (Hermitian) operator")
    n = mat.shape[0]
    if not 1 <= k_lowest <= n:
        raise ParameterRange("need 1 <= k_lowest <= n_points", k_lowest=k_lowest, n=n)
    coo = sps.coo_matrix(mat)
    kd = int(np.abs(coo.row - coo.col).max()) if coo.nnz else 0
    ab = _band_storage(mat, kd)
    try:
        evals = sla.eig_banded(ab, lower=False, eigvals_only=True, select="i", select_range=(0, k_lowest - 1))
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceFailure("banded eigenvalue solver failed", reason=str(exc)) from exc
    evals = np.sort(np.asarray(evals, dtype=float))
    norm = _inf_norm(mat)
    if not vectors:
        return EigenResult(evals, None, np.full(len(evals), np.nan), norm)

    full = _general_band(ab, kd)
    vecs = np.empty((n, len(evals)))
    resid = np.empty(len(evals))
    eps = np.finfo(float).eps
    cluster_tol = 1e-9 * max(norm, 1.0)
    used = 0
    for j, lam in enumerate(evals):
        shift = lam + 4 * eps * max(norm, 1.0) * (1 + j % 3)
        shifted = full.copy()
        shifted[kd] -= shift
        v = _start_vector(n, j)
        peers = [i for i in range(j) if abs(evals[i] - lam) < cluster_tol]
        for it in range(1, max_iter + 1):
            try:
                v = sla.solve_banded((kd, kd), shifted, v, check_finite=False)
            except np.linalg.LinAlgError as exc:
                raise ConvergenceFailure("inverse iteration hit a singular band", level=j) from exc
            for i in peers:
                v -= (vecs[:, i] @ v) * vecs[:, i]
            v /= np.linalg.norm(v)
            r = float(np.linalg.norm(mat @ v - lam * v))
            used = max(used, it)
            if r <= BACKWARD_TOL * norm and it >= 2:
                break
        else:
            if r > BACKWARD_TOL * norm:
                raise ConvergenceFailure(
                    "inverse iteration did not converge", level=j, residual=r, matrix_norm=norm, iterations=max_iter
                )
        # fix the sign: largest component positive
        if v[np.argmax(np.abs(v))] < 0:
            v = -v
        vecs[:, j] = v
        resid[j] = r
    return EigenResult(evals, vecs, resid, norm, used)
