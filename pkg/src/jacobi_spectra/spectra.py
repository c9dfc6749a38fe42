"""Spectral measures of finite Jacobi matrices.

The spectral measure of ``J`` puts mass ``w_i = q_i[0]**2`` at eigenvalue
``lambda_i``, where ``q_i`` are the orthonormal eigenvectors; equivalently its
``k``-th moment is ``(J^k)_{11}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .ensemble import SpectralMeasure, TridiagonalMatrix

MAX_SWEEPS = 50


class ConvergenceError(RuntimeError):
    def __init__(self, index: int, max_iter: int = MAX_SWEEPS):
        super().__init__(f"QL iteration for eigenvalue {index} exceeded {max_iter} sweeps")
        self.index = index


@dataclass(frozen=True, eq=False)
class MomentVector:
    """``moments[k] = <mu, x^k>`` for ``k = 0..K``; ``moments[0] == 1``."""

    moments: np.ndarray

    @property
    def K(self) -> int:
        return self.moments.size - 1

    def __getitem__(self, k):
        return self.moments[k]

    def __len__(self):
        return self.moments.size


def eigen_decompose(matrix: TridiagonalMatrix, max_iter: int = MAX_SWEEPS) -> SpectralMeasure:
    """Spectral measure of ``matrix`` by implicit QL with first-row accumulation.

    Only the first components of the eigenvectors are carried through the
    rotations, so the cost is O(n^2) rather than O(n^3).
    """
    evals, first, failed = kernels.tridiag_eigh_first_row(matrix.diag, matrix.offdiag, max_iter)
    if failed >= 0:
        raise ConvergenceError(failed, max_iter)
    order = np.argsort(evals, kind="stable")
    w = first[order] ** 2
    # the rotations keep |z| = 1 to rounding; renormalize for the sum-to-one invariant
    w /= math.fsum(w)
    return SpectralMeasure(evals[order], w)


def moments_by_recurrence(matrix: TridiagonalMatrix, K: int) -> MomentVector:
    """``(J^k)_{11}`` for ``k = 0..K`` from ``v_{k+1} = J v_k``, ``v_0 = e_1``.

    Only the leading ``K//2 + 2`` rows of ``J`` can influence these entries, so
    large matrices cost nothing extra.
    """
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    return MomentVector(kernels.tridiag_moments(matrix.diag, matrix.offdiag, int(K)))


def moments_of_measure(measure: SpectralMeasure, K: int) -> MomentVector:
    """``sum_i w_i x_i^k`` for ``k = 0..K``."""
    powers = measure.atoms[None, :] ** np.arange(K + 1)[:, None]
    return MomentVector(np.array([math.fsum(row) for row in powers * measure.weights]))


def polynomial_integral(matrix: TridiagonalMatrix, coeffs) -> float:
    """``<mu, p>`` for ``p(x) = sum_j coeffs[j] x^j`` through the moment recursion."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.size == 1:
        return float(coeffs[0])
    m = kernels.tridiag_moments(matrix.diag, matrix.offdiag, coeffs.size - 1)
    return math.fsum(coeffs * m)


def kolmogorov_distance_spectral_vs_empirical(measure: SpectralMeasure) -> float:
    """Sup-distance between the CDF with the measure's weights and with uniform weights.

    Both CDFs jump only at the atoms, so the supremum is attained right after one.
    """
    n = measure.n
    uniform = np.arange(1, n + 1) / n
    return float(np.max(np.abs(measure.cumulative() - uniform)))
