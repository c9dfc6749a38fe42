"""Killip-Nenciu tridiagonal model of the beta-Jacobi ensemble.

With ``b' = beta/2`` and independent

    c_k ~ Beta(b'(p1 - k + 1), b'(p2 - k + 1)),          1 <= k <= n
    s_k ~ Beta(b'(n - k),      b'(p1 + p2 - n - k + 1)),  1 <= k <= n - 1

the matrix with

    a_k = s_{k-1}(1 - c_{k-1}) + c_k(1 - s_{k-1})
    b_k = sqrt(c_k(1 - c_k) s_k (1 - s_{k-1})),    c_0 = s_0 = 0

has eigenvalues distributed as the beta-Jacobi ensemble.  Indices ``k`` are
1-based as written here; arrays are 0-based, so ``c_k`` is ``c[k-1]``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensemble import EnsembleParams, ParameterDomainError, TridiagonalMatrix
from .rng import SeededStream, sample_beta_pair

# stream roles: the c and s families come from separate substreams
ROLE_C = 0
ROLE_S = 1


@dataclass(frozen=True, eq=False)
class KillipNenciuDraw:
    """The auxiliary Beta variables ``c_1..c_n`` and ``s_1..s_{n-1}``.

    ``c_comp`` and ``s_comp`` hold ``1 - c`` and ``1 - s``; the sampler computes
    them directly from the Gamma pair so they keep full relative precision
    when ``c`` or ``s`` is close to 1.
    """

    c: np.ndarray
    s: np.ndarray
    c_comp: np.ndarray = None
    s_comp: np.ndarray = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        s = np.asarray(self.s, dtype=float)
        if c.ndim != 1 or s.ndim != 1 or c.size == 0 or s.size != c.size - 1:
            raise ParameterDomainError("need len(c) = n >= 1 and len(s) = n - 1")
        cc = 1.0 - c if self.c_comp is None else np.asarray(self.c_comp, dtype=float)
        sc = 1.0 - s if self.s_comp is None else np.asarray(self.s_comp, dtype=float)
        for name, arr in (("c", c), ("s", s), ("1-c", cc), ("1-s", sc)):
            if np.any(~((arr > 0.0) & (arr < 1.0))):
                raise ParameterDomainError(f"{name} entries must lie in (0, 1)")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "c_comp", cc)
        object.__setattr__(self, "s_comp", sc)

    @property
    def n(self) -> int:
        return self.c.size


def coefficient_shapes(ensemble: EnsembleParams):
    """Beta shape pairs ``(a, b)`` for the ``c`` and ``s`` families."""
    n, p1, p2, bp = ensemble.n, ensemble.p1, ensemble.p2, ensemble.beta_prime
    k = np.arange(1, n + 1, dtype=float)
    c_shapes = (bp * (p1 - k + 1), bp * (p2 - k + 1))
    ks = k[:-1]
    s_shapes = (bp * (n - ks), bp * (p1 + p2 - n - ks + 1))
    return c_shapes, s_shapes


def draw_coefficients(ensemble: EnsembleParams, stream: SeededStream) -> KillipNenciuDraw:
    (ca, cb), (sa, sb) = coefficient_shapes(ensemble)
    # s-shape b'(n-k) reaches 0 only at k = n, which is never drawn
    assert sa.size == 0 or sa.min() > 0.0
    c, cc = sample_beta_pair(ca, cb, stream.generator(ROLE_C))
    if ensemble.n > 1:
        s, sc = sample_beta_pair(sa, sb, stream.generator(ROLE_S))
    else:
        s = sc = np.empty(0)
    return KillipNenciuDraw(c, s, cc, sc)


def build_tridiagonal(draw: KillipNenciuDraw) -> TridiagonalMatrix:
    c, cc, s, sc = draw.c, draw.c_comp, draw.s, draw.s_comp
    # shifted copies carry the c_0 = s_0 = 0 convention
    s_prev = np.concatenate(([0.0], s))
    sc_prev = np.concatenate(([1.0], sc))
    cc_prev = np.concatenate(([1.0], cc[:-1]))
    diag = s_prev * cc_prev + c * sc_prev
    offdiag = np.sqrt(c[:-1] * cc[:-1] * s * sc_prev[:-1])
    return TridiagonalMatrix(diag, offdiag)


def rescale(matrix: TridiagonalMatrix, ensemble: EnsembleParams) -> TridiagonalMatrix:
    """Entrywise ``((p1 + p2) J - p1 I) / sqrt(n p1)``."""
    if matrix.n != ensemble.n:
        raise ParameterDomainError(f"matrix size {matrix.n} != ensemble n {ensemble.n}")
    p1, p2 = ensemble.p1, ensemble.p2
    scale = np.sqrt(ensemble.n * p1)
    return TridiagonalMatrix(((p1 + p2) * matrix.diag - p1) / scale,
                             (p1 + p2) * matrix.offdiag / scale)


def sample_rescaled(ensemble: EnsembleParams, stream: SeededStream) -> TridiagonalMatrix:
    """One draw of the rescaled matrix."""
    return rescale(build_tridiagonal(draw_coefficients(ensemble, stream)), ensemble)
