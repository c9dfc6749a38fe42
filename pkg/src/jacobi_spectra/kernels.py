"""Backend selection for the tridiagonal kernels.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``JACOBI_SPECTRA_BACKEND=python`` is set, the pure-Python
implementation is used.  Both return identical results up to rounding.
"""
from __future__ import annotations

import os
from contextlib import contextmanager

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # pragma: no cover - depends on the build
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels

_requested = os.environ.get("JACOBI_SPECTRA_BACKEND", "").strip().lower()
if _requested and _requested not in ("python", "cython"):
    raise ImportError(f"unknown JACOBI_SPECTRA_BACKEND={_requested!r}")
if _requested == "python" or _ckernels is None:
    _active = "python"
else:
    _active = "cython"


def backend() -> str:
    return _active


def available_backends() -> list[str]:
    return sorted(BACKENDS)


def set_backend(name: str) -> None:
    global _active
    if name not in BACKENDS:
        raise ValueError(f"backend {name!r} not available; have {available_backends()}")
    _active = name


@contextmanager
def using_backend(name: str):
    previous = _active
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def tridiag_eigh_first_row(diag, offdiag, max_iter: int = 50):
    return BACKENDS[_active].tridiag_eigh_first_row(diag, offdiag, max_iter)


def tridiag_moments(diag, offdiag, K: int):
    return BACKENDS[_active].tridiag_moments(diag, offdiag, K)
