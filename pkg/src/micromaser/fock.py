"""Truncated Fock-basis density matrices, initial states and field diagnostics.

All matrices live in the number basis ``|0>, ..., |dim-1>``.  The cutoff is
adaptive: constructors pick the smallest basis whose top band carries no more
than ``tail_tol`` probability, and :func:`ensure_headroom` grows it on demand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidParameterError

DEFAULT_TAIL_TOL = 1e-10
#: number of top diagonal entries checked by the tail condition
TAIL_BAND = 2
#: smallest basis that can satisfy the tail condition with an occupied |0>
MIN_DIM = TAIL_BAND + 1

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
PSD_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Field density matrix rho(n, n') with a Fock cutoff ``dim``.

    Construction checks shape, Hermiticity, unit trace and the tail
    condition.  Positivity costs an eigendecomposition and is only checked
    by :meth:`validate`.
    """

    elements: np.ndarray
    tail_tol: float = DEFAULT_TAIL_TOL

    def __post_init__(self):
        m = np.array(self.elements, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise InvalidParameterError(f"density matrix must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise InvalidParameterError("density matrix has non-finite entries")
        if not (0 < self.tail_tol <= 1e-6):
            raise InvalidParameterError(f"tail_tol must lie in (0, 1e-6], got {self.tail_tol}")
        m.setflags(write=False)
        object.__setattr__(self, "elements", m)
        herm = np.max(np.abs(m - m.conj().T))
        if herm > HERMITIAN_TOL:
            raise InvalidParameterError(f"density matrix not Hermitian (max deviation {herm:.3e})")
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidParameterError(f"density matrix trace is {tr!r}, expected 1")
        if self.tail_mass() > self.tail_tol:
            raise InvalidParameterError(
                f"top {TAIL_BAND} levels carry {self.tail_mass():.3e} > tail_tol={self.tail_tol:.1e}; "
                "extend the basis with ensure_headroom"
            )

    @classmethod
    def _trusted(cls, m: np.ndarray, tail_tol: float) -> "DensityMatrix":
        """Wrap a matrix that is Hermitian by construction; trace and tail are still checked."""
        obj = object.__new__(cls)
        m.setflags(write=False)
        object.__setattr__(obj, "elements", m)
        object.__setattr__(obj, "tail_tol", tail_tol)
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidParameterError(f"density matrix trace is {tr!r}, expected 1")
        if obj.tail_mass() > tail_tol:
            raise InvalidParameterError(f"top {TAIL_BAND} levels carry {obj.tail_mass():.3e} > tail_tol")
        return obj

    @property
    def dim(self) -> int:
        return self.elements.shape[0]

    @property
    def populations(self) -> np.ndarray:
        return self.elements.diagonal().real.copy()

    def tail_mass(self, band: int = TAIL_BAND) -> float:
        return float(np.sum(self.elements.diagonal().real[-band:]))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.elements)[0])

    def validate(self) -> None:
        """Full invariant check including positive semidefiniteness."""
        lam = self.min_eigenvalue()
        if lam < -PSD_TOL:
            raise InvalidParameterError(f"density matrix not positive semidefinite (min eigenvalue {lam:.3e})")


@dataclass(frozen=True)
class FieldDiagnostics:
    """Scalar summary of a field state.

    ``mandel_q`` is ``None`` for the vacuum, where the ratio is undefined.
    """

    purity_deficit: float
    mean_n: float
    variance_n: float
    mandel_q: Optional[float]


def _check_mean(mean_n, tail_tol):
    if not (isinstance(mean_n, (int, float, np.floating, np.integer)) and math.isfinite(mean_n)) or mean_n < 0:
        raise InvalidParameterError(f"mean_n must be finite and non-negative, got {mean_n!r}")
    if not (0 < tail_tol <= 1e-6):
        raise InvalidParameterError(f"tail_tol must lie in (0, 1e-6], got {tail_tol!r}")


def _diagonal_state(log_p: np.ndarray, tail_tol: float) -> DensityMatrix:
    """Truncate a diagonal distribution given by log-probabilities on a long support.

    The cutoff is the smallest ``dim`` for which both the discarded mass and
    the top band stay below ``tail_tol``; the kept part is renormalized.
    """
    p = np.exp(log_p)
    # mass at or beyond each index
    beyond = np.cumsum(p[::-1])[::-1]
    dim = MIN_DIM
    while True:
        discarded = beyond[dim] if dim < len(p) else 0.0
        top = p[dim - TAIL_BAND:dim].sum()
        if discarded <= tail_tol and top <= tail_tol / 2:
            break
        dim += 1
        if dim >= len(p):
            raise InvalidParameterError("support too short to meet tail_tol")  # pragma: no cover
    kept = p[:dim] / p[:dim].sum()
    return DensityMatrix(np.diag(kept).astype(complex), tail_tol)


def _support_length(mean_n: float, tail_tol: float) -> int:
    # generous enough for both geometric and Poisson tails
    return int(4 * mean_n + 40 + (mean_n + 1) * math.log(1.0 / tail_tol) * 1.5)


def thermal_state(mean_n: float, tail_tol: float = DEFAULT_TAIL_TOL) -> DensityMatrix:
    """Thermal field with geometric populations nbar^n / (nbar+1)^(n+1)."""
    _check_mean(mean_n, tail_tol)
    n = np.arange(_support_length(mean_n, tail_tol))
    if mean_n == 0:
        log_p = np.where(n == 0, 0.0, -np.inf)
    else:
        log_p = n * math.log(mean_n) - (n + 1) * math.log1p(mean_n)
    return _diagonal_state(log_p, tail_tol)


def dephased_coherent_state(mean_n: float, tail_tol: float = DEFAULT_TAIL_TOL) -> DensityMatrix:
    """Phase-diffused coherent state: Poisson populations with mean ``mean_n``."""
    _check_mean(mean_n, tail_tol)
    n = np.arange(_support_length(mean_n, tail_tol))
    if mean_n == 0:
        log_p = np.where(n == 0, 0.0, -np.inf)
    else:
        log_p = n * math.log(mean_n) - mean_n - np.array([math.lgamma(k + 1) for k in n])
    return _diagonal_state(log_p, tail_tol)


def fock_state(n: int, dim: int, tail_tol: float = DEFAULT_TAIL_TOL) -> DensityMatrix:
    """Number state |n><n| in a basis of size ``dim``.

    ``dim`` must leave the top two levels empty, i.e. ``n < dim - 2``;
    use ``n < dim`` with :func:`ensure_headroom` otherwise.
    """
    if not (0 <= n < dim):
        raise InvalidParameterError(f"Fock index n={n} outside basis of size {dim}")
    m = np.zeros((dim, dim), dtype=complex)
    m[n, n] = 1.0
    short = max(0, n + MIN_DIM - dim)
    if short:
        m = np.pad(m, (0, short))
    return DensityMatrix(m, tail_tol)


def diagnostics(rho: DensityMatrix) -> FieldDiagnostics:
    m = rho.elements
    purity = float(np.sum(np.abs(m) ** 2))
    p = rho.populations
    n = np.arange(rho.dim)
    mean = float(p @ n)
    var = float(p @ (n * n)) - mean * mean
    q = var / mean - 1.0 if mean > 0 else None
    return FieldDiagnostics(max(0.0, 1.0 - purity), mean, max(0.0, var), q)


def photon_distribution(rho: DensityMatrix) -> list[tuple[int, float]]:
    """Pairs ``(n, P(n))`` read off the diagonal."""
    d = rho.elements.diagonal()
    if np.max(np.abs(d.imag)) > 1e-12:
        raise InvalidParameterError("diagonal has an imaginary part")
    return [(int(k), float(v)) for k, v in enumerate(d.real)]


def ensure_headroom(rho: DensityMatrix, extra: int) -> DensityMatrix:
    """Zero-pad the basis by ``extra`` levels."""
    if extra < 0:
        raise InvalidParameterError(f"extra must be non-negative, got {extra}")
    if extra == 0:
        return rho
    return DensityMatrix(np.pad(rho.elements, (0, extra)), rho.tail_tol)


def truncate(rho: DensityMatrix, dim: int) -> DensityMatrix:
    """Drop levels ``>= dim``; only allowed when they are unoccupied."""
    if dim > rho.dim:
        raise InvalidParameterError(f"cannot truncate dim {rho.dim} up to {dim}")
    dropped = rho.elements.diagonal().real[dim:].sum()
    if dropped > rho.tail_tol:
        raise InvalidParameterError(f"truncation would discard probability {dropped:.3e}")
    return DensityMatrix(rho.elements[:dim, :dim], rho.tail_tol)
