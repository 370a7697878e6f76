"""Collective spin operators on the symmetric Dicke manifold.

All matrices use the basis ``|j, m>`` ordered by ascending projection,
``m = -j, -j+1, ..., +j``, so row/column ``s`` holds ``m = -j + s``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from ._validation import (
    DomainError,
    check_density,
    check_hermitian,
    check_normalized_vector,
    check_projection,
    check_spin,
)

__all__ = [
    "SpinQuantum",
    "SpinMatrices",
    "ladder_element",
    "build_spin_operators",
    "mean_and_variance",
]


@dataclass(frozen=True)
class SpinQuantum:
    """Total spin ``j = N/2`` of ``N`` two-level ions."""

    j: Fraction

    def __post_init__(self):
        object.__setattr__(self, "j", check_spin(self.j))

    @classmethod
    def from_ions(cls, n_ions: int) -> "SpinQuantum":
        if int(n_ions) != n_ions or n_ions < 0:
            raise DomainError(f"n_ions={n_ions!r} must be a non-negative integer")
        return cls(Fraction(int(n_ions), 2))

    @property
    def dim(self) -> int:
        return int(2 * self.j) + 1

    @property
    def n_ions(self) -> int:
        return int(2 * self.j)

    @property
    def m_values(self) -> np.ndarray:
        return -float(self.j) + np.arange(self.dim, dtype=float)


@dataclass(frozen=True)
class SpinMatrices:
    j: Fraction
    Jx: np.ndarray = field(repr=False)
    Jy: np.ndarray = field(repr=False)
    Jz: np.ndarray = field(repr=False)
    Jplus: np.ndarray = field(repr=False)
    Jminus: np.ndarray = field(repr=False)
    # squares assembled entry by entry, exact on Dicke states
    Jx2: np.ndarray = field(repr=False)
    Jy2: np.ndarray = field(repr=False)


def ladder_element(j: float, m: float) -> float:
    """Matrix element ``<j, m+1| J+ |j, m> = sqrt(j(j+1) - m(m+1))``.

    Returns 0 for the top state ``m = j``.
    """
    jf = check_spin(j)
    mf = check_projection(jf, m)
    value = jf * (jf + 1) - mf * (mf + 1)
    return float(np.sqrt(float(value)))


def _ladder_column(j: Fraction) -> np.ndarray:
    m = -float(j) + np.arange(int(2 * j), dtype=float)
    jj = float(j)
    return np.sqrt(jj * (jj + 1) - m * (m + 1))


@lru_cache(maxsize=64)
def _spin_matrices_cached(j: Fraction) -> SpinMatrices:
    dim = int(2 * j) + 1
    jplus = np.zeros((dim, dim), dtype=complex)
    idx = np.arange(dim - 1)
    jplus[idx + 1, idx] = _ladder_column(j)
    jminus = jplus.conj().T.copy()
    jz = np.diag(-float(j) + np.arange(dim, dtype=float)).astype(complex)
    jx = (jplus + jminus) / 2
    jy = (jplus - jminus) / 2j

    # Jx^2, Jy^2 = [(J+J- + J-J+) +/- (J+^2 + J-^2)] / 4
    m = -float(j) + np.arange(dim, dtype=float)
    jj = float(j)
    diag = np.diag((jj * (jj + 1) - m * m) / 2)
    lad = _ladder_column(j)
    two = np.zeros((dim, dim))
    if dim > 2:
        k = np.arange(dim - 2)
        two[k + 2, k] = lad[:-1] * lad[1:] / 4
        two[k, k + 2] = two[k + 2, k]
    jx2 = (diag + two).astype(complex)
    jy2 = (diag - two).astype(complex)
    for mat in (jplus, jminus, jz, jx, jy, jx2, jy2):
        mat.setflags(write=False)
    return SpinMatrices(j=j, Jx=jx, Jy=jy, Jz=jz, Jplus=jplus, Jminus=jminus, Jx2=jx2, Jy2=jy2)


def build_spin_operators(q: SpinQuantum | float) -> SpinMatrices:
    """Dense collective spin matrices for spin ``q.j`` (or a bare ``j``).

    The returned arrays are read-only and shared between calls.
    """
    j = q.j if isinstance(q, SpinQuantum) else check_spin(q)
    return _spin_matrices_cached(j)


def mean_and_variance(op: np.ndarray, state: np.ndarray) -> tuple[float, float]:
    """Expectation value and variance of a Hermitian operator.

    Parameters
    ----------
    op : (d, d) array
        Hermitian operator.
    state : (d,) or (d, d) array
        Normalized state vector or density matrix.

    Returns
    -------
    mean, variance : float
        ``<op>`` and ``<op^2> - <op>^2``; small negative variances from
        roundoff are clamped to zero.
    """
    op = check_hermitian(op)
    state = np.asarray(state)
    if state.ndim == 1:
        psi = check_normalized_vector(state)
        phi = op @ psi
        mean = float(np.vdot(psi, phi).real)
        second = float(np.vdot(phi, phi).real)
    else:
        rho = check_density(state)
        mean = float(np.trace(rho @ op).real)
        second = float(np.trace(rho @ op @ op).real)
    var = second - mean * mean
    if var < -1e-12 * max(1.0, second):
        raise DomainError(f"negative variance {var!r}; state or operator invalid")
    return mean, max(var, 0.0)
