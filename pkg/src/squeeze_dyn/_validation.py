"""Small argument checkers shared by the public constructors."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


class DomainError(ValueError):
    """A physical parameter lies outside the allowed range."""


class TruncationError(RuntimeError):
    """The Fock-space cutoff needed for the requested accuracy is too large."""


class NumericalError(RuntimeError):
    """A numerical routine failed to reach its accuracy target."""


NORM_TOL = 1e-10
HERMITIAN_TOL = 1e-12


def check_half_integer(value: float, name: str = "j") -> Fraction:
    """Return ``value`` as an exact half-integer, raising if it is not one."""
    twice = 2 * float(value)
    if not math.isfinite(twice) or abs(twice - round(twice)) > 1e-9:
        raise DomainError(f"{name}={value!r} is not an integer or half-integer")
    return Fraction(int(round(twice)), 2)


def check_spin(j: float) -> Fraction:
    jf = check_half_integer(j, "j")
    if jf < 0:
        raise DomainError(f"j={j!r} must be non-negative")
    return jf


def check_projection(j: float, m: float) -> Fraction:
    """Validate ``-j <= m <= j`` with ``j - m`` integral."""
    jf = check_spin(j)
    mf = check_half_integer(m, "m")
    if (jf - mf).denominator != 1:
        raise DomainError(f"m={m!r} and j={j!r} must differ by an integer")
    if abs(mf) > jf:
        raise DomainError(f"|m|={abs(mf)} exceeds j={jf}")
    return mf


def check_open_unit(value: float, name: str) -> float:
    value = float(value)
    if not (0.0 < value < 1.0):
        raise DomainError(f"{name}={value!r} must lie in the open interval (0, 1)")
    return value


def check_positive(value: float, name: str) -> float:
    value = float(value)
    if not (value > 0.0 and math.isfinite(value)):
        raise DomainError(f"{name}={value!r} must be a positive finite number")
    return value


def check_normalized_vector(psi: np.ndarray, tol: float = NORM_TOL) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    norm2 = float(np.vdot(psi, psi).real)
    if abs(norm2 - 1.0) > tol:
        raise DomainError(f"state is not normalized (norm^2 = {norm2!r})")
    return psi


def check_density(rho: np.ndarray, tol: float = NORM_TOL) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DomainError(f"density matrix must be square, got shape {rho.shape}")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > tol:
        raise DomainError(f"density matrix trace is {tr!r}, expected 1")
    return rho


def check_hermitian(op: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    op = np.asarray(op, dtype=complex)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise DomainError(f"operator must be square, got shape {op.shape}")
    if np.max(np.abs(op - op.conj().T), initial=0.0) > tol:
        raise DomainError("operator is not Hermitian")
    return op
