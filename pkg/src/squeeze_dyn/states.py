"""Initial states of the ions and the motional mode, and their squeezing metrics.

Spin states live on the Dicke basis ordered ``m = -j ... +j``; oscillator
states on the Fock basis ``n = 0 ... n_max``.  Amplitude arrays are stored
read-only so states can be shared freely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import comb

from ._validation import (
    DomainError,
    NumericalError,
    TruncationError,
    check_density,
    check_half_integer,
    check_normalized_vector,
    check_open_unit,
    check_positive,
    check_projection,
    check_spin,
)
from .spin import build_spin_operators

__all__ = [
    "TruncationPolicy",
    "SpinState",
    "OscState",
    "IntelligentSpec",
    "SqueezingReport",
    "dicke_state",
    "fock_state",
    "intelligent_state_m0_zero",
    "intelligent_state_general",
    "squeezed_vacuum",
    "jacobi_polynomial",
    "jz_and_xi_R_closed_form",
    "spectroscopic_xi_R",
    "motional_xi_q",
    "quadrature_moments",
    "ramsey_uncertainty",
    "shot_noise_limit",
    "two_ion_theta_form",
    "squeezing_report",
]

# Amplitudes below this magnitude are treated as zero when fixing the phase.
_PHASE_FLOOR = 1e-12


@dataclass(frozen=True)
class TruncationPolicy:
    """Fock-space cutoff rule for the squeezed vacuum.

    ``epsilon`` bounds the discarded probability mass before renormalization.
    The default keeps discarded amplitudes near 1e-12, which is what an
    eigenstate residual of 1e-9 needs; ``hard_cap`` limits ``n_max``.
    """

    epsilon: float = 1e-24
    hard_cap: int = 1024

    def __post_init__(self):
        check_positive(self.epsilon, "epsilon")
        if int(self.hard_cap) != self.hard_cap or self.hard_cap < 0:
            raise DomainError(f"hard_cap={self.hard_cap!r} must be a non-negative integer")


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


def _fix_phase(amps: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(amps) > _PHASE_FLOOR)
    if nz.size == 0:
        raise DomainError("state has no non-zero amplitude")
    first = amps[nz[0]]
    return amps * (abs(first) / first)


@dataclass(frozen=True)
class SpinState:
    """Pure state of the collective spin, amplitudes ``c_m`` for ``m = -j..j``."""

    j: Fraction
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        j = check_spin(self.j)
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (int(2 * j) + 1,):
            raise DomainError(f"expected {int(2 * j) + 1} amplitudes for j={j}, got {amps.shape}")
        check_normalized_vector(amps, tol=1e-12)
        object.__setattr__(self, "j", j)
        object.__setattr__(self, "amplitudes", _freeze(amps))

    @classmethod
    def from_unnormalized(cls, j, amplitudes) -> "SpinState":
        amps = np.asarray(amplitudes, dtype=complex)
        amps = _fix_phase(amps / np.linalg.norm(amps))
        return cls(check_spin(j), amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def n_ions(self) -> int:
        return int(2 * self.j)

    @property
    def m_values(self) -> np.ndarray:
        return -float(self.j) + np.arange(self.dim, dtype=float)

    def density(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


@dataclass(frozen=True)
class OscState:
    """Pure oscillator state on Fock levels ``0..n_max``.

    ``tail_bound`` is an upper bound on the probability mass that lay above
    ``n_max`` before renormalization (zero for exact finite states).
    """

    amplitudes: np.ndarray = field(repr=False)
    tail_bound: float = 0.0

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size == 0:
            raise DomainError("oscillator amplitudes must be a non-empty vector")
        check_normalized_vector(amps, tol=1e-12)
        object.__setattr__(self, "amplitudes", _freeze(amps))

    @classmethod
    def from_unnormalized(cls, amplitudes, tail_bound: float = 0.0) -> "OscState":
        amps = np.asarray(amplitudes, dtype=complex)
        return cls(_fix_phase(amps / np.linalg.norm(amps)), tail_bound)

    @property
    def n_max(self) -> int:
        return self.amplitudes.size - 1

    def density(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


@dataclass(frozen=True)
class IntelligentSpec:
    """Branch data of an eigenstate of ``eta*Jx - i*Jy``.

    ``lam`` is the exact eigenvalue ``i * m0 * sqrt(1 - eta**2)``;
    ``eig_error`` is the distance from it of the eigenvalue the numerical
    solver returned.
    """

    eta: float
    m0: Fraction
    lam: complex
    eig_error: float = 0.0


@dataclass(frozen=True)
class SqueezingReport:
    xi_R: float
    xi_q: float
    jz_mean: float
    delta_jx: float
    delta_jy: float
    delta_q: float
    delta_p: float


# --------------------------------------------------------------------------
# basis states


def dicke_state(j: float, m: float) -> SpinState:
    mf = check_projection(j, m)
    jf = check_spin(j)
    amps = np.zeros(int(2 * jf) + 1, dtype=complex)
    amps[int(mf + jf)] = 1.0
    return SpinState(jf, amps)


def fock_state(n: int, n_max: int) -> OscState:
    if int(n) != n or int(n_max) != n_max or not (0 <= n <= n_max):
        raise DomainError(f"need integers 0 <= n <= n_max, got n={n!r}, n_max={n_max!r}")
    amps = np.zeros(int(n_max) + 1, dtype=complex)
    amps[int(n)] = 1.0
    return OscState(amps)


# --------------------------------------------------------------------------
# spectroscopic intelligent states


def intelligent_state_m0_zero(j: int, eta: float) -> SpinState:
    """Intelligent state with eigenvalue zero, built from its closed form.

    Only even offsets ``m = -j + 2r`` are populated, with
    ``c_{-j+2r} / c_{-j} = C(j, r) C(2j, 2r)^(-1/2) ((1-eta)/(1+eta))^r``.
    Requires integer ``j`` (an even number of ions).
    """
    jf = check_spin(j)
    if jf.denominator != 1 or jf == 0:
        raise DomainError(
            f"m0 = 0 requires an even number of ions (integer j >= 1), got j={jf}"
        )
    eta = check_open_unit(eta, "eta")
    jj = int(jf)
    ratio = (1.0 - eta) / (1.0 + eta)
    amps = np.zeros(2 * jj + 1, dtype=complex)
    r = np.arange(jj + 1)
    amps[2 * r] = comb(jj, r, exact=False) / np.sqrt(comb(2 * jj, 2 * r)) * ratio**r
    return SpinState.from_unnormalized(jf, amps)


def intelligent_state_general(j: float, eta: float, m0: float) -> tuple[SpinState, IntelligentSpec]:
    """Eigenstate of ``eta*Jx - i*Jy`` on the branch ``lambda = i*m0*sqrt(1-eta^2)``.

    The spectrum is located with a dense non-Hermitian eigensolver; the
    eigenvector is then recomputed as the null vector of
    ``eta*Jx - i*Jy - lambda`` at the exact branch eigenvalue, which is far
    better conditioned than the raw eigenvector as ``eta -> 1``.

    Raises
    ------
    NumericalError
        If no computed eigenvalue lies within 1e-6 of the target.
    """
    jf = check_spin(j)
    eta = check_open_unit(eta, "eta")
    m0f = check_half_integer(m0, "m0")
    if (jf - m0f).denominator != 1 or abs(m0f) > jf:
        raise DomainError(f"m0={m0!r} must be one of j, j-1, ..., -j for j={jf}")

    ops = build_spin_operators(jf)
    a = eta * ops.Jx - 1j * ops.Jy
    target = 1j * float(m0f) * math.sqrt(1.0 - eta * eta)
    evals = np.linalg.eigvals(a)
    err = float(np.min(np.abs(evals - target)))
    if err > 1e-6:
        raise NumericalError(
            f"no eigenvalue of eta*Jx - i*Jy near {target}; closest is off by {err:.3g}"
        )
    shifted = a - target * np.eye(a.shape[0])
    _, _, vh = np.linalg.svd(shifted)
    vec = vh[-1].conj()
    state = SpinState.from_unnormalized(jf, vec)
    return state, IntelligentSpec(eta=eta, m0=m0f, lam=target, eig_error=err)


# --------------------------------------------------------------------------
# squeezed vacuum


def squeezed_vacuum(xi_q: float, trunc: TruncationPolicy | None = None) -> OscState:
    """Squeezed vacuum with position squeezing ``xi_q = sqrt(2) * Delta q``.

    Coefficients follow the two-step recurrence
    ``b_{n+2} = -k sqrt((n+1)/(n+2)) b_n`` with ``k = (1-xi^2)/(1+xi^2)``
    and ``b_0 = sqrt(2 xi / (1 + xi^2))``.  Since successive squared
    amplitudes shrink by at least ``k^2``, the mass above ``n_max`` is bounded
    by ``b_{n_max+2}^2 / (1 - k^2)``; ``n_max`` is the first even cutoff where
    that bound drops below ``trunc.epsilon``.
    """
    trunc = trunc or TruncationPolicy()
    xi = float(xi_q)
    if not (xi > 0.0 and math.isfinite(xi)):
        raise DomainError(f"xi_q={xi_q!r} must be positive")
    k = (1.0 - xi * xi) / (1.0 + xi * xi)
    b0 = math.sqrt(2.0 * xi / (1.0 + xi * xi))
    even = [b0]
    denom = 1.0 - k * k
    while True:
        n = 2 * (len(even) - 1)
        b_next = even[-1] * (-k) * math.sqrt((n + 1) / (n + 2))
        tail = b_next * b_next / denom
        if tail < trunc.epsilon:
            break
        if n + 2 > trunc.hard_cap:
            raise TruncationError(
                f"squeezed vacuum with xi_q={xi} needs n_max > {trunc.hard_cap} "
                f"for tail mass < {trunc.epsilon:g}"
            )
        even.append(b_next)
    n_max = 2 * (len(even) - 1)
    amps = np.zeros(n_max + 1, dtype=complex)
    amps[0::2] = even
    amps /= np.linalg.norm(amps)
    return OscState(amps, tail_bound=tail)


# --------------------------------------------------------------------------
# closed forms


def _gbinom(z: float, k: int) -> float:
    """Binomial coefficient with arbitrary real upper argument."""
    out = 1.0
    for i in range(k):
        out *= (z - i) / (i + 1)
    return out


def jacobi_polynomial(n: int, alpha: float, beta: float, x: float) -> float:
    """Jacobi polynomial from its explicit finite sum.

    ``P_n^(a,b)(x) = sum_s C(n+a, n-s) C(n+b, s) ((x-1)/2)^s ((x+1)/2)^(n-s)``
    with generalized binomials, so negative integer ``alpha``/``beta`` are fine.
    """
    if int(n) != n or n < 0:
        raise DomainError(f"degree n={n!r} must be a non-negative integer")
    n = int(n)
    lo = (x - 1.0) / 2.0
    hi = (x + 1.0) / 2.0
    return math.fsum(
        _gbinom(n + alpha, n - s) * _gbinom(n + beta, s) * lo**s * hi ** (n - s)
        for s in range(n + 1)
    )


def jz_and_xi_R_closed_form(j: float, eta: float, m0: float) -> tuple[float, float]:
    """``(<Jz>, xi_R)`` of an intelligent state from the Jacobi closed form.

    ``<Jz> = -j*eta*F`` and ``xi_R = F**-0.5`` with
    ``F = 1 + (j+|m0|)/j * (1-eta^2) * P_{j-|m0|-1}^(1,-2j)(x) / P_{j-|m0|}^(0,-2j-1)(x)``
    evaluated at ``x = 1 - 2 eta^2``.
    """
    jf = check_spin(j)
    if jf == 0:
        raise DomainError("j must be positive")
    eta = check_open_unit(eta, "eta")
    m0f = check_half_integer(m0, "m0")
    if (jf - m0f).denominator != 1 or abs(m0f) > jf:
        raise DomainError(f"m0={m0!r} must be one of j, j-1, ..., -j for j={jf}")
    jj = float(jf)
    n = int(jf - abs(m0f))
    x = 1.0 - 2.0 * eta * eta
    if n == 0:
        f = 1.0
    else:
        num = jacobi_polynomial(n - 1, 1.0, -2.0 * jj, x)
        den = jacobi_polynomial(n, 0.0, -2.0 * jj - 1.0, x)
        f = 1.0 + (jj + abs(float(m0f))) / jj * (1.0 - eta * eta) * num / den
    return -jj * eta * f, f**-0.5


# --------------------------------------------------------------------------
# squeezing metrics


def _spin_array(state) -> tuple[np.ndarray, Fraction]:
    if isinstance(state, SpinState):
        return state.amplitudes, state.j
    arr = np.asarray(state, dtype=complex)
    j = check_half_integer((arr.shape[0] - 1) / 2)
    if arr.ndim == 1:
        check_normalized_vector(arr)
    else:
        check_density(arr)
    return arr, j


def _osc_array(state) -> np.ndarray:
    if isinstance(state, OscState):
        return state.amplitudes
    arr = np.asarray(state, dtype=complex)
    if arr.ndim == 1:
        check_normalized_vector(arr)
    else:
        check_density(arr)
    return arr


def _spin_stats(state) -> tuple[float, float, float, int, Fraction]:
    """``(<Jz>, Delta Jx, Delta Jy, N, j)`` using the exact squared operators."""
    arr, j = _spin_array(state)
    ops = build_spin_operators(j)
    if arr.ndim == 1:
        def expect(op):
            return float(np.vdot(arr, op @ arr).real)
    else:
        def expect(op):
            return float(np.trace(arr @ op).real)
    jz = expect(ops.Jz)
    vx = max(expect(ops.Jx2) - expect(ops.Jx) ** 2, 0.0)
    vy = max(expect(ops.Jy2) - expect(ops.Jy) ** 2, 0.0)
    return jz, math.sqrt(vx), math.sqrt(vy), int(2 * j), j


def spectroscopic_xi_R(state) -> float:
    """``sqrt(N) * Delta Jy / |<Jz>|``; ``inf`` when ``|<Jz>| < 1e-12``.

    Accepts a :class:`SpinState`, a normalized vector or a density matrix.
    """
    jz, _, djy, n_ions, _ = _spin_stats(state)
    if abs(jz) < 1e-12:
        return math.inf
    return math.sqrt(n_ions * djy * djy) / abs(jz)


def quadrature_moments(state) -> tuple[float, float, float, float]:
    """``(<q>, Var q, <p>, Var p)`` with ``q = (a + a†)/sqrt(2)``, ``p = (a - a†)/(i sqrt(2))``.

    Moments are assembled from ``<a>``, ``<a^2>`` and ``<a†a>``, which are
    exact for any state supported on the stored Fock levels, so no
    truncated-matrix artifact enters ``<q^2>``.
    """
    arr = _osc_array(state)
    d = arr.shape[0]
    sq = np.sqrt(np.arange(1, d))
    sq2 = sq[:-1] * sq[1:]
    nums = np.arange(d)
    if arr.ndim == 1:
        a1 = np.vdot(arr[:-1], sq * arr[1:])
        a2 = np.vdot(arr[:-2], sq2 * arr[2:])
        nbar = float(np.sum(nums * np.abs(arr) ** 2))
    else:
        # <a> = sum_n sqrt(n+1) rho[n+1, n]
        a1 = np.sum(sq * np.diagonal(arr, -1))
        a2 = np.sum(sq2 * np.diagonal(arr, -2))
        nbar = float(np.sum(nums * np.diagonal(arr).real))
    mean_q = math.sqrt(2.0) * a1.real
    mean_p = math.sqrt(2.0) * a1.imag
    # q^2 = (a^2 + a†^2 + 2 a†a + 1) / 2, p^2 = (-a^2 - a†^2 + 2 a†a + 1) / 2
    var_q = a2.real + nbar + 0.5 - mean_q**2
    var_p = -a2.real + nbar + 0.5 - mean_p**2
    return mean_q, max(var_q, 0.0), mean_p, max(var_p, 0.0)


def motional_xi_q(state) -> float:
    """Position squeezing ``sqrt(2) * Delta q`` (1 for the vacuum)."""
    _, var_q, _, _ = quadrature_moments(state)
    return math.sqrt(2.0 * var_q)


def shot_noise_limit(n_ions: int, T: float = 1.0) -> float:
    return 1.0 / (check_positive(T, "T") * math.sqrt(n_ions))


def ramsey_uncertainty(state, T: float) -> float:
    """Ramsey frequency uncertainty ``Delta Jy / (T |<Jz>|)`` at phase pi/2."""
    T = check_positive(T, "T")
    jz, _, djy, _, _ = _spin_stats(state)
    if abs(jz) < 1e-12:
        raise DomainError("<Jz> = 0: the Ramsey signal carries no frequency information")
    return djy / (T * abs(jz))


def two_ion_theta_form(theta: float) -> tuple[SpinState, float]:
    """Two-ion intelligent state ``sin(theta)|1,-1> + cos(theta)|1,1>``.

    ``theta = arctan((1+eta)/(1-eta))`` maps ``eta`` in (0, 1) onto
    (pi/4, pi/2); the endpoints are accepted as limits.  The returned
    ``xi_R`` is ``(1 + sin 2 theta)^(-1/2)``.
    """
    theta = float(theta)
    if not (math.pi / 4 - 1e-15 <= theta <= math.pi / 2 + 1e-15):
        raise DomainError(f"theta={theta!r} must lie in [pi/4, pi/2]")
    amps = np.array([math.sin(theta), 0.0, math.cos(theta)], dtype=complex)
    amps[np.abs(amps) < 1e-15] = 0.0
    state = SpinState.from_unnormalized(1, amps)
    return state, (1.0 + math.sin(2.0 * theta)) ** -0.5


def squeezing_report(spin, osc) -> SqueezingReport:
    jz, djx, djy, n_ions, _ = _spin_stats(spin)
    _, vq, _, vp = quadrature_moments(osc)
    xi_r = math.inf if abs(jz) < 1e-12 else math.sqrt(n_ions * djy * djy) / abs(jz)
    return SqueezingReport(
        xi_R=xi_r,
        xi_q=math.sqrt(2.0 * vq),
        jz_mean=jz,
        delta_jx=djx,
        delta_jy=djy,
        delta_q=math.sqrt(vq),
        delta_p=math.sqrt(vp),
    )
