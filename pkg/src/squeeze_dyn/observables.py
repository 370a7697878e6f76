"""Reduced density matrices, entanglement entropy and squeezing along a trajectory.

The batched helpers take amplitude grids of shape ``(T, 2j+1, n_osc)`` (as
returned by :func:`squeeze_dyn.dynamics.evolve_many`) so a whole time grid is
processed with a handful of array operations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import DomainError
from .dynamics import JointState
from .spin import build_spin_operators

__all__ = [
    "Snapshot",
    "reduce_ion",
    "reduce_osc",
    "von_neumann_entropy",
    "snapshot",
    "batch_observables",
    "entropy_from_eigenvalues",
]

EIG_FLOOR = 1e-14
NEG_EIG_TOL = 1e-10
TRACE_TOL = 1e-8


@dataclass(frozen=True)
class Snapshot:
    tau: float
    S_ion: float
    xi_R: float
    xi_q: float
    jz_mean: float


def reduce_ion(state: JointState) -> np.ndarray:
    """``rho_ion = Tr_osc |psi><psi|`` on the Dicke basis ``m = -j..j``."""
    g = state.to_grid()
    return g @ g.conj().T


def reduce_osc(state: JointState) -> np.ndarray:
    """``rho_osc = Tr_ion |psi><psi|`` on Fock levels ``0 .. n_max + N``."""
    g = state.to_grid()
    return g.T @ g.conj()


def entropy_from_eigenvalues(evals: np.ndarray) -> np.ndarray:
    """``-sum p ln p`` over the last axis, with ``p < 1e-14`` dropped.

    Raises on eigenvalues below ``-1e-10``.
    """
    evals = np.asarray(evals, dtype=float)
    if evals.size and evals.min() < -NEG_EIG_TOL:
        raise DomainError(f"density matrix has negative eigenvalue {evals.min():.3g}")
    p = np.where(evals > EIG_FLOOR, evals, 1.0)
    s = -np.sum(np.where(evals > EIG_FLOOR, p * np.log(p), 0.0), axis=-1)
    # eigenvalues a hair above 1 give tiny negative values
    return np.maximum(s, 0.0)


def von_neumann_entropy(rho: np.ndarray) -> float:
    """``S = -Tr(rho ln rho)`` in nats."""
    rho = np.asarray(rho, dtype=complex)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise DomainError(f"density matrix trace {tr!r} deviates from 1")
    return float(entropy_from_eigenvalues(np.linalg.eigvalsh(rho)))


def batch_observables(grids: np.ndarray, j) -> dict[str, np.ndarray]:
    """Per-sample ``S_ion``, ``xi_R``, ``xi_q`` and ``<Jz>`` for amplitude grids.

    ``xi_R`` uses the fixed ``Jy``/``Jz`` axes and is ``inf`` where
    ``|<Jz>| < 1e-12``.  Quadrature moments come from ``<a>``, ``<a^2>`` and
    ``<a†a>`` evaluated directly on the joint amplitudes, which equals the
    reduced-oscillator route without forming ``rho_osc``.
    """
    grids = np.asarray(grids, dtype=complex)
    if grids.ndim == 2:
        grids = grids[None]
    ops = build_spin_operators(j)
    n_ions = ops.Jz.shape[0] - 1

    rho = np.einsum("tsn,tun->tsu", grids, grids.conj())
    tr = np.einsum("tss->t", rho).real
    if np.max(np.abs(tr - 1.0)) > TRACE_TOL:
        raise DomainError("joint state is not normalized")
    evals = np.linalg.eigvalsh(rho)
    s_ion = entropy_from_eigenvalues(evals)

    jz = np.einsum("tss,s->t", rho, np.diag(ops.Jz)).real
    jy = np.einsum("tsu,us->t", rho, ops.Jy).real
    jy2 = np.einsum("tsu,us->t", rho, ops.Jy2).real
    var_jy = np.maximum(jy2 - jy**2, 0.0)
    with np.errstate(divide="ignore"):
        xi_r = np.where(np.abs(jz) < 1e-12, np.inf, np.sqrt(n_ions * var_jy) / np.abs(jz))

    n_osc = grids.shape[2]
    sq = np.sqrt(np.arange(1, n_osc))
    sq2 = sq[:-1] * sq[1:]
    a1 = np.einsum("tsn,tsn,n->t", grids[:, :, :-1].conj(), grids[:, :, 1:], sq)
    a2 = np.einsum("tsn,tsn,n->t", grids[:, :, :-2].conj(), grids[:, :, 2:], sq2)
    nbar = np.einsum("tsn,n->t", np.abs(grids) ** 2, np.arange(n_osc))
    mean_q = math.sqrt(2.0) * a1.real
    var_q = np.maximum(a2.real + nbar + 0.5 - mean_q**2, 0.0)
    xi_q = np.sqrt(2.0 * var_q)
    return {"S_ion": s_ion, "xi_R": xi_r, "xi_q": xi_q, "jz_mean": jz}


def snapshot(state: JointState, tau: float = 0.0) -> Snapshot:
    obs = batch_observables(state.to_grid(), state.j)
    return Snapshot(
        tau=float(tau),
        S_ion=float(obs["S_ion"][0]),
        xi_R=float(obs["xi_R"][0]),
        xi_q=float(obs["xi_q"][0]),
        jz_mean=float(obs["jz_mean"][0]),
    )
