"""Exact evolution under ``H = g (a† J- + a J+)`` block by block.

``H`` conserves the total excitation ``L = a†a + Jz + N/2``.  Inside the
block with fixed ``L`` the basis index ``s = 0 .. min(N, L)`` labels
``|m = -j+s> |n = L-s>``; ``H`` is real symmetric tridiagonal
there with zero diagonal.  All times are the scaled time ``tau = g t``.

A product state with oscillator support ``n <= n_max`` only touches blocks
``L <= n_max + N``, and since no block mixes with another, propagating those
blocks is exact: truncation error enters once, through the initial state,
and never grows with time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal

from ._validation import DomainError, NumericalError, check_spin
from .states import OscState, SpinState

__all__ = [
    "SubspaceBlock",
    "JointState",
    "TimeGrid",
    "block_hamiltonian",
    "block_eigensystem",
    "get_block",
    "decompose",
    "evolve",
    "evolve_many",
    "apply_hamiltonian",
    "apply_hamiltonian_grid",
    "energy_moments",
    "dense_hamiltonian",
    "dense_propagator_oracle",
    "DENSE_DIM_CAP",
]

DENSE_DIM_CAP = 2000


@dataclass(frozen=True)
class SubspaceBlock:
    """Hamiltonian (units of ``g``) restricted to one excitation number ``L``.

    Basis index ``s = 0 .. dim-1`` maps to ``m = -j + s`` and ``n = L - s``.
    ``eigenvalues``/``eigenvectors`` stay ``None`` until
    :func:`block_eigensystem` fills them.
    """

    j: Fraction
    L: int
    offdiag: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray | None = field(default=None, repr=False)
    eigenvectors: np.ndarray | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.offdiag.size + 1

    @property
    def n_ions(self) -> int:
        return int(2 * self.j)

    def matrix(self) -> np.ndarray:
        return np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid of scaled times ``0, d_tau, 2 d_tau, ...`` up to ``tau_max``."""

    tau_max: float = 40.0
    d_tau: float = 0.02

    def __post_init__(self):
        if not (self.d_tau > 0 and math.isfinite(self.d_tau)):
            raise DomainError(f"d_tau={self.d_tau!r} must be positive")
        if not (self.tau_max >= 0 and math.isfinite(self.tau_max)):
            raise DomainError(f"tau_max={self.tau_max!r} must be non-negative")

    @property
    def samples(self) -> int:
        # guard against 40/0.02 = 1999.9999...
        return int(math.floor(self.tau_max / self.d_tau + 1e-9)) + 1

    @property
    def taus(self) -> np.ndarray:
        return np.arange(self.samples) * self.d_tau


@dataclass(frozen=True)
class JointState:
    """Pure ion-oscillator state stored per excitation block.

    ``blocks[L]`` holds the amplitudes over ``s = 0 .. min(N, L)`` of
    ``|m=-j+s>|n=L-s>``; entries whose ``n`` would exceed ``n_osc - 1``
    (the largest oscillator level retained) are always zero.
    """

    j: Fraction
    n_max: int
    blocks: tuple = field(repr=False)

    @property
    def n_ions(self) -> int:
        return int(2 * self.j)

    @property
    def n_osc(self) -> int:
        """Number of oscillator levels any block can populate."""
        return self.n_max + self.n_ions + 1

    @property
    def L_max(self) -> int:
        return len(self.blocks) - 1

    def norm(self) -> float:
        return math.sqrt(sum(float(np.vdot(b, b).real) for b in self.blocks))

    def to_grid(self) -> np.ndarray:
        """Amplitudes as a ``(2j+1, n_osc)`` array indexed ``[s, n]``."""
        grid = np.zeros((self.n_ions + 1, self.n_osc), dtype=complex)
        for L, amp in enumerate(self.blocks):
            s = np.arange(amp.size)
            grid[s, L - s] = amp
        return grid

    @classmethod
    def from_grid(cls, j, n_max: int, grid: np.ndarray) -> "JointState":
        j = check_spin(j)
        n_ions = int(2 * j)
        grid = np.asarray(grid, dtype=complex)
        if grid.shape[0] != n_ions + 1 or grid.shape[1] > n_max + n_ions + 1:
            raise DomainError(f"grid shape {grid.shape} incompatible with j={j}, n_max={n_max}")
        n_osc = n_max + n_ions + 1
        full = np.zeros((n_ions + 1, n_osc), dtype=complex)
        full[:, : grid.shape[1]] = grid
        blocks = []
        for L in range(n_osc):
            s = np.arange(min(n_ions, L) + 1)
            blocks.append(full[s, L - s].copy())
        return cls(j, int(n_max), tuple(blocks))

    def flatten(self) -> np.ndarray:
        """Product-basis vector ordered ``index = s * n_osc + n``."""
        return self.to_grid().reshape(-1)


# --------------------------------------------------------------------------
# block Hamiltonians


def _offdiag(j: Fraction, L: int) -> np.ndarray:
    n_ions = int(2 * j)
    dim = min(n_ions, L) + 1
    s = np.arange(dim - 1, dtype=float)
    m = -float(j) + s
    jj = float(j)
    # <m+1, n-1| a J+ |m, n> = sqrt(n) sqrt(j(j+1) - m(m+1)) with n = L - s
    return np.sqrt(L - s) * np.sqrt(jj * (jj + 1) - m * (m + 1))


def block_hamiltonian(j, L: int) -> SubspaceBlock:
    """Tridiagonal block of ``H/g`` at excitation number ``L`` (no eigensystem)."""
    j = check_spin(j)
    if int(L) != L or L < 0:
        raise DomainError(f"L={L!r} must be a non-negative integer")
    off = _offdiag(j, int(L))
    off.setflags(write=False)
    return SubspaceBlock(j=j, L=int(L), offdiag=off)


def block_eigensystem(block: SubspaceBlock) -> SubspaceBlock:
    """Diagonalize a block; eigenvalues ascending, eigenvectors as columns.

    Raises
    ------
    NumericalError
        If LAPACK fails or the reconstruction ``V E V^T`` misses the block
        by more than ``1e-10 * max(1, max|H|)``.
    """
    dim = block.dim
    if dim == 1:
        evals = np.zeros(1)
        evecs = np.ones((1, 1))
    else:
        try:
            evals, evecs = eigh_tridiagonal(np.zeros(dim), np.asarray(block.offdiag))
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"tridiagonal eigensolver failed for L={block.L}") from exc
        h = block.matrix()
        scale = max(1.0, float(np.max(np.abs(h))))
        if np.max(np.abs(evecs @ np.diag(evals) @ evecs.T - h)) > 1e-10 * scale:
            raise NumericalError(f"inaccurate eigensystem for block L={block.L}")
    evals.setflags(write=False)
    evecs.setflags(write=False)
    return SubspaceBlock(block.j, block.L, block.offdiag, evals, evecs)


@lru_cache(maxsize=8192)
def _cached_block(j: Fraction, L: int) -> SubspaceBlock:
    return block_eigensystem(block_hamiltonian(j, L))


def get_block(j, L: int) -> SubspaceBlock:
    """Diagonalized block, cached per ``(j, L)``."""
    return _cached_block(check_spin(j), int(L))


# --------------------------------------------------------------------------
# states and propagation


def decompose(spin: SpinState, osc: OscState) -> JointState:
    """Split ``spin ⊗ osc`` into excitation blocks, ``psi_L(s) = c_{-j+s} b_{L-s}``."""
    n_ions = spin.n_ions
    n_max = osc.n_max
    c = spin.amplitudes
    b = np.zeros(n_max + n_ions + 1, dtype=complex)
    b[: n_max + 1] = osc.amplitudes
    blocks = []
    for L in range(n_max + n_ions + 1):
        s = np.arange(min(n_ions, L) + 1)
        blocks.append(c[s] * b[L - s])
    return JointState(spin.j, n_max, tuple(blocks))


class _Propagator:
    """Blocks of one state stacked by dimension for vectorized propagation."""

    def __init__(self, state: JointState):
        self.state = state
        self.groups = []
        by_dim: dict[int, list[int]] = {}
        for L, amp in enumerate(state.blocks):
            by_dim.setdefault(amp.size, []).append(L)
        for dim, Ls in by_dim.items():
            blocks = [get_block(state.j, L) for L in Ls]
            V = np.stack([blk.eigenvectors for blk in blocks])  # (K, d, d)
            E = np.stack([blk.eigenvalues for blk in blocks])  # (K, d)
            psi = np.stack([state.blocks[L] for L in Ls])  # (K, d)
            coeff = np.einsum("kds,kd->ks", V, psi)  # V^T psi
            self.groups.append((Ls, V, E, coeff))

    def at(self, taus: np.ndarray) -> list[dict[int, np.ndarray]]:
        """Block amplitudes at each time; one ``{L: (T, d) array}`` per group."""
        taus = np.asarray(taus, dtype=float)
        out = {}
        for Ls, V, E, coeff in self.groups:
            phase = np.exp(-1j * taus[:, None, None] * E[None, :, :])  # (T, K, d)
            amp = np.einsum("kds,tks->tkd", V, phase * coeff[None])
            for i, L in enumerate(Ls):
                out[L] = amp[:, i, :]
        return out


def evolve(state: JointState, tau: float) -> JointState:
    """``exp(-i H tau)`` applied block by block, ``V exp(-i E tau) V^T psi_L``."""
    amps = _Propagator(state).at(np.array([float(tau)]))
    blocks = tuple(amps[L][0].copy() for L in range(len(state.blocks)))
    return JointState(state.j, state.n_max, blocks)


def evolve_many(state: JointState, taus) -> np.ndarray:
    """Amplitude grids ``(T, 2j+1, n_osc)`` of the evolved state at every ``tau``."""
    taus = np.asarray(taus, dtype=float)
    amps = _Propagator(state).at(taus)
    n_ions = state.n_ions
    out = np.zeros((taus.size, n_ions + 1, state.n_osc), dtype=complex)
    for L, amp in amps.items():
        s = np.arange(amp.shape[1])
        out[:, s, L - s] = amp
    return out


def apply_hamiltonian(state: JointState) -> JointState:
    """``(H/g)|psi>`` in block form (exact: ``H`` never leaves a block)."""
    blocks = []
    for L, amp in enumerate(state.blocks):
        blk = block_hamiltonian(state.j, L)
        out = np.zeros_like(amp)
        off = blk.offdiag
        out[:-1] += off * amp[1:]
        out[1:] += off * amp[:-1]
        blocks.append(out)
    return JointState(state.j, state.n_max, tuple(blocks))


def energy_moments(state: JointState) -> tuple[float, float]:
    """``(<H>, <H^2>)`` in units of ``g``."""
    h_psi = apply_hamiltonian(state)
    e1 = sum(float(np.vdot(a, b).real) for a, b in zip(state.blocks, h_psi.blocks))
    e2 = sum(float(np.vdot(b, b).real) for b in h_psi.blocks)
    return e1, e2


# --------------------------------------------------------------------------
# dense oracle


def dense_hamiltonian(j, n_osc: int) -> np.ndarray:
    """Full ``H/g`` on ``spin ⊗ Fock(n_osc)``, index ``s * n_osc + n``.

    Built from Kronecker products of the ladder matrices, independently of the
    block decomposition.
    """
    from .spin import build_spin_operators

    ops = build_spin_operators(j)
    a = np.diag(np.sqrt(np.arange(1, n_osc, dtype=float)), 1)
    h = np.kron(ops.Jminus, a.T) + np.kron(ops.Jplus, a)
    return h


def dense_propagator_oracle(state: JointState, tau: float) -> JointState:
    """Reference propagation by full eigendecomposition of the dense ``H``.

    Test-only; refuses product spaces larger than ``DENSE_DIM_CAP``.
    """
    dim = (state.n_ions + 1) * state.n_osc
    if dim > DENSE_DIM_CAP:
        raise DomainError(f"dense oracle limited to dimension {DENSE_DIM_CAP}, got {dim}")
    h = dense_hamiltonian(state.j, state.n_osc)
    evals, evecs = np.linalg.eigh(h)
    psi = state.flatten()
    out = evecs @ (np.exp(-1j * evals * float(tau)) * (evecs.conj().T @ psi))
    return JointState.from_grid(state.j, state.n_max, out.reshape(state.n_ions + 1, state.n_osc))


def apply_hamiltonian_grid(grids: np.ndarray, j) -> np.ndarray:
    """``(H/g) psi`` for amplitude grids ``(..., 2j+1, n_osc)`` indexed ``[s, n]``.

    Levels past the last stored Fock state are dropped, which is exact for
    states produced by :func:`evolve_many` (``J-`` annihilates the state
    that would feed them).
    """
    j = check_spin(j)
    grids = np.asarray(grids, dtype=complex)
    n_osc = grids.shape[-1]
    jj = float(j)
    m = -jj + np.arange(grids.shape[-2] - 1, dtype=float)
    lad = np.sqrt(jj * (jj + 1) - m * (m + 1))[:, None]  # <s+1|J+|s>
    sq = np.sqrt(np.arange(1, n_osc, dtype=float))  # <n|a|n+1>
    out = np.zeros_like(grids)
    # a J+ : |s, n+1> -> sqrt(n+1) lad_s |s+1, n>
    out[..., 1:, :-1] += lad * sq * grids[..., :-1, 1:]
    # a† J- : |s+1, n> -> sqrt(n+1) lad_s |s, n+1>
    out[..., :-1, 1:] += lad * sq * grids[..., 1:, :-1]
    return out
