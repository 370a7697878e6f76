"""Trajectories, parameter sweeps and equilibrium diagnostics.

Time averages are plain arithmetic means over the sampled grid, ``tau = 0``
included.  Sweep rows come back in the order of the input grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import DomainError
from .dynamics import (
    JointState,
    TimeGrid,
    apply_hamiltonian_grid,
    decompose,
    evolve_many,
)
from .observables import (
    Snapshot,
    batch_observables,
    entropy_from_eigenvalues,
)
from .states import (
    TruncationPolicy,
    intelligent_state_general,
    intelligent_state_m0_zero,
    squeezed_vacuum,
)

__all__ = [
    "FIELDS",
    "Trajectory",
    "SweepRow",
    "ConservationReport",
    "M0Point",
    "M0Survey",
    "prepare_state",
    "run_trajectory",
    "sweep_eta",
    "sweep_xi_q",
    "eigenstate_residual",
    "stability_probe",
    "scaling_exponent",
    "m0_nonzero_survey",
    "zero_crossings",
    "conservation_report",
]

FIELDS = ("S_ion", "xi_R", "xi_q", "jz_mean")

# Samples used for the explicit rho_osc entropy cross-check; the full
# oscillator eigendecomposition is too costly for every grid point.
_OSC_ENTROPY_SAMPLES = 21


@dataclass(frozen=True)
class ConservationReport:
    norm_drift: float
    energy_drift: float
    energy2_drift: float
    entropy_gap: float
    min_eigenvalue: float

    def passed(self, drift_tol: float = 1e-9, gap_tol: float = 1e-8, eig_tol: float = 1e-10) -> bool:
        return (
            self.norm_drift <= drift_tol
            and self.energy_drift <= drift_tol
            and self.energy2_drift <= drift_tol
            and self.entropy_gap <= gap_tol
            and self.min_eigenvalue >= -eig_tol
        )


@dataclass(frozen=True)
class Trajectory:
    """Sampled observables of one run plus their time statistics.

    ``series`` maps each name in :data:`FIELDS` to an array over
    ``grid.taus``; ``averages``, ``amplitude`` (max - min) and ``minima``
    summarize each series.
    """

    grid: TimeGrid
    series: dict = field(repr=False)
    n_max: int = 0
    conservation: ConservationReport | None = None

    @property
    def taus(self) -> np.ndarray:
        return self.grid.taus

    @property
    def snapshots(self) -> list[Snapshot]:
        return [
            Snapshot(float(t), *(float(self.series[f][i]) for f in FIELDS))
            for i, t in enumerate(self.taus)
        ]

    @property
    def averages(self) -> dict[str, float]:
        return {f: float(np.mean(self.series[f])) for f in FIELDS}

    @property
    def amplitude(self) -> dict[str, float]:
        return {f: float(np.max(self.series[f]) - np.min(self.series[f])) for f in FIELDS}

    @property
    def minima(self) -> dict[str, float]:
        return {f: float(np.min(self.series[f])) for f in FIELDS}

    @property
    def initial(self) -> dict[str, float]:
        return {f: float(self.series[f][0]) for f in FIELDS}

    def deviation(self, name: str) -> float:
        """Time average minus initial value of one series."""
        return self.averages[name] - self.initial[name]


@dataclass(frozen=True)
class SweepRow:
    param: float
    S_avg: float
    S_amp: float
    dxi_R: float
    dxi_q: float
    dJz: float
    xi_R_min: float
    xi_q_min: float

    @classmethod
    def from_trajectory(cls, param: float, traj: Trajectory) -> "SweepRow":
        return cls(
            param=float(param),
            S_avg=traj.averages["S_ion"],
            S_amp=traj.amplitude["S_ion"],
            dxi_R=traj.deviation("xi_R"),
            dxi_q=traj.deviation("xi_q"),
            dJz=traj.deviation("jz_mean"),
            xi_R_min=traj.minima["xi_R"],
            xi_q_min=traj.minima["xi_q"],
        )

    def as_tuple(self) -> tuple[float, ...]:
        return (
            self.param,
            self.S_avg,
            self.S_amp,
            self.dxi_R,
            self.dxi_q,
            self.dJz,
            self.xi_R_min,
            self.xi_q_min,
        )


# --------------------------------------------------------------------------


def prepare_state(j, eta: float, m0, xi_q0: float, trunc: TruncationPolicy | None = None) -> JointState:
    """Product of the ``m0`` intelligent spin state and a squeezed vacuum."""
    if m0 == 0:
        spin = intelligent_state_m0_zero(j, eta)
    else:
        spin, _ = intelligent_state_general(j, eta, m0)
    return decompose(spin, squeezed_vacuum(xi_q0, trunc))


def conservation_report(state: JointState, grids: np.ndarray) -> ConservationReport:
    """Drift of norm, ``<H>``, ``<H^2>`` and the ion/oscillator entropy gap."""
    h_psi = apply_hamiltonian_grid(grids, state.j)
    norm = np.einsum("tsn,tsn->t", grids.conj(), grids).real
    e1 = np.einsum("tsn,tsn->t", grids.conj(), h_psi).real
    e2 = np.einsum("tsn,tsn->t", h_psi.conj(), h_psi).real

    rho_ion = np.einsum("tsn,tun->tsu", grids, grids.conj())
    ev_ion = np.linalg.eigvalsh(rho_ion)
    picks = np.unique(np.linspace(0, len(grids) - 1, _OSC_ENTROPY_SAMPLES).round().astype(int))
    gap = 0.0
    min_eig = float(ev_ion.min())
    for i in picks:
        rho_osc = grids[i].T @ grids[i].conj()
        ev_osc = np.linalg.eigvalsh(rho_osc)
        min_eig = min(min_eig, float(ev_osc.min()))
        s_osc = float(entropy_from_eigenvalues(np.clip(ev_osc, 0.0, None)))
        s_ion = float(entropy_from_eigenvalues(np.clip(ev_ion[i], 0.0, None)))
        gap = max(gap, abs(s_ion - s_osc))
    return ConservationReport(
        norm_drift=float(np.max(np.abs(norm - norm[0]))),
        energy_drift=float(np.max(np.abs(e1 - e1[0]))),
        energy2_drift=float(np.max(np.abs(e2 - e2[0]))),
        entropy_gap=gap,
        min_eigenvalue=min_eig,
    )


def run_trajectory(
    j,
    eta: float,
    m0,
    xi_q0: float,
    grid: TimeGrid | None = None,
    trunc: TruncationPolicy | None = None,
    check_conservation: bool = False,
) -> Trajectory:
    """Evolve ``|eta, m0> ⊗ |xi_q0>`` over ``grid`` and collect observables."""
    grid = grid or TimeGrid()
    state = prepare_state(j, eta, m0, xi_q0, trunc)
    grids = evolve_many(state, grid.taus)
    series = batch_observables(grids, state.j)
    for arr in series.values():
        arr.setflags(write=False)
    report = conservation_report(state, grids) if check_conservation else None
    return Trajectory(grid=grid, series=series, n_max=state.n_max, conservation=report)


def sweep_eta(j, xi_q0: float, eta_grid, grid: TimeGrid | None = None, m0=0,
              trunc: TruncationPolicy | None = None) -> list[SweepRow]:
    return [
        SweepRow.from_trajectory(eta, run_trajectory(j, eta, m0, xi_q0, grid, trunc))
        for eta in eta_grid
    ]


def sweep_xi_q(j, eta: float, xi_q_grid, grid: TimeGrid | None = None, m0=0,
               trunc: TruncationPolicy | None = None) -> list[SweepRow]:
    return [
        SweepRow.from_trajectory(xq, run_trajectory(j, eta, m0, xq, grid, trunc))
        for xq in xi_q_grid
    ]


def eigenstate_residual(j, eta: float, m0, xi_q0: float, trunc: TruncationPolicy | None = None) -> float:
    """``||(H/g)|psi>||`` for the initial product state on the truncated space."""
    state = prepare_state(j, eta, m0, xi_q0, trunc)
    return float(np.linalg.norm(apply_hamiltonian_grid(state.to_grid(), state.j)))


def stability_probe(j, xi_q0: float, detunings, grid: TimeGrid | None = None,
                    trunc: TruncationPolicy | None = None) -> list[tuple[float, float]]:
    """Peak ``S_ion`` over the grid for ``eta = xi_q0**2 + delta``."""
    center = xi_q0 * xi_q0
    out = []
    for delta in detunings:
        eta = center + float(delta)
        if not 0.0 < eta < 1.0:
            raise DomainError(f"detuning {delta} puts eta={eta} outside (0, 1)")
        traj = run_trajectory(j, eta, 0, xi_q0, grid, trunc)
        out.append((float(delta), float(np.max(traj.series["S_ion"]))))
    return out


def scaling_exponent(probe: list[tuple[float, float]]) -> float:
    """Least-squares slope of ``log max S`` against ``log |delta|`` (``delta != 0``)."""
    pts = [(abs(d), s) for d, s in probe if d != 0 and s > 0]
    if len(pts) < 2:
        raise DomainError("need at least two non-zero detunings with positive entropy")
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    return float(np.polyfit(x, y, 1)[0])


@dataclass(frozen=True)
class M0Point:
    eta: float
    xi_q0: float
    dxi_R: float
    dxi_q: float
    xi_R0: float
    residual: float
    both_improved: bool


@dataclass(frozen=True)
class M0Survey:
    j: float
    m0: float
    tol: float
    points: tuple

    @property
    def counterexamples(self) -> list[M0Point]:
        return [p for p in self.points if p.both_improved]

    @property
    def min_residual(self) -> float:
        return min(p.residual for p in self.points)


def m0_nonzero_survey(j, eta, m0, xi_q_grid, grid: TimeGrid | None = None, tol: float = 1e-6,
                      trunc: TruncationPolicy | None = None) -> M0Survey:
    """Look for simultaneous squeezing improvement on an ``m0 != 0`` branch.

    ``eta`` may be a single value or a sequence.  A point counts as a
    counterexample when both ``mean(xi_R) < xi_R(0) - tol`` and
    ``mean(xi_q) < xi_q(0) - tol``.
    """
    if m0 == 0:
        raise DomainError("m0_nonzero_survey needs m0 != 0")
    etas = np.atleast_1d(np.asarray(eta, dtype=float))
    points = []
    for e in etas:
        for xq in xi_q_grid:
            traj = run_trajectory(j, float(e), m0, float(xq), grid, trunc)
            d_r = traj.deviation("xi_R")
            d_q = traj.deviation("xi_q")
            points.append(
                M0Point(
                    eta=float(e),
                    xi_q0=float(xq),
                    dxi_R=d_r,
                    dxi_q=d_q,
                    xi_R0=traj.initial["xi_R"],
                    residual=eigenstate_residual(j, float(e), m0, float(xq), trunc),
                    both_improved=(d_r < -tol) and (d_q < -tol),
                )
            )
    return M0Survey(j=float(j), m0=float(m0), tol=tol, points=tuple(points))


def zero_crossings(params, values) -> list[tuple[float, float]]:
    """Sign changes between neighbouring grid points.

    Returns ``(location, half_width)`` pairs: the linear-interpolation root
    and half the width of the bracketing cell.  An exact zero on a grid point
    counts once.
    """
    x = np.asarray(params, dtype=float)
    y = np.asarray(values, dtype=float)
    out = []
    i = 0
    while i < len(y) - 1:
        if y[i] == 0.0:
            i += 1
            continue
        k = i + 1
        while k < len(y) - 1 and y[k] == 0.0:
            k += 1
        if np.sign(y[i]) != np.sign(y[k]) and y[k] != 0.0:
            if k == i + 1:
                root = x[i] - y[i] * (x[k] - x[i]) / (y[k] - y[i])
            else:
                root = 0.5 * (x[i + 1] + x[k - 1])
            out.append((float(root), 0.5 * float(x[k] - x[i])))
        i = k
    return out
