"""Acceptance suite: one test per criterion, verdicts echoed in the summary.

Run ``pytest tests/test_acceptance.py -v`` and read the "acceptance
criteria" block at the end.
"""

import math
import time

import numpy as np
import pytest

from conftest import record
from squeeze_dyn.analysis import (
    eigenstate_residual,
    m0_nonzero_survey,
    run_trajectory,
    scaling_exponent,
    stability_probe,
    sweep_eta,
    sweep_xi_q,
    zero_crossings,
)
from squeeze_dyn.dynamics import TimeGrid, decompose, dense_propagator_oracle, evolve, get_block
from squeeze_dyn.output import parse_grid
from squeeze_dyn.spin import build_spin_operators, mean_and_variance
from squeeze_dyn.states import (
    OscState,
    SpinState,
    dicke_state,
    intelligent_state_general,
    intelligent_state_m0_zero,
    jz_and_xi_R_closed_form,
    ramsey_uncertainty,
    spectroscopic_xi_R,
)


def check(criterion, passed, detail):
    record(criterion, passed, detail)
    print(f"{'PASS' if passed else 'FAIL'}  {criterion}: {detail}")
    assert passed, detail


def timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0


def strictly_decreasing(seq):
    return all(a > b for a, b in zip(seq, seq[1:]))


@pytest.fixture(scope="module")
def eta_sweep():
    grid = parse_grid("0.05:0.95:0.01")
    rows, secs = timed(sweep_eta, 1, 0.6, grid)
    return rows, secs


@pytest.fixture(scope="module")
def xi_q_sweep():
    grid = parse_grid("0.30:0.90:0.005")
    rows, secs = timed(sweep_xi_q, 1, 0.3254, grid)
    return rows, secs


# ------------------------------------------------------------------ 1


def test_c01_equilibrium_cancellation():
    t0 = time.perf_counter()
    traj = run_trajectory(1, 0.36, 0, 0.6)
    residual = eigenstate_residual(1, 0.36, 0, 0.6)
    secs = time.perf_counter() - t0
    s_max = float(np.max(traj.series["S_ion"]))
    check(
        "1 equilibrium cancellation",
        s_max <= 1e-9 and residual <= 1e-9 and secs < 1.0,
        f"max S_ion = {s_max:.2e}, ||H psi|| = {residual:.2e}, {secs:.2f} s",
    )


# ------------------------------------------------------------------ 2


def test_c02_fig1_minimum(eta_sweep):
    rows, secs = eta_sweep
    params = np.array([r.param for r in rows])
    k = int(np.argmin(np.abs(params - 0.36)))
    ok = secs < 60.0
    notes = []
    for stat in ("S_avg", "S_amp"):
        vals = np.array([getattr(r, stat) for r in rows])
        unique_min = int(np.argmin(vals)) == k and np.sum(vals <= vals[k]) == 1
        left = list(vals[k - 5 : k + 1])
        right = list(vals[k : k + 6][::-1])
        mono = strictly_decreasing(left) and strictly_decreasing(right)
        ok = ok and unique_min and mono
        notes.append(f"{stat} argmin {params[int(np.argmin(vals))]:.2f} monotone={mono}")
    check("2 Fig.1 eta-sweep minimum", ok, f"{'; '.join(notes)}; {secs:.1f} s")


# ------------------------------------------------------------------ 3


def _crossings(rows, name):
    return zero_crossings([r.param for r in rows], [getattr(r, name) for r in rows])


def test_c03a_fig2_motional_and_jz_sign_structure(xi_q_sweep):
    rows, secs = xi_q_sweep
    anchor = math.sqrt(0.3254)
    ok = secs < 120.0
    notes = []
    for name in ("dxi_q", "dJz"):
        xs = _crossings(rows, name)
        single = len(xs) == 1 and abs(xs[0][0] - anchor) <= 0.005
        ok = ok and single
        notes.append(f"{name} crossings {[round(x, 4) for x, _ in xs]}")
    above = [r for r in rows if r.param > anchor + 0.005]
    below = [r for r in rows if r.param < anchor - 0.005]
    signs = all(r.dxi_q < 0 for r in above) and all(r.dxi_q > 0 for r in below)
    signs = signs and all(r.dxi_R > 0 for r in above)
    ok = ok and signs
    check(
        "3a Fig.2 dxi_q/dJz single crossing, signs",
        ok,
        f"{'; '.join(notes)}; above: dxi_R>0 & dxi_q<0, below: dxi_q>0 -> {signs}; {secs:.1f} s",
    )


def test_c03b_fig2_spin_single_crossing(xi_q_sweep):
    rows, _ = xi_q_sweep
    anchor = math.sqrt(0.3254)
    xs = _crossings(rows, "dxi_R")
    single = len(xs) == 1 and abs(xs[0][0] - anchor) <= 0.005
    low = [r for r in rows if r.param < 0.35]
    low_signs = sorted({int(np.sign(r.dxi_R)) for r in low})
    check(
        "3b Fig.2 dxi_R single crossing",
        single,
        f"dxi_R crossings {[round(x, 4) for x, _ in xs]} (expected one near {anchor:.4f}); "
        f"dxi_R signs below 0.35 (reported): {low_signs}",
    )


# ------------------------------------------------------------------ 4


def test_c04_oracle_equivalence():
    rng = np.random.default_rng(20240601)
    worst = 0.0
    for _ in range(20):
        c = rng.normal(size=3) + 1j * rng.normal(size=3)
        b = rng.normal(size=41) + 1j * rng.normal(size=41)
        st = decompose(SpinState.from_unnormalized(1, c), OscState.from_unnormalized(b))
        for tau in (1.0, 5.0, 10.0):
            diff = evolve(st, tau).flatten() - dense_propagator_oracle(st, tau).flatten()
            worst = max(worst, float(np.max(np.abs(diff))))
    check("4 block vs dense oracle", worst <= 1e-8, f"max amplitude difference = {worst:.2e}")


# ------------------------------------------------------------------ 5


def test_c05_closed_form_cross_check():
    worst = 0.0
    for j in (1, 2, 3, 4):
        ops = build_spin_operators(j)
        for eta in np.round(np.arange(0.1, 0.91, 0.1), 10):
            spin = intelligent_state_m0_zero(j, eta)
            jz, _ = mean_and_variance(ops.Jz, spin.amplitudes)
            jz_cf, xr_cf = jz_and_xi_R_closed_form(j, eta, 0)
            worst = max(worst, abs(jz - jz_cf), abs(spectroscopic_xi_R(spin) - xr_cf))
    edge = 0.0
    for j in (1, 2, 3, 4):
        for eta in (0.2, 0.5, 0.8):
            for m0 in (-j, j):
                spin, _ = intelligent_state_general(j, eta, m0)
                edge = max(edge, abs(spectroscopic_xi_R(spin) - 1.0))
                edge = max(edge, abs(jz_and_xi_R_closed_form(j, eta, m0)[1] - 1.0))
    check(
        "5 closed-form (<Jz>, xi_R) cross-check",
        worst <= 1e-9 and edge <= 1e-12,
        f"max |direct - Jacobi| = {worst:.2e}; max |xi_R - 1| at m0 = +-j: {edge:.2e}",
    )


# ------------------------------------------------------------------ 6


def test_c06_limits():
    near = spectroscopic_xi_R(intelligent_state_m0_zero(1, 1e-3))
    coherent = spectroscopic_xi_R(dicke_state(1, -1))
    shot = ramsey_uncertainty(dicke_state(1, -1), 1.0)
    ok = abs(near - 0.70711) <= 1e-3 and coherent == 1.0 and abs(shot - 1 / math.sqrt(2)) <= 1e-12
    check(
        "6 Heisenberg / coherent / shot-noise limits",
        ok,
        f"xi_R(eta=1e-3) = {near:.6f}, xi_R(|1,-1>) = {coherent!r}, d_omega(T=1) = {shot:.12f}",
    )


# ------------------------------------------------------------------ 7


def test_c07_spectral_structure():
    worst = 0.0
    for n_ions in (2, 4):
        for L in range(61):
            blk = get_block(n_ions / 2, L)
            if blk.dim % 2 == 1:
                worst = max(worst, float(np.min(np.abs(blk.eigenvalues))))
    ev = get_block(1, 2).eigenvalues
    err = float(np.max(np.abs(ev - [-math.sqrt(6), 0.0, math.sqrt(6)])))
    check(
        "7 zero modes and L=2 spectrum",
        worst <= 1e-10 and err <= 1e-10,
        f"max |smallest eigenvalue| over odd blocks = {worst:.1e}; L=2 error = {err:.1e}",
    )


# ------------------------------------------------------------------ 8


CONSERVATION_RUNS = [
    (1, 0.36, 0, 0.6),
    (1, 0.05, 0, 0.6),
    (1, 0.2, 0, 0.6),
    (1, 0.5, 0, 0.6),
    (1, 0.95, 0, 0.6),
    (1, 0.3254, 0, 0.3),
    (1, 0.3254, 0, 0.57),
    (1, 0.3254, 0, 0.9),
    (1, 0.3, 1, 0.4),
    (1, 0.7, 1, 1.0),
    (2, 0.36, 0, 0.6),
    (2, 0.5, 0, 0.8),
]


def test_c08_conservation_battery():
    worst = {"drift": 0.0, "gap": 0.0, "eig": 0.0}
    ok = True
    for args in CONSERVATION_RUNS:
        rep = run_trajectory(*args, check_conservation=True).conservation
        worst["drift"] = max(worst["drift"], rep.norm_drift, rep.energy_drift, rep.energy2_drift)
        worst["gap"] = max(worst["gap"], rep.entropy_gap)
        worst["eig"] = min(worst["eig"], rep.min_eigenvalue)
        ok = ok and rep.passed()
    check(
        "8 conservation battery",
        ok,
        f"{len(CONSERVATION_RUNS)} runs; max drift {worst['drift']:.1e}, "
        f"max |S_ion - S_osc| {worst['gap']:.1e}, min eigenvalue {worst['eig']:.1e}",
    )


# ------------------------------------------------------------------ 9


def test_c09_stability():
    probe = stability_probe(1, 0.6, [0.1, 0.05, 0.025, 0.0125])
    peaks = [s for _, s in probe]
    expo = scaling_exponent(probe)
    check(
        "9 stability around eta = 0.36",
        strictly_decreasing(peaks),
        f"max S_ion = {[f'{p:.3e}' for p in peaks]}; fitted exponent {expo:.2f} (reported)",
    )


# ------------------------------------------------------------------ 10


def test_c10_m0_nonzero_negative_result():
    xi_grid = np.round(np.arange(0.4, 1.01, 0.1), 10)
    survey = m0_nonzero_survey(1, [0.3, 0.5, 0.7], 1, xi_grid, tol=1e-6)
    bad = survey.counterexamples
    check(
        "10 m0 != 0 gives no joint squeezing gain",
        not bad and survey.min_residual > 1e-3,
        f"{len(survey.points)} points, {len(bad)} counterexamples, "
        f"min residual {survey.min_residual:.3f}",
    )


def test_runtime_grid_defaults():
    # the criteria above rely on the default window [0, 40] with 2001 samples
    assert TimeGrid().samples == 2001
