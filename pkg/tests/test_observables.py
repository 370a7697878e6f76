import math

import numpy as np
import pytest

from squeeze_dyn import DomainError
from squeeze_dyn.dynamics import JointState, decompose, evolve, evolve_many
from squeeze_dyn.observables import (
    batch_observables,
    reduce_ion,
    reduce_osc,
    snapshot,
    von_neumann_entropy,
)
from squeeze_dyn.spin import build_spin_operators
from squeeze_dyn.states import (
    OscState,
    SpinState,
    dicke_state,
    fock_state,
    intelligent_state_m0_zero,
    jz_and_xi_R_closed_form,
    motional_xi_q,
    spectroscopic_xi_R,
    squeezed_vacuum,
)


def bell_like():
    # (|1,-1>|1> + |1,0>|0>)/sqrt(2), n_max = 1
    grid = np.zeros((3, 2), dtype=complex)
    grid[0, 1] = grid[1, 0] = 1 / math.sqrt(2)
    return JointState.from_grid(1, 1, grid)


def test_reduce_product_state_is_pure():
    spin = intelligent_state_m0_zero(2, 0.3)
    st = decompose(spin, squeezed_vacuum(0.7))
    rho = reduce_ion(st)
    np.testing.assert_allclose(rho, spin.density(), atol=1e-12)
    assert np.trace(rho @ rho).real == pytest.approx(1, abs=1e-12)
    rho_o = reduce_osc(st)
    assert np.trace(rho_o @ rho_o).real == pytest.approx(1, abs=1e-12)


def test_reduce_two_term_superposition():
    st = bell_like()
    np.testing.assert_allclose(reduce_ion(st), np.diag([0.5, 0.5, 0]), atol=1e-15)
    rho_o = reduce_osc(st)
    assert rho_o.shape == (st.n_osc, st.n_osc)
    np.testing.assert_allclose(np.diag(rho_o).real[:3], [0.5, 0.5, 0], atol=1e-15)
    np.testing.assert_allclose(rho_o - np.diag(np.diag(rho_o)), 0, atol=1e-15)


def test_reduce_ion_against_explicit_partial_trace():
    rng = np.random.default_rng(8)
    grid = rng.normal(size=(4, 9)) + 1j * rng.normal(size=(4, 9))
    grid /= np.linalg.norm(grid)
    st = JointState.from_grid(1.5, 6, grid)
    psi = st.flatten()
    full = np.outer(psi, psi.conj()).reshape(4, st.n_osc, 4, st.n_osc)
    np.testing.assert_allclose(reduce_ion(st), np.einsum("anbn->ab", full), atol=1e-14)
    np.testing.assert_allclose(reduce_osc(st), np.einsum("anam->nm", full), atol=1e-14)


def test_entropy_examples():
    assert von_neumann_entropy(dicke_state(1, 0).density()) == 0
    assert von_neumann_entropy(np.diag([0.5, 0.5, 0])) == pytest.approx(math.log(2), abs=1e-15)
    assert von_neumann_entropy(np.eye(3) / 3) == pytest.approx(math.log(3), abs=1e-15)
    with pytest.raises(DomainError):
        von_neumann_entropy(np.diag([0.5, 0.4, 0.0]))
    with pytest.raises(DomainError):
        von_neumann_entropy(np.diag([1.2, -0.2]))


def test_entropies_of_both_halves_agree():
    rng = np.random.default_rng(1)
    c = rng.normal(size=3) + 1j * rng.normal(size=3)
    st = decompose(SpinState.from_unnormalized(1, c), squeezed_vacuum(0.5))
    for tau in (0.5, 2.0, 9.0):
        e = evolve(st, tau)
        s_ion = von_neumann_entropy(reduce_ion(e))
        assert s_ion > 1e-3
        assert von_neumann_entropy(reduce_osc(e)) == pytest.approx(s_ion, abs=1e-8)
    assert von_neumann_entropy(reduce_osc(bell_like())) == pytest.approx(math.log(2))


def test_snapshot_examples():
    snap = snapshot(decompose(dicke_state(1, -1), fock_state(0, 0)))
    assert (snap.S_ion, snap.xi_R, snap.xi_q, snap.jz_mean) == (0, 1, 1, -1)

    st = decompose(intelligent_state_m0_zero(1, 0.36), squeezed_vacuum(0.6))
    snap = snapshot(st)
    jz, xr = jz_and_xi_R_closed_form(1, 0.36, 0)
    assert snap.xi_R == pytest.approx(0.751531769122237440, abs=1e-12)
    assert snap.xi_R == pytest.approx(xr, abs=1e-9)
    assert snap.jz_mean == pytest.approx(jz, abs=1e-9)
    for tau in (1.0, 5.0, 33.0):
        assert snapshot(evolve(st, tau), tau).S_ion <= 1e-9


def test_snapshot_xi_R_sentinel():
    st = decompose(dicke_state(1, 0), fock_state(0, 0))
    assert snapshot(st).xi_R == math.inf


def test_batch_matches_reduced_state_routes():
    """xi_q from joint amplitudes equals xi_q of rho_osc; same for xi_R via rho_ion."""
    st = decompose(intelligent_state_m0_zero(2, 0.5), squeezed_vacuum(0.45))
    taus = [0.0, 0.8, 3.1]
    obs = batch_observables(evolve_many(st, taus), st.j)
    for i, tau in enumerate(taus):
        e = evolve(st, tau)
        assert obs["xi_q"][i] == pytest.approx(motional_xi_q(reduce_osc(e)), abs=1e-12)
        assert obs["xi_R"][i] == pytest.approx(spectroscopic_xi_R(reduce_ion(e)), abs=1e-12)
        ops = build_spin_operators(2)
        assert obs["jz_mean"][i] == pytest.approx(np.trace(reduce_ion(e) @ ops.Jz).real, abs=1e-12)


def test_equilibrium_observables_constant():
    st = decompose(intelligent_state_m0_zero(1, 0.36), squeezed_vacuum(0.6))
    obs = batch_observables(evolve_many(st, np.linspace(0, 40, 401)), st.j)
    for key in ("xi_R", "xi_q", "jz_mean"):
        assert np.ptp(obs[key]) <= 1e-8
    assert obs["S_ion"].max() <= 1e-9


def test_entropy_bounds_and_psd_along_trajectory():
    st = decompose(intelligent_state_m0_zero(2, 0.2), squeezed_vacuum(0.5))
    grids = evolve_many(st, np.linspace(0, 20, 201))
    obs = batch_observables(grids, st.j)
    assert obs["S_ion"][0] <= 1e-12
    assert np.all(obs["S_ion"] >= 0)
    assert np.all(obs["S_ion"] <= math.log(5) + 1e-9)
    rho = np.einsum("tsn,tun->tsu", grids, grids.conj())
    assert np.linalg.eigvalsh(rho).min() >= -1e-10
    assert np.all(obs["xi_q"] > 0)


def test_reduce_osc_of_product_matches_osc_density():
    b = squeezed_vacuum(0.8)
    st = decompose(dicke_state(1, 1), b)
    rho = reduce_osc(st)
    n = b.n_max + 1
    np.testing.assert_allclose(rho[:n, :n], OscState(b.amplitudes).density(), atol=1e-14)
