"""Exact Tavis-Cummings dynamics of trapped ions prepared in intelligent states.

N ions (collective spin ``j = N/2``) couple to one motional mode through
``H = g (a† J- + a J+)``.  The package builds spin intelligent states and
squeezed vacua, propagates their product exactly block by block in the
conserved excitation number, and tracks entanglement entropy and squeezing.
"""

__version__ = "0.1.0"

from ._validation import DomainError, NumericalError, TruncationError
from .analysis import (
    SweepRow,
    Trajectory,
    eigenstate_residual,
    m0_nonzero_survey,
    run_trajectory,
    stability_probe,
    sweep_eta,
    sweep_xi_q,
)
from .dynamics import (
    JointState,
    SubspaceBlock,
    TimeGrid,
    block_eigensystem,
    block_hamiltonian,
    decompose,
    dense_propagator_oracle,
    evolve,
)
from .observables import Snapshot, reduce_ion, reduce_osc, snapshot, von_neumann_entropy
from .spin import SpinMatrices, SpinQuantum, build_spin_operators, ladder_element, mean_and_variance
from .states import (
    IntelligentSpec,
    OscState,
    SpinState,
    TruncationPolicy,
    dicke_state,
    fock_state,
    intelligent_state_general,
    intelligent_state_m0_zero,
    jacobi_polynomial,
    jz_and_xi_R_closed_form,
    motional_xi_q,
    ramsey_uncertainty,
    spectroscopic_xi_R,
    squeezed_vacuum,
    two_ion_theta_form,
)
