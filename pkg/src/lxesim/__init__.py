"""Monitored Z2-symmetric Clifford circuits and the cross-entropy order
parameter, with percolation and conformal-prediction cross-checks."""

__version__ = "0.1.0"

from .paulis import CliffordAction, NonHermitianProductError, PauliOperator, commutes, multiply
from .tableau import IncompatibleOutcomeError, Membership, StabilizerState
from .circuits import (
    CircuitRealization,
    EnsembleParams,
    Event,
    apply_noise_slot,
    build_circuit,
    build_hybrid,
    build_zizxx,
    build_zzx,
    initial_state,
    leak_check,
    sample_symmetric_clifford_2q,
    scramble,
    zzx_from_pattern,
)
from .lxe import (
    LxeEstimate,
    MeasurementRecord,
    chi_for_realization,
    estimate_lxe,
    replay_is_compatible,
    sample_record,
)
from .percolation import (
    BondConfiguration,
    circuit_to_bonds,
    crossing_probability_mc,
    spans,
)
from .cft import (
    CftParams,
    ObcModel,
    PbcModel,
    cardy_chi_obc,
    chi_obc_small_r,
    chi_pbc,
    fit_scale,
    sc_map_w,
    solve_aspect_y,
)
from .experiments import (
    RunConfig,
    SweepResult,
    collapse_residual,
    estimate_leak_probability,
    find_crossings,
    run,
)

__all__ = [
    "__version__",
    "PauliOperator", "CliffordAction", "commutes", "multiply",
    "NonHermitianProductError",
    "StabilizerState", "Membership", "IncompatibleOutcomeError",
    "EnsembleParams", "Event", "CircuitRealization",
    "build_zzx", "build_hybrid", "build_zizxx", "build_circuit",
    "zzx_from_pattern", "initial_state", "sample_symmetric_clifford_2q",
    "scramble", "leak_check", "apply_noise_slot",
    "MeasurementRecord", "LxeEstimate", "sample_record",
    "replay_is_compatible", "chi_for_realization", "estimate_lxe",
    "BondConfiguration", "circuit_to_bonds", "spans",
    "crossing_probability_mc",
    "CftParams", "sc_map_w", "solve_aspect_y", "cardy_chi_obc",
    "chi_obc_small_r", "chi_pbc", "fit_scale", "ObcModel", "PbcModel",
    "RunConfig", "SweepResult", "run", "find_crossings",
    "collapse_residual", "estimate_leak_probability",
]
