"""Linear cross-entropy estimation by record sampling and forced replay.

For a Clifford circuit and stabilizer initial states the LXE between two
states reduces to a compatibility indicator: sample a measurement record from
the rho run, replay it on the sigma state forcing every in-scope random
outcome, and return 0 as soon as a deterministic outcome disagrees with the
record (1 otherwise).  Out-of-scope measurements are executed but unrecorded
on the rho side and replaced by their dephasing channel on the sigma side;
noise slots act only on the rho run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .circuits import (
    TAG_NOISE_BRANCH,
    TAG_OUTCOMES,
    CircuitRealization,
    EnsembleParams,
    build_circuit,
    initial_state,
    scrambler_layout,
    stream_rng,
    symmetric_clifford_table,
)
from .tableau import StabilizerState

__all__ = [
    "MeasurementRecord",
    "LxeEstimate",
    "sample_record",
    "replay_is_compatible",
    "chi_for_realization",
    "estimate_lxe",
]

SCOPES = ("all", "x_only", "z_only")

_TAG_SCRAMBLER = 4

_STATE_KINDS = ("ghz+", "ghz-", "psi+", "psi-", "product+x",
                "scrambled-ghz+", "scrambled-ghz-")


@dataclass
class MeasurementRecord:
    """Outcomes of the in-scope measurements of one circuit run.

    ``outcomes`` is aligned to the circuit event list (+1/-1 at in-scope
    measurement events, 0 elsewhere).  ``was_random`` is diagnostic only and
    is never consulted by the replay.
    """

    scope: str
    outcomes: np.ndarray
    was_random: np.ndarray
    kinds: np.ndarray

    @property
    def entries(self) -> list[tuple[int, int, str]]:
        from .circuits import _KIND_NAMES

        idx = np.flatnonzero(self.outcomes)
        return [
            (int(e), int(self.outcomes[e]), _KIND_NAMES[int(self.kinds[e])])
            for e in idx
        ]


@dataclass(frozen=True)
class LxeEstimate:
    """Bernoulli estimate of the realization-averaged LXE."""

    mean: float
    stderr: float
    n_samples: int
    params: EnsembleParams
    rho_kind: str
    sigma_kind: str
    scope: str
    master_seed: int

    def __post_init__(self):
        if not 0.0 <= self.mean <= 1.0:
            raise ValueError("mean must lie in [0, 1]")


def _state_arrays(state: StabilizerState):
    return state.sx, state.sz, state.ssign, state.dx, state.dz


_TEMPLATE_CACHE: dict = {}


def _template(kind: str, L: int, r: int | None) -> StabilizerState:
    base = kind.replace("scrambled-", "")
    key = (base, L, r)
    if key not in _TEMPLATE_CACHE:
        _TEMPLATE_CACHE[key] = initial_state(base, L, r)
    return _TEMPLATE_CACHE[key]


def prepare_state(kind: str, params: EnsembleParams, circuit_seed: int) -> StabilizerState:
    """Initial state for one realization; scrambled kinds share the per-seed
    scrambler so that a (rho, sigma) pair sees the same unitary."""
    if kind not in _STATE_KINDS:
        raise ValueError(f"unknown state kind {kind!r}")
    state = _template(kind, params.L, params.r_ghz).copy()
    if kind.startswith("scrambled-"):
        depth = params.scramble_depth
        if depth is None:
            depth = params.L
        rng = stream_rng(circuit_seed, _TAG_SCRAMBLER)
        layout = scrambler_layout(params.L, depth, rng)
        if layout:
            sites = np.array([s for s, _ in layout], dtype=np.int64)
            gates = np.array([g for _, g in layout], dtype=np.int64)
            _, newcodes, flips = symmetric_clifford_table()
            K.apply_gate_seq_kernel(
                *_state_arrays(state), state.k,
                sites, sites + 1, gates, newcodes, flips,
            )
    return state


def sample_record(
    circuit: CircuitRealization,
    initial: StabilizerState,
    scope: str = "all",
    outcome_rng=None,
    noise_rng=None,
) -> MeasurementRecord:
    """Run the circuit on ``initial`` (consumed) and record in-scope outcomes.

    Out-of-scope measurements are still executed, their outcomes drawn from
    ``outcome_rng`` but dropped from the record.  Noise slots draw one branch
    bit each from ``noise_rng``.
    """
    if scope not in SCOPES:
        raise ValueError(f"unknown scope {scope!r}")
    if initial.n_sites != circuit.n_sites:
        raise ValueError("state and circuit size mismatch")
    if outcome_rng is None:
        raise ValueError("outcome_rng is required")
    n_ev = circuit.n_events
    n_meas = circuit.n_measurements
    n_noise = circuit.n_noise_slots
    if n_noise and noise_rng is None:
        raise ValueError("noise_rng is required when the circuit has noise slots")
    coins = outcome_rng.integers(0, 2, size=max(1, n_meas), dtype=np.int64)
    noise_bits = (
        noise_rng.integers(0, 2, size=n_noise, dtype=np.int64)
        if n_noise
        else np.zeros(1, dtype=np.int64)
    )
    rec_out = np.zeros(n_ev, dtype=np.int8)
    rec_rand = np.zeros(n_ev, dtype=np.uint8)
    _, newcodes, flips = symmetric_clifford_table()
    initial.k = K.run_sample_kernel(
        *_state_arrays(initial), initial.k, initial.n,
        circuit.ev_kind, circuit.ev_site, circuit.ev_site2, circuit.ev_aux,
        newcodes, flips, coins, noise_bits, rec_out, rec_rand,
    )
    in_scope = circuit.scope_mask(scope)
    rec_out[~in_scope] = 0
    rec_rand[~in_scope] = 0
    return MeasurementRecord(
        scope=scope, outcomes=rec_out, was_random=rec_rand,
        kinds=circuit.ev_kind.copy(),
    )


def replay_is_compatible(
    circuit: CircuitRealization,
    sigma_initial: StabilizerState,
    record: MeasurementRecord,
) -> bool:
    """Force the record through a sigma run; False on the first contradiction.

    In-scope random measurements are forced to the recorded value,
    deterministic ones are compared against it; out-of-scope measurements
    become dephasing channels and noise slots are skipped entirely.
    """
    if sigma_initial.n_sites != circuit.n_sites:
        raise ValueError("state and circuit size mismatch")
    if record.outcomes.shape[0] != circuit.n_events:
        raise ValueError("record does not match the circuit event list")
    in_scope = circuit.scope_mask(record.scope)
    _, newcodes, flips = symmetric_clifford_table()
    ok, sigma_initial.k = K.run_replay_kernel(
        *_state_arrays(sigma_initial), sigma_initial.k, sigma_initial.n,
        circuit.ev_kind, circuit.ev_site, circuit.ev_site2, circuit.ev_aux,
        newcodes, flips, record.outcomes, in_scope.astype(np.uint8),
    )
    return bool(ok)


def chi_for_realization(
    circuit: CircuitRealization,
    rho_initial: StabilizerState,
    sigma_initial: StabilizerState,
    scope: str = "all",
    outcome_rng=None,
    noise_rng=None,
) -> int:
    """0/1 compatibility indicator for one realization (inputs copied)."""
    record = sample_record(
        circuit, rho_initial.copy(), scope, outcome_rng, noise_rng
    )
    return int(replay_is_compatible(circuit, sigma_initial.copy(), record))


def _run_range(params, rho_kind, sigma_kind, scope, records, master_seed, lo, hi):
    total = 0
    count = 0
    for i in range(lo, hi):
        circ_seed = int(
            np.random.SeedSequence((int(master_seed), i)).generate_state(
                1, np.uint64
            )[0]
        )
        circ = build_circuit(params, circ_seed)
        rho = prepare_state(rho_kind, params, circ_seed)
        sigma = prepare_state(sigma_kind, params, circ_seed)
        for j in range(records):
            out_rng = stream_rng(circ_seed, TAG_OUTCOMES, j)
            noise_rng = stream_rng(circ_seed, TAG_NOISE_BRANCH, j)
            record = sample_record(circ, rho.copy(), scope, out_rng, noise_rng)
            total += int(replay_is_compatible(circ, sigma.copy(), record))
            count += 1
    return total, count


def estimate_lxe(
    params: EnsembleParams,
    rho_kind: str,
    sigma_kind: str,
    scope: str = "all",
    n_circuits: int = 100,
    records_per_circuit: int | None = None,
    master_seed: int = 0,
    workers: int = 1,
) -> LxeEstimate:
    """Mean compatibility indicator over seeded circuit realizations.

    One record per realization suffices in the noiseless case (the indicator
    is a structural property of the realization); with noise the default is
    4 records so the noise-branch randomness is averaged as well.  Results
    are bit-identical for any worker count.
    """
    if scope not in SCOPES:
        raise ValueError(f"unknown scope {scope!r}")
    if n_circuits < 1:
        raise ValueError("n_circuits must be >= 1")
    if records_per_circuit is None:
        records_per_circuit = 4 if params.noise_rate > 0.0 else 1
    args = (params, rho_kind, sigma_kind, scope, records_per_circuit, master_seed)
    if workers <= 1 or n_circuits < 2 * workers:
        total, count = _run_range(*args, 0, n_circuits)
    else:
        from concurrent.futures import ProcessPoolExecutor

        bounds = np.linspace(0, n_circuits, workers + 1).astype(int)
        total = count = 0
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futs = [
                pool.submit(_run_range, *args, int(lo), int(hi))
                for lo, hi in zip(bounds[:-1], bounds[1:])
                if hi > lo
            ]
            for f in futs:
                t, c = f.result()
                total += t
                count += c
    mean = total / count
    stderr = float(np.sqrt(mean * (1.0 - mean) / count))
    return LxeEstimate(
        mean=mean, stderr=stderr, n_samples=count, params=params,
        rho_kind=rho_kind, sigma_kind=sigma_kind, scope=scope,
        master_seed=master_seed,
    )
