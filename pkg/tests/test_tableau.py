import numpy as np
import pytest

from lxesim.paulis import PauliOperator, named_gate
from lxesim.tableau import IncompatibleOutcomeError, Membership, StabilizerState

from conftest import op_matrix, state_density

P = PauliOperator.from_string


def ghz(n, sign=1):
    gens = [
        PauliOperator(n, 0, (1 << j) | (1 << (j + 1)), 1) for j in range(n - 1)
    ]
    gens.append(PauliOperator(n, (1 << n) - 1, 0, sign))
    return StabilizerState.from_generators(n, gens)


def test_from_generators_validation():
    with pytest.raises(ValueError):
        StabilizerState.from_generators(2, [P("+XI"), P("+ZI")])  # anticommute
    with pytest.raises(ValueError):
        StabilizerState.from_generators(3, [P("+ZZI"), P("+IZZ"), P("+ZIZ")])  # dependent
    with pytest.raises(ValueError):
        StabilizerState.from_generators(2, [PauliOperator(2, 0, 0, 1)])  # identity


def test_measure_stabilizer_is_deterministic():
    s = ghz(2)
    out, was_random = s.measure(P("+ZZ"), rng=np.random.default_rng(0))
    assert (out, was_random) == (1, False)
    assert s.rank == 2


def test_measure_anticommuting_is_random():
    hits = 0
    for seed in range(40):
        s = ghz(2)
        out, was_random = s.measure(P("+XI"), rng=np.random.default_rng(seed))
        assert was_random
        s.validate()
        hits += out == 1
    assert 5 < hits < 35  # fair coin at 40 draws


def test_forced_contradiction_raises():
    s = StabilizerState.from_generators(2, [P("+ZI"), P("+IZ")])
    with pytest.raises(IncompatibleOutcomeError) as err:
        s.measure(P("+ZI"), forced=-1)
    assert err.value.expected == 1


def test_forced_random_outcome_is_honored():
    s = ghz(2)
    out, was_random = s.measure(P("+XI"), forced=-1)
    assert (out, was_random) == (-1, True)
    assert s.contains_up_to_sign(P("+XI")) == Membership.MINUS


def test_measure_commuting_absent_grows_rank():
    s = StabilizerState.from_generators(3, [P("+ZZI")])
    out, was_random = s.measure(P("+IIZ"), rng=np.random.default_rng(5))
    assert was_random and s.rank == 2
    s.validate()
    # now deterministic
    out2, was_random2 = s.measure(P("+IIZ"), rng=np.random.default_rng(6))
    assert (out2, was_random2) == (out, False)


def test_dephase_examples():
    s = StabilizerState.from_generators(2, [P("+XI"), P("+IX")])
    s.dephase(P("+ZI"))
    assert s.rank == 1 and s.generators == [P("+IX")]
    s2 = StabilizerState.from_generators(2, [P("+XI"), P("+IX")])
    s2.dephase(P("+XI"))
    assert s2.rank == 2  # stabilizer of the state: unchanged
    s3 = ghz(3)
    s3.dephase(P("+IXI"))
    assert s3.rank == 2
    s3.validate()


def test_contains_up_to_sign_examples():
    assert ghz(2, -1).contains_up_to_sign(P("+XX")) == Membership.MINUS
    assert ghz(3).contains_up_to_sign(P("+ZIZ")) == Membership.PLUS
    assert ghz(2).contains_up_to_sign(P("+ZI")) == Membership.ABSENT
    assert ghz(2, -1).contains_up_to_sign(P("-XX")) == Membership.PLUS


def test_swap_example():
    s = StabilizerState.from_generators(2, [P("+ZI"), P("-IZ")])
    s.apply_clifford(named_gate("SWAP"), (0, 1))
    assert set(map(str, s.generators)) == {"+IZ", "-ZI"}


def test_identity_gate_preserves_state():
    s = ghz(3)
    before = [str(g) for g in s.generators]
    s.apply_clifford(named_gate("I2"), (0, 2))
    assert [str(g) for g in s.generators] == before


def _random_pauli(n, rng, nonidentity=True):
    while True:
        x = int(rng.integers(0, 1 << n))
        z = int(rng.integers(0, 1 << n))
        if (x, z) != (0, 0) or not nonidentity:
            return PauliOperator(n, x, z, 1 if rng.integers(0, 2) == 0 else -1)


def test_invariants_under_random_operation_sequences(rng):
    """Pairwise commutation, independence and rank bookkeeping survive any
    mix of measurements, dephasings and Cliffords."""
    gates = [named_gate(n) for n in ("H", "S", "CNOT", "SWAP", "CZ")]
    for trial in range(25):
        n = int(rng.integers(2, 4))
        s = StabilizerState.from_generators(
            n, [PauliOperator.single(n, "Z", j) for j in range(n)]
        )
        for step in range(30):
            op = _random_pauli(n, rng)
            action = rng.integers(0, 3)
            k_before = s.rank
            if action == 0:
                _, was_random = s.measure(op, rng=rng)
                grew = s.rank - k_before
                assert grew in (0, 1)
                if grew == 1:
                    assert was_random
            elif action == 1:
                s.dephase(op)
                assert s.rank - k_before in (0, -1)
            else:
                g = gates[int(rng.integers(0, len(gates)))]
                if g.arity == 1:
                    s.apply_clifford(g, (int(rng.integers(0, n)),))
                else:
                    q0, q1 = rng.choice(n, size=2, replace=False)
                    s.apply_clifford(g, (int(q0), int(q1)))
            s.validate()


def test_measure_probabilities_match_dense_oracle(rng):
    """Outcome frequencies over 10^4 sampled trajectories agree with the
    dense projector probabilities within 3 sigma."""
    scenarios = [
        (ghz(2), P("+XI")),
        (ghz(3), P("+IXI")),
        (StabilizerState.from_generators(3, [P("+ZZI"), P("+XXX")]), P("+ZIZ")),
        (StabilizerState.from_generators(2, [P("+XX")]), P("+ZI")),
    ]
    n_samples = 10_000
    for state, op in scenarios:
        rho = state_density(state)
        proj = (np.eye(rho.shape[0]) + op_matrix(op)) / 2.0
        p_plus = float(np.real(np.trace(proj @ rho)))
        hits = 0
        for _ in range(n_samples):
            out, _ = state.copy().measure(op, rng=rng)
            hits += out == 1
        sigma = np.sqrt(max(p_plus * (1 - p_plus), 1e-12) / n_samples)
        assert abs(hits / n_samples - p_plus) <= max(3 * sigma, 1e-9)


def test_measurement_updates_state_like_dense_projection(rng):
    for seed in range(10):
        s = ghz(3)
        op = _random_pauli(3, np.random.default_rng(seed))
        rho = state_density(s)
        out, _ = s.measure(op, rng=rng)
        proj = (np.eye(8) + out * op_matrix(op)) / 2.0
        target = proj @ rho @ proj
        target /= np.trace(target)
        assert np.allclose(state_density(s), target, atol=1e-12)


def test_dephase_matches_dense_channel():
    for gens, op in [
        ([P("+XI"), P("+IX")], P("+ZI")),
        ([P("+ZZI"), P("+IZZ"), P("+XXX")], P("+IXI")),
    ]:
        n = gens[0].n_sites
        s = StabilizerState.from_generators(n, gens)
        rho = state_density(s)
        mop = op_matrix(op)
        plus = (np.eye(2**n) + mop) / 2.0
        minus = (np.eye(2**n) - mop) / 2.0
        target = plus @ rho @ plus + minus @ rho @ minus
        s.dephase(op)
        assert np.allclose(state_density(s), target, atol=1e-12)


def test_clifford_preserves_membership_under_conjugation(rng):
    """contains_up_to_sign commutes with simultaneous conjugation of the
    state and the query operator."""
    gate = named_gate("CNOT")
    for trial in range(30):
        n = 3
        s = ghz(3) if trial % 2 else StabilizerState.from_generators(
            3, [P("+ZZI"), P("+IIX")]
        )
        q = _random_pauli(n, rng, nonidentity=False)
        before = s.contains_up_to_sign(q)
        sites = (0, 1) if trial % 3 else (1, 2)
        s.apply_clifford(gate, sites)
        # conjugate the query by hand through the local table
        lx = ((q.x_mask >> sites[0]) & 1) | (((q.x_mask >> sites[1]) & 1) << 1)
        lz = ((q.z_mask >> sites[0]) & 1) | (((q.z_mask >> sites[1]) & 1) << 1)
        img = gate.image_of(PauliOperator(2, lx, lz, 1))
        x, z = q.x_mask, q.z_mask
        for b, site in enumerate(sites):
            x = (x & ~(1 << site)) | (((img.x_mask >> b) & 1) << site)
            z = (z & ~(1 << site)) | (((img.z_mask >> b) & 1) << site)
        q2 = PauliOperator(n, x, z, q.phase * img.phase)
        assert s.contains_up_to_sign(q2) == before


def test_apply_pauli_flips_signs_only():
    s = ghz(3)
    masks_before = [(g.x_mask, g.z_mask) for g in s.generators]
    s.apply_pauli(P("+XII"))
    assert [(g.x_mask, g.z_mask) for g in s.generators] == masks_before
    # X on site 0 anticommutes with the first ZZ bond only
    signs = [g.phase for g in s.generators]
    assert signs == [-1, 1, 1]
