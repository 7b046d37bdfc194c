import numpy as np
import pytest

from lxesim.paulis import (
    CliffordAction,
    NonHermitianProductError,
    PauliOperator,
    commutes,
    multiply,
    named_gate,
)

from conftest import op_matrix

P = PauliOperator.from_string


def all_signed_paulis(n):
    for x in range(1 << n):
        for z in range(1 << n):
            for phase in (1, -1):
                yield PauliOperator(n, x, z, phase)


def test_commutes_examples():
    assert not commutes(P("+X"), P("+Z"))
    assert commutes(P("+X"), P("+X"))
    assert commutes(P("+XX"), P("+ZZ"))


def test_commutes_matches_dense():
    for a in all_signed_paulis(2):
        for b in all_signed_paulis(2):
            ma, mb = op_matrix(a), op_matrix(b)
            dense = np.allclose(ma @ mb, mb @ ma)
            assert commutes(a, b) == dense


def test_commutes_size_mismatch():
    with pytest.raises(ValueError):
        commutes(P("+X"), P("+XX"))


def test_multiply_examples():
    assert multiply(P("+ZZI"), P("+IZZ")) == P("+ZIZ")
    assert multiply(P("+X"), P("+X")) == PauliOperator(1, 0, 0, 1)
    # Y.Y via the internal i-phase bookkeeping: lands back on +identity.
    assert multiply(P("+Y"), P("+Y")) == PauliOperator(1, 0, 0, 1)


def test_multiply_matches_dense_for_all_commuting_pairs():
    for a in all_signed_paulis(2):
        for b in all_signed_paulis(2):
            if not commutes(a, b):
                continue
            prod = multiply(a, b)
            assert np.allclose(op_matrix(prod), op_matrix(a) @ op_matrix(b))


def test_multiply_anticommuting_raises():
    with pytest.raises(NonHermitianProductError):
        multiply(P("+X"), P("+Z"))


def test_string_round_trip():
    for s in ("+XIZY", "-ZZII", "+IIII", "-Y"):
        assert str(P(s)) == s
    with pytest.raises(ValueError):
        P("+AB")
    with pytest.raises(ValueError):
        P("")


def test_masks_validated():
    with pytest.raises(ValueError):
        PauliOperator(2, 1 << 2, 0, 1)
    with pytest.raises(ValueError):
        PauliOperator(2, 0, 0, 2)


@pytest.mark.parametrize("name,matrix", [
    ("SWAP", np.eye(4)[:, [0, 2, 1, 3]].astype(complex)),
    ("CZ", np.diag([1, 1, 1, -1]).astype(complex)),
])
def test_named_gate_tables_match_dense(name, matrix):
    gate = named_gate(name)
    for p in all_signed_paulis(2):
        img = gate.image_of(p)
        assert np.allclose(op_matrix(img), matrix @ op_matrix(p) @ matrix.conj().T)


def test_cnot_table_matches_dense():
    # Control = qubit 0 = first tensor factor.
    cn = np.zeros((4, 4), dtype=complex)
    for c in range(2):
        for t in range(2):
            cn[c * 2 + (t ^ c), c * 2 + t] = 1
    gate = named_gate("CNOT")
    for p in all_signed_paulis(2):
        img = gate.image_of(p)
        assert np.allclose(op_matrix(img), cn @ op_matrix(p) @ cn.conj().T)
    assert gate.image_of(P("+XX")) == P("+XI")


def test_gate_images_multiplicative():
    gate = named_gate("CNOT")
    for a in all_signed_paulis(2):
        for b in all_signed_paulis(2):
            if not commutes(a, b):
                continue
            lhs = gate.image_of(multiply(a, b))
            rhs = multiply(gate.image_of(a), gate.image_of(b))
            assert lhs == rhs


def test_invalid_transfer_tables_rejected():
    with pytest.raises(ValueError):
        # Images of X and Z must anticommute.
        CliffordAction([P("X")], [P("X")])
    with pytest.raises(ValueError):
        # Cross-qubit images must commute.
        CliffordAction([P("XI"), P("ZI")], [P("ZI"), P("IZ")])
    with pytest.raises(ValueError):
        CliffordAction([P("XX")], [P("ZZ")])  # arity mismatch with register
