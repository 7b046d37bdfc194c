"""Mixed-state stabilizer tableau with measurement, dephasing and Cliffords.

States are stabilizer density matrices given by k <= n independent commuting
signed Pauli generators (pure iff k = n).  Internally the tableau also keeps
one destabilizer row per generator so that deterministic measurement outcomes
and group membership resolve in O(k) row operations instead of a fresh GF(2)
solve per query; destabilizer phases are never tracked (they are not
observable).
"""

from __future__ import annotations

import enum

import numpy as np

from . import _kernels as K
from .paulis import CliffordAction, PauliOperator

__all__ = ["Membership", "IncompatibleOutcomeError", "StabilizerState"]


class Membership(enum.Enum):
    PLUS = 1
    MINUS = -1
    ABSENT = 0


class IncompatibleOutcomeError(Exception):
    """A forced measurement outcome contradicts the deterministic value."""

    def __init__(self, expected: int):
        super().__init__(f"deterministic outcome is {expected:+d}")
        self.expected = expected


def _solve_destabilizers(n: int, x_masks: list[int], z_masks: list[int]) -> list[tuple[int, int]]:
    """Find v_i with <v_i, s_j> = delta_ij for independent commuting rows.

    Row duals are 2n-bit ints (low n bits = z, high = x) so the symplectic
    product is a plain AND-parity.  Returns (v_x, v_z) pairs.
    """
    k = len(x_masks)
    duals = [z_masks[i] | (x_masks[i] << n) for i in range(k)]
    combos = [1 << i for i in range(k)]
    pivots = []
    r = 0
    for col in range(2 * n):
        sel = -1
        for i in range(r, k):
            if (duals[i] >> col) & 1:
                sel = i
                break
        if sel < 0:
            continue
        duals[r], duals[sel] = duals[sel], duals[r]
        combos[r], combos[sel] = combos[sel], combos[r]
        for i in range(k):
            if i != r and ((duals[i] >> col) & 1):
                duals[i] ^= duals[r]
                combos[i] ^= combos[r]
        pivots.append(col)
        r += 1
        if r == k:
            break
    if r < k:
        raise ValueError("generators are not independent over GF(2)")
    out = []
    for i in range(k):
        v = 0
        for j in range(k):
            if (combos[j] >> i) & 1:
                v |= 1 << pivots[j]
        out.append((v & ((1 << n) - 1), v >> n))
    return out


class StabilizerState:
    """Stabilizer state on ``n_sites`` qubits with ``rank`` generators."""

    def __init__(self, n_sites: int):
        """The rank-0 maximally mixed state; use ``from_generators`` for more."""
        if n_sites < 1:
            raise ValueError("n_sites must be positive")
        self.n = n_sites
        self.w = (n_sites + 63) // 64
        self.sx = np.zeros((n_sites, self.w), dtype=np.uint64)
        self.sz = np.zeros((n_sites, self.w), dtype=np.uint64)
        self.ssign = np.zeros(n_sites, dtype=np.uint8)
        self.dx = np.zeros((n_sites, self.w), dtype=np.uint64)
        self.dz = np.zeros((n_sites, self.w), dtype=np.uint64)
        self.k = 0

    @classmethod
    def from_generators(cls, n_sites: int, generators) -> "StabilizerState":
        """Build a state from commuting independent signed Pauli generators."""
        gens = list(generators)
        if len(gens) > n_sites:
            raise ValueError("more generators than sites")
        for g in gens:
            if g.n_sites != n_sites:
                raise ValueError("generator register size mismatch")
            if g.is_identity:
                raise ValueError("identity cannot be a generator")
        for i, a in enumerate(gens):
            for b in gens[i + 1:]:
                if _symp(a, b):
                    raise ValueError(f"generators {a} and {b} anticommute")
        destabs = _solve_destabilizers(
            n_sites, [g.x_mask for g in gens], [g.z_mask for g in gens]
        )
        state = cls(n_sites)
        for i, g in enumerate(gens):
            _write_masks(state.sx[i], state.sz[i], g.x_mask, g.z_mask)
            state.ssign[i] = 0 if g.phase == 1 else 1
            vx, vz = destabs[i]
            _write_masks(state.dx[i], state.dz[i], vx, vz)
        state.k = len(gens)
        return state

    @property
    def n_sites(self) -> int:
        return self.n

    @property
    def rank(self) -> int:
        return self.k

    @property
    def is_pure(self) -> bool:
        return self.k == self.n

    @property
    def generators(self) -> list[PauliOperator]:
        return [
            PauliOperator.from_words(self.n, self.sx[i], self.sz[i], self.ssign[i])
            for i in range(self.k)
        ]

    def copy(self) -> "StabilizerState":
        out = StabilizerState.__new__(StabilizerState)
        out.n = self.n
        out.w = self.w
        out.sx = self.sx.copy()
        out.sz = self.sz.copy()
        out.ssign = self.ssign.copy()
        out.dx = self.dx.copy()
        out.dz = self.dz.copy()
        out.k = self.k
        return out

    def _check_op(self, op: PauliOperator, allow_identity: bool = False):
        if op.n_sites != self.n:
            raise ValueError("operator register size mismatch")
        if op.is_identity and not allow_identity:
            raise ValueError("operator must not be the identity")

    def measure(self, op: PauliOperator, forced: int | None = None, rng=None):
        """Measure a signed Pauli; returns (outcome, was_random).

        ``forced`` overrides a random outcome with +1/-1; forcing against a
        deterministic value raises :class:`IncompatibleOutcomeError`.  ``rng``
        (numpy Generator) supplies the fair coin for unforced random outcomes.
        """
        self._check_op(op)
        if forced not in (None, 1, -1):
            raise ValueError("forced outcome must be +1 or -1")
        ox, oz = op.to_words()
        coin = 0
        if forced is None:
            if rng is None:
                raise ValueError("rng required when no forced outcome is given")
            coin = int(rng.integers(0, 2))
        fbit = -1 if forced is None else (0 if forced == 1 else 1)
        outb, was_random, self.k, status = K.measure_kernel(
            self.sx, self.sz, self.ssign, self.dx, self.dz, self.k, self.n,
            ox, oz, 0 if op.phase == 1 else 1, fbit, coin,
        )
        if status == 1:
            raise IncompatibleOutcomeError(1 - 2 * int(outb))
        return 1 - 2 * int(outb), bool(was_random)

    def dephase(self, op: PauliOperator) -> None:
        """Apply the projector-pair channel for ``op`` (rank drops by <= 1)."""
        self._check_op(op)
        ox, oz = op.to_words()
        self.k = K.dephase_kernel(
            self.sx, self.sz, self.ssign, self.dx, self.dz, self.k, ox, oz
        )

    def contains_up_to_sign(self, op: PauliOperator) -> Membership:
        """Whether +op or -op lies in the stabilizer group."""
        self._check_op(op, allow_identity=True)
        ox, oz = op.to_words()
        res = K.contains_kernel(
            self.sx, self.sz, self.ssign, self.dx, self.dz, self.k, ox, oz
        )
        if res == 0:
            return Membership.ABSENT
        sign = 1 if res == 1 else -1
        return Membership.PLUS if sign * op.phase == 1 else Membership.MINUS

    def apply_clifford(self, gate: CliffordAction, sites) -> None:
        """Conjugate every generator by the gate applied at ``sites``."""
        sites = list(sites)
        if len(sites) != gate.arity:
            raise ValueError("site count must equal gate arity")
        if len(set(sites)) != len(sites):
            raise ValueError("sites must be distinct")
        for s in sites:
            if not 0 <= s < self.n:
                raise ValueError(f"site {s} out of range")
        if gate.arity == 2:
            K.conj_2q_kernel(
                self.sx, self.sz, self.ssign, self.dx, self.dz, self.k,
                sites[0], sites[1], gate.newcode, gate.flip,
            )
        else:
            K.conj_1q_kernel(
                self.sx, self.sz, self.ssign, self.dx, self.dz, self.k,
                sites[0], gate.newcode, gate.flip,
            )

    def apply_pauli(self, op: PauliOperator) -> None:
        """Conjugate the state by a Pauli (only generator signs can change)."""
        self._check_op(op, allow_identity=True)
        for i in range(self.k):
            g = PauliOperator.from_words(self.n, self.sx[i], self.sz[i], 0)
            if _symp(op, g):
                self.ssign[i] ^= 1

    def validate(self) -> None:
        """Assert the tableau invariants; test-build helper."""
        gens = self.generators
        for i, a in enumerate(gens):
            for b in gens[i + 1:]:
                assert not _symp(a, b), "generators must commute"
        rows = [g.x_mask | (g.z_mask << self.n) for g in gens]
        assert _gf2_rank(rows) == self.k, "generators must stay independent"
        for i in range(self.k):
            d = PauliOperator.from_words(self.n, self.dx[i], self.dz[i], 0)
            for j in range(self.k):
                expect = 1 if i == j else 0
                assert _symp(d, gens[j]) == expect, "destabilizer pairing broken"

    def __str__(self) -> str:
        return "\n".join(str(g) for g in self.generators)


def _symp(a: PauliOperator, b: PauliOperator) -> int:
    x = bin(a.x_mask & b.z_mask).count("1") + bin(a.z_mask & b.x_mask).count("1")
    return x & 1


def _gf2_rank(rows: list[int]) -> int:
    basis: dict[int, int] = {}
    for row in rows:
        while row:
            lead = row.bit_length() - 1
            if lead in basis:
                row ^= basis[lead]
            else:
                basis[lead] = row
                break
    return len(basis)


def _write_masks(xw: np.ndarray, zw: np.ndarray, x: int, z: int) -> None:
    for j in range(len(xw)):
        xw[j] = (x >> (64 * j)) & 0xFFFFFFFFFFFFFFFF
        zw[j] = (z >> (64 * j)) & 0xFFFFFFFFFFFFFFFF
