"""Signed Pauli operators on a fixed register, plus Clifford transfer tables.

A :class:`PauliOperator` is ``phase * canonical(x_mask, z_mask)`` where the
canonical operator is the site-wise tensor product of I/X/Z/Y (Y on sites
where the x and z bits overlap).  The canonical operator is Hermitian, so the
public phase is restricted to +1/-1; products that would need an i-phase
(anticommuting operands) are rejected at this interface.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PauliOperator",
    "CliffordAction",
    "NonHermitianProductError",
    "commutes",
    "multiply",
]


class NonHermitianProductError(ValueError):
    """Raised when a Pauli product leaves the Hermitian +1/-1 interface."""


def _parity(x: int) -> int:
    return bin(x).count("1") & 1


def _phase_exponent(x1: int, z1: int, x2: int, z2: int) -> int:
    """i-exponent (mod 4) of canonical(1) * canonical(2), site-summed."""
    plus = (x1 & z1 & ~x2 & z2) | (x1 & ~z1 & x2 & z2) | (~x1 & z1 & x2 & ~z2)
    minus = (x1 & z1 & x2 & ~z2) | (x1 & ~z1 & ~x2 & z2) | (~x1 & z1 & x2 & z2)
    # Python ints are signed; restrict the complements to the live bits.
    live = (x1 | z1) & (x2 | z2)
    return (bin(plus & live).count("1") - bin(minus & live).count("1")) % 4


@dataclass(frozen=True)
class PauliOperator:
    """Signed Hermitian Pauli string on ``n_sites`` qubits.

    Masks are plain ints used as bit-vectors (bit i = site i); ``phase`` is
    +1 or -1.
    """

    n_sites: int
    x_mask: int = 0
    z_mask: int = 0
    phase: int = 1

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError("n_sites must be positive")
        full = (1 << self.n_sites) - 1
        if self.x_mask & ~full or self.z_mask & ~full:
            raise ValueError("mask exceeds register size")
        if self.phase not in (1, -1):
            raise ValueError("public phase must be +1 or -1")

    @classmethod
    def identity(cls, n_sites: int) -> "PauliOperator":
        return cls(n_sites)

    @classmethod
    def single(cls, n_sites: int, kind: str, site: int, phase: int = 1) -> "PauliOperator":
        """Single-site X/Y/Z at ``site`` (0-based)."""
        if not 0 <= site < n_sites:
            raise ValueError(f"site {site} out of range")
        bit = 1 << site
        if kind == "X":
            return cls(n_sites, bit, 0, phase)
        if kind == "Z":
            return cls(n_sites, 0, bit, phase)
        if kind == "Y":
            return cls(n_sites, bit, bit, phase)
        raise ValueError(f"unknown Pauli kind {kind!r}")

    @classmethod
    def from_string(cls, text: str) -> "PauliOperator":
        """Parse e.g. ``"+XIZY"`` (leftmost character = site 0)."""
        phase = 1
        if text and text[0] in "+-":
            phase = 1 if text[0] == "+" else -1
            text = text[1:]
        if not text:
            raise ValueError("empty Pauli string")
        x = z = 0
        for i, c in enumerate(text):
            if c in ("X", "Y"):
                x |= 1 << i
            if c in ("Z", "Y"):
                z |= 1 << i
            if c not in "IXYZ":
                raise ValueError(f"bad Pauli character {c!r}")
        return cls(len(text), x, z, phase)

    @property
    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    @property
    def weight(self) -> int:
        return bin(self.x_mask | self.z_mask).count("1")

    def site_kind(self, site: int) -> str:
        x = (self.x_mask >> site) & 1
        z = (self.z_mask >> site) & 1
        return "IXZY"[x + 2 * z] if x + 2 * z != 3 else "Y"

    def __str__(self) -> str:
        body = "".join(
            "IXZY"[((self.x_mask >> i) & 1) + 2 * ((self.z_mask >> i) & 1)]
            for i in range(self.n_sites)
        )
        return ("+" if self.phase == 1 else "-") + body

    def to_words(self) -> tuple[np.ndarray, np.ndarray]:
        """Bit-packed uint64 word arrays for the kernel layer."""
        w = (self.n_sites + 63) // 64
        xw = np.zeros(w, dtype=np.uint64)
        zw = np.zeros(w, dtype=np.uint64)
        x, z = self.x_mask, self.z_mask
        for j in range(w):
            xw[j] = (x >> (64 * j)) & 0xFFFFFFFFFFFFFFFF
            zw[j] = (z >> (64 * j)) & 0xFFFFFFFFFFFFFFFF
        return xw, zw

    @classmethod
    def from_words(cls, n_sites: int, xw, zw, sign_bit: int) -> "PauliOperator":
        x = z = 0
        for j in range(len(xw)):
            x |= int(xw[j]) << (64 * j)
            z |= int(zw[j]) << (64 * j)
        return cls(n_sites, x, z, 1 if sign_bit == 0 else -1)


def commutes(a: PauliOperator, b: PauliOperator) -> bool:
    """True iff a.b = b.a (parity of the symplectic overlap is even)."""
    if a.n_sites != b.n_sites:
        raise ValueError("operator size mismatch")
    return _parity(a.x_mask & b.z_mask) ^ _parity(a.z_mask & b.x_mask) == 0


def multiply(a: PauliOperator, b: PauliOperator) -> PauliOperator:
    """Hermitian product a.b; raises if the operands anticommute.

    The internal 2-bit phase accumulator absorbs the Y = iXZ bookkeeping;
    commuting Hermitian operands always land back on a +1/-1 phase.
    """
    if a.n_sites != b.n_sites:
        raise ValueError("operator size mismatch")
    exponent = _phase_exponent(a.x_mask, a.z_mask, b.x_mask, b.z_mask)
    if exponent % 2:
        raise NonHermitianProductError(
            "product of anticommuting Paulis is not Hermitian"
        )
    phase = a.phase * b.phase * (1 if exponent == 0 else -1)
    return PauliOperator(a.n_sites, a.x_mask ^ b.x_mask, a.z_mask ^ b.z_mask, phase)


def _mul_with_exponent(
    masks_a: tuple[int, int, int], masks_b: tuple[int, int, int]
) -> tuple[int, int, int]:
    """Product in (x, z, i-exponent) form; used to build gate tables."""
    xa, za, ea = masks_a
    xb, zb, eb = masks_b
    e = (ea + eb + _phase_exponent(xa, za, xb, zb)) % 4
    return xa ^ xb, za ^ zb, e


class CliffordAction:
    """A Clifford gate given by the images of X_j and Z_j on each input qubit.

    Images are signed Hermitian Paulis on the gate's own ``arity``-qubit
    register.  The constructor checks that the transfer table preserves the
    Pauli commutation relations.
    """

    def __init__(self, x_images: list[PauliOperator], z_images: list[PauliOperator]):
        if len(x_images) != len(z_images):
            raise ValueError("need one X image and one Z image per input qubit")
        arity = len(x_images)
        if arity not in (1, 2):
            raise ValueError("only 1- and 2-qubit gates are supported")
        for img in (*x_images, *z_images):
            if img.n_sites != arity:
                raise ValueError("image register size must equal gate arity")
            if img.is_identity:
                raise ValueError("image of a generator cannot be the identity")
        for i in range(arity):
            if commutes(x_images[i], z_images[i]):
                raise ValueError(f"images of X_{i} and Z_{i} must anticommute")
            for j in range(arity):
                if j == i:
                    continue
                if not commutes(x_images[i], x_images[j]):
                    raise ValueError("X images on distinct qubits must commute")
                if not commutes(x_images[i], z_images[j]):
                    raise ValueError("X and Z images on distinct qubits must commute")
                if not commutes(z_images[i], z_images[j]):
                    raise ValueError("Z images on distinct qubits must commute")
        self.arity = arity
        self.x_images = tuple(x_images)
        self.z_images = tuple(z_images)
        self.newcode, self.flip = self._build_table()

    def _build_table(self) -> tuple[np.ndarray, np.ndarray]:
        """Conjugation lookup: local mask code -> (new code, sign flip).

        Code packs the local bits as x0 | z0<<1 | x1<<2 | z1<<3 (arity 2)
        or x0 | z0<<1 (arity 1).
        """
        n_codes = 4**self.arity
        newcode = np.zeros(n_codes, dtype=np.uint8)
        flip = np.zeros(n_codes, dtype=np.uint8)
        for code in range(n_codes):
            x = z = 0
            exponent = 0
            acc = (0, 0, 0)
            for q in range(self.arity):
                xq = (code >> (2 * q)) & 1
                zq = (code >> (2 * q + 1)) & 1
                if xq and zq:
                    exponent += 1  # source-side Y = i X Z
                if xq:
                    img = self.x_images[q]
                    acc = _mul_with_exponent(
                        acc,
                        (img.x_mask, img.z_mask, 0 if img.phase == 1 else 2),
                    )
                if zq:
                    img = self.z_images[q]
                    acc = _mul_with_exponent(
                        acc,
                        (img.x_mask, img.z_mask, 0 if img.phase == 1 else 2),
                    )
            x, z, e = acc
            e = (e + exponent) % 4
            if e % 2:
                raise ValueError("transfer table produced a non-Hermitian image")
            out = 0
            for q in range(self.arity):
                out |= ((x >> q) & 1) << (2 * q)
                out |= ((z >> q) & 1) << (2 * q + 1)
            newcode[code] = out
            flip[code] = 0 if e == 0 else 1
        return newcode, flip

    def image_of(self, op: PauliOperator) -> PauliOperator:
        """Conjugate a Pauli on the gate's own register."""
        code = 0
        for q in range(self.arity):
            code |= ((op.x_mask >> q) & 1) << (2 * q)
            code |= ((op.z_mask >> q) & 1) << (2 * q + 1)
        nc = int(self.newcode[code])
        x = z = 0
        for q in range(self.arity):
            x |= ((nc >> (2 * q)) & 1) << q
            z |= ((nc >> (2 * q + 1)) & 1) << q
        phase = op.phase * (-1 if self.flip[code] else 1)
        return PauliOperator(self.arity, x, z, phase)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CliffordAction):
            return NotImplemented
        return self.arity == other.arity and np.array_equal(
            self.newcode, other.newcode
        ) and np.array_equal(self.flip, other.flip)

    def __hash__(self):
        return hash((self.arity, self.newcode.tobytes(), self.flip.tobytes()))


def named_gate(name: str) -> CliffordAction:
    """Reference gates used in tests and documentation."""
    P = PauliOperator.from_string
    if name == "I1":
        return CliffordAction([P("X")], [P("Z")])
    if name == "I2":
        return CliffordAction([P("XI"), P("IX")], [P("ZI"), P("IZ")])
    if name == "H":
        return CliffordAction([P("Z")], [P("X")])
    if name == "S":
        return CliffordAction([P("Y")], [P("Z")])
    if name == "SWAP":
        return CliffordAction([P("IX"), P("XI")], [P("IZ"), P("ZI")])
    if name == "CNOT":
        # Control qubit 0, target qubit 1.
        return CliffordAction([P("XX"), P("IX")], [P("ZI"), P("ZZ")])
    if name == "CZ":
        return CliffordAction([P("XZ"), P("ZX")], [P("ZI"), P("IZ")])
    raise ValueError(f"unknown gate {name!r}")
