"""Classical bond-percolation oracle for the ZZ/X measurement-only circuit.

A circuit realization maps to a bond configuration on the (T+1) x L site
lattice: the ZZ layer of step t colours horizontal bonds (t,i)-(t,i+1) where
the bond was measured, and the X layer colours vertical bonds (t,i)-(t+1,i)
wherever no X measurement happened.  The GHZ-block preparation pre-joins the
block's bottom-row sites, and the LXE indicator of a realization equals
bottom-block-to-top-row connectivity (checked exhaustively in the tests).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .circuits import CircuitRealization

__all__ = [
    "BondConfiguration",
    "circuit_to_bonds",
    "spans",
    "crossing_probability_mc",
]


@dataclass
class BondConfiguration:
    """Occupied-bond grids for one realization (uint8 0/1 entries)."""

    L: int
    T: int
    boundary: str
    h_bonds: np.ndarray  # (T, L-1) open / (T, L) periodic
    v_bonds: np.ndarray  # (T, L)

    def __post_init__(self):
        nb = self.L if self.boundary == "periodic" else self.L - 1
        if self.h_bonds.shape != (self.T, nb):
            raise ValueError("h_bonds grid has the wrong shape")
        if self.v_bonds.shape != (self.T, self.L):
            raise ValueError("v_bonds grid has the wrong shape")

    @property
    def occupied_fraction(self) -> float:
        total = self.h_bonds.size + self.v_bonds.size
        return float(self.h_bonds.sum() + self.v_bonds.sum()) / total


def circuit_to_bonds(circuit: CircuitRealization) -> BondConfiguration:
    """Bond configuration of a zzx realization (h: ZZ done, v: no X)."""
    if circuit.model != "zzx":
        raise ValueError("the percolation mapping is defined for the zzx model")
    L, T = circuit.n_sites, circuit.n_steps
    nb = L if circuit.boundary == "periodic" else L - 1
    h = np.zeros((T, nb), dtype=np.uint8)
    v = np.ones((T, L), dtype=np.uint8)
    zz = circuit.ev_kind == K.EV_MEASURE_ZZ
    h[circuit.ev_layer[zz] // 2, circuit.ev_site[zz]] = 1
    xx = circuit.ev_kind == K.EV_MEASURE_X
    v[circuit.ev_layer[xx] // 2, circuit.ev_site[xx]] = 0
    return BondConfiguration(L, T, circuit.boundary, h, v)


def spans(bonds: BondConfiguration, r: int) -> bool:
    """Does the pre-joined central r-site bottom block reach the top row?

    Monotone in bond addition.  With periodic boundary r must equal L (the
    cylinder setting, where failure to span is equivalent to a wrapping
    hull).
    """
    L = bonds.L
    if r < 1 or r > L:
        raise ValueError("r must lie in [1, L]")
    if bonds.boundary == "periodic" and r != L:
        raise ValueError("periodic spans is defined for r = L")
    lo = (L - r) // 2
    return bool(
        K.spans_kernel(
            np.ascontiguousarray(bonds.h_bonds),
            np.ascontiguousarray(bonds.v_bonds),
            L, bonds.T, lo, lo + r,
        )
    )


def equivalence_scan(L: int, T: int, r: int, boundary: str = "open") -> int:
    """Exhaustively compare the replay indicator with ``spans``.

    Scans every ZZ/X placement pattern of a (L, T) zzx circuit with the
    psi+/psi- state pair of block width r and returns the number of
    disagreeing patterns (0 is the oracle-equivalence statement).
    """
    from .circuits import initial_state

    nb = L if boundary == "periodic" else L - 1
    n_patterns = 1 << (T * (nb + L))
    rho = initial_state("psi+", L, r)
    sig = initial_state("psi-", L, r)
    lo = (L - r) // 2
    return int(
        K.equivalence_scan_kernel(
            L, T, nb, lo, lo + r,
            rho.sx, rho.sz, rho.ssign, rho.dx, rho.dz, rho.k,
            sig.sx, sig.sz, sig.ssign, sig.dx, sig.dz, sig.k,
            0, n_patterns,
        )
    )


def crossing_probability_mc(
    L: int,
    T: int,
    p: float,
    r: int,
    boundary: str = "open",
    n_samples: int = 1000,
    seed: int = 0,
) -> tuple[float, float]:
    """Direct Bernoulli-bond estimate of P(spans) at bond probability 1-p.

    Bonds are sampled without building circuits; sample s draws from the
    s-th spawned child of the seed sequence, so results do not depend on how
    samples are scheduled.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if boundary not in ("open", "periodic"):
        raise ValueError("boundary must be 'open' or 'periodic'")
    if not 1 <= r <= L:
        raise ValueError("r must lie in [1, L]")
    if boundary == "periodic" and r != L:
        raise ValueError("periodic crossing is defined for r = L")
    nb = L if boundary == "periodic" else L - 1
    lo = (L - r) // 2
    keep = 1.0 - p
    hits = 0
    children = np.random.SeedSequence(seed).spawn(n_samples)
    for child in children:
        rng = np.random.default_rng(child)
        h = (rng.random((T, nb)) < keep).astype(np.uint8)
        v = (rng.random((T, L)) < keep).astype(np.uint8)
        hits += int(K.spans_kernel(h, v, L, T, lo, lo + r))
    mean = hits / n_samples
    stderr = float(np.sqrt(mean * (1.0 - mean) / n_samples))
    return mean, stderr
