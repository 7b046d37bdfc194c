"""Seed-deterministic circuit ensembles, initial states and symmetric gates.

Three ensembles are provided:

- ``zzx``: per time step, a layer of nearest-neighbour ZZ measurements (each
  bond with probability 1-p) followed by a layer of single-site X
  measurements (each site with probability p).
- ``hybrid``: brickwork; each brick is a symmetric random 2-qubit Clifford
  with probability q, otherwise an X measurement on its left qubit with
  probability p or a ZZ measurement; the rightmost qubit receives an extra
  X-measurement slot in every other layer with probability p(1-q).
- ``zizxx``: periodic; per step a bond layer (active with probability 1-p;
  ZZ with probability r_xx, else next-nearest ZIZ) then a site layer (active
  with probability p; XX with probability r_xx, else X).  This composition
  makes the X<->ZZ duality act as (p, r_xx) -> (1-p, 1-r_xx), pinning the
  self-dual crossing of the p = 1/2 cut at r_xx = 1/2.

All structural randomness comes from streams derived from (seed, purpose) so
that toggling the noise rate never perturbs measurement placement.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _kernels as K
from .paulis import CliffordAction, PauliOperator
from .tableau import StabilizerState

__all__ = [
    "EnsembleParams",
    "Event",
    "CircuitRealization",
    "build_zzx",
    "build_hybrid",
    "build_zizxx",
    "build_circuit",
    "initial_state",
    "sample_symmetric_clifford_2q",
    "symmetric_clifford_table",
    "scramble",
    "scrambler_layout",
    "leak_check",
    "apply_noise_slot",
]

ZIZXX_CONVENTION = (
    "per step: bond slot i active w.p. (1-p), kind ZZ w.p. r_xx else ZIZ; "
    "site slot i active w.p. p, kind XX w.p. r_xx else X; periodic"
)

# Stream tags for (seed, purpose)-derived generators.
_TAG_STRUCTURE = 0
_TAG_NOISE_PLACEMENT = 1
TAG_OUTCOMES = 2
TAG_NOISE_BRANCH = 3

_KIND_NAMES = {
    K.EV_MEASURE_ZZ: "measure_zz",
    K.EV_MEASURE_X: "measure_x",
    K.EV_MEASURE_ZIZ: "measure_ziz",
    K.EV_MEASURE_XX: "measure_xx",
    K.EV_UNITARY: "unitary",
    K.EV_NOISE: "noise_slot",
}

X_TYPE_KINDS = (K.EV_MEASURE_X, K.EV_MEASURE_XX)
Z_TYPE_KINDS = (K.EV_MEASURE_ZZ, K.EV_MEASURE_ZIZ)


def stream_rng(seed: int, *tags: int) -> np.random.Generator:
    """Generator for an independent, reproducible (seed, purpose) stream."""
    return np.random.default_rng(np.random.SeedSequence((int(seed), *tags)))


@dataclass(frozen=True)
class EnsembleParams:
    """Parameters of one circuit ensemble grid point."""

    model: str
    L: int
    T: int
    p: float
    q: float = 0.0
    noise_rate: float = 0.0
    r_xx: float = 0.0
    boundary: str = "open"
    r_ghz: int | None = None
    scramble_depth: int | None = None

    def __post_init__(self):
        if self.model not in ("zzx", "hybrid", "zizxx"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.L < 2 or self.L % 2:
            raise ValueError("L must be even and >= 2")
        if self.T < 1:
            raise ValueError("T must be >= 1")
        for name in ("p", "q", "noise_rate", "r_xx"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.boundary not in ("open", "periodic"):
            raise ValueError("boundary must be 'open' or 'periodic'")
        if self.model == "hybrid" and self.boundary != "open":
            raise ValueError("hybrid model requires open boundary")
        if self.model == "zizxx":
            if self.boundary != "periodic":
                raise ValueError("zizxx model requires periodic boundary")
            if self.L < 4:
                raise ValueError("zizxx model needs L >= 4")
        if self.r_ghz is not None:
            if self.r_ghz < 2 or self.r_ghz % 2 or self.r_ghz > self.L:
                raise ValueError("r_ghz must be even with 2 <= r_ghz <= L")
        if self.scramble_depth is not None and self.scramble_depth < 0:
            raise ValueError("scramble_depth must be >= 0")


class Event(NamedTuple):
    kind: str
    site: int
    site2: int | None
    gate_id: int | None
    layer: int
    recordable: bool


@dataclass
class CircuitRealization:
    """One disorder sample: a flat, seed-reproducible event list."""

    n_sites: int
    n_steps: int
    boundary: str
    model: str
    seed: int
    ev_kind: np.ndarray
    ev_site: np.ndarray
    ev_site2: np.ndarray
    ev_aux: np.ndarray
    ev_layer: np.ndarray
    convention: str = ""
    _events: list | None = field(default=None, repr=False, compare=False)

    @property
    def n_events(self) -> int:
        return int(self.ev_kind.shape[0])

    @property
    def n_measurements(self) -> int:
        return int(np.count_nonzero(self.ev_kind <= K.EV_MEASURE_XX))

    @property
    def n_noise_slots(self) -> int:
        return int(np.count_nonzero(self.ev_kind == K.EV_NOISE))

    @property
    def recordable(self) -> np.ndarray:
        return self.ev_kind <= K.EV_MEASURE_XX

    @property
    def events(self) -> list[Event]:
        if self._events is None:
            self._events = [
                Event(
                    _KIND_NAMES[int(k)],
                    int(s),
                    None if s2 < 0 else int(s2),
                    int(a) if k == K.EV_UNITARY else None,
                    int(lay),
                    bool(k <= K.EV_MEASURE_XX),
                )
                for k, s, s2, a, lay in zip(
                    self.ev_kind, self.ev_site, self.ev_site2,
                    self.ev_aux, self.ev_layer,
                )
            ]
        return self._events

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(
            f"{self.model}|{self.n_sites}|{self.n_steps}|{self.boundary}|"
            f"{self.seed}|{self.convention}".encode()
        )
        for a in (self.ev_kind, self.ev_site, self.ev_site2, self.ev_aux, self.ev_layer):
            h.update(np.ascontiguousarray(a).tobytes())
        return h.hexdigest()

    def scope_mask(self, scope: str) -> np.ndarray:
        """Boolean per-event mask of recordable events within a scope."""
        kinds = self.ev_kind
        if scope == "all":
            return kinds <= K.EV_MEASURE_XX
        if scope == "x_only":
            return np.isin(kinds, X_TYPE_KINDS)
        if scope == "z_only":
            return np.isin(kinds, Z_TYPE_KINDS)
        raise ValueError(f"unknown scope {scope!r}")


def _assemble(model, params, seed, fire, kind, site, site2, layer, convention=""):
    flat = np.flatnonzero(fire.ravel())
    return CircuitRealization(
        n_sites=params.L,
        n_steps=params.T,
        boundary=params.boundary,
        model=model,
        seed=int(seed),
        ev_kind=kind.ravel()[flat].astype(np.int8),
        ev_site=site.ravel()[flat].astype(np.int32),
        ev_site2=site2.ravel()[flat].astype(np.int32),
        ev_aux=np.full(flat.shape[0], -1, dtype=np.int32),
        ev_layer=layer.ravel()[flat].astype(np.int32),
        convention=convention,
    )


def build_zzx(params: EnsembleParams, seed: int) -> CircuitRealization:
    """ZZ/X measurement-only circuit: T steps of a ZZ layer then an X layer."""
    if params.model != "zzx":
        raise ValueError("params.model must be 'zzx'")
    L, T = params.L, params.T
    nb = L if params.boundary == "periodic" else L - 1
    rng = stream_rng(seed, _TAG_STRUCTURE)

    S = nb + L + L + L  # [ZZ bonds | noise | X sites | noise]
    fire = np.zeros((T, S), dtype=bool)
    fire[:, :nb] = rng.random((T, nb)) < 1.0 - params.p
    fire[:, nb + L:nb + 2 * L] = rng.random((T, L)) < params.p
    if params.noise_rate > 0.0:
        nrng = stream_rng(seed, _TAG_NOISE_PLACEMENT)
        fire[:, nb:nb + L] = nrng.random((T, L)) < params.noise_rate
        fire[:, nb + 2 * L:] = nrng.random((T, L)) < params.noise_rate

    kind_col = np.concatenate([
        np.full(nb, K.EV_MEASURE_ZZ),
        np.full(L, K.EV_NOISE),
        np.full(L, K.EV_MEASURE_X),
        np.full(L, K.EV_NOISE),
    ]).astype(np.int8)
    sites = np.arange(L)
    site_col = np.concatenate([np.arange(nb), sites, sites, sites])
    site2_col = np.concatenate([
        (np.arange(nb) + 1) % L,
        np.full(L, -1), np.full(L, -1), np.full(L, -1),
    ])
    layer_off = np.concatenate([
        np.zeros(nb), np.zeros(L), np.ones(L), np.ones(L),
    ]).astype(np.int64)

    t_grid = np.arange(T)[:, None]
    kind = np.broadcast_to(kind_col, (T, S))
    site = np.broadcast_to(site_col, (T, S))
    site2 = np.broadcast_to(site2_col, (T, S))
    layer = 2 * t_grid + layer_off
    layer = np.broadcast_to(layer, (T, S))
    return _assemble("zzx", params, seed, fire, kind, site, site2, layer)


def build_hybrid(params: EnsembleParams, seed: int) -> CircuitRealization:
    """Brickwork circuit mixing ZZ/X measurements with symmetric unitaries.

    One time step is an even-offset brick layer followed by an odd-offset
    one (2T layers in total).  Each brick is a symmetric unitary with
    probability q, else an X measurement of its left qubit with probability
    p or a ZZ measurement; odd layers add a rightmost-qubit X slot firing
    with probability p(1-q) so every site sees one X chance per step.
    """
    if params.model != "hybrid":
        raise ValueError("params.model must be 'hybrid'")
    L, T = params.L, params.T
    half = L // 2
    n_layers = 2 * T
    rng = stream_rng(seed, _TAG_STRUCTURE)

    S = half + 1 + L  # [bricks | rightmost X slot | noise]
    parity = (np.arange(n_layers) % 2)[:, None]
    brick_site = 2 * np.arange(half)[None, :] + parity  # (n_layers, half)
    brick_valid = brick_site + 1 <= L - 1

    u_gate = rng.random((n_layers, half))
    u_meas = rng.random((n_layers, half))
    right_fire = rng.random(n_layers) < params.p * (1.0 - params.q)

    fire = np.zeros((n_layers, S), dtype=bool)
    fire[:, :half] = brick_valid
    fire[:, half] = (np.arange(n_layers) % 2 == 1) & right_fire
    if params.noise_rate > 0.0:
        nrng = stream_rng(seed, _TAG_NOISE_PLACEMENT)
        fire[:, half + 1:] = nrng.random((n_layers, L)) < params.noise_rate

    brick_kind = np.where(
        u_gate < params.q,
        K.EV_UNITARY,
        np.where(u_meas < params.p, K.EV_MEASURE_X, K.EV_MEASURE_ZZ),
    )
    kind = np.zeros((n_layers, S), dtype=np.int8)
    kind[:, :half] = brick_kind
    kind[:, half] = K.EV_MEASURE_X
    kind[:, half + 1:] = K.EV_NOISE

    site = np.zeros((n_layers, S), dtype=np.int64)
    site[:, :half] = brick_site
    site[:, half] = L - 1
    site[:, half + 1:] = np.arange(L)[None, :]

    site2 = np.full((n_layers, S), -1, dtype=np.int64)
    two_qubit = (kind[:, :half] == K.EV_UNITARY) | (kind[:, :half] == K.EV_MEASURE_ZZ)
    site2[:, :half] = np.where(two_qubit, brick_site + 1, -1)

    layer = np.broadcast_to(np.arange(n_layers)[:, None], (n_layers, S))

    circ = _assemble("hybrid", params, seed, fire, kind, site, site2, layer)
    unitary = circ.ev_kind == K.EV_UNITARY
    n_gates = len(symmetric_clifford_table()[0])
    circ.ev_aux[unitary] = rng.integers(0, n_gates, size=int(unitary.sum()))
    return circ


def build_zizxx(params: EnsembleParams, seed: int) -> CircuitRealization:
    """Longer-range measurement-only circuit mixing ZZ/ZIZ and X/XX kinds."""
    if params.model != "zizxx":
        raise ValueError("params.model must be 'zizxx'")
    L, T = params.L, params.T
    rng = stream_rng(seed, _TAG_STRUCTURE)

    S = L + L + L + L  # [bond slots | noise | site slots | noise]
    bond_fire = rng.random((T, L)) < 1.0 - params.p
    bond_sub = rng.random((T, L)) < params.r_xx  # True -> ZZ
    site_fire = rng.random((T, L)) < params.p
    site_sub = rng.random((T, L)) < params.r_xx  # True -> XX

    fire = np.zeros((T, S), dtype=bool)
    fire[:, :L] = bond_fire
    fire[:, 2 * L:3 * L] = site_fire
    if params.noise_rate > 0.0:
        nrng = stream_rng(seed, _TAG_NOISE_PLACEMENT)
        fire[:, L:2 * L] = nrng.random((T, L)) < params.noise_rate
        fire[:, 3 * L:] = nrng.random((T, L)) < params.noise_rate

    kind = np.zeros((T, S), dtype=np.int8)
    kind[:, :L] = np.where(bond_sub, K.EV_MEASURE_ZZ, K.EV_MEASURE_ZIZ)
    kind[:, L:2 * L] = K.EV_NOISE
    kind[:, 2 * L:3 * L] = np.where(site_sub, K.EV_MEASURE_XX, K.EV_MEASURE_X)
    kind[:, 3 * L:] = K.EV_NOISE

    sites = np.arange(L)[None, :]
    site = np.zeros((T, S), dtype=np.int64)
    for blk in range(4):
        site[:, blk * L:(blk + 1) * L] = sites

    site2 = np.full((T, S), -1, dtype=np.int64)
    site2[:, :L] = np.where(bond_sub, (sites + 1) % L, (sites + 2) % L)
    site2[:, 2 * L:3 * L] = np.where(site_sub, (sites + 1) % L, -1)

    layer_off = np.concatenate([
        np.zeros(L), np.zeros(L), np.ones(L), np.ones(L),
    ]).astype(np.int64)
    layer = 2 * np.arange(T)[:, None] + layer_off[None, :]
    layer = np.broadcast_to(layer, (T, S))
    return _assemble(
        "zizxx", params, seed, fire, kind, site, site2, layer,
        convention=ZIZXX_CONVENTION,
    )


def build_circuit(params: EnsembleParams, seed: int) -> CircuitRealization:
    builder = {
        "zzx": build_zzx,
        "hybrid": build_hybrid,
        "zizxx": build_zizxx,
    }[params.model]
    return builder(params, seed)


def zzx_from_pattern(zz_grid, x_grid, boundary: str = "open") -> CircuitRealization:
    """Deterministic zzx circuit from explicit (T, nb) ZZ and (T, L) X grids."""
    zz_grid = np.asarray(zz_grid, dtype=bool)
    x_grid = np.asarray(x_grid, dtype=bool)
    T, L = x_grid.shape
    nb = L if boundary == "periodic" else L - 1
    if zz_grid.shape != (T, nb):
        raise ValueError("ZZ grid shape mismatch")
    params = EnsembleParams(model="zzx", L=L, T=T, p=0.5, boundary=boundary)
    S = nb + L
    fire = np.concatenate([zz_grid, x_grid], axis=1)
    kind_col = np.concatenate([
        np.full(nb, K.EV_MEASURE_ZZ), np.full(L, K.EV_MEASURE_X),
    ]).astype(np.int8)
    site_col = np.concatenate([np.arange(nb), np.arange(L)])
    site2_col = np.concatenate([(np.arange(nb) + 1) % L, np.full(L, -1)])
    layer_off = np.concatenate([np.zeros(nb), np.ones(L)]).astype(np.int64)
    kind = np.broadcast_to(kind_col, (T, S))
    site = np.broadcast_to(site_col, (T, S))
    site2 = np.broadcast_to(site2_col, (T, S))
    layer = np.broadcast_to(2 * np.arange(T)[:, None] + layer_off, (T, S))
    return _assemble("zzx", params, 0, fire, kind, site, site2, layer)


def initial_state(kind: str, L: int, r: int | None = None) -> StabilizerState:
    """Construct one of the reference initial states.

    Kinds: ``ghz+``/``ghz-`` (L-site GHZ with +/- X-parity), ``psi+``/
    ``psi-`` (an r-site GHZ block centered in a +x product background) and
    ``product+x``.  ``ghz+-`` equal ``psi+-`` at r = L.
    """
    if L < 2 or L % 2:
        raise ValueError("L must be even and >= 2")
    if kind == "product+x":
        gens = [PauliOperator.single(L, "X", j) for j in range(L)]
        return StabilizerState.from_generators(L, gens)
    if kind in ("ghz+", "ghz-"):
        r = L
        sign = 1 if kind == "ghz+" else -1
    elif kind in ("psi+", "psi-"):
        if r is None:
            r = L
        sign = 1 if kind == "psi+" else -1
    else:
        raise ValueError(f"unknown state kind {kind!r}")
    if r < 2 or r % 2 or r > L:
        raise ValueError("r must be even with 2 <= r <= L")
    lo = (L - r) // 2
    hi = lo + r
    gens = [PauliOperator.single(L, "X", j) for j in range(lo)]
    gens += [
        PauliOperator(L, 0, (1 << j) | (1 << (j + 1)), 1)
        for j in range(lo, hi - 1)
    ]
    block_mask = ((1 << r) - 1) << lo
    gens.append(PauliOperator(L, block_mask, 0, sign))
    gens += [PauliOperator.single(L, "X", j) for j in range(hi, L)]
    return StabilizerState.from_generators(L, gens)


# ---------------------------------------------------------------------------
# Symmetric 2-qubit Clifford sampling
# ---------------------------------------------------------------------------

_MASKS_2Q = [(x, z) for x in range(4) for z in range(4)]


def _anti(m1, m2):
    x1, z1 = m1
    x2, z2 = m2
    return (bin(x1 & z2).count("1") + bin(z1 & x2).count("1")) & 1


def _images_to_action(images) -> CliffordAction:
    (x0, s0), (z0, t0), (x1, s1), (z1, t1) = images
    mk = lambda m, s: PauliOperator(2, m[0], m[1], 1 - 2 * s)
    return CliffordAction([mk(x0, s0), mk(x1, s1)], [mk(z0, t0), mk(z1, t1)])


def _xx_image(images):
    """Image of X(x)X under the transfer table, in (x, z, sign) mask form."""
    (mx0, s0), _, (mx1, s1), _ = images
    x1, z1 = mx0
    x2, z2 = mx1
    # f-phase of the canonical product; the operands commute.
    plus = (x1 & z1 & ~x2 & z2) | (x1 & ~z1 & x2 & z2) | (~x1 & z1 & x2 & ~z2)
    minus = (x1 & z1 & x2 & ~z2) | (x1 & ~z1 & ~x2 & z2) | (~x1 & z1 & x2 & z2)
    live = (x1 | z1) & (x2 | z2)
    e = (bin(plus & live).count("1") - bin(minus & live).count("1")) % 4
    sign = (s0 + s1 + (1 if e == 2 else 0)) % 2
    return (x1 ^ x2, z1 ^ z2), sign


def _enumerate_uniform_choices():
    """Choice lists realizing the canonical-form uniform 2q Clifford draw."""
    non_identity = [m for m in _MASKS_2Q if m != (0, 0)]
    return non_identity


def _draw_uniform_images(rng):
    """Uniform 2-qubit Clifford as images of X0, Z0, X1, Z1 (mask, signbit)."""
    non_identity = _enumerate_uniform_choices()
    mx0 = non_identity[rng.integers(0, 15)]
    s0 = int(rng.integers(0, 2))
    anti0 = [m for m in _MASKS_2Q if _anti(m, mx0)]
    mz0 = anti0[rng.integers(0, len(anti0))]
    t0 = int(rng.integers(0, 2))
    comm = [
        m for m in _MASKS_2Q
        if m != (0, 0) and not _anti(m, mx0) and not _anti(m, mz0)
    ]
    mx1 = comm[rng.integers(0, len(comm))]
    s1 = int(rng.integers(0, 2))
    anti1 = [m for m in comm if _anti(m, mx1)]
    mz1 = anti1[rng.integers(0, len(anti1))]
    t1 = int(rng.integers(0, 2))
    return ((mx0, s0), (mz0, t0), (mx1, s1), (mz1, t1))


def _is_xx_symmetric(images) -> bool:
    mask, sign = _xx_image(images)
    return mask == (3, 0) and sign == 0


def sample_symmetric_clifford_2q(rng) -> CliffordAction:
    """Rejection-sample a uniform 2-qubit Clifford fixing X(x)X.

    Uniform draws over the full 11520-element group are accepted iff the
    image of X(x)X is exactly +X(x)X (about 1 in 30 draws).
    """
    while True:
        images = _draw_uniform_images(rng)
        if _is_xx_symmetric(images):
            gate = _images_to_action(images)
            assert gate.image_of(PauliOperator.from_string("+XX")) == \
                PauliOperator.from_string("+XX")
            return gate


_SYM_TABLE: tuple | None = None


def symmetric_clifford_table():
    """All 384 XX-preserving 2-qubit Cliffords in a fixed enumeration order.

    Returns (actions, newcodes, flips) with stacked (384, 16) uint8 code
    tables for the conjugation kernels.
    """
    global _SYM_TABLE
    if _SYM_TABLE is None:
        non_identity = _enumerate_uniform_choices()
        actions = []
        for mx0 in non_identity:
            anti0 = [m for m in _MASKS_2Q if _anti(m, mx0)]
            for s0 in (0, 1):
                for mz0 in anti0:
                    comm = [
                        m for m in _MASKS_2Q
                        if m != (0, 0) and not _anti(m, mx0) and not _anti(m, mz0)
                    ]
                    for t0 in (0, 1):
                        for mx1 in comm:
                            anti1 = [m for m in comm if _anti(m, mx1)]
                            for s1 in (0, 1):
                                for mz1 in anti1:
                                    for t1 in (0, 1):
                                        images = (
                                            (mx0, s0), (mz0, t0),
                                            (mx1, s1), (mz1, t1),
                                        )
                                        if _is_xx_symmetric(images):
                                            actions.append(_images_to_action(images))
        newcodes = np.stack([a.newcode for a in actions])
        flips = np.stack([a.flip for a in actions])
        _SYM_TABLE = (actions, newcodes, flips)
    return _SYM_TABLE


def scrambler_layout(L: int, depth: int, rng) -> list[tuple[int, int]]:
    """Brickwork layout of symmetric gates: list of (left site, gate index)."""
    _, newcodes, _ = symmetric_clifford_table()
    n_gates = newcodes.shape[0]
    sites = [i for d in range(depth) for i in range(d % 2, L - 1, 2)]
    gates = rng.integers(0, n_gates, size=len(sites))
    return list(zip(sites, (int(g) for g in gates)))


def scramble(state: StabilizerState, L: int, depth: int, rng) -> StabilizerState:
    """Apply a random symmetric brickwork unitary of the given depth."""
    if state.n_sites != L:
        raise ValueError("state size mismatch")
    actions, _, _ = symmetric_clifford_table()
    for site, g in scrambler_layout(L, depth, rng):
        state.apply_clifford(actions[g], (site, site + 1))
    return state


def leak_check(images, L: int) -> bool:
    """Whether the all-ones X-mask lies in the GF(2) span of image X-masks.

    ``images`` are the conjugated ZZ-type generators of a scrambled GHZ
    state; solvability means Z-type measurements can resolve the X-parity
    sign of the scrambled state.
    """
    target = (1 << L) - 1
    basis: dict[int, int] = {}
    for img in images:
        row = img.x_mask if isinstance(img, PauliOperator) else int(img)
        while row:
            lead = row.bit_length() - 1
            if lead in basis:
                row ^= basis[lead]
            else:
                basis[lead] = row
                break
    row = target
    while row:
        lead = row.bit_length() - 1
        if lead not in basis:
            return False
        row ^= basis[lead]
    return True


def apply_noise_slot(state: StabilizerState, site: int, rng) -> StabilizerState:
    """Trajectory branch of the symmetric bit-flip channel at one site."""
    if rng.integers(0, 2):
        state.apply_pauli(PauliOperator.single(state.n_sites, "X", site))
    return state
