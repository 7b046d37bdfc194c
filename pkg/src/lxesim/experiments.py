"""Config-driven batch runner: sweeps, crossings, collapse, leak probability.

A run is a JSON config naming an experiment, an ensemble grid (list-valued
fields are swept, Cartesian product in a fixed field order) and a master
seed.  Results land in a CSV with a pinned column set plus a JSON metadata
sidecar; identical configs reproduce identical bytes, whatever the worker
count.
"""

from __future__ import annotations

import itertools
import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .cft import (ObcModel, PbcModel, cardy_chi_obc, chi_obc_small_r,
                  chi_pbc, fit_scale)
from .circuits import (
    ZIZXX_CONVENTION,
    EnsembleParams,
    scrambler_layout,
    symmetric_clifford_table,
)
from .lxe import estimate_lxe
from .paulis import PauliOperator
from .tableau import StabilizerState
from . import _kernels as K

__all__ = [
    "RunConfig",
    "SweepResult",
    "run",
    "emit",
    "find_crossings",
    "collapse_residual",
    "estimate_leak_probability",
    "CrossingPoint",
]

EXPERIMENTS = (
    "lxe_sweep",
    "critical_aspect_obc",
    "critical_aspect_pbc",
    "phase_diagram",
    "noise_sweep",
    "leak_probability",
    "cft_tables",
)

SWEEP_HEADER = (
    "model", "L", "T", "p", "q", "r_xx", "r_ghz", "bc", "scope",
    "noise_rate", "n", "chi_mean", "chi_stderr", "seed",
)
LEAK_HEADER = ("L", "n", "q_mean", "q_stderr", "seed")
CFT_HEADER = ("table", "aspect", "r_over_L", "time_scale", "amplitude", "value")

# Ensemble fields allowed to carry sweep lists, in grid-product order.
_SWEEPABLE = ("L", "T", "p", "q", "r_xx", "noise_rate")


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending key."""


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    ensemble: dict
    master_seed: int
    output_path: str
    state_pair: tuple = ("ghz+", "ghz-")
    scope: str = "all"
    n_circuits: int = 100
    records_per_circuit: int | None = None
    workers: int = 1
    aspects: tuple = ()
    time_scale: float | None = None
    table: str | None = None
    r_over_L: float = 1.0
    n_samples: int | None = None

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        d = dict(raw)
        for req in ("experiment", "master_seed", "output_path"):
            if req not in d:
                raise ConfigError(f"config key {req!r} is required")
        if d["experiment"] not in EXPERIMENTS:
            raise ConfigError(
                f"experiment must be one of {EXPERIMENTS}, got {d['experiment']!r}"
            )
        if d["experiment"] not in ("leak_probability", "cft_tables") and "ensemble" not in d:
            raise ConfigError("config key 'ensemble' is required")
        d.setdefault("ensemble", {})
        if "state_pair" in d:
            d["state_pair"] = tuple(d["state_pair"])
        if "aspects" in d:
            d["aspects"] = tuple(float(a) for a in d["aspects"])
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, path: str) -> "RunConfig":
        with open(path) as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(
                    f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: "
                    f"{exc.msg}"
                ) from None
        return cls.from_dict(raw)


@dataclass
class SweepResult:
    header: tuple
    rows: list
    metadata: dict
    wall_time_s: float = 0.0
    row_times_s: list = field(default_factory=list)


def _ensemble_grid(ensemble: dict):
    """Expand list-valued sweepable fields into a list of EnsembleParams."""
    base = dict(ensemble)
    if "model" not in base:
        raise ConfigError("ensemble key 'model' is required")
    sweeps = []
    for name in _SWEEPABLE:
        v = base.get(name)
        if isinstance(v, (list, tuple)):
            sweeps.append([(name, x) for x in v])
    grid = []
    for combo in itertools.product(*sweeps):
        point = dict(base)
        point.update(dict(combo))
        if point.get("T") in (None, "L"):
            point["T"] = point["L"]
        try:
            grid.append(EnsembleParams(**point))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"ensemble point {point}: {exc}") from None
    if not grid:
        raise ConfigError("ensemble grid is empty")
    return grid


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".10g")
    return str(v)


def _sweep_rows(config: RunConfig, grid) -> SweepResult:
    rho_kind, sigma_kind = config.state_pair
    rows = []
    row_times = []
    for params in grid:
        t0 = time.perf_counter()
        est = estimate_lxe(
            params,
            rho_kind,
            sigma_kind,
            scope=config.scope,
            n_circuits=config.n_circuits,
            records_per_circuit=config.records_per_circuit,
            master_seed=config.master_seed,
            workers=config.workers,
        )
        row_times.append(time.perf_counter() - t0)
        rows.append((
            params.model, params.L, params.T, params.p, params.q,
            params.r_xx, params.r_ghz, params.boundary, config.scope,
            params.noise_rate, est.n_samples, est.mean, est.stderr,
            config.master_seed,
        ))
    meta = {
        "code_version": __version__,
        "config": _config_echo(config),
        "conventions": _convention_strings(grid),
    }
    return SweepResult(SWEEP_HEADER, rows, meta, row_times_s=row_times)


def _config_echo(config: RunConfig) -> dict:
    echo = {
        "experiment": config.experiment,
        "ensemble": config.ensemble,
        "state_pair": list(config.state_pair),
        "scope": config.scope,
        "n_circuits": config.n_circuits,
        "records_per_circuit": config.records_per_circuit,
        "master_seed": config.master_seed,
        "workers": config.workers,
    }
    if config.aspects:
        echo["aspects"] = list(config.aspects)
    if config.time_scale is not None:
        echo["time_scale"] = config.time_scale
    if config.table is not None:
        echo["table"] = config.table
    if config.n_samples is not None:
        echo["n_samples"] = config.n_samples
    return echo


def _convention_strings(grid) -> dict:
    conv = {}
    if any(p.model == "zizxx" for p in grid):
        conv["zizxx_composition"] = ZIZXX_CONVENTION
    conv["percolation_lattice"] = (
        "ZZ of step t -> horizontal bond (t,i)-(t,i+1); no X at step t -> "
        "vertical bond (t,i)-(t+1,i); GHZ block pre-joined in row 0"
    )
    return conv


def run(config: RunConfig) -> SweepResult:
    """Execute one experiment and write its CSV plus metadata sidecar."""
    t0 = time.perf_counter()
    if config.experiment in ("lxe_sweep", "phase_diagram", "noise_sweep"):
        grid = _ensemble_grid(config.ensemble)
        result = _sweep_rows(config, grid)
    elif config.experiment in ("critical_aspect_obc", "critical_aspect_pbc"):
        result = _critical_aspect(config)
    elif config.experiment == "leak_probability":
        result = _leak_rows(config)
    elif config.experiment == "cft_tables":
        result = _cft_rows(config)
    else:  # pragma: no cover - guarded by RunConfig
        raise ConfigError(f"unhandled experiment {config.experiment!r}")
    result.wall_time_s = time.perf_counter() - t0
    emit(result, config.output_path)
    return result


def _critical_aspect(config: RunConfig) -> SweepResult:
    if not config.aspects:
        raise ConfigError("critical_aspect experiments need 'aspects'")
    base = dict(config.ensemble)
    L = base.get("L")
    if not isinstance(L, int):
        raise ConfigError("critical_aspect experiments need a scalar ensemble L")
    grid = []
    for a in config.aspects:
        point = dict(base)
        point["T"] = max(1, round(a * L))
        grid.append(EnsembleParams(**point))
    result = _sweep_rows(config, grid)
    points = [
        (row[2] / row[1], row[11], row[12]) for row in result.rows
    ]
    if config.experiment == "critical_aspect_obc":
        fit = fit_scale(points, ObcModel(config.r_over_L))
    else:
        if config.time_scale is None:
            raise ConfigError("critical_aspect_pbc needs 'time_scale' from an OBC fit")
        fit = fit_scale(points, PbcModel(config.time_scale))
    result.metadata["fit"] = {
        "time_scale": fit.time_scale,
        "amplitude": fit.amplitude,
        "rms_residual": fit.rms_residual,
    }
    return result


def _leak_rows(config: RunConfig) -> SweepResult:
    Ls = config.ensemble.get("L", None)
    if Ls is None:
        raise ConfigError("leak_probability needs ensemble.L")
    if not isinstance(Ls, (list, tuple)):
        Ls = [Ls]
    n = config.n_samples or config.n_circuits
    rows = []
    for L in Ls:
        mean, stderr = estimate_leak_probability(int(L), n, config.master_seed)
        rows.append((int(L), n, mean, stderr, config.master_seed))
    meta = {"code_version": __version__, "config": _config_echo(config)}
    return SweepResult(LEAK_HEADER, rows, meta)


def _cft_rows(config: RunConfig) -> SweepResult:
    if config.table not in ("obc", "pbc", "small-r"):
        raise ConfigError("cft_tables needs table in {'obc','pbc','small-r'}")
    if not config.aspects:
        raise ConfigError("cft_tables needs 'aspects'")
    scale = config.time_scale if config.time_scale is not None else 1.0
    rows = []
    for a in config.aspects:
        if config.table == "obc":
            v = cardy_chi_obc(scale * a, config.r_over_L)
        elif config.table == "small-r":
            v = chi_obc_small_r(scale * a, config.r_over_L)
        else:
            v = chi_pbc(scale * a, 1.0)
        rows.append((config.table, a, config.r_over_L, scale, 1.0, v))
    meta = {"code_version": __version__, "config": _config_echo(config)}
    return SweepResult(CFT_HEADER, rows, meta)


def emit(result: SweepResult, path: str) -> None:
    """Write the CSV and its JSON sidecar with bit-stable contents."""
    lines = [",".join(result.header)]
    for row in result.rows:
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    with open(path + ".meta.json", "w") as fh:
        json.dump(result.metadata, fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass(frozen=True)
class CrossingPoint:
    L_pair: tuple
    p_star: float
    stderr: float


def find_crossings(curves: dict, n_bootstrap: int = 256) -> list[CrossingPoint]:
    """Pairwise curve crossings by linear interpolation on a shared grid.

    ``curves`` maps system size to a list of (p, chi, stderr) on a common
    p-grid.  Every sign change of chi_L1 - chi_L2 yields one crossing; the
    quoted stderr is a parametric bootstrap over the per-point stderrs.
    """
    sizes = sorted(curves)
    if len(sizes) < 2:
        raise ValueError("need at least two system sizes")
    grids = {}
    for L in sizes:
        pts = sorted(curves[L])
        grids[L] = pts
        if [p for p, _, _ in pts] != [p for p, _, _ in grids[sizes[0]]]:
            raise ValueError("curves must share a common p grid")
    ps = np.array([p for p, _, _ in grids[sizes[0]]])

    rng = np.random.default_rng(0)
    out = []
    for i, L1 in enumerate(sizes):
        for L2 in sizes[i + 1:]:
            c1 = np.array([c for _, c, _ in grids[L1]])
            c2 = np.array([c for _, c, _ in grids[L2]])
            e1 = np.array([e for _, _, e in grids[L1]])
            e2 = np.array([e for _, _, e in grids[L2]])
            stars = _sign_changes(ps, c1 - c2)
            if not stars:
                continue
            boots = [[] for _ in stars]
            for _ in range(n_bootstrap):
                d = (c1 + e1 * rng.standard_normal(len(ps))) - \
                    (c2 + e2 * rng.standard_normal(len(ps)))
                resampled = _sign_changes(ps, d)
                for j, star in enumerate(stars):
                    if resampled:
                        boots[j].append(min(resampled, key=lambda s: abs(s - star)))
            for star, bs in zip(stars, boots):
                err = float(np.std(bs)) if bs else 0.0
                out.append(CrossingPoint((L1, L2), float(star), err))
    return out


def _sign_changes(ps, d) -> list[float]:
    """Locations where the difference curve actually changes sign.

    Zero runs count only when bracketed by opposite signs (the crossing is
    placed at the midpoint of the run); saturated zero plateaus at the grid
    edges or between same-sign stretches are not crossings.
    """
    stars = []
    last_sign = 0
    last_idx = -1
    zero_start = None
    for i in range(len(ps)):
        s = 0 if d[i] == 0.0 else (1 if d[i] > 0.0 else -1)
        if s == 0:
            if zero_start is None:
                zero_start = i
            continue
        if last_sign != 0 and s != last_sign:
            if zero_start is not None:
                stars.append(float(0.5 * (ps[zero_start] + ps[i - 1])))
            else:
                j = last_idx
                stars.append(float(
                    ps[j] + d[j] * (ps[i] - ps[j]) / (d[j] - d[i])
                ))
        last_sign = s
        last_idx = i
        zero_start = None
    return stars


def collapse_residual(curves: dict, p_c: float, nu: float) -> float:
    """Finite-size-scaling collapse quality at (p_c, nu).

    Rescales every curve to x = (p - p_c) L^(1/nu) and measures the mean
    squared deviation of each point from the piecewise-linear master curve
    through the pooled points of the other sizes (leave-one-size-out);
    points outside the other sizes' x-range are skipped.
    """
    sizes = sorted(curves)
    if len(sizes) < 2:
        raise ValueError("need at least two system sizes")
    for L in sizes:
        if len(curves[L]) < 4:
            raise ValueError("need at least 4 points per size")
    scaled = {
        L: sorted(((p - p_c) * L ** (1.0 / nu), c) for p, c, *_ in curves[L])
        for L in sizes
    }
    total = 0.0
    count = 0
    for L in sizes:
        pool = sorted(
            xy for other in sizes if other != L for xy in scaled[other]
        )
        xs = np.array([x for x, _ in pool])
        ys = np.array([y for _, y in pool])
        for x, y in scaled[L]:
            if x < xs[0] or x > xs[-1]:
                continue
            total += (y - float(np.interp(x, xs, ys))) ** 2
            count += 1
    if count == 0:
        raise ValueError("no overlapping points after rescaling")
    return total / count


_ZZ_CHAIN_CACHE: dict = {}


def _zz_chain_state(L: int) -> StabilizerState:
    if L not in _ZZ_CHAIN_CACHE:
        gens = [
            PauliOperator(L, 0, (1 << j) | (1 << (j + 1)), 1)
            for j in range(L - 1)
        ]
        _ZZ_CHAIN_CACHE[L] = StabilizerState.from_generators(L, gens)
    return _ZZ_CHAIN_CACHE[L]


def estimate_leak_probability(L: int, n_samples: int, seed: int) -> tuple[float, float]:
    """Fraction of random depth-L symmetric scramblers that keep the GHZ
    parity sign hidden from Z-type measurements.

    Each sample conjugates the L-1 ZZ-chain generators through a fresh
    brickwork scrambler and applies ``leak_check``; the returned mean is the
    *survival* fraction (no exposing element exists), which for large L
    approaches ~2/3 and equals the spin-glass plateau of the scrambled-GHZ
    cross entropy.  The raw exposure fraction is 1 - mean.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    _, newcodes, flips = symmetric_clifford_table()
    template = _zz_chain_state(L)
    survived = 0
    for s in range(n_samples):
        rng = np.random.default_rng(np.random.SeedSequence((int(seed), s)))
        layout = scrambler_layout(L, L, rng)
        state = template.copy()
        if layout:
            sites = np.array([i for i, _ in layout], dtype=np.int64)
            gates = np.array([g for _, g in layout], dtype=np.int64)
            K.apply_gate_seq_kernel(
                state.sx, state.sz, state.ssign, state.dx, state.dz, state.k,
                sites, sites + 1, gates, newcodes, flips,
            )
        survived += int(not _leak_from_rows(state))
    mean = survived / n_samples
    stderr = float(np.sqrt(mean * (1.0 - mean) / n_samples))
    return mean, stderr


def _leak_from_rows(state: StabilizerState) -> bool:
    from .circuits import leak_check

    masks = []
    w = state.w
    for i in range(state.k):
        x = 0
        for j in range(w):
            x |= int(state.sx[i, j]) << (64 * j)
        masks.append(x)
    return leak_check(masks, state.n)
