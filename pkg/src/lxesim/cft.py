"""Closed-form critical predictions for the LXE at the percolation point.

Open boundaries: the LXE equals a boundary four-point function evaluated by
mapping the upper half-plane to the L x T rectangle with a Schwarz-
Christoffel transformation built from elliptic integrals; the small-r/L
asymptote exposes the scaling dimension 1/3.  Periodic boundaries: a
two-point function on the cylinder, amplitude * [2 cosh(2 pi T/L) - 2]^(-5/48).

The lattice time unit is not fixed a priori, so comparisons against
simulation data go through a single fitted ``time_scale`` multiplying the
aspect ratio (plus an overall amplitude in the periodic case).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .special import (adaptive_simpson, ellipk, ellipk_complement, gamma,
                      hyp2f1_third)

__all__ = [
    "CftParams",
    "PBC_EXPONENT",
    "CORRELATION_NU",
    "cardy_prefactor",
    "sc_map_w",
    "solve_aspect_y",
    "cardy_eta",
    "cardy_chi_obc",
    "chi_obc_small_r",
    "chi_pbc",
    "ObcModel",
    "PbcModel",
    "FitResult",
    "fit_scale",
]

CORRELATION_NU = 4.0 / 3.0  # bulk correlation-length exponent
OBC_SMALL_R_DIM = 1.0 / 3.0  # boundary scaling dimension of the r/L decay
PBC_EXPONENT = 5.0 / 48.0  # cylinder two-point exponent


def cardy_prefactor() -> float:
    """3 Gamma(2/3) / Gamma(1/3)^2, the crossing-formula normalization."""
    return 3.0 * gamma(2.0 / 3.0) / gamma(1.0 / 3.0) ** 2


@dataclass(frozen=True)
class CftParams:
    """Arguments of the universal critical curves."""

    aspect: float
    r_over_L: float = 1.0
    time_scale: float = 1.0
    amplitude: float = 1.0

    def __post_init__(self):
        if self.aspect <= 0 or self.time_scale <= 0 or self.amplitude < 0:
            raise ValueError("aspect, time_scale must be > 0 and amplitude >= 0")
        if not 0.0 < self.r_over_L <= 1.0:
            raise ValueError("r_over_L must lie in (0, 1]")


def _incomplete_elliptic(z: float, m: float) -> float:
    """int_0^z dt / sqrt((1-t^2)(1 - m t^2)) via the t = sin(theta) map."""
    if z == 0.0:
        return 0.0
    phi = math.asin(z)
    return adaptive_simpson(
        lambda th: 1.0 / math.sqrt(1.0 - m * math.sin(th) ** 2), 0.0, phi
    )


def sc_map_w(z: float, y: float, L: float = 1.0) -> float:
    """Schwarz-Christoffel image of z in [0, 1] (real-axis branch).

        w(z) = L / (2 K(1/y^2)) * int_0^z dt / sqrt((1-t^2)(1 - t^2/y^2))

    maps [-1, 1] to the rectangle base [-L/2, L/2]; monotone on [0, 1].
    """
    if y <= 1.0:
        raise ValueError("y must exceed 1")
    if not 0.0 <= z <= 1.0:
        raise ValueError("z must lie in [0, 1] on the real-axis branch")
    m = 1.0 / (y * y)
    return L / (2.0 * ellipk(m)) * _incomplete_elliptic(z, m)


def _aspect_of_m(m: float) -> float:
    """T/L of the rectangle whose half-plane parameter is m = 1/y^2."""
    return ellipk_complement(m) / (2.0 * ellipk(m))


def solve_aspect_y(T_over_L: float) -> float:
    """Invert L/T = 2 K(1/y^2) / K(1 - 1/y^2) for y > 1 by bisection in m."""
    return 1.0 / math.sqrt(_solve_aspect_m(T_over_L))


def _solve_aspect_m(T_over_L: float) -> float:
    if T_over_L <= 0:
        raise ValueError("aspect must be positive")
    if T_over_L >= 0.5:
        return _solve_aspect_m_direct(T_over_L)
    # Small aspects sit at m -> 1 where bisection in m is ill-conditioned;
    # use the exact Landen duality aspect(1 - m) = 1 / (4 aspect(m)).
    m = 1.0 - _solve_aspect_m_direct(0.25 / T_over_L)
    if m >= 1.0:
        raise ValueError("aspect below the invertible window")
    return m


def _solve_aspect_m_direct(T_over_L: float) -> float:
    """Bisection on the m <= 3/4 branch (aspects >= ~0.39)."""
    lo, hi = 1e-280, 0.75
    # _aspect_of_m is decreasing in m: K(1-m) shrinks, K(m) grows.
    if not _aspect_of_m(hi) <= T_over_L <= _aspect_of_m(lo):
        raise ValueError("aspect outside the invertible range")
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if _aspect_of_m(mid) > T_over_L:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * hi:
            break
    m = 0.5 * (lo + hi)
    if abs(1.0 / T_over_L - 2.0 * ellipk(m) / ellipk_complement(m)) > 1e-10:
        raise RuntimeError("aspect inversion did not converge")
    return m


def _insertion_points(aspect: float, r_over_L: float) -> tuple[float, float]:
    """Half-plane preimages (x, y) of the rectangle insertion points."""
    m = _solve_aspect_m(aspect)
    y = 1.0 / math.sqrt(m)
    if r_over_L >= 1.0:
        return 1.0, y
    target = 0.5 * r_over_L
    km = ellipk(m)
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        w = _incomplete_elliptic(mid, m) / (2.0 * km)
        if w < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14:
            break
    return 0.5 * (lo + hi), y


def cardy_eta(aspect: float, r_over_L: float) -> float:
    """Cross-ratio of the four boundary insertions for the given geometry."""
    x, y = _insertion_points(aspect, r_over_L)
    ratio = (y - x) / (y + x)
    return ratio * ratio


def _crossing_of_eta(eta: float) -> float:
    return _crossing_of_eta_c(1.0 - eta)


def _crossing_of_eta_c(eta_c: float) -> float:
    """Crossing value as a function of the complementary cross-ratio 1-eta."""
    if eta_c <= 0.0:
        return 0.0
    if eta_c >= 1.0:
        return 1.0  # prefactor * Gauss sum at argument 1 collapses to 1
    return cardy_prefactor() * eta_c ** (1.0 / 3.0) * hyp2f1_third(eta_c)


def cardy_chi_obc(aspect: float, r_over_L: float = 1.0) -> float:
    """Critical LXE with open boundaries: the rectangle crossing formula.

    The complementary cross-ratio is formed as 4xy/(x+y)^2, which stays
    accurate where (x-y)^2/(x+y)^2 would round to 1.
    """
    if not 0.0 < r_over_L <= 1.0:
        raise ValueError("r_over_L must lie in (0, 1]")
    x, y = _insertion_points(aspect, r_over_L)
    eta_c = 4.0 * x * y / (x + y) ** 2
    return _crossing_of_eta_c(eta_c)


def chi_obc_small_r(aspect: float, r_over_L: float) -> float:
    """Leading small-r/L behaviour of the open-boundary curve,

        prefactor * (4 K(1/y^2) (r/L) / y)^(1/3),

    obtained by expanding the full crossing formula at small insertion
    separation (1 - eta -> 4 K (r/L) / y); the ratio to the full curve tends
    to 1 as r/L -> 0."""
    if r_over_L <= 0:
        raise ValueError("r_over_L must be positive")
    m = _solve_aspect_m(aspect)
    y = 1.0 / math.sqrt(m)
    return cardy_prefactor() * (
        4.0 * ellipk(m) * r_over_L / y
    ) ** (1.0 / 3.0)


def chi_pbc(aspect: float, amplitude: float = 1.0) -> float:
    """Critical LXE on the cylinder: amplitude * [2cosh(2 pi T/L) - 2]^(-5/48)."""
    if aspect <= 0:
        raise ValueError("aspect must be positive")
    return amplitude * (2.0 * math.cosh(2.0 * math.pi * aspect) - 2.0) ** (-PBC_EXPONENT)


@dataclass(frozen=True)
class ObcModel:
    """Fit target: open-boundary curve at fixed r/L; one free time scale."""

    r_over_L: float = 1.0


@dataclass(frozen=True)
class PbcModel:
    """Fit target: cylinder curve with the time scale carried over; the
    amplitude is the single free parameter."""

    time_scale: float


@dataclass(frozen=True)
class FitResult:
    time_scale: float
    amplitude: float | None
    rms_residual: float
    residuals: tuple


def _weights(points):
    return [1.0 / max(se, 1e-12) ** 2 for (_, _, se) in points]


def fit_scale(sim_points, model) -> FitResult:
    """Least-squares calibration of simulated curves against the predictions.

    ``sim_points`` is a list of (T_over_L, chi, stderr).  The OBC model fits
    the single time_scale (applied as aspect -> time_scale * aspect) by a
    grid scan plus golden-section refinement of the inverse-variance-weighted
    squared residual; the PBC model keeps the provided time_scale and solves
    the amplitude in closed form.
    """
    points = [(float(a), float(c), float(se)) for a, c, se in sim_points]
    if len(points) < 3:
        raise ValueError("need at least 3 points to fit")
    wts = _weights(points)

    if isinstance(model, ObcModel):
        def sse(s):
            acc = 0.0
            for (a, c, _), wt in zip(points, wts):
                acc += wt * (c - cardy_chi_obc(s * a, model.r_over_L)) ** 2
            return acc

        # Keep every rescaled aspect inside the invertible window.
        a_min = min(a for a, _, _ in points)
        a_max = max(a for a, _, _ in points)
        s_lo = max(0.05, 0.045 / a_min)
        s_hi = min(20.0, 60.0 / a_max)
        if s_lo >= s_hi:
            raise ValueError("aspect range too wide for a common time scale")
        grid = [math.exp(u) for u in _linspace(math.log(s_lo), math.log(s_hi), 120)]
        best = min(range(len(grid)), key=lambda i: sse(grid[i]))
        lo = grid[max(best - 1, 0)]
        hi = grid[min(best + 1, len(grid) - 1)]
        s = _golden(sse, lo, hi, 1e-9)
        resid = tuple(
            c - cardy_chi_obc(s * a, model.r_over_L) for a, c, _ in points
        )
        rms = math.sqrt(sum(r * r for r in resid) / len(resid))
        return FitResult(s, None, rms, resid)

    if isinstance(model, PbcModel):
        s = model.time_scale
        f = [chi_pbc(s * a, 1.0) for a, _, _ in points]
        num = sum(wt * fi * c for fi, (_, c, _), wt in zip(f, points, wts))
        den = sum(wt * fi * fi for fi, wt in zip(f, wts))
        if den == 0.0:
            raise ValueError("degenerate fit input")
        amp = num / den
        resid = tuple(c - amp * fi for fi, (_, c, _) in zip(f, points))
        rms = math.sqrt(sum(r * r for r in resid) / len(resid))
        return FitResult(s, amp, rms, resid)

    raise TypeError("model must be ObcModel or PbcModel")


def _linspace(a, b, n):
    step = (b - a) / (n - 1)
    return [a + i * step for i in range(n)]


def _golden(f, lo, hi, tol):
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)
