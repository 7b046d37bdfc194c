"""In-house special functions: Lanczos Gamma, AGM elliptic K, fixed-triple 2F1.

Only what the critical-point formulas need, implemented from scratch with
explicit accuracy targets: Gamma to ~1e-13 relative on the arguments used,
K(m) to 1e-12, and the Gauss hypergeometric 2F1(1/3, 2/3; 4/3; z) to 1e-10
via plain series summation below z = 1/2 and the z -> 1-z connection formula
above it.
"""

from __future__ import annotations

import math

__all__ = ["gamma", "ellipk", "ellipk_complement", "hyp2f1_third", "adaptive_simpson"]

# Lanczos approximation, g = 7, 9 terms.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma(x: float) -> float:
    """Gamma function for real non-pole arguments."""
    if x <= 0.0 and x == math.floor(x):
        raise ValueError("gamma pole at non-positive integer")
    if x < 0.5:
        # Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x).
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))
    x -= 1.0
    acc = _LANCZOS_COEF[0]
    for i in range(1, len(_LANCZOS_COEF)):
        acc += _LANCZOS_COEF[i] / (x + i)
    t = x + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (x + 0.5) * math.exp(-t) * acc


def ellipk(m: float) -> float:
    """Complete elliptic integral K(m) in the parameter convention,

        K(m) = int_0^1 dt / sqrt((1 - t^2)(1 - m t^2)),

    by the arithmetic-geometric mean, K = pi / (2 agm(1, sqrt(1-m)))."""
    if not 0.0 <= m < 1.0:
        raise ValueError("m must lie in [0, 1)")
    return _agm_k(math.sqrt(1.0 - m))


def ellipk_complement(mc: float) -> float:
    """K(1 - mc) evaluated from the complementary parameter.

    Avoids the catastrophic cancellation of forming 1 - mc when mc is tiny
    (the log-divergent edge K ~ ln(4/sqrt(mc))).
    """
    if not 0.0 < mc <= 1.0:
        raise ValueError("mc must lie in (0, 1]")
    return _agm_k(math.sqrt(mc))


def _agm_k(b0: float) -> float:
    a = 1.0
    b = b0
    for _ in range(64):
        if abs(a - b) <= 4e-16 * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (a + b)


def _gauss_series(a: float, b: float, c: float, z: float) -> float:
    """Plain hypergeometric series; reliable for |z| <= 1/2."""
    term = 1.0
    acc = 1.0
    for n in range(100_000):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z
        acc += term
        if abs(term) < 1e-17 * abs(acc):
            return acc
    raise RuntimeError("hypergeometric series failed to converge")


# Connection-formula constants for (a, b; c) = (1/3, 2/3; 4/3).
_F13_A = gamma(4.0 / 3.0) * gamma(1.0 / 3.0) / gamma(2.0 / 3.0)
_F13_B = gamma(4.0 / 3.0) * gamma(-1.0 / 3.0) / (gamma(1.0 / 3.0) * gamma(2.0 / 3.0))


def hyp2f1_third(z: float) -> float:
    """2F1(1/3, 2/3; 4/3; z) on [0, 1).

    For z > 1/2 the z -> 1-z connection formula is used; the first connected
    term collapses to z^(-1/3) because 2F1(a, b; b; w) = (1-w)^(-a).
    """
    if not 0.0 <= z < 1.0:
        raise ValueError("argument must lie in [0, 1)")
    if z <= 0.5:
        return _gauss_series(1.0 / 3.0, 2.0 / 3.0, 4.0 / 3.0, z)
    w = 1.0 - z
    tail = _gauss_series(1.0, 2.0 / 3.0, 4.0 / 3.0, w)
    return _F13_A * z ** (-1.0 / 3.0) + _F13_B * w ** (1.0 / 3.0) * tail


def adaptive_simpson(f, a: float, b: float, tol: float = 1e-12,
                     max_depth: int = 48) -> float:
    """Adaptive Simpson quadrature for a smooth integrand."""
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_step(f, a, b, fa, fb, fm, whole, tol, max_depth)


def _simpson_step(f, a, b, fa, fb, fm, whole, tol, depth):
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    half = 0.5 * tol
    return _simpson_step(f, a, m, fa, fm, flm, left, half, depth - 1) + \
        _simpson_step(f, m, b, fm, fb, frm, right, half, depth - 1)
