"""C-infinity step, bump and cutoff profiles built from ``exp(-1/u)``."""

from services.calculus.jets import Number, exp, sqrt, where

# exp(-1/u) is exactly 0.0 in double precision below this
_U_MIN = 1e-3


def _flat_exp(u: Number) -> Number:
    mask = u > _U_MIN
    return where(mask, exp(-1.0 / where(mask, u, 1.0)), 0.0)


def smooth_step(u: Number) -> Number:
    """``S(u) = e^{-1/u} / (e^{-1/u} + e^{-1/(1-u)})``: 0 for u <= 0, 1 for u >= 1."""
    a = _flat_exp(u)
    b = _flat_exp(1.0 - u)
    return a / (a + b)


def smooth_step_derivative(u: Number) -> Number:
    """Closed form of ``S'(u)``; integrates to 1 over [0, 1]."""
    a = _flat_exp(u)
    b = _flat_exp(1.0 - u)
    inside = (u > _U_MIN) & (1.0 - u > _U_MIN)
    us = where(inside, u, 0.5)
    vs = 1.0 - us
    total = a + b
    return where(inside, a * b * (1.0 / (us * us) + 1.0 / (vs * vs)) / (total * total), 0.0)


def temporal_bump(t: Number, t_a: float, t_b: float) -> Number:
    """Smooth bump supported in ``[t_a, t_b]`` with integral 1."""
    width = t_b - t_a
    return smooth_step_derivative((t - t_a) / width) / width


def rising_cutoff(r: Number, r_start: float, r_end: float) -> Number:
    """0 for ``r <= r_start``, 1 for ``r >= r_end``, monotone between."""
    return smooth_step((r - r_start) / (r_end - r_start))


def falling_cutoff(r: Number, r_start: float, r_end: float) -> Number:
    """1 for ``r <= r_start``, 0 for ``r >= r_end``."""
    return 1.0 - rising_cutoff(r, r_start, r_end)


def safe_radius(dx: Number, dy: Number, floor: float) -> Number:
    """``sqrt(dx^2 + dy^2)`` clamped to ``floor`` near the axis so derivatives stay finite."""
    r2 = dx * dx + dy * dy
    return sqrt(where(r2 > floor * floor, r2, floor * floor))
