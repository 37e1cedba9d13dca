"""Grid field operators: passive diffusion and spontaneous degradation.

Fields are 2-D float arrays (or stacks of them) living on a toroidal grid.
Diffusion uses the classic Moore-neighborhood exchange: a cell keeps a
fraction ``1 - k`` of its content and sends ``k / 8`` to each of its eight
neighbors, which conserves the field total exactly up to rounding.
"""

from __future__ import annotations

import numpy as np

__all__ = ["diffuse_field", "degrade_field"]

def _neighbor_sum(field: np.ndarray) -> np.ndarray:
    """Sum over the eight toroidal Moore neighbors (last two axes).

    Computed as a separable 3x3 box sum minus the center, which needs six
    slice additions instead of eight full rolls.
    """
    v = np.empty_like(field)
    v[..., 0, :] = field[..., -1, :] + field[..., 0, :] + field[..., 1, :]
    v[..., -1, :] = field[..., -2, :] + field[..., -1, :] + field[..., 0, :]
    v[..., 1:-1, :] = field[..., :-2, :] + field[..., 1:-1, :] + field[..., 2:, :]
    out = np.empty_like(field)
    out[..., :, 0] = v[..., :, -1] + v[..., :, 0] + v[..., :, 1]
    out[..., :, -1] = v[..., :, -2] + v[..., :, -1] + v[..., :, 0]
    out[..., :, 1:-1] = v[..., :, :-2] + v[..., :, 1:-1] + v[..., :, 2:]
    out -= field
    return out


def diffuse_field(field: np.ndarray, coefficient) -> np.ndarray:
    """One diffusion step with exchange fraction ``coefficient`` in [0, 1].

    Works on a single (H, W) field or a stacked (..., H, W) array; a
    per-channel coefficient array may be passed for stacks, broadcast over
    the leading axes. Edges wrap around (toroidal topology). Returns a new
    array.
    """
    coefficient = np.asarray(coefficient, dtype=np.float64)
    if np.any(coefficient < 0.0) or np.any(coefficient > 1.0):
        raise ValueError(f"diffusion coefficient must be in [0, 1], got {coefficient}")
    if np.all(coefficient == 0.0):
        return field.copy()
    return (1.0 - coefficient) * field + (coefficient / 8.0) * _neighbor_sum(field)


def degrade_field(field: np.ndarray, rate) -> np.ndarray:
    """Multiply every entry by ``1 - rate`` with ``rate`` in [0, 1]."""
    rate = np.asarray(rate, dtype=np.float64)
    if np.any(rate < 0.0) or np.any(rate > 1.0):
        raise ValueError(f"degradation rate must be in [0, 1], got {rate}")
    return field * (1.0 - rate)
