"""Mediation wrapper applied to every cytokine update.

An action ``a`` in [-1, 1] rescales one cytokine's update: inhibitory
actions (a < 0) multiply the updated value by ``10**a`` while augmenting
actions (a > 0) add ``10**a - 1`` to it. At ``a = 0`` both branches reduce
to the identity, so a zero action vector leaves the dynamics untouched.
"""

from __future__ import annotations

import numpy as np

__all__ = ["intervene", "update_cytokine"]

N_CYTOKINES = 12


def intervene(x, a: float):
    """Apply mediation strength ``a`` in [-1, 1] to a nonnegative update ``x``.

    ``x`` may be a scalar or an array; ``a`` is a scalar. Inhibition is
    multiplicative (``10**a * x``), augmentation additive (``x + 10**a - 1``).
    """
    if a <= 0.0:
        return (10.0 ** a) * x
    return x + (10.0 ** a - 1.0)


def update_cytokine(lambda_row: np.ndarray, c_aug: np.ndarray, a: float):
    """Mediated linear cytokine update ``f(lambda . c_aug; a)``, floored at 0.

    ``lambda_row`` has 13 entries: one regulatory coefficient per cytokine
    plus a trailing constant-secretion term matching the dummy 1 appended to
    the concentration vector. ``c_aug`` is either a single augmented vector
    of shape (13,) or a batch of shape (13, n) covering many grid cells at
    once. The dot product is clamped below at zero before the wrapper is
    applied, keeping concentrations physical.
    """
    lambda_row = np.asarray(lambda_row, dtype=np.float64)
    if lambda_row.shape[0] != N_CYTOKINES + 1:
        raise ValueError(
            f"regulatory row must have {N_CYTOKINES + 1} entries, got {lambda_row.shape[0]}"
        )
    c_aug = np.asarray(c_aug, dtype=np.float64)
    if c_aug.shape[0] != N_CYTOKINES + 1:
        raise ValueError(
            f"augmented concentration vector must have {N_CYTOKINES + 1} rows, got {c_aug.shape[0]}"
        )
    base = np.maximum(lambda_row @ c_aug, 0.0)
    return np.maximum(intervene(base, a), 0.0)
