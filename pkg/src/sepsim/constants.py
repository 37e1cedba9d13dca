"""Loading and validation of the versioned mechanism-constants table."""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .intervention import N_CYTOKINES

__all__ = [
    "RuleConstants",
    "SecretionTable",
    "load_constants",
    "default_constants_path",
    "CellKind",
]

REFERENCE_GRID_CELLS = 101 * 101

# Mobile leukocyte kinds; endothelium lives on the grid itself.
CELL_KINDS = ("macrophage", "neutrophil", "th0", "th1", "th2", "progenitor")


class CellKind:
    MACROPHAGE = 0
    NEUTROPHIL = 1
    TH0 = 2
    TH1 = 3
    TH2 = 4
    PROGENITOR = 5


@dataclass
class SecretionTable:
    """Mediated update rows for one secreting cell type.

    ``rows[i]`` is the 13-entry regulatory vector updating cytokine
    ``targets[i]``; all rows of one type apply simultaneously from the same
    concentration snapshot.
    """

    targets: np.ndarray  # (m,) cytokine indices
    rows: np.ndarray     # (m, 13)


@dataclass
class RuleConstants:
    """Every mechanism coefficient of the simulator, loaded from one file.

    Secretion tables are precompiled into (cytokine_index, 13-vector) update
    rows per secreting cell type; the 13th entry is the constant term.
    """

    version: int
    grid_height: int
    grid_width: int
    cytokine_labels: tuple[str, ...]
    pro_weights: np.ndarray
    anti_weights: np.ndarray
    infection: dict
    injury: dict
    healing: dict
    endothelium: dict
    receptors: dict
    leukocytes: dict
    burst: dict
    phagocytosis: dict
    killing: dict
    recruitment: dict
    tcells: dict
    antibody_enabled: bool
    diffusion_coefficients: np.ndarray
    degradation_rates: np.ndarray
    secretion: dict = field(repr=False)  # type name -> list[(cyt_index, row)]

    @property
    def grid_cells(self) -> int:
        return self.grid_height * self.grid_width

    @property
    def area_factor(self) -> float:
        """Scale factor for population-like quantities on non-reference grids."""
        return self.grid_cells / REFERENCE_GRID_CELLS

    def cytokine_index(self, label: str) -> int:
        return self.cytokine_labels.index(label)


def default_constants_path() -> Path:
    return Path(resources.files("sepsim.data") / "constants.toml")


def _compile_secretion_row(entry: dict, target: str, labels: tuple[str, ...]) -> np.ndarray:
    row = np.zeros(N_CYTOKINES + 1)
    for key, value in entry.items():
        if key == "self":
            row[labels.index(target)] = float(value)
        elif key == "const":
            row[N_CYTOKINES] = float(value)
        else:
            row[labels.index(key)] = float(value)
    return row


def load_constants(path: str | Path | None = None, overrides: dict | None = None) -> RuleConstants:
    """Read the constants table, optionally deep-merging override sections."""
    path = Path(path) if path is not None else default_constants_path()
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    if overrides:
        raw = _deep_merge(raw, overrides)
    return constants_from_dict(raw)


def _deep_merge(base: dict, extra: dict) -> dict:
    merged = dict(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def constants_from_dict(raw: dict) -> RuleConstants:
    labels = tuple(raw["cytokines"]["labels"])
    if len(labels) != N_CYTOKINES:
        raise ValueError(f"expected {N_CYTOKINES} cytokine labels, got {len(labels)}")
    if labels[:3] != ("PAF", "IL-1", "IFNg"):
        raise ValueError("cytokine indices 0-2 must be PAF, IL-1, IFNg")

    diffusion = np.asarray(raw["diffusion"]["coefficients"], dtype=np.float64)
    degradation = np.asarray(raw["degradation"]["rates"], dtype=np.float64)
    for name, arr, lo, hi in (
        ("diffusion coefficients", diffusion, 0.0, 1.0),
        ("degradation rates", degradation, 0.0, 1.0),
    ):
        if arr.shape != (N_CYTOKINES,):
            raise ValueError(f"{name} must have {N_CYTOKINES} entries")
        if np.any(arr < lo) or np.any(arr > hi):
            raise ValueError(f"{name} must lie in [{lo}, {hi}]")

    secretion: dict[str, SecretionTable] = {}
    for cell_type, table in raw.get("secretion", {}).items():
        if cell_type != "endothelial" and cell_type not in CELL_KINDS:
            raise ValueError(f"unknown secreting cell type {cell_type!r}")
        targets = []
        rows = []
        for target, entry in table.items():
            targets.append(labels.index(target))
            rows.append(_compile_secretion_row(entry, target, labels))
        secretion[cell_type] = SecretionTable(
            targets=np.asarray(targets, dtype=np.int64), rows=np.vstack(rows)
        )

    grid = raw["grid"]
    if grid["height"] < 3 or grid["width"] < 3:
        raise ValueError("grid must be at least 3x3")

    lifespans = raw["leukocytes"]["lifespan"]
    missing = [k for k in CELL_KINDS if k not in lifespans]
    if missing:
        raise ValueError(f"missing lifespans for {missing}")

    return RuleConstants(
        version=int(raw["version"]),
        grid_height=int(grid["height"]),
        grid_width=int(grid["width"]),
        cytokine_labels=labels,
        pro_weights=np.asarray(raw["signals"]["pro_weights"], dtype=np.float64),
        anti_weights=np.asarray(raw["signals"]["anti_weights"], dtype=np.float64),
        infection=dict(raw["infection"]),
        injury=dict(raw["injury"]),
        healing=dict(raw["healing"]),
        endothelium=dict(raw["endothelium"]),
        receptors=dict(raw["receptors"]),
        leukocytes=dict(raw["leukocytes"]),
        burst=dict(raw["burst"]),
        phagocytosis=dict(raw["phagocytosis"]),
        killing=dict(raw["killing"]),
        recruitment=dict(raw["recruitment"]),
        tcells=dict(raw["tcells"]),
        antibody_enabled=bool(raw["antibody"]["enabled"]),
        diffusion_coefficients=diffusion,
        degradation_rates=degradation,
        secretion=secretion,
    )
