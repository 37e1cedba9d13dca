"""Grid simulation of the innate immune response to bacterial injury.

The grid is a two-dimensional abstraction of the endothelial-blood
interface. Every cell carries 12 cytokine concentrations plus infection and
damage levels; mobile leukocytes live in an agent pool on top. One call to
:func:`step_frame` advances a single frame (28 simulated minutes by
default) under an externally supplied 12-component mediation vector.

Frame update order (fixed, so runs are reproducible for a given seed):

1. recurrent environmental injury
2. endothelial activation
3. leukocyte recruitment from the marrow reserve (extravasation)
4. aging and apoptosis
5. cytokine-receptor trafficking
6. leukocyte activation
7. movement (chemotaxis with random wiggle)
8. T-cell differentiation and progenitor output
9. phagocytosis and neutrophil respiratory burst
10. infection growth and toxin damage
11. antibody hook (disabled stub by default)
12. mediated cytokine secretion updates
13. healing
14. passive diffusion (cytokines and infection spread)
15. spontaneous degradation
"""

from __future__ import annotations

import copy
import enum
from dataclasses import dataclass, field

import numpy as np

from .agents import AgentPool, CellAgent
from .constants import CELL_KINDS, CellKind, RuleConstants
from .fields import diffuse_field, degrade_field
from .intervention import N_CYTOKINES
from .params import SimulationParams
from .rng import make_rng

__all__ = [
    "SimState",
    "SystemTotals",
    "Outcome",
    "GridCell",
    "SimulationDiverged",
    "init_simulation",
    "step_frame",
    "system_totals",
    "check_outcome",
]

DEATH_DAMAGE_PCT = 80.0

# Movement candidates: stay first, then the Moore neighborhood.
_MOVE_DR = np.array([0, -1, -1, -1, 0, 0, 1, 1, 1])
_MOVE_DC = np.array([0, -1, 0, 1, -1, 1, -1, 0, 1])


class SimulationDiverged(RuntimeError):
    """A state variable became non-finite; the episode must be aborted."""


class Outcome(enum.Enum):
    CONTINUE = "continue"
    DEATH = "death"


@dataclass(frozen=True)
class SystemTotals:
    """Grid-wide damage and infection, each as a percent of its maximum."""

    total_damage_pct: float
    total_infection_pct: float


@dataclass
class GridCell:
    """Snapshot view of one grid cell (14 scalar field values plus agents)."""

    cytokines: np.ndarray
    receptor_concentrations: tuple[float, float]
    infection: float
    damage: float
    endothelial_agent: CellAgent
    leukocytes: list[CellAgent]


@dataclass
class SimState:
    """Full simulation state; confined to one thread at a time."""

    params: SimulationParams
    rng: np.random.Generator
    cytokines: np.ndarray       # (12, H, W)
    infection: np.ndarray       # (H, W)
    damage: np.ndarray          # (H, W), per-cell fraction in [0, 1]
    endo_activation: np.ndarray  # (H, W)
    agents: AgentPool
    marrow: float               # shared recruitable-cell reserve
    frame_count: int = 0
    current_intervention: np.ndarray = field(
        default_factory=lambda: np.zeros(N_CYTOKINES)
    )
    antibody_hook: object = None  # optional callable(state); see constants.antibody

    @property
    def constants(self) -> RuleConstants:
        return self.params.rule_constants

    @property
    def shape(self) -> tuple[int, int]:
        return self.infection.shape

    def clone(self) -> "SimState":
        """Independent deep copy, including the generator state."""
        return SimState(
            params=self.params,
            rng=copy.deepcopy(self.rng),
            cytokines=self.cytokines.copy(),
            infection=self.infection.copy(),
            damage=self.damage.copy(),
            endo_activation=self.endo_activation.copy(),
            agents=self.agents.clone(),
            marrow=self.marrow,
            frame_count=self.frame_count,
            current_intervention=self.current_intervention.copy(),
            antibody_hook=self.antibody_hook,
        )

    def cell(self, row: int, col: int) -> GridCell:
        """Inspection view of one cell; not used on the hot path."""
        at_cell = np.flatnonzero(
            self.agents.alive & (self.agents.row == row) & (self.agents.col == col)
        )
        leukocytes = [self.agents.view(i) for i in at_cell]
        receptors = self.agents.receptors[at_cell].sum(axis=0) if at_cell.size else np.zeros(2)
        endo = CellAgent(
            kind="endothelial",
            age=self.frame_count,
            activation=float(self.endo_activation[row, col]),
            receptor_state=(0.0, 0.0),
            position=(row, col),
        )
        return GridCell(
            cytokines=self.cytokines[:, row, col].copy(),
            receptor_concentrations=(float(receptors[0]), float(receptors[1])),
            infection=float(self.infection[row, col]),
            damage=float(self.damage[row, col]),
            endothelial_agent=endo,
            leukocytes=leukocytes,
        )


def _disk_offsets(radius: int) -> tuple[np.ndarray, np.ndarray]:
    """Offsets of cells strictly inside a disk of the given radius."""
    if radius <= 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    span = np.arange(-radius, radius + 1)
    dr, dc = np.meshgrid(span, span, indexing="ij")
    inside = dr * dr + dc * dc < radius * radius
    return dr[inside], dc[inside]


def init_simulation(params: SimulationParams, seed: int) -> SimState:
    """Fresh state with the initial bacterial injury applied at the center."""
    params.validate()
    k = params.rule_constants
    h, w = k.grid_height, k.grid_width
    rng = make_rng(seed)

    cytokines = np.zeros((N_CYTOKINES, h, w))
    infection = np.zeros((h, w))
    damage = np.zeros((h, w))
    endo_activation = np.zeros((h, w))

    dr, dc = _disk_offsets(params.initial_injury_size)
    rows, cols = (h // 2 + dr) % h, (w // 2 + dc) % w
    infection[rows, cols] = k.infection["seed_load"]
    damage[rows, cols] = k.infection["seed_damage"]

    capacity = int(k.leukocytes["max_count"] * k.area_factor)
    agents = AgentPool(capacity)
    for kind, density in (
        (CellKind.MACROPHAGE, k.leukocytes["initial_macrophages"]),
        (CellKind.TH0, k.leukocytes["initial_th0"]),
        (CellKind.PROGENITOR, k.leukocytes["initial_progenitors"]),
    ):
        n = int(round(density * k.grid_cells))
        agents.spawn(kind, rng.integers(0, h, n), rng.integers(0, w, n))

    return SimState(
        params=params,
        rng=rng,
        cytokines=cytokines,
        infection=infection,
        damage=damage,
        endo_activation=endo_activation,
        agents=agents,
        marrow=k.recruitment["marrow_max"] * k.area_factor,
    )


def system_totals(state: SimState) -> SystemTotals:
    """Pure aggregation of grid damage and infection into percentages."""
    k = state.constants
    damage_pct = 100.0 * float(state.damage.mean())
    infection_pct = 100.0 * float(state.infection.mean()) / k.infection["capacity"]
    return SystemTotals(damage_pct, infection_pct)


def check_outcome(totals: SystemTotals, frame_count: int) -> Outcome:
    """Death strictly above the damage threshold, regardless of infection."""
    if totals.total_damage_pct > DEATH_DAMAGE_PCT:
        return Outcome.DEATH
    return Outcome.CONTINUE


def _local(field: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    return field[rows, cols]


def step_frame(state: SimState, interventions: np.ndarray) -> SystemTotals:
    """Advance one frame under the given mediation vector; see module docs."""
    a = np.asarray(interventions, dtype=np.float64)
    if a.shape != (N_CYTOKINES,):
        raise ValueError(f"intervention vector must have shape ({N_CYTOKINES},)")
    if np.any(a < -1.0) or np.any(a > 1.0):
        raise ValueError("intervention components must lie in [-1, 1]")
    state.current_intervention = a.copy()

    p = state.params
    k = state.constants
    rng = state.rng
    agents = state.agents
    C, B, D = state.cytokines, state.infection, state.damage
    h, w = state.shape
    cap = k.infection["capacity"]

    # 1. Recurrent environmental injury.
    inj = k.injury
    if p.environmental_toxicity > 0 and state.frame_count % inj["interval_frames"] == 0:
        r0 = int(rng.integers(0, h))
        c0 = int(rng.integers(0, w))
        dr, dc = _disk_offsets(inj["radius"])
        rows, cols = (r0 + dr) % h, (c0 + dc) % w
        B[rows, cols] += inj["infection_per_unit"] * p.environmental_toxicity
        D[rows, cols] = np.minimum(
            D[rows, cols] + inj["damage_per_unit"] * p.environmental_toxicity, 1.0
        )

    signals = _signal_weights(k) @ C.reshape(N_CYTOKINES, -1)
    pro = signals[0].reshape(h, w)
    anti = signals[1].reshape(h, w)
    net = np.maximum(pro - anti, 0.0)

    # 2. Endothelial activation, driven by the net inflammatory signal.
    endo = k.endothelium
    active_now = (
        (net > endo["activation_pro_threshold"])
        | (B > endo["activation_infection_threshold"])
        | (D > endo["activation_damage_threshold"])
    )
    state.endo_activation = np.where(
        active_now, 1.0, state.endo_activation * endo["activation_decay"]
    )

    # 3. Recruitment through activated endothelium, limited by the marrow pool.
    rec = k.recruitment
    gcsf_total = float(C[k.cytokine_index("GCSF")].sum())
    gcsf_half = rec["gcsf_half_saturation"] * k.area_factor
    gcsf_factor = 1.0 + rec["gcsf_boost"] * gcsf_total / (gcsf_total + gcsf_half)
    state.marrow = min(
        state.marrow + rec["marrow_regen"] * k.area_factor * gcsf_factor,
        rec["marrow_max"] * k.area_factor,
    )
    eligible = np.flatnonzero(
        ((state.endo_activation > 0.5) & (net > rec["net_threshold"])).ravel()
    )
    if eligible.size:
        intensity = np.clip(net.ravel()[eligible] / rec["net_scale"], 0.0, 1.0)
        for kind, rate, fuel in (
            (CellKind.NEUTROPHIL, rec["neutrophil_rate"], int(k.burst["fuel"])),
            (CellKind.MACROPHAGE, rec["macrophage_rate"], 0),
        ):
            hits = eligible[rng.random(eligible.size) < rate * intensity]
            budget = int(state.marrow)
            if hits.size > budget:
                hits = hits[:budget]
            if hits.size:
                spawned = agents.spawn(kind, hits // w, hits % w, fuel=fuel)
                state.marrow -= spawned

    # 4. Aging and apoptosis.
    lifespan = _lifespan_array(k)
    live = agents.alive
    agents.age[live] += 1
    expired = live & (agents.age > lifespan[agents.kind])
    agents.alive[expired] = False

    live_idx = np.flatnonzero(agents.alive)
    rows, cols = agents.row[live_idx], agents.col[live_idx]
    pv = _local(pro, rows, cols)
    av = _local(anti, rows, cols)

    # 5. Cytokine-receptor trafficking (2 receptor species per agent).
    rcp = k.receptors
    sat = rcp["half_saturation"]
    recs = agents.receptors
    recs[live_idx, 0] += rcp["up_rate"] * pv / (pv + sat) - rcp["down_rate"] * recs[live_idx, 0]
    recs[live_idx, 1] += rcp["up_rate"] * av / (av + sat) - rcp["down_rate"] * recs[live_idx, 1]
    np.clip(recs[live_idx], 0.0, rcp["max"], out=recs[live_idx])

    # 6. Activation driven through the receptor state.
    leu = k.leukocytes
    drive = np.clip(
        recs[live_idx, 0] * pv / (pv + sat)
        + leu["infection_drive"] * _local(B, rows, cols) / cap
        + leu["damage_drive"] * _local(D, rows, cols)
        - recs[live_idx, 1] * av / (av + sat),
        0.0,
        1.0,
    )
    agents.activation[live_idx] += leu["activation_gain"] * (drive - agents.activation[live_idx])

    # 7. Movement: phagocytes climb the chemoattractant field, others wander.
    chemo = C[0] + C[k.cytokine_index("IL-8")] + leu["chemo_infection_weight"] * B
    kinds = agents.kind[live_idx]
    chaser = (kinds == CellKind.MACROPHAGE) | (kinds == CellKind.NEUTROPHIL)
    new_rows, new_cols = rows.copy(), cols.copy()
    if np.any(chaser):
        cr, cc = rows[chaser], cols[chaser]
        cand = chemo[(cr[:, None] + _MOVE_DR) % h, (cc[:, None] + _MOVE_DC) % w]
        best = np.argmax(cand, axis=1)
        stuck = cand[np.arange(best.size), best] <= cand[:, 0]
        wiggle = rng.random(best.size) < leu["wiggle_probability"]
        randomize = stuck | wiggle
        best[randomize] = rng.integers(0, 9, int(randomize.sum()))
        new_rows[chaser] = (cr + _MOVE_DR[best]) % h
        new_cols[chaser] = (cc + _MOVE_DC[best]) % w
    wanderer = ~chaser
    if np.any(wanderer):
        step = rng.integers(0, 9, int(wanderer.sum()))
        new_rows[wanderer] = (rows[wanderer] + _MOVE_DR[step]) % h
        new_cols[wanderer] = (cols[wanderer] + _MOVE_DC[step]) % w
    agents.row[live_idx] = new_rows
    agents.col[live_idx] = new_cols
    rows, cols = new_rows, new_cols

    # 8. T-cell differentiation and progenitor output.
    tc = k.tcells
    th0 = live_idx[kinds == CellKind.TH0]
    if th0.size:
        tr, tcl = agents.row[th0], agents.col[th0]
        il12 = _local(C[k.cytokine_index("IL-12")], tr, tcl)
        ifng = _local(C[2], tr, tcl)
        il4 = _local(C[k.cytokine_index("IL-4")], tr, tcl)
        il10 = _local(C[k.cytokine_index("IL-10")], tr, tcl)
        p1 = tc["differentiation_rate"] * il12 / (il12 + tc["il12_half_saturation"]) * (
            1.0 + ifng / (ifng + tc["il12_half_saturation"])
        )
        blend = il4 + 0.5 * il10
        p2 = tc["differentiation_rate"] * blend / (blend + tc["il4_half_saturation"])
        u = rng.random(th0.size)
        to_th1 = u < p1
        to_th2 = (~to_th1) & (u < p1 + p2)
        agents.kind[th0[to_th1]] = CellKind.TH1
        agents.kind[th0[to_th2]] = CellKind.TH2
        agents.age[th0[to_th1 | to_th2]] = 0
    prog = live_idx[kinds == CellKind.PROGENITOR]
    if prog.size:
        births = prog[rng.random(prog.size) < tc["progenitor_spawn_rate"]]
        if births.size:
            as_mac = rng.random(births.size) < tc["progenitor_macrophage_fraction"]
            for kind, sel in ((CellKind.MACROPHAGE, as_mac), (CellKind.TH0, ~as_mac)):
                chosen = births[sel]
                if chosen.size:
                    agents.spawn(kind, agents.row[chosen], agents.col[chosen])

    # 9. Phagocytosis and respiratory burst.
    kil = k.killing
    ifng_field = C[2]
    boost = 1.0 + kil["ifng_boost"] * ifng_field / (ifng_field + kil["ifng_half_saturation"])
    mac = live_idx[kinds == CellKind.MACROPHAGE]
    if mac.size:
        mr, mc = agents.row[mac], agents.col[mac]
        amount = (
            k.phagocytosis["base"] + k.phagocytosis["activated"] * agents.activation[mac]
        ) * _local(boost, mr, mc)
        np.subtract.at(B, (mr, mc), amount)
    neut = live_idx[kinds == CellKind.NEUTROPHIL]
    if neut.size:
        nr, nc = agents.row[neut], agents.col[neut]
        infected_here = _local(B, nr, nc) > k.burst["infection_gate"]
        firing = neut[
            (agents.activation[neut] > k.burst["threshold"])
            & (agents.fuel[neut] > 0)
            & infected_here
        ]
        if firing.size:
            fr, fc = agents.row[firing], agents.col[firing]
            np.subtract.at(B, (fr, fc), k.burst["kill"] * _local(boost, fr, fc))
            np.add.at(D, (fr, fc), k.burst["damage"])
            agents.fuel[firing] -= 1
            agents.alive[firing[agents.fuel[firing] <= 0]] = False
    np.clip(B, 0.0, cap, out=B)

    # 10. Infection growth and toxin damage. Baseline clearance extinguishes
    # thin bacterial films, but necrotic tissue loses most of it and turns
    # into a reservoir.
    inf = k.infection
    B -= inf["baseline_clearance"] * (1.0 - inf["clearance_damage_loss"] * D)
    np.clip(B, 0.0, cap, out=B)
    B += inf["growth_rate"] * p.microbial_invasiveness * B * (1.0 - B / cap)
    D += inf["toxin_damage_rate"] * p.microbial_toxigenesis * (B / cap)
    np.clip(D, 0.0, 1.0, out=D)

    # 11. Antibody administration: named mechanism, disabled stub by default.
    if k.antibody_enabled and state.antibody_hook is not None:
        state.antibody_hook(state)

    # 12. Mediated cytokine secretion updates. All rows of one cell type are
    # computed from the same snapshot (equivalent to update_cytokine per
    # row); the cell types apply in table order.
    C_flat = C.reshape(N_CYTOKINES, -1)
    for cell_type, cells in _secretion_cells(state).items():
        if cells.size == 0:
            continue
        table = k.secretion[cell_type]
        c_at = C_flat[:, cells]
        base = table.rows[:, :N_CYTOKINES] @ c_at + table.rows[:, N_CYTOKINES:]
        np.maximum(base, 0.0, out=base)
        act = a[table.targets]
        scale = np.where(act <= 0.0, 10.0 ** act, 1.0)[:, None]
        shift = np.where(act <= 0.0, 0.0, 10.0 ** act - 1.0)[:, None]
        C_flat[table.targets[:, None], cells[None, :]] = np.maximum(
            base * scale + shift, 0.0
        )

    # 13. Healing, suppressed by local net inflammation, blocked by infection.
    heal = k.healing
    mac_counts = agents.position_counts(CellKind.MACROPHAGE, (h, w))
    net = np.maximum(
        ((k.pro_weights - k.anti_weights) @ C_flat).reshape(h, w), 0.0
    )
    heal_rate = (
        heal["rate"]
        * p.host_resilience
        * (1.0 + heal["macrophage_bonus"] * np.minimum(mac_counts, heal["macrophage_cap"]))
        / (1.0 + net / heal["inflammation_scale"])
    )
    healable = B < heal["infection_block"]
    D[healable] = np.maximum(D[healable] - heal_rate[healable], 0.0)

    # 14. Passive diffusion; infection spreads with invasiveness.
    state.cytokines = C = diffuse_field(C, k.diffusion_coefficients[:, None, None])
    spread = min(inf["spread_cap"], inf["spread_coefficient"] * p.microbial_invasiveness)
    state.infection = B = diffuse_field(B, spread)

    # 15. Spontaneous degradation, with a floor to stop denormal creep.
    state.cytokines = C = degrade_field(C, k.degradation_rates[:, None, None])
    C[C < 1e-12] = 0.0

    if not (np.isfinite(C).all() and np.isfinite(B).all() and np.isfinite(D).all()):
        raise SimulationDiverged(
            f"non-finite state variable at frame {state.frame_count}"
        )
    state.frame_count += 1
    return system_totals(state)


def _lifespan_array(k: RuleConstants) -> np.ndarray:
    arr = getattr(k, "_lifespan_array", None)
    if arr is None:
        arr = np.array([k.leukocytes["lifespan"][name] for name in CELL_KINDS])
        k._lifespan_array = arr
    return arr


def _signal_weights(k: RuleConstants) -> np.ndarray:
    arr = getattr(k, "_signal_weights", None)
    if arr is None:
        arr = np.vstack([k.pro_weights, k.anti_weights])
        k._signal_weights = arr
    return arr


def _secretion_cells(state: SimState) -> dict[str, np.ndarray]:
    """Flat grid indices of cells performing secretion updates this frame."""
    k = state.constants
    agents = state.agents
    w = state.shape[1]
    gate = k.leukocytes["secrete_activation"]

    cells = {
        "endothelial": np.flatnonzero(
            (state.damage.ravel() > k.endothelium["secrete_damage_threshold"])
            | (state.endo_activation.ravel() > 0.5)
        )
    }
    for name, kind, gated in (
        ("macrophage", CellKind.MACROPHAGE, True),
        ("neutrophil", CellKind.NEUTROPHIL, True),
        ("th1", CellKind.TH1, False),
        ("th2", CellKind.TH2, False),
    ):
        idx = agents.of_kind(kind)
        if gated:
            idx = idx[agents.activation[idx] > gate]
        cells[name] = np.unique(agents.row[idx] * w + agents.col[idx])
    return cells
