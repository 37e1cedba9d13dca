"""Patient parameterizations: the five external knobs plus rule constants."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .constants import RuleConstants, load_constants

__all__ = ["SimulationParams", "FRAME_MINUTES_DEFAULT", "hours_to_frames"]

# 90 days / 4603 frames, the only timing anchor available.
FRAME_MINUTES_DEFAULT = 28.0


def hours_to_frames(hours: float, frame_minutes: float = FRAME_MINUTES_DEFAULT) -> int:
    """Number of whole frames covering the given simulated duration."""
    return math.ceil(hours * 60.0 / frame_minutes)


@dataclass
class SimulationParams:
    """One virtual patient population.

    The five external parameters set the size and nature of the insult and
    the host's capacity to recover; everything else about the dynamics lives
    in the rule-constants table.
    """

    initial_injury_size: int
    microbial_invasiveness: float
    microbial_toxigenesis: float
    environmental_toxicity: float
    host_resilience: float
    rule_constants: RuleConstants = field(default_factory=load_constants, repr=False)
    frame_minutes: float = FRAME_MINUTES_DEFAULT

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        for name in (
            "initial_injury_size",
            "microbial_invasiveness",
            "microbial_toxigenesis",
            "environmental_toxicity",
            "host_resilience",
        ):
            value = getattr(self, name)
            if value < 0:
                raise ValueError(f"{name} must be nonnegative, got {value}")
        half_side = min(self.rule_constants.grid_height, self.rule_constants.grid_width) / 2
        if self.initial_injury_size >= half_side:
            raise ValueError(
                f"initial_injury_size {self.initial_injury_size} does not fit the "
                f"{self.rule_constants.grid_height}x{self.rule_constants.grid_width} grid"
            )
        if self.frame_minutes <= 0:
            raise ValueError("frame_minutes must be positive")

    def with_constants(self, constants: RuleConstants) -> "SimulationParams":
        return replace(self, rule_constants=constants)

    def as_dict(self) -> dict:
        return {
            "initial_injury_size": self.initial_injury_size,
            "microbial_invasiveness": self.microbial_invasiveness,
            "microbial_toxigenesis": self.microbial_toxigenesis,
            "environmental_toxicity": self.environmental_toxicity,
            "host_resilience": self.host_resilience,
            "frame_minutes": self.frame_minutes,
        }
