"""Joint actions of the four MOEA/D configuration agents."""

from __future__ import annotations

from dataclasses import dataclass

from ..moead import DE_OPERATORS, NEIGHBORHOOD_SIZES, OPERATORS, SCALING_FACTORS, GenerationConfig

WEIGHT_CHOICES = ("N", "T")
AGENT_DOMAINS = (WEIGHT_CHOICES, NEIGHBORHOOD_SIZES, DE_OPERATORS, SCALING_FACTORS)
ACTION_CARDINALITIES = tuple(len(d) for d in AGENT_DOMAINS)
JOINT_ACTION_COUNT = 2 * 4 * 4 * 4


class ProtocolError(RuntimeError):
    """An environment or controller was used out of order or out of domain."""


@dataclass(frozen=True)
class JointAction:
    weights: str = "N"
    neighborhood_size: int = 20
    operator: str = "OP2"
    scaling_factor: float = 0.5

    def __post_init__(self):
        if self.weights not in WEIGHT_CHOICES:
            raise ProtocolError(f"weight action must be 'N' or 'T', got {self.weights!r}")
        if self.neighborhood_size not in NEIGHBORHOOD_SIZES:
            raise ProtocolError(f"neighborhood size {self.neighborhood_size} out of domain")
        # SBX is accepted so the original MOEA/D can run through the same interface.
        if self.operator not in OPERATORS:
            raise ProtocolError(f"operator {self.operator!r} out of domain")
        if self.scaling_factor not in SCALING_FACTORS:
            raise ProtocolError(f"scaling factor {self.scaling_factor} out of domain")

    @classmethod
    def from_indices(cls, indices) -> JointAction:
        if len(indices) != len(AGENT_DOMAINS):
            raise ProtocolError(f"expected {len(AGENT_DOMAINS)} agent actions, got {len(indices)}")
        values = []
        for idx, domain in zip(indices, AGENT_DOMAINS):
            idx = int(idx)
            if not 0 <= idx < len(domain):
                raise ProtocolError(f"action index {idx} outside 0..{len(domain) - 1}")
            values.append(domain[idx])
        return cls(*values)

    def to_indices(self) -> tuple[int, int, int, int]:
        if self.operator == "SBX":
            raise ProtocolError("SBX has no agent action index")
        return (
            WEIGHT_CHOICES.index(self.weights),
            NEIGHBORHOOD_SIZES.index(self.neighborhood_size),
            DE_OPERATORS.index(self.operator),
            SCALING_FACTORS.index(self.scaling_factor),
        )

    def generation_config(self, adapt: bool = False) -> GenerationConfig:
        return GenerationConfig(self.neighborhood_size, self.operator, self.scaling_factor, adapt)


def encode_joint(indices, cardinalities=ACTION_CARDINALITIES) -> int:
    """Mixed-radix index of a per-agent action tuple (first agent most significant)."""
    code = 0
    for idx, card in zip(indices, cardinalities):
        code = code * card + int(idx)
    return code


def decode_joint(code: int, cardinalities=ACTION_CARDINALITIES) -> tuple[int, ...]:
    out = []
    for card in reversed(cardinalities):
        out.append(code % card)
        code //= card
    return tuple(reversed(out))
