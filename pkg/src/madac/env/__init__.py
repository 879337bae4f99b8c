"""Environments: MaMo over MOEA/D and the Sigmoid benchmark."""

from .actions import (
    ACTION_CARDINALITIES,
    AGENT_DOMAINS,
    JOINT_ACTION_COUNT,
    JointAction,
    ProtocolError,
    decode_joint,
    encode_joint,
)
from .mamo import EpisodeSpec, IndicatorHistory, MamoEnv, compute_state_features, make_spec
from .reward import RewardState, alt_reward, compute_reward
from .sigmoid import SigmoidEnv, SigmoidInstance, sample_instance, sig, sigmoid_reset

__all__ = [
    "ACTION_CARDINALITIES",
    "AGENT_DOMAINS",
    "JOINT_ACTION_COUNT",
    "EpisodeSpec",
    "IndicatorHistory",
    "JointAction",
    "MamoEnv",
    "ProtocolError",
    "RewardState",
    "SigmoidEnv",
    "SigmoidInstance",
    "alt_reward",
    "compute_reward",
    "compute_state_features",
    "decode_joint",
    "encode_joint",
    "make_spec",
    "sample_instance",
    "sig",
    "sigmoid_reset",
]
