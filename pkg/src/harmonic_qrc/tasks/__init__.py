from .baseline import random_guess_baseline, state_sampler
from .common import DELAY_SCAN, CouplingProblem, TaskResult, delay_scan
from .entangler import run_entangler
from .entropy import entropy_feature_map, entropy_scan, nmse, run_entropy_detection, train_linear_readout
from .preparation import run_state_preparation
from .qce import compose_channel, run_qce
from .stqm import stqm_cost, train_stqm

__all__ = [
    "DELAY_SCAN",
    "CouplingProblem",
    "TaskResult",
    "compose_channel",
    "delay_scan",
    "entropy_feature_map",
    "entropy_scan",
    "nmse",
    "random_guess_baseline",
    "run_entangler",
    "run_entropy_detection",
    "run_qce",
    "run_state_preparation",
    "state_sampler",
    "stqm_cost",
    "train_linear_readout",
    "train_stqm",
]
