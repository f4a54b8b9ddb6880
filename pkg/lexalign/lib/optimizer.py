from dataclasses import dataclass, field

import numpy as np

from lexalign.lib.types import ParameterBlocks

BETA1 = 0.9
BETA2 = 0.999
EPSILON = 1e-8


@dataclass(slots=True)
class OptimizerState:
    first_moment: ParameterBlocks = field(default_factory=dict)
    second_moment: ParameterBlocks = field(default_factory=dict)
    step: int = 0
    beta1: float = BETA1
    beta2: float = BETA2
    epsilon: float = EPSILON


def create_optimizer_state(params: ParameterBlocks) -> OptimizerState:
    return OptimizerState(
        first_moment={name: np.zeros_like(value) for name, value in params.items()},
        second_moment={name: np.zeros_like(value) for name, value in params.items()},
    )


def adam_step(
    state: OptimizerState,
    params: ParameterBlocks,
    grads: ParameterBlocks,
    lr: float,
) -> ParameterBlocks:
    """One bias-corrected Adam update; returns new arrays, inputs untouched."""
    state.step += 1
    bias1 = 1.0 - state.beta1**state.step
    bias2 = 1.0 - state.beta2**state.step

    updated: ParameterBlocks = {}
    for name, value in params.items():
        grad = grads[name]
        if name not in state.first_moment:
            state.first_moment[name] = np.zeros_like(value)
            state.second_moment[name] = np.zeros_like(value)
        m = state.first_moment[name]
        v = state.second_moment[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * grad
        v *= state.beta2
        v += (1.0 - state.beta2) * (grad * grad)
        step = (lr / bias1) * m / (np.sqrt(v / bias2) + state.epsilon)
        updated[name] = value - step.astype(value.dtype, copy=False)
    return updated
