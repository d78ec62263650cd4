"""Adam with bias correction, applied in place to Parameter tensors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import Parameter


@dataclass(frozen=True)
class AdamConfig:
    learning_rate: float = 0.0002
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("betas must lie in [0, 1)")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")


def adam_step(params: list[Parameter], cfg: AdamConfig) -> None:
    """One bias-corrected update; zeroes gradients and bumps step counters."""
    for p in params:
        g = p.grad if p.grad is not None else np.zeros_like(p.data)
        p.step += 1
        p.m = cfg.beta1 * p.m + (1.0 - cfg.beta1) * g
        p.v = cfg.beta2 * p.v + (1.0 - cfg.beta2) * g * g
        m_hat = p.m / (1.0 - cfg.beta1 ** p.step)
        v_hat = p.v / (1.0 - cfg.beta2 ** p.step)
        p.data -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon)
        p.grad = None


def zero_grads(params: list[Parameter]) -> None:
    for p in params:
        p.grad = None
