from typing import Iterable, Sequence

import numpy as np

from tabreg.autograd.layers import Parameter


def adam_step(
    params: Iterable[Parameter],
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
    weight_decay: float = 0.0,
) -> None:
    """One bias-corrected Adam update per parameter, then clear grads.

    Weight decay is decoupled (applied to the weights, not folded into the gradient).
    """
    for p in params:
        if p.grad is None:
            continue
        g = p.grad
        p.step += 1
        p.m = beta1 * p.m + (1.0 - beta1) * g
        p.v = beta2 * p.v + (1.0 - beta2) * g * g
        m_hat = p.m / (1.0 - beta1 ** p.step)
        v_hat = p.v / (1.0 - beta2 ** p.step)
        if weight_decay:
            p.data -= lr * weight_decay * p.data
        p.data -= lr * m_hat / (np.sqrt(v_hat) + eps)
        p.grad = None


class Adam:
    def __init__(
        self,
        params: Sequence[Parameter],
        lr: float = 1e-3,
        betas: tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
        weight_decay: float = 0.0,
    ) -> None:
        self.params = list(params)
        self.lr = lr
        self.betas = betas
        self.eps = eps
        self.weight_decay = weight_decay

    def step(self) -> None:
        adam_step(self.params, self.lr, self.betas[0], self.betas[1], self.eps, self.weight_decay)

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad = None


class StepDecay:
    """lr at ``epoch``: base, multiplied by ``factor`` at each milestone fraction of the run."""

    def __init__(self, base_lr: float, epochs: int, milestones: Sequence[float] = (0.7, 0.9), factor: float = 0.1) -> None:
        self.base_lr = base_lr
        self.boundaries = [int(round(m * epochs)) for m in milestones]
        self.factor = factor

    def __call__(self, epoch: int) -> float:
        drops = sum(1 for b in self.boundaries if epoch >= b)
        return self.base_lr * self.factor ** drops


class LinearWarmup:
    """Linear ramp from ~0 to base over the first ``warmup_frac`` of steps, then constant."""

    def __init__(self, base_lr: float, total_steps: int, warmup_frac: float = 0.05) -> None:
        self.base_lr = base_lr
        self.warmup_steps = max(1, int(round(warmup_frac * total_steps)))

    def __call__(self, step: int) -> float:
        if step >= self.warmup_steps:
            return self.base_lr
        return self.base_lr * (step + 1) / self.warmup_steps
