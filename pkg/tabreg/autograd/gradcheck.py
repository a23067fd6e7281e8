from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel

from tabreg.autograd.layers import Module
from tabreg.autograd.tensor import Tensor, no_grad, record_kinks
from tabreg.logger import get_logger

log = get_logger(__name__)


class GradCheckReport(BaseModel):
    worst_rel_error: float = 0.0
    worst_param: Optional[str] = None
    worst_index: list[int] = []
    checked: int = 0
    skipped_at_kinks: int = 0

    def passed(self, tolerance: float = 1e-4) -> bool:
        return self.worst_rel_error < tolerance


def _same_branches(a: list[np.ndarray], b: list[np.ndarray]) -> bool:
    return len(a) == len(b) and all(x.shape == y.shape and np.array_equal(x, y) for x, y in zip(a, b))


def finite_diff_check(
    model: Module,
    loss_fn: Callable[[], Tensor],
    h: float = 1e-5,
    max_coords: int = 10_000,
    seed: int = 0,
    floor: float = 1e-3,
) -> GradCheckReport:
    """Compare analytic gradients with central differences.

    Relative error is ``|a - n| / max(|a|, |n|, floor)``. Coordinates whose
    ``±h`` perturbation changes any relu / hinge / abs branch are skipped.
    Above ``max_coords`` coordinates a seeded uniform subsample is checked.
    """
    named = list(model.named_parameters())
    model.zero_grad()
    loss_fn().backward()
    analytic = {name: (p.grad.copy() if p.grad is not None else np.zeros_like(p.data)) for name, p in named}
    model.zero_grad()

    with no_grad(), record_kinks() as base:
        loss_fn()

    sizes = [p.size for _, p in named]
    total = int(sum(sizes))
    if total > max_coords:
        flat = np.sort(np.random.default_rng(seed).choice(total, size=max_coords, replace=False))
    else:
        flat = np.arange(total)
    offsets = np.cumsum([0] + sizes)

    report = GradCheckReport()
    for f in flat.tolist():
        k = int(np.searchsorted(offsets, f, side="right") - 1)
        name, p = named[k]
        idx = np.unravel_index(f - offsets[k], p.shape)
        orig = p.data[idx]
        with no_grad():
            p.data[idx] = orig + h
            with record_kinks() as plus:
                lp = loss_fn().item()
            p.data[idx] = orig - h
            with record_kinks() as minus:
                lm = loss_fn().item()
            p.data[idx] = orig
        if not (_same_branches(base, plus) and _same_branches(base, minus)):
            report.skipped_at_kinks += 1
            continue
        numeric = (lp - lm) / (2 * h)
        a = float(analytic[name][idx])
        rel = abs(a - numeric) / max(abs(a), abs(numeric), floor)
        report.checked += 1
        if rel > report.worst_rel_error:
            report.worst_rel_error = rel
            report.worst_param = name
            report.worst_index = [int(i) for i in idx]

    log.debug("gradient check", extra=report.model_dump())
    return report
