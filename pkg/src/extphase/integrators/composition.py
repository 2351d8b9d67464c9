"""Triple-jump composition of symmetric methods."""

from __future__ import annotations

import warnings
from dataclasses import replace

from .base import Method


def triple_jump_weights(p: int) -> tuple[float, float, float]:
    """Substep fractions ``(g1, g2, g1)`` raising an order-``p`` symmetric method to ``p + 2``."""
    if p < 1 or p % 2:
        raise ValueError(f"triple jump needs an even base order, got {p}")
    g1 = 1.0 / (2.0 - 2.0 ** (1.0 / (p + 1)))
    return g1, 1.0 - 2.0 * g1, g1


def triple_jump(base: Method, p: int | None = None, **descriptor_overrides) -> Method:
    """Compose ``base`` with substeps ``g1 h, g2 h, g1 h``.

    A non-symmetric base still composes, but the order claim is marked void
    and the descriptor keeps the base order.
    """
    p = base.descriptor.order if p is None else p
    weights = triple_jump_weights(p)
    symmetric = base.descriptor.symmetric
    if not symmetric:
        warnings.warn(f"{base.id} is not symmetric; triple jump does not raise its order", stacklevel=2)
    inner = base.advance

    def advance(prob, y, t, u, h, with_u=True):
        for g in weights:
            hs = g * h
            y, u = inner(prob, y, t, u, hs, with_u)
            t = t + hs
        return y, u

    fields = dict(
        id=f"{base.id}_tj",
        label=f"{base.descriptor.label} with triple jump",
        order=p + 2 if symmetric else base.descriptor.order,
        order_claim_valid=symmetric,
    )
    fields.update(descriptor_overrides)
    return Method(replace(base.descriptor, **fields), advance, stages=3 * base.stages)
