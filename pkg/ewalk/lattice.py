"""
Position-space walk operations on auto-growing windows.

Every operation is pure: a new WaveFunction is returned and the window grows
by exactly one cell per shift layer on the side the amplitude moves to.
"""

import logging
from typing import Tuple

import numpy as np

from ewalk.models import (
    Coin,
    CoinSequence,
    Field,
    FullShift,
    GlobalPhase,
    RationalField,
    ShiftMinus,
    ShiftPlus,
    WalkSpec,
    WaveFunction,
)

logger = logging.getLogger(__name__)


def apply_shift(state: WaveFunction, direction: str) -> WaveFunction:
    """
    Apply S_+, S_- or S = S_+ S_-.

    Args:
        state: Input state
        direction: "plus", "minus" or "full"

    Returns:
        The shifted state
    """
    if direction == "full":
        return apply_shift(apply_shift(state, "plus"), "minus")
    amps = state.amps
    length = state.length
    out = np.zeros((length + 1, 2), dtype=np.complex128)
    if direction == "plus":
        out[1:, 0] = amps[:, 0]
        out[:length, 1] = amps[:, 1]
        return WaveFunction(state.offset, out)
    if direction == "minus":
        out[1:, 0] = amps[:, 0]
        out[:length, 1] = amps[:, 1]
        return WaveFunction(state.offset - 1, out)
    raise ValueError(f"shift direction must be plus, minus or full, got {direction!r}")


def apply_coin(state: WaveFunction, coins: CoinSequence) -> WaveFunction:
    matrices = CoinSequence.coerce(coins).matrices(state.cells)
    return WaveFunction(state.offset, np.einsum("nij,nj->ni", matrices, state.amps))


def apply_field(state: WaveFunction, field: RationalField) -> WaveFunction:
    if field.num == 0:
        return state
    return WaveFunction(state.offset, state.amps * field.cell_phases(state.cells))


def apply_global_phase(state: WaveFunction, phase: complex) -> WaveFunction:
    return state.scaled(phase)


def _split_step_kernel(
    state: WaveFunction, coins_1: CoinSequence, coins_2: CoinSequence
) -> WaveFunction:
    """
    Fused W = S_+ C_1 S_- C_2.

    With (x', y') = C_2(n) psi(n):
        out+(n) = a1(n-1) x'(n-1) + b1(n-1) y'(n)
        out-(n) = c1(n) x'(n) + d1(n) y'(n+1)
    on the window [offset-1, offset+L].
    """
    length = state.length
    c2 = coins_2.matrices(state.cells)
    turned = np.einsum("nij,nj->ni", c2, state.amps)

    # C_1 acts on cells offset-1 .. offset+L-1 after S_- moved y' one cell left
    inner = np.zeros((length + 1, 2), dtype=np.complex128)
    inner[1:, 0] = turned[:, 0]
    inner[:length, 1] = turned[:, 1]
    c1 = coins_1.matrices(np.arange(state.offset - 1, state.offset + length, dtype=np.int64))
    mixed = np.einsum("nij,nj->ni", c1, inner)

    out = np.zeros((length + 2, 2), dtype=np.complex128)
    out[1:, 0] = mixed[:, 0]
    out[: length + 1, 1] = mixed[:, 1]
    return WaveFunction(state.offset - 1, out)


def apply_layer(state: WaveFunction, layer) -> WaveFunction:
    if isinstance(layer, ShiftPlus):
        return apply_shift(state, "plus")
    if isinstance(layer, ShiftMinus):
        return apply_shift(state, "minus")
    if isinstance(layer, FullShift):
        return apply_shift(state, "full")
    if isinstance(layer, Coin):
        return apply_coin(state, layer.coins)
    if isinstance(layer, Field):
        return apply_field(state, layer.field)
    if isinstance(layer, GlobalPhase):
        return apply_global_phase(state, layer.phase)
    raise TypeError(f"unknown layer: {layer!r}")


def step(state: WaveFunction, spec: WalkSpec, fused: bool = True) -> WaveFunction:
    """
    Apply one step of a walk.

    Split-step blocks (Coin, ShiftMinus, Coin, ShiftPlus) go through the
    fused kernel unless fused=False; every other layer is applied in order.

    Args:
        state: Input state
        spec: Walk specification
        fused: Use the fused split-step kernel where the pattern matches

    Returns:
        The evolved state
    """
    layers = spec.layers
    i = 0
    while i < len(layers):
        if fused:
            block = WalkSpec(layers[i : i + 4]).split_step_coins()
            if block is not None:
                state = _split_step_kernel(state, *block)
                i += 4
                continue
        state = apply_layer(state, layers[i])
        i += 1
    return state


def evolve(state: WaveFunction, spec: WalkSpec, steps: int) -> WaveFunction:
    for _ in range(steps):
        state = step(state, spec)
    return state


def position_moments(state: WaveFunction) -> Tuple[float, float, float]:
    """
    Mean, second moment and standard deviation of the position distribution.

    Args:
        state: A normalized state

    Returns:
        (mean, second_moment, sigma)
    """
    probs = state.probabilities()
    cells = state.cells.astype(np.float64)
    mean = float(np.dot(probs, cells))
    second = float(np.dot(probs, cells * cells))
    sigma = float(np.sqrt(max(second - mean * mean, 0.0)))
    return mean, second, sigma
