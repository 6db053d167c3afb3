import math

import numpy as np
import pytest

from ewalk.lattice import (
    apply_coin,
    apply_field,
    apply_global_phase,
    apply_shift,
    evolve,
    position_moments,
    step,
)
from ewalk.models import (
    CoinSequence,
    Field,
    RationalField,
    SU2Coin,
    UnitaryCoin,
    WalkSpec,
    WaveFunction,
)
from ewalk.sieve import random_coin_sequence
from tests.conftest import random_state

pytestmark = pytest.mark.unit


def test_shift_plus_moves_plus_component_right():
    """Test S_+ on delta_0^+ and delta_0^-."""
    moved = apply_shift(WaveFunction.localized(0, (1, 0)), "plus")
    assert moved.amplitude(1, 0) == 1
    assert moved.offset == 0 and moved.length == 2

    kept = apply_shift(WaveFunction.localized(0, (0, 1)), "plus")
    assert kept.amplitude(0, 1) == 1


def test_shift_minus_moves_minus_component_left():
    """Test S_- on delta_0^-."""
    moved = apply_shift(WaveFunction.localized(0, (0, 1)), "minus")
    assert moved.amplitude(-1, 1) == 1
    assert moved.offset == -1 and moved.length == 2

    with pytest.raises(ValueError):
        apply_shift(moved, "sideways")


def test_full_shift_moves_both_components():
    """Test S = S_+ S_- on a superposition."""
    state = WaveFunction.localized(0, (0.6, 0.8))
    moved = apply_shift(state, "full")
    assert moved.amplitude(1, 0) == pytest.approx(0.6)
    assert moved.amplitude(-1, 1) == pytest.approx(0.8)
    assert moved.norm() == pytest.approx(1.0)


def test_textbook_hadamard_coin():
    """Test the coin action (delta^+ + delta^-)/sqrt 2."""
    out = apply_coin(WaveFunction.localized(0, (1, 0)), UnitaryCoin.hadamard())
    s = 1 / math.sqrt(2)
    assert out.amplitude(0, 0) == pytest.approx(s)
    assert out.amplitude(0, 1) == pytest.approx(s)


def test_field_and_global_phase():
    """Test field phases and global phases on a localized state."""
    state = WaveFunction.localized(1, (1, 0))
    assert apply_field(state, RationalField(1, 4)).amplitude(1, 0) == pytest.approx(1j)
    assert apply_field(state, RationalField(0)) is state
    assert apply_global_phase(state, -1).amplitude(1, 0) == -1


def test_hadamard_split_step_on_plus():
    """Test W delta_0^+ = (delta_1^+ - delta_0^- - delta_0^+ - delta_-1^-)/2."""
    coin = SU2Coin.hadamard()
    out = step(WaveFunction.localized(0, (1, 0)), WalkSpec.split_step(coin, coin))
    assert out.amplitude(1, 0) == pytest.approx(0.5)
    assert out.amplitude(0, 1) == pytest.approx(-0.5)
    assert out.amplitude(0, 0) == pytest.approx(-0.5)
    assert out.amplitude(-1, 1) == pytest.approx(-0.5)
    assert out.norm() == pytest.approx(1.0)


def test_fused_kernel_matches_layerwise(rng):
    """Test the fused split-step kernel against layer by layer evaluation for 100 random coin sequences and states."""
    for trial in range(100):
        first = random_coin_sequence(1 + trial % 5, rng)
        second = random_coin_sequence(1 + trial % 3, rng)
        spec = WalkSpec.split_step(first, second)
        if trial % 2:
            spec = spec.then(WalkSpec.electric("W", SU2Coin.hadamard(), RationalField(2, 7)))
        state = random_state(rng)
        for _ in range(3):
            fused = step(state, spec)
            plain = step(state, spec, fused=False)
            assert (fused.offset, fused.length) == (plain.offset, plain.length)
            assert np.max(np.abs(fused.amps - plain.amps)) <= 1e-14
            state = fused


def _walk_specs():
    rng = np.random.default_rng(11)
    hadamard = SU2Coin.hadamard()
    tilted = SU2Coin.from_polar(0.6, 0.7)
    # SU(2) coins are normalized on construction
    periodic = CoinSequence.periodic([SU2Coin(*(rng.normal(size=2) + 1j * rng.normal(size=2))) for _ in range(3)])
    mixed = CoinSequence.explicit({0: hadamard, 4: periodic.at(1)}, tilted)
    return {
        "U": WalkSpec.shift_coin(hadamard),
        "W": WalkSpec.split_step(hadamard, tilted),
        "U-plain-field": WalkSpec.electric("U", tilted, RationalField(1, 5)),
        "W-tilde-field": WalkSpec.electric("W", hadamard, RationalField(21, 106)),
        "U-periodic": WalkSpec.shift_coin(periodic),
        "W-mixed": WalkSpec.split_step(mixed, periodic),
        "W-plain-field": WalkSpec.split_step(periodic, mixed).then(WalkSpec((Field(RationalField(2, 5)),))),
        "U-squared-phased": WalkSpec.shift_coin(mixed).power(2).with_phase(np.exp(0.3j)),
    }


WALK_SPECS = _walk_specs()


@pytest.mark.parametrize("name", sorted(WALK_SPECS))
def test_norm_is_conserved(name, rng):
    """Test norm conservation and fused/layerwise agreement over 1000 steps."""
    spec = WALK_SPECS[name]
    state = random_state(rng)
    for _ in range(1000):
        fused = step(state, spec)
        plain = step(state, spec, fused=False)
        assert abs(fused.norm() - 1.0) <= 1e-12
        assert fused.distance(plain) <= 1e-14
        state = fused


def test_light_cone_is_exact():
    """Test that the window grows by one cell per shift layer and is filled to its edges."""
    spec = WalkSpec.electric("W", SU2Coin.hadamard(), RationalField(1, 3))
    state = evolve(WaveFunction.localized(0, (1, 0)), spec, 10)
    assert state.offset == -10
    assert state.length == 21
    probs = state.probabilities()
    assert probs[0] > 0 and probs[-1] > 0

    u = evolve(WaveFunction.localized(0, (1, 0)), WalkSpec.shift_coin(SU2Coin.hadamard()), 4)
    assert (u.offset, u.length) == (-4, 9)


def test_position_moments():
    """Test mean, second moment and sigma."""
    assert position_moments(WaveFunction.localized(3)) == (3.0, 9.0, 0.0)

    s = 1 / math.sqrt(2)
    mean, second, sigma = position_moments(WaveFunction(-1, [[s, 0], [0, 0], [0, s]]))
    assert mean == pytest.approx(0.0)
    assert second == pytest.approx(1.0)
    assert sigma == pytest.approx(1.0)


def test_coin_rule_is_evaluated_per_cell():
    """Test that an explicit coin acts only on its cell."""
    h = UnitaryCoin.hadamard()
    rule = CoinSequence.explicit({2: h}, UnitaryCoin.identity())
    state = WaveFunction(1, np.array([[1, 0], [1, 0]]) / math.sqrt(2))
    out = apply_coin(state, rule)
    assert out.amplitude(1, 1) == 0
    assert out.amplitude(2, 1) == pytest.approx(0.5)
