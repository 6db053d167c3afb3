import math

import numpy as np
import pytest

from ewalk.banded import RingWindow, build_matrix
from ewalk.errors import EwalkError, NotTranslationInvariant
from ewalk.floquet import (
    BandSet,
    DispersionProfile,
    dispersion_closed_form,
    dispersion_table,
    group_velocity_closed_form,
    group_velocity_quotient,
    max_velocity,
    maximize_over_momentum,
    regrouped_symbol,
    revival_defect,
    revival_power,
    revival_sign,
    spectrum_bands,
    symbol_of_spec,
    symbol_velocity,
    velocity_chain,
    velocity_exponent,
)
from ewalk.models import CoinSequence, RationalField, SU2Coin, UnitaryCoin, WalkSpec
from tests.conftest import reduced_fields

pytestmark = [pytest.mark.unit, pytest.mark.floquet]

HALF_SQRT = 1.0 / math.sqrt(2.0)


def test_shift_coin_symbol(tilted_coin):
    """Test the symbol of U = S C against diag(e^{-i theta}, e^{i theta}) C."""
    symbol = symbol_of_spec(WalkSpec.shift_coin(tilted_coin))
    theta = 0.7
    expected = np.diag([np.exp(-1j * theta), np.exp(1j * theta)]) @ tilted_coin.matrix
    assert np.allclose(symbol(theta), expected, atol=1e-14)
    assert symbol(np.array([0.1, 0.2])).shape == (2, 2, 2)


def test_symbol_rejects_fields_and_position_dependence():
    """Test that only translation-invariant walks have a plain symbol."""
    coin = SU2Coin.hadamard()
    with pytest.raises(NotTranslationInvariant):
        symbol_of_spec(WalkSpec.electric("U", coin, RationalField(1, 3)))
    with pytest.raises(NotTranslationInvariant):
        symbol_of_spec(WalkSpec.shift_coin(CoinSequence.periodic([coin, UnitaryCoin.identity()])))
    with pytest.raises(NotTranslationInvariant):
        # 2 steps of a 1/3 field shift momentum by 2/3 of a turn
        regrouped_symbol("U", coin, RationalField(1, 3), power=2)


def test_symbol_is_unitary_and_decomposes(tilted_coin, rng):
    """Test unitarity and the spectral projections of a regrouped symbol."""
    symbol = regrouped_symbol("W", tilted_coin, RationalField(2, 5))
    assert symbol.power == 5
    assert symbol.unitarity_defect(rng.uniform(0, 2 * np.pi, 1000)) < 1e-12

    lam, projections = symbol.eigendecomposition(1.3)
    matrix = symbol(1.3)
    assert np.allclose(np.abs(lam), 1.0, atol=1e-12)
    assert np.allclose(projections[0] + projections[1], np.eye(2), atol=1e-12)
    assert np.allclose(projections[0] @ projections[1], 0.0, atol=1e-12)
    for s in (0, 1):
        assert np.allclose(matrix @ projections[s], lam[s] * projections[s], atol=1e-12)
        assert np.allclose(projections[s], projections[s].conj().T, atol=1e-12)

    phases = symbol.eigenphases(1.3)
    assert phases.shape == (1, 2)
    assert phases[0, 0] >= phases[0, 1]
    for z in np.exp(1j * phases[0]):
        assert np.min(np.abs(lam - z)) < 1e-12


def test_symbol_derivative_matches_finite_differences(hadamard):
    """Test the exact theta-derivative of a symbol."""
    symbol = regrouped_symbol("U", hadamard, RationalField(1, 4))
    h = 1e-5
    for theta in (0.3, 1.9, 4.4):
        numeric = (symbol(theta + h) - symbol(theta - h)) / (2 * h)
        assert np.max(np.abs(symbol.derivative(theta) - numeric)) < 1e-7


def test_ring_eigenvalues_sample_the_symbol(tilted_coin):
    """Test that twisted-ring eigenvalues are symbol eigenvalues at (twist + 2 pi k)/N."""
    spec = WalkSpec.split_step(tilted_coin, SU2Coin.hadamard())
    symbol = symbol_of_spec(spec)
    cells, twist = 6, 0.4
    ring = build_matrix(spec, RingWindow(cells, twist)).eigenvalues()
    thetas = (twist + 2 * np.pi * np.arange(cells)) / cells
    sampled = symbol.eigenvalues(thetas).reshape(-1)

    assert len(ring) == len(sampled)
    for z in ring:
        assert np.min(np.abs(sampled - z)) < 1e-10
    for z in sampled:
        assert np.min(np.abs(ring - z)) < 1e-10


@pytest.mark.parametrize("coin", [SU2Coin.hadamard(), SU2Coin.from_polar(0.6, 0.7)])
def test_regrouped_half_trace_matches_closed_form(coin):
    """Test cos omega of U_Phi^m against the closed form for m <= 8."""
    thetas = 2 * np.pi * np.arange(256) / 256
    for field in reduced_fields(8):
        symbol = regrouped_symbol("U", coin, field)
        profile = DispersionProfile.from_coin(coin, field.den)
        half_trace = symbol.half_trace(thetas)
        assert np.max(np.abs(half_trace.imag)) < 1e-10
        assert np.max(np.abs(half_trace.real - profile.symbol_cos_omega(thetas))) < 1e-10


def test_even_period_dispersion_example():
    """Test cos omega = -(1/2) cos(2 theta) + 1/2 for Hadamard and m = 2."""
    profile = DispersionProfile.from_coin(SU2Coin.hadamard(), 2)
    thetas = np.linspace(0, 2 * np.pi, 17)
    assert profile.parity == "even"
    assert np.allclose(profile.cos_omega(thetas), -0.5 * np.cos(2 * thetas) + 0.5, atol=1e-12)

    plus, minus = dispersion_closed_form(profile, thetas)
    assert np.all((plus >= 0) & (plus <= np.pi))
    assert np.allclose(minus, -plus)


def _interior_thetas(profile, count, rng):
    """Momenta whose cos(m(theta + arg a)) lies in [-0.6, 0.6], i.e. the middle of the band."""
    x = rng.choice([-1.0, 1.0], count) * np.arccos(rng.uniform(-0.6, 0.6, count))
    x += 2 * np.pi * rng.integers(0, profile.m, count)
    return x / profile.m - profile.arg_a


@pytest.mark.parametrize("m", range(1, 7))
@pytest.mark.parametrize("abs_a", [0.25, HALF_SQRT, 0.9])
def test_closed_velocity_matches_finite_differences(abs_a, m):
    """Test the regular velocity formula against central differences of omega at 1000 band-interior points."""
    h = 1e-5
    profile = DispersionProfile(m, abs_a, 0.7)
    thetas = _interior_thetas(profile, 1000, np.random.default_rng(7))
    cos_omega = profile.cos_omega(thetas)
    assert len(thetas) == 1000
    assert np.all(np.abs(cos_omega) < 1.0)

    plus, _ = dispersion_closed_form(profile, thetas + h)
    minus, _ = dispersion_closed_form(profile, thetas - h)
    numeric = np.abs(plus - minus) / (2 * h)
    closed = group_velocity_closed_form(profile, thetas)
    assert np.max(np.abs(closed - numeric)) < 1e-6

    quotient = np.abs(group_velocity_quotient(profile, thetas))
    assert np.max(np.abs(quotient - closed)) < 1e-9


@pytest.mark.parametrize("abs_a", [0.25, HALF_SQRT, 0.9])
def test_closed_velocity_maximum(abs_a, fast_settings):
    """Test that the maximum of |d omega/d theta| is m|a|^m or m|a|^{m/2}."""
    for m in range(1, 11):
        profile = DispersionProfile(m, abs_a)
        _, vmax = maximize_over_momentum(lambda t: group_velocity_closed_form(profile, t))
        expected = m * abs_a**m if m % 2 else m * abs_a ** (m // 2)
        assert vmax == pytest.approx(expected, abs=1e-9)


def test_symbol_velocity_matches_closed_form(hadamard):
    """Test the symbol-derived velocity against the closed form at -theta."""
    field = RationalField(1, 3)
    symbol = regrouped_symbol("U", hadamard, field)
    profile = DispersionProfile.from_coin(hadamard, 3)
    thetas = np.linspace(0.05, 6.2, 200)
    interior = np.abs(profile.symbol_cos_omega(thetas)) < 0.95
    speed = symbol_velocity(symbol, thetas)
    closed = group_velocity_closed_form(profile, -thetas)
    assert np.max(np.abs(speed - closed)[interior]) < 1e-9


def test_maximize_over_momentum_refines_beyond_the_grid():
    """Test that bounded refinement finds an off-grid maximum."""
    theta, value = maximize_over_momentum(lambda t: np.cos(t - 0.123456789), grid=64, candidates=2, rounds=3)
    assert theta == pytest.approx(0.123456789, abs=1e-6)
    assert value == pytest.approx(1.0, abs=1e-12)


def test_hadamard_velocity_report(hadamard):
    """Test the W report for Hadamard and Phi = 2 pi / 3."""
    report = max_velocity("W", hadamard, RationalField(1, 3))
    assert report.closed_form == pytest.approx(0.3535533905932738, abs=1e-15)
    assert report.numeric == pytest.approx(report.closed_form, abs=1e-9)
    assert report.legacy_bound == pytest.approx(22.62741699796952, rel=1e-12)
    assert report.regrouping_power == 3
    assert report.exponent == 3
    assert report.as_dict()["field"] == "1/3"


@pytest.mark.parametrize("abs_a", [0.0, 0.25, HALF_SQRT, 0.9, 1.0])
@pytest.mark.parametrize("arg_a", [0.0, 0.7])
def test_velocity_closed_form_sweep(abs_a, arg_a, fast_settings):
    """Test v = |a|^e for both walk kinds and every field with m <= 10."""
    coin = SU2Coin.from_polar(abs_a, arg_a)
    for field in reduced_fields(10):
        for kind in ("W", "U"):
            report = max_velocity(kind, coin, field)
            assert report.numeric == pytest.approx(report.closed_form, abs=1e-9), (kind, field.label)


def test_velocity_exponents():
    """Test the exponent table of U and W."""
    assert velocity_exponent("W", RationalField(1, 4)) == 4
    assert velocity_exponent("U", RationalField(1, 5)) == 5
    assert velocity_exponent("U", RationalField(1, 4)) == 2
    with pytest.raises(EwalkError):
        velocity_exponent("V", RationalField(1, 4))


def test_split_step_and_half_field_exponents_agree():
    """Test that W_Phi and U_{Phi/2} share the velocity exponent for m <= 12."""
    for field in reduced_fields(12):
        assert velocity_exponent("W", field) == velocity_exponent("U", field.halved())


def test_revival_sign_table():
    """Test powers and signs of the revival identities."""
    assert (revival_power("U", RationalField(1, 3)), revival_sign("U", RationalField(1, 3))) == (6, 1)
    assert (revival_power("U", RationalField(1, 2)), revival_sign("U", RationalField(1, 2))) == (2, -1)
    assert (revival_power("U", RationalField(1, 4)), revival_sign("U", RationalField(1, 4))) == (4, 1)
    assert (revival_power("W", RationalField(1, 3)), revival_sign("W", RationalField(1, 3))) == (3, 1)
    assert (revival_power("W", RationalField(2, 3)), revival_sign("W", RationalField(2, 3))) == (3, 1)
    assert (revival_power("W", RationalField(1, 2)), revival_sign("W", RationalField(1, 2))) == (2, -1)


def test_revival_examples(hadamard):
    """Test the worked revival values for Hadamard coins."""
    u = revival_defect("U", hadamard, RationalField(1, 2))
    assert u.closed_form == pytest.approx(1.4142135623730951, abs=1e-15)
    assert u.numeric == pytest.approx(u.closed_form, abs=1e-8)
    assert u.phase == 1

    w = revival_defect("W", hadamard, RationalField(1, 2))
    assert w.numeric == pytest.approx(1.0, abs=1e-8)
    assert w.phase == 1
    assert w.as_dict()["phase_re"] == 1.0

    odd = revival_defect("U", hadamard, RationalField(0, 1))
    assert odd.power == 2
    assert odd.numeric == pytest.approx(2 * HALF_SQRT, abs=1e-8)


def test_zero_coin_revives_exactly():
    """Test that a = 0 gives exact revivals."""
    coin = SU2Coin(0, 1)
    for field in (RationalField(0), RationalField(1, 3), RationalField(1, 4), RationalField(3, 5)):
        for kind in ("U", "W"):
            assert revival_defect(kind, coin, field).numeric < 1e-12


@pytest.mark.parametrize("coin", [SU2Coin.hadamard(), SU2Coin.from_polar(0.6, 0.7)])
def test_revival_identity_sweep(coin, fast_settings):
    """Test numeric revival defects against their closed forms for m <= 10."""
    for field in reduced_fields(10):
        for kind in ("U", "W"):
            report = revival_defect(kind, coin, field)
            assert report.numeric == pytest.approx(report.closed_form, abs=1e-8), (kind, field.label)


def test_band_set_arcs():
    """Test normalization, wrapping and merging of arcs."""
    wrapped = BandSet.from_arcs([(-0.1, 0.2)])
    assert wrapped.measure == pytest.approx(0.3)
    assert wrapped.contains(1.0)
    assert wrapped.contains(np.exp(-0.05j))
    assert not wrapped.contains(np.exp(0.5j))

    merged = BandSet.from_arcs([(0.0, 1.0), (0.5, 2.0)])
    assert merged.arcs == ((0.0, 2.0),)

    full = BandSet.from_arcs([(0.0, 7.0)])
    assert full.measure == pytest.approx(2 * np.pi)


def test_hadamard_split_step_band_without_field(hadamard):
    """Test that W for Hadamard without field fills the left half circle."""
    bands = spectrum_bands("W", hadamard, RationalField(0))
    assert bands.measure == pytest.approx(np.pi, abs=1e-12)
    assert bands.contains(-1)
    assert bands.contains(1j)
    assert not bands.contains(1)

    with pytest.raises(EwalkError):
        spectrum_bands("W", hadamard, RationalField(0), theta_samples=16)


@pytest.mark.parametrize("kind", ["U", "W"])
@pytest.mark.parametrize("coin", [SU2Coin.hadamard(), SU2Coin.from_polar(0.6, 0.7)])
def test_ring_spectrum_lies_in_bands(kind, coin):
    """Test twisted-ring eigenvalues against the band arcs for m <= 6."""
    twists = 2 * np.pi * np.arange(32) / 32
    for field in reduced_fields(6):
        bands = spectrum_bands(kind, coin, field)
        spec = WalkSpec.electric(kind, coin, field)
        for twist in twists:
            for z in build_matrix(spec, RingWindow(4 * field.den, twist)).eigenvalues():
                assert bands.contains(z, tol=1e-10), (kind, field.label, twist, z)


def test_dispersion_table(hadamard):
    """Test the rows of the dispersion table."""
    rows = dispersion_table("U", hadamard, RationalField(1, 3), samples=64)
    assert len(rows) == 64
    assert set(rows[0]) == {"theta", "omega_plus", "omega_minus", "group_velocity"}
    assert max(row["group_velocity"] for row in rows) <= 3 * HALF_SQRT**3 + 1e-12

    w_rows = dispersion_table("W", hadamard, RationalField(1, 3), samples=32)
    assert all(row["omega_minus"] == -row["omega_plus"] for row in w_rows)


def test_velocity_chain(hadamard):
    """Test v(W_Phi) = v(U_{Phi/2}) and the doubling for U_{Phi/2}^2."""
    chain = velocity_chain(hadamard, RationalField(1, 3))
    assert chain.half_field == "1/6"
    assert chain.exponents_equal
    assert chain.w_closed == pytest.approx(chain.u_half_closed, abs=1e-12)
    assert chain.w_numeric == pytest.approx(chain.u_half_numeric, abs=1e-9)
    assert chain.u_half_squared_numeric == pytest.approx(2 * chain.u_half_numeric, abs=1e-9)
