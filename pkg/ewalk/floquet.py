"""
Momentum-space engine for translation-invariant and regrouped electric walks.

Fourier convention: (F psi)(theta) = sum_n exp(-i theta n) psi(n). Under it
S_+ -> diag(e^{-i theta}, 1), S_- -> diag(1, e^{i theta}) and the plain field
F_Phi is the momentum shift theta -> theta - Phi. Symbols are trigonometric
polynomials in theta; FloquetSymbol stores their Fourier coefficients so
that values and theta-derivatives are exact up to rounding.

Closed-form dispersion relations are written in the variable theta + arg(a).
With the convention above the symbol at theta corresponds to the closed form
at -theta; helpers that compare the two apply that reflection.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import minimize_scalar

from ewalk.config import settings
from ewalk.errors import EwalkError, NotTranslationInvariant
from ewalk.models import (
    Coin,
    Field,
    FullShift,
    GlobalPhase,
    RationalField,
    ShiftMinus,
    ShiftPlus,
    SU2Coin,
    WalkSpec,
)

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
DEGENERACY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class LayerSymbol:
    """
    Symbol of a single layer.

    multiplication: theta -> diag(e^{-i p theta}, e^{i q theta}) @ matrix
    momentum_shift: psi^(theta) -> matrix @ psi^(theta - 2 pi shift)
    """

    kind: str
    matrix: NDArray[np.complex128]
    exponents: Tuple[int, int] = (0, 0)
    shift: Fraction = Fraction(0)

    def value(self, theta: NDArray[np.float64]) -> NDArray[np.complex128]:
        theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
        p, q = self.exponents
        out = np.empty((theta.size, 2, 2), dtype=np.complex128)
        out[:, 0, :] = np.exp(-1j * p * theta)[:, None] * self.matrix[0]
        out[:, 1, :] = np.exp(1j * q * theta)[:, None] * self.matrix[1]
        return out


_EYE = np.eye(2, dtype=np.complex128)


def layer_symbols(spec: WalkSpec) -> List[LayerSymbol]:
    """Layer symbols in application order."""
    symbols = []
    for layer in spec.layers:
        if isinstance(layer, ShiftPlus):
            symbols.append(LayerSymbol("multiplication", _EYE, (1, 0)))
        elif isinstance(layer, ShiftMinus):
            symbols.append(LayerSymbol("multiplication", _EYE, (0, 1)))
        elif isinstance(layer, FullShift):
            symbols.append(LayerSymbol("multiplication", _EYE, (1, 1)))
        elif isinstance(layer, Coin):
            if layer.coins.kind != "constant":
                raise NotTranslationInvariant("position-dependent coins have no Fourier symbol")
            symbols.append(LayerSymbol("multiplication", layer.coins.coins[0].matrix))
        elif isinstance(layer, GlobalPhase):
            symbols.append(LayerSymbol("multiplication", layer.phase * _EYE))
        elif isinstance(layer, Field):
            field = layer.field
            symbols.append(
                LayerSymbol("momentum_shift", np.diag(field.internal_phase()), shift=field.momentum_shift())
            )
        else:
            raise TypeError(f"unknown layer: {layer!r}")
    return symbols


def _regroup(symbols: Sequence[LayerSymbol]) -> Tuple[List[Tuple[LayerSymbol, Fraction]], Fraction]:
    """
    Collect symbols into a left-to-right product of factors at momentum offsets.

    Returns:
        ([(factor, offset in turns), ...], accumulated momentum shift in turns)
    """
    factors: List[Tuple[LayerSymbol, Fraction]] = []
    total = Fraction(0)
    for symbol in symbols:
        if symbol.kind == "momentum_shift":
            factors = [(f, offset + symbol.shift) for f, offset in factors]
            total += symbol.shift
            factors.insert(0, (LayerSymbol("multiplication", symbol.matrix), Fraction(0)))
        else:
            factors.insert(0, (symbol, Fraction(0)))
    return factors, total


def _evaluate_factors(factors, theta: NDArray[np.float64]) -> NDArray[np.complex128]:
    theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    result = np.broadcast_to(_EYE, (theta.size, 2, 2)).copy()
    for factor, offset in factors:
        result = result @ factor.value(theta - TWO_PI * float(offset))
    return result


@dataclass(frozen=True, eq=False)
class FloquetSymbol:
    """
    theta -> 2x2 matrix stored as sum_k coefficients[k] exp(i k theta).

    Attributes:
        frequencies: Integer frequencies k
        coefficients: Array of shape (K, 2, 2)
        label: Provenance of the symbol (spec label)
        power: Regrouping power p (number of walk steps represented)
    """

    frequencies: NDArray[np.int64]
    coefficients: NDArray[np.complex128]
    label: str = "symbol"
    power: int = 1

    period = TWO_PI

    @classmethod
    def from_factors(cls, factors, label: str, power: int) -> "FloquetSymbol":
        degree = sum(max(f.exponents) for f, _ in factors)
        samples = 2 * degree + 1
        theta = TWO_PI * np.arange(samples) / samples
        values = _evaluate_factors(factors, theta)
        coefficients = np.fft.fft(values, axis=0) / samples
        frequencies = np.rint(np.fft.fftfreq(samples, 1.0 / samples)).astype(np.int64)
        return cls(frequencies, coefficients, label, power)

    def __call__(self, theta):
        scalar = np.ndim(theta) == 0
        phases = np.exp(1j * np.outer(np.atleast_1d(theta), self.frequencies))
        values = np.einsum("tk,kij->tij", phases, self.coefficients)
        return values[0] if scalar else values

    def derivative(self, theta):
        scalar = np.ndim(theta) == 0
        phases = 1j * self.frequencies * np.exp(1j * np.outer(np.atleast_1d(theta), self.frequencies))
        values = np.einsum("tk,kij->tij", phases, self.coefficients)
        return values[0] if scalar else values

    def eigenvalues(self, theta) -> NDArray[np.complex128]:
        """Eigenvalues, shape (T, 2) for array input."""
        return np.linalg.eigvals(self(np.atleast_1d(theta)))

    def eigenphases(self, theta) -> NDArray[np.float64]:
        """Eigenphases in (-pi, pi], larger first; shape (T, 2)."""
        return np.sort(np.angle(self.eigenvalues(theta)), axis=-1)[..., ::-1]

    def half_trace(self, theta) -> NDArray[np.complex128]:
        values = self(np.atleast_1d(theta))
        return (values[:, 0, 0] + values[:, 1, 1]) / 2.0

    def eigendecomposition(self, theta: float):
        """
        Eigenvalues and spectral projections at one momentum.

        Returns:
            (eigenvalues, projections) with projections of shape (2, 2, 2)
        """
        matrix = self(float(theta))
        lam = np.linalg.eigvals(matrix)
        if abs(lam[0] - lam[1]) < DEGENERACY_TOL:
            return lam, np.array([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])], dtype=np.complex128)
        p0 = (matrix - lam[1] * _EYE) / (lam[0] - lam[1])
        return lam, np.array([p0, _EYE - p0])

    def unitarity_defect(self, theta) -> float:
        values = self(np.atleast_1d(theta))
        gram = np.einsum("tji,tjk->tik", values.conj(), values)
        return float(np.max(np.abs(gram - _EYE)))


def symbol_of_spec(spec: WalkSpec) -> FloquetSymbol:
    """
    Fourier symbol of a translation-invariant walk.

    Raises:
        NotTranslationInvariant: If the spec has a field layer or a
            position-dependent coin
    """
    if spec.has_field:
        raise NotTranslationInvariant(f"{spec.label} contains field layers")
    factors, _ = _regroup(layer_symbols(spec))
    return FloquetSymbol.from_factors(factors, spec.label, 1)


def regrouped_symbol(
    kind: str, coin: SU2Coin, field: RationalField, power: Optional[int] = None
) -> FloquetSymbol:
    """
    Symbol of U_Phi^p or W_Phi^p.

    Args:
        kind: "U" (shift-coin, plain field) or "W" (split-step, tilde field)
        coin: The SU(2) coin
        field: Reduced rational field
        power: Regrouping power, default m

    Returns:
        The Floquet symbol with power p

    Raises:
        NotTranslationInvariant: If p steps do not shift momentum by a
            multiple of 2 pi
    """
    spec = WalkSpec.electric(kind, coin, field)
    p = field.den if power is None else power
    factors, total = _regroup(layer_symbols(spec.power(p)))
    if total.denominator != 1:
        raise NotTranslationInvariant(
            f"{p} steps of {spec.label} shift momentum by {total} turns"
        )
    return FloquetSymbol.from_factors(factors, f"{spec.label}^{p}", p)


@dataclass(frozen=True)
class DispersionProfile:
    """Closed-form dispersion of the regrouped walk with power m and coin modulus |a|."""

    m: int
    abs_a: float
    arg_a: float = 0.0

    @classmethod
    def from_coin(cls, coin: SU2Coin, m: int) -> "DispersionProfile":
        return cls(m, coin.abs_a, coin.arg_a)

    @property
    def parity(self) -> str:
        return "odd" if self.m % 2 else "even"

    def cos_omega(self, theta):
        x = self.m * (np.asarray(theta, dtype=np.float64) + self.arg_a)
        amp = self.abs_a**self.m
        if self.m % 2:
            return amp * np.cos(x)
        sign = -1.0 if (self.m // 2) % 2 else 1.0
        return -amp * np.cos(x) + sign * (amp - 1.0)

    def symbol_cos_omega(self, theta):
        """Closed form expressed in the symbol's momentum variable."""
        return self.cos_omega(-np.asarray(theta, dtype=np.float64))


def dispersion_closed_form(profile: DispersionProfile, theta):
    """
    Principal dispersion branches.

    Returns:
        (omega_plus in [0, pi], omega_minus = -omega_plus)
    """
    omega = np.arccos(np.clip(profile.cos_omega(theta), -1.0, 1.0))
    return omega, -omega


def group_velocity_closed_form(profile: DispersionProfile, theta):
    """
    |d omega / d theta| through the regular squared forms.

    m odd:  m^2 |a|^{2m} (1 - y) / (1 - |a|^{2m} y),   y = cos^2(m(theta + arg a))
    m even: m^2 |a|^m (2 - y) / (2 - |a|^m y),          y = 1 - (-1)^{m/2} cos(m(theta + arg a))
    """
    m = profile.m
    x = m * (np.asarray(theta, dtype=np.float64) + profile.arg_a)
    amp = profile.abs_a**m
    if m % 2:
        y = np.cos(x) ** 2
        num, den = 1.0 - y, 1.0 - amp * amp * y
        scale = m * amp
    else:
        sign = -1.0 if (m // 2) % 2 else 1.0
        y = 1.0 - sign * np.cos(x)
        num, den = 2.0 - y, 2.0 - amp * y
        scale = m * math.sqrt(amp)
    ratio = np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), 1.0)
    return scale * np.sqrt(np.clip(ratio, 0.0, None))


def group_velocity_quotient(profile: DispersionProfile, theta):
    """Raw quotient (-1)^{m+1} m |a|^m sin(m(theta + arg a)) / sin(omega_+); singular at band edges."""
    m = profile.m
    x = m * (np.asarray(theta, dtype=np.float64) + profile.arg_a)
    omega, _ = dispersion_closed_form(profile, theta)
    sign = 1.0 if m % 2 else -1.0
    return sign * m * profile.abs_a**m * np.sin(x) / np.sin(omega)


def symbol_velocity(symbol: FloquetSymbol, theta) -> NDArray[np.float64]:
    """
    max_s |d omega_s / d theta| computed from the symbol and its derivative.

    The symbol is written e^{i phi}(c + i u.sigma); then |omega'| is the speed
    of (c, |u|) on the unit circle and the band velocities are |phi'| +- |omega'|.
    At degenerate points |u| -> 0 the one-sided limit |u'| is used.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    values = symbol(theta)
    slopes = symbol.derivative(theta)
    det = values[:, 0, 0] * values[:, 1, 1] - values[:, 0, 1] * values[:, 1, 0]
    phi = np.angle(det) / 2.0
    dphi = np.einsum("tij,tij->t", values.conj(), slopes).imag / 2.0
    rot = np.exp(-1j * phi)[:, None, None]
    su2 = rot * values
    dsu2 = rot * (slopes - 1j * dphi[:, None, None] * values)

    def split(mat):
        c = ((mat[:, 0, 0] + mat[:, 1, 1]) / 2.0).real
        q = (mat[:, 0, 1] - mat[:, 1, 0].conj()) / 2.0
        u = np.stack([((mat[:, 0, 0] - mat[:, 1, 1]) / 2.0).imag, q.real, q.imag], axis=1)
        return c, u

    _, u = split(su2)
    dc, du = split(dsu2)
    unorm = np.linalg.norm(u, axis=1)
    dunorm = np.linalg.norm(du, axis=1)
    regular = unorm > DEGENERACY_TOL * (1.0 + dunorm)
    radial = np.where(regular, np.sum(u * du, axis=1) / np.where(regular, unorm, 1.0), dunorm)
    return np.abs(dphi) + np.sqrt(dc * dc + radial * radial)


def maximize_over_momentum(
    func: Callable[[NDArray[np.float64]], NDArray[np.float64]],
    grid: Optional[int] = None,
    candidates: Optional[int] = None,
    rounds: Optional[int] = None,
) -> Tuple[float, float]:
    """
    sup over theta in [0, 2 pi) of a vectorized function.

    Coarse grid, then bounded Brent/golden-section refinement around the best
    grid points, each round on a window four times narrower.

    Args:
        func: Vectorized function of theta
        grid: Coarse grid size (settings.theta_grid by default)
        candidates: Grid maxima to refine (settings.refine_candidates)
        rounds: Refinement rounds (settings.refine_rounds)

    Returns:
        (theta at the maximum, maximum value)
    """
    grid = grid or settings.theta_grid
    candidates = candidates or settings.refine_candidates
    rounds = rounds or settings.refine_rounds
    thetas = TWO_PI * np.arange(grid) / grid
    values = np.asarray(func(thetas), dtype=np.float64)
    order = np.argsort(values)[::-1][:candidates]
    best_theta, best_value = float(thetas[order[0]]), float(values[order[0]])
    step_width = TWO_PI / grid

    def negated(t):
        return -float(func(np.array([t]))[0])

    for idx in order:
        center, half = float(thetas[idx]), step_width
        for _ in range(rounds):
            res = minimize_scalar(
                negated,
                bounds=(center - half, center + half),
                method="bounded",
                options={"xatol": 1e-12},
            )
            if -res.fun > best_value:
                best_theta, best_value = float(res.x), float(-res.fun)
            center, half = float(res.x), half / 4.0
    logger.debug(f"sup over momentum: {best_value:.15g} at theta={best_theta:.15g}")
    return best_theta % TWO_PI, best_value


def velocity_exponent(kind: str, field: RationalField) -> int:
    """Integer e with v = |a|^e."""
    m = field.den
    if kind == "W":
        return m
    if kind == "U":
        return m if m % 2 else m // 2
    raise EwalkError(f"walk kind must be U or W, got {kind!r}")


@dataclass(frozen=True)
class VelocityReport:
    kind: str
    field: str
    abs_a: float
    closed_form: float
    numeric: float
    legacy_bound: float
    regrouping_power: int
    exponent: int

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def max_velocity(kind: str, coin: SU2Coin, field: RationalField) -> VelocityReport:
    """
    Maximal velocity of U_Phi or W_Phi.

    Closed form |a|^e (e from velocity_exponent), the numeric maximum of the
    regrouped symbol's group velocity divided by the regrouping power, and the
    older bound (4|a|)^m.
    """
    symbol = regrouped_symbol(kind, coin, field)
    _, vmax = maximize_over_momentum(lambda t: symbol_velocity(symbol, t))
    exponent = velocity_exponent(kind, field)
    report = VelocityReport(
        kind=kind,
        field=field.label,
        abs_a=coin.abs_a,
        closed_form=coin.abs_a**exponent,
        numeric=vmax / symbol.power,
        legacy_bound=(4.0 * coin.abs_a) ** field.den,
        regrouping_power=symbol.power,
        exponent=exponent,
    )
    logger.info(
        f"velocity {kind} {field.label}: closed {report.closed_form:.12g}, numeric {report.numeric:.12g}"
    )
    return report


def revival_power(kind: str, field: RationalField) -> int:
    m = field.den
    if kind == "U" and m % 2:
        return 2 * m
    return m


def revival_sign(kind: str, field: RationalField) -> int:
    """
    lambda with ||X^p + lambda|| = defect for the regrouped walk X^p.

    U, m odd: +1 at p = 2m; U, m even: (-1)^{m/2} at p = m;
    W: (-1)^{m+1} at p = m.
    """
    m = field.den
    if kind == "U":
        return 1 if m % 2 else (-1) ** (m // 2)
    if kind == "W":
        return (-1) ** (m + 1)
    raise EwalkError(f"walk kind must be U or W, got {kind!r}")


@dataclass(frozen=True)
class RevivalReport:
    kind: str
    field: str
    numeric: float
    closed_form: float
    phase: complex
    power: int

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "field": self.field,
            "numeric": self.numeric,
            "closed_form": self.closed_form,
            "phase_re": self.phase.real,
            "phase_im": self.phase.imag,
            "power": self.power,
        }


def revival_defect(kind: str, coin: SU2Coin, field: RationalField) -> RevivalReport:
    """
    sup_theta ||M(theta) + lambda|| for the revival power, against its closed form.

    The revival phase -lambda is what X^p approximately equals.
    """
    power = revival_power(kind, field)
    lam = revival_sign(kind, field)
    symbol = regrouped_symbol(kind, coin, field, power=power)

    def defect(theta):
        return np.max(np.abs(symbol.eigenvalues(theta) + lam), axis=-1)

    _, numeric = maximize_over_momentum(defect)
    m = field.den
    if kind == "U" and m % 2 == 0:
        closed = 2.0 * coin.abs_a ** (m // 2)
    else:
        closed = 2.0 * coin.abs_a**m
    return RevivalReport(kind, field.label, numeric, closed, complex(-lam), power)


@dataclass(frozen=True)
class BandSet:
    """
    Closed arcs on the unit circle as (start, end) angles with 0 <= start <= end <= 2 pi.

    multiplicity counts the root copies the arcs were generated from.
    """

    arcs: Tuple[Tuple[float, float], ...]
    multiplicity: int = 1

    @classmethod
    def from_arcs(cls, raw: Sequence[Tuple[float, float]], multiplicity: int = 1) -> "BandSet":
        pieces = []
        for start, end in raw:
            width = end - start
            if width >= TWO_PI:
                pieces.append((0.0, TWO_PI))
                continue
            start = start % TWO_PI
            end = start + width
            if end > TWO_PI:
                pieces.append((start, TWO_PI))
                pieces.append((0.0, end - TWO_PI))
            else:
                pieces.append((start, end))
        pieces.sort()
        merged: List[List[float]] = []
        for start, end in pieces:
            if merged and start <= merged[-1][1] + 1e-15:
                merged[-1][1] = max(merged[-1][1], end)
            else:
                merged.append([start, end])
        return cls(tuple((s, e) for s, e in merged), multiplicity)

    def contains(self, z, tol: float = 1e-10) -> bool:
        angle = math.atan2(complex(z).imag, complex(z).real) % TWO_PI
        for candidate in (angle, angle - TWO_PI, angle + TWO_PI):
            for start, end in self.arcs:
                if start - tol <= candidate <= end + tol:
                    return True
        return False

    @property
    def measure(self) -> float:
        return sum(end - start for start, end in self.arcs)


def _omega_range(profile: DispersionProfile, samples: int) -> Tuple[float, float]:
    """Range of omega_+ over theta; grid plus the exact extremal momenta."""
    grid = TWO_PI * np.arange(samples) / samples
    extremal = math.pi * np.arange(2 * profile.m) / profile.m - profile.arg_a
    omega, _ = dispersion_closed_form(profile, np.concatenate([grid, extremal]))
    return float(np.min(omega)), float(np.max(omega))


def spectrum_bands(kind: str, coin: SU2Coin, field: RationalField, theta_samples: int = 256) -> BandSet:
    """
    Spectral bands of U_Phi or W_Phi as arcs on the unit circle.

    U: m-th roots of the bands e^{+-i omega(theta, m)}.
    W: e^{i(+-w(theta) + r_k)/m}, k = 0..m-1, read off U_{Phi/2}^2 through the
    parity split: w = omega(theta, 2m) and r_k = (2k+1) pi for odd n,
    w = 2 omega(theta, m) and r_k = 2 pi k for even n.
    """
    if theta_samples < 64:
        raise EwalkError(f"theta_samples must be >= 64, got {theta_samples}")
    m, n = field.den, field.num
    if kind == "U":
        profile, scale = DispersionProfile.from_coin(coin, m), 1.0
        rotations = [TWO_PI * k for k in range(m)]
    elif kind == "W":
        if n % 2:
            profile, scale = DispersionProfile.from_coin(coin, 2 * m), 1.0
            rotations = [math.pi * (2 * k + 1) for k in range(m)]
        else:
            profile, scale = DispersionProfile.from_coin(coin, m), 2.0
            rotations = [TWO_PI * k for k in range(m)]
    else:
        raise EwalkError(f"walk kind must be U or W, got {kind!r}")
    lo, hi = _omega_range(profile, theta_samples)
    branches = [(scale * lo, scale * hi), (-scale * hi, -scale * lo)]
    raw = [((a + r) / m, (b + r) / m) for r in rotations for a, b in branches]
    return BandSet.from_arcs(raw, multiplicity=len(rotations))


def dispersion_table(kind: str, coin: SU2Coin, field: RationalField, samples: int = 256) -> List[dict]:
    """
    Rows (theta, omega_plus, omega_minus, group_velocity) of the regrouped walk.

    U rows use the closed form in the variable theta + arg(a); W rows are read
    off the regrouped symbol.
    """
    thetas = TWO_PI * np.arange(samples) / samples
    if kind == "U":
        profile = DispersionProfile.from_coin(coin, field.den)
        plus, minus = dispersion_closed_form(profile, thetas)
        speed = group_velocity_closed_form(profile, thetas)
    else:
        symbol = regrouped_symbol(kind, coin, field)
        plus = np.arccos(np.clip(symbol.half_trace(thetas).real, -1.0, 1.0))
        minus = -plus
        speed = symbol_velocity(symbol, thetas)
    return [
        {"theta": float(t), "omega_plus": float(p), "omega_minus": float(q), "group_velocity": float(v)}
        for t, p, q, v in zip(thetas, plus, minus, speed)
    ]


@dataclass(frozen=True)
class VelocityChain:
    """v(W_Phi) against v(U_{Phi/2}) and v(U_{Phi/2}^2) = 2 v(U_{Phi/2})."""

    field: str
    half_field: str
    w_closed: float
    u_half_closed: float
    w_numeric: float
    u_half_numeric: float
    u_half_squared_numeric: float
    exponents_equal: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def velocity_chain(coin: SU2Coin, field: RationalField) -> VelocityChain:
    half = field.halved()
    w = max_velocity("W", coin, field)
    u = max_velocity("U", coin, half)
    squared = regrouped_symbol("U", coin, half, power=2 * half.den)
    _, vmax = maximize_over_momentum(lambda t: symbol_velocity(squared, t))
    return VelocityChain(
        field=field.label,
        half_field=half.label,
        w_closed=w.closed_form,
        u_half_closed=u.closed_form,
        w_numeric=w.numeric,
        u_half_numeric=u.numeric,
        # one step of U^2 is two steps of U
        u_half_squared_numeric=2.0 * vmax / squared.power,
        exponents_equal=velocity_exponent("W", field) == velocity_exponent("U", half),
    )
