"""
Domain types for one-dimensional two-component walks.

Coins, coin sequences, rational electric fields, finitely supported wave
functions and walk specifications. States are stored cell-major: the flat
index of delta_n^s is 2*(n - offset) + (0 for '+', 1 for '-').
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import NDArray

from ewalk.errors import EwalkError, NotUnitary

UNITARY_TOL = 1e-12

_QUARTER_TURNS = {
    Fraction(0): 1.0 + 0.0j,
    Fraction(1, 4): 1.0j,
    Fraction(1, 2): -1.0 + 0.0j,
    Fraction(3, 4): -1.0j,
}


def unit_phase(turns) -> complex:
    """
    Return exp(2*pi*i*turns), exact at quarter turns.

    Args:
        turns: Angle in units of 2*pi (Fraction, int or float)

    Returns:
        The unit complex number
    """
    if isinstance(turns, (int, Fraction)):
        reduced = Fraction(turns) % 1
        if reduced in _QUARTER_TURNS:
            return _QUARTER_TURNS[reduced]
        angle = 2.0 * math.pi * float(reduced)
    else:
        angle = 2.0 * math.pi * float(turns)
    return complex(math.cos(angle), math.sin(angle))


def _check_unitary(matrix: NDArray[np.complex128], what: str):
    defect = np.max(np.abs(matrix.conj().T @ matrix - np.eye(2)))
    if defect > UNITARY_TOL:
        raise NotUnitary(f"{what} is not unitary (defect {defect:.3e})")


@dataclass(frozen=True)
class UnitaryCoin:
    """General 2x2 unitary coin [[a, b], [c, d]]."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        _check_unitary(self.matrix, "coin")

    @property
    def matrix(self) -> NDArray[np.complex128]:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=np.complex128)

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    @classmethod
    def from_matrix(cls, matrix) -> "UnitaryCoin":
        m = np.asarray(matrix, dtype=np.complex128)
        if m.shape != (2, 2):
            raise EwalkError(f"coin matrix must be 2x2, got shape {m.shape}")
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @classmethod
    def identity(cls) -> "UnitaryCoin":
        return cls(1, 0, 0, 1)

    @classmethod
    def hadamard(cls) -> "UnitaryCoin":
        """Textbook Hadamard (1/sqrt 2)[[1, 1], [1, -1]]."""
        s = 1.0 / math.sqrt(2.0)
        return cls(s, s, s, -s)

    def as_unitary(self) -> "UnitaryCoin":
        return self


@dataclass(frozen=True)
class SU2Coin:
    """
    Coin [[a, b], [-conj(b), conj(a)]] with |a|^2 + |b|^2 = 1.

    The pair (a, b) is normalized on construction.
    """

    a: complex
    b: complex

    def __post_init__(self):
        a, b = complex(self.a), complex(self.b)
        norm = math.hypot(abs(a), abs(b))
        if norm == 0.0:
            raise NotUnitary("SU(2) coin needs (a, b) != (0, 0)")
        object.__setattr__(self, "a", a / norm)
        object.__setattr__(self, "b", b / norm)

    @classmethod
    def hadamard(cls) -> "SU2Coin":
        s = 1.0 / math.sqrt(2.0)
        return cls(s, s)

    @classmethod
    def identity(cls) -> "SU2Coin":
        return cls(1, 0)

    @classmethod
    def from_polar(cls, abs_a: float, arg_a: float = 0.0) -> "SU2Coin":
        """Coin with a = abs_a * exp(i arg_a) and real non-negative b."""
        if not 0.0 <= abs_a <= 1.0:
            raise EwalkError(f"|a| must lie in [0, 1], got {abs_a}")
        a = abs_a * complex(math.cos(arg_a), math.sin(arg_a))
        return cls(a, math.sqrt(max(0.0, 1.0 - abs_a * abs_a)))

    @property
    def abs_a(self) -> float:
        return min(1.0, abs(self.a))

    @property
    def arg_a(self) -> float:
        return math.atan2(self.a.imag, self.a.real) if self.a != 0 else 0.0

    @property
    def matrix(self) -> NDArray[np.complex128]:
        return np.array(
            [[self.a, self.b], [-self.b.conjugate(), self.a.conjugate()]],
            dtype=np.complex128,
        )

    def as_unitary(self) -> UnitaryCoin:
        return UnitaryCoin.from_matrix(self.matrix)


AnyCoin = Union[UnitaryCoin, SU2Coin]


def _to_unitary(coin: AnyCoin) -> UnitaryCoin:
    if isinstance(coin, (UnitaryCoin, SU2Coin)):
        return coin.as_unitary()
    return UnitaryCoin.from_matrix(coin)


@dataclass(frozen=True, eq=False)
class CoinSequence:
    """
    Position-dependent coin rule.

    kind is one of "constant", "periodic" or "explicit". Explicit rules map
    cells to coins and fall back to a default everywhere else.
    """

    kind: str
    coins: Tuple[UnitaryCoin, ...]
    overrides: Mapping[int, UnitaryCoin] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("constant", "periodic", "explicit"):
            raise EwalkError(f"unknown coin rule: {self.kind}")
        if not self.coins:
            raise EwalkError("coin rule needs at least one coin")
        stack = np.stack([c.matrix for c in self.coins])
        object.__setattr__(self, "_stack", stack)

    @classmethod
    def constant(cls, coin: AnyCoin) -> "CoinSequence":
        return cls("constant", (_to_unitary(coin),))

    @classmethod
    def periodic(cls, coins: Sequence[AnyCoin]) -> "CoinSequence":
        return cls("periodic", tuple(_to_unitary(c) for c in coins))

    @classmethod
    def explicit(cls, mapping: Mapping[int, AnyCoin], default: AnyCoin) -> "CoinSequence":
        table = {int(n): _to_unitary(c) for n, c in mapping.items()}
        return cls("explicit", (_to_unitary(default),), table)

    @classmethod
    def coerce(cls, coins) -> "CoinSequence":
        """Accept a CoinSequence, a single coin, or a 2x2 matrix."""
        if isinstance(coins, CoinSequence):
            return coins
        return cls.constant(coins)

    @property
    def period(self) -> Optional[int]:
        if self.kind == "constant":
            return 1
        if self.kind == "periodic":
            return len(self.coins)
        return None

    def at(self, n: int) -> UnitaryCoin:
        if self.kind == "constant":
            return self.coins[0]
        if self.kind == "periodic":
            return self.coins[n % len(self.coins)]
        return self.overrides.get(n, self.coins[0])

    def matrices(self, cells: NDArray[np.int64]) -> NDArray[np.complex128]:
        """Stack of coin matrices, shape (len(cells), 2, 2)."""
        cells = np.asarray(cells, dtype=np.int64)
        if self.kind == "constant":
            return np.broadcast_to(self._stack[0], (cells.size, 2, 2))
        if self.kind == "periodic":
            return self._stack[np.mod(cells, len(self.coins))]
        out = np.empty((cells.size, 2, 2), dtype=np.complex128)
        out[:] = self._stack[0]
        for i, n in enumerate(cells.tolist()):
            coin = self.overrides.get(n)
            if coin is not None:
                out[i] = coin.matrix
        return out

    def sample(self, cells: Iterable[int]) -> "CoinSequence":
        """Periodic rule repeating the coins found at the given cells."""
        return CoinSequence.periodic([self.at(n) for n in cells])

    def reindexed(self, scale: int, shift: int) -> "CoinSequence":
        """
        Rule n -> self.at(scale * n + shift).

        Args:
            scale: Positive cell stride, e.g. 2 for a sublattice
            shift: Cell offset

        Returns:
            A rule of the same kind
        """
        if self.kind == "constant":
            return self
        if self.kind == "periodic":
            period = len(self.coins) // math.gcd(scale, len(self.coins))
            return CoinSequence.periodic([self.at(scale * n + shift) for n in range(period)])
        table = {
            (k - shift) // scale: coin
            for k, coin in self.overrides.items()
            if (k - shift) % scale == 0
        }
        return CoinSequence.explicit(table, self.coins[0])


@dataclass(frozen=True)
class RationalField:
    """
    Electric field Phi = 2*pi*num/den, stored reduced with 0 <= num < den.

    variant "plain" is exp(i Phi Q); "tilde" is diag(1, e^{i Phi}) times the
    plain field of angle 2 Phi.
    """

    num: int
    den: int = 1
    variant: str = "plain"

    def __post_init__(self):
        if self.variant not in ("plain", "tilde"):
            raise EwalkError(f"field variant must be plain or tilde, got {self.variant}")
        if int(self.den) == 0:
            raise EwalkError("field denominator must be nonzero")
        turns = Fraction(int(self.num), int(self.den)) % 1
        object.__setattr__(self, "num", turns.numerator)
        object.__setattr__(self, "den", turns.denominator)

    @classmethod
    def parse(cls, text: str, variant: str = "plain") -> "RationalField":
        """Parse 'n/m' (or a bare integer) in units of 2*pi."""
        try:
            if "/" in text:
                num, den = text.split("/", 1)
                return cls(int(num), int(den), variant)
            return cls(int(text), 1, variant)
        except ValueError as exc:
            if isinstance(exc, EwalkError):
                raise
            raise EwalkError(f"field must look like n/m, got {text!r}") from exc

    @property
    def turns(self) -> Fraction:
        return Fraction(self.num, self.den)

    @property
    def phi(self) -> float:
        return 2.0 * math.pi * self.num / self.den

    @property
    def label(self) -> str:
        return f"{self.num}/{self.den}"

    def ell(self) -> int:
        """Fundamental period of Phi/2: 2m for odd n, m for even n."""
        return 2 * self.den if self.num % 2 else self.den

    def halved(self) -> "RationalField":
        return RationalField(self.num, 2 * self.den, self.variant)

    def with_variant(self, variant: str) -> "RationalField":
        return RationalField(self.num, self.den, variant)

    def momentum_shift(self) -> Fraction:
        """Per-application momentum shift in turns."""
        factor = 2 if self.variant == "tilde" else 1
        return (factor * self.turns) % 1

    def internal_phase(self) -> NDArray[np.complex128]:
        """Constant diagonal factor of the field in momentum space."""
        if self.variant == "tilde":
            return np.array([1.0, unit_phase(self.turns)], dtype=np.complex128)
        return np.ones(2, dtype=np.complex128)

    def cell_phases(self, cells: NDArray[np.int64]) -> NDArray[np.complex128]:
        """Per-cell, per-component phases, shape (len(cells), 2)."""
        cells = np.asarray(cells, dtype=np.int64)
        m = self.den
        if self.variant == "plain":
            residues = np.mod(self.num * cells, m)
            plus = np.exp(2j * np.pi * residues / m)
            return np.stack([plus, plus], axis=1)
        residues = np.mod(2 * self.num * cells, m)
        plus = np.exp(2j * np.pi * residues / m)
        minus = np.exp(2j * np.pi * np.mod(residues + self.num, m) / m)
        return np.stack([plus, minus], axis=1)


@dataclass(frozen=True, eq=False)
class WaveFunction:
    """Finitely supported C^2-valued state on cells offset .. offset+len-1."""

    offset: int
    amps: NDArray[np.complex128]

    def __post_init__(self):
        amps = np.array(self.amps, dtype=np.complex128)
        if amps.ndim != 2 or amps.shape[1] != 2 or amps.shape[0] < 1:
            raise EwalkError(f"amplitudes must have shape (L, 2), got {amps.shape}")
        object.__setattr__(self, "offset", int(self.offset))
        object.__setattr__(self, "amps", amps)

    @classmethod
    def localized(cls, cell: int = 0, spinor=(1.0, 0.0)) -> "WaveFunction":
        return cls(cell, np.asarray([spinor], dtype=np.complex128))

    @classmethod
    def from_vector(cls, offset: int, vector) -> "WaveFunction":
        return cls(offset, np.asarray(vector, dtype=np.complex128).reshape(-1, 2))

    @property
    def length(self) -> int:
        return self.amps.shape[0]

    @property
    def cells(self) -> NDArray[np.int64]:
        return np.arange(self.offset, self.offset + self.length, dtype=np.int64)

    def to_vector(self) -> NDArray[np.complex128]:
        return self.amps.reshape(-1)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def probabilities(self) -> NDArray[np.float64]:
        return np.sum(np.abs(self.amps) ** 2, axis=1)

    def amplitude(self, cell: int, component: int) -> complex:
        idx = cell - self.offset
        if 0 <= idx < self.length:
            return complex(self.amps[idx, component])
        return 0j

    def on_window(self, offset: int, length: int) -> NDArray[np.complex128]:
        """Amplitudes embedded into (or cut to) another window, shape (length, 2)."""
        out = np.zeros((length, 2), dtype=np.complex128)
        lo = max(offset, self.offset)
        hi = min(offset + length, self.offset + self.length)
        if lo < hi:
            out[lo - offset : hi - offset] = self.amps[lo - self.offset : hi - self.offset]
        return out

    def distance(self, other: "WaveFunction") -> float:
        lo = min(self.offset, other.offset)
        hi = max(self.offset + self.length, other.offset + other.length)
        return float(np.linalg.norm(self.on_window(lo, hi - lo) - other.on_window(lo, hi - lo)))

    def scaled(self, factor: complex) -> "WaveFunction":
        return WaveFunction(self.offset, self.amps * factor)


@dataclass(frozen=True)
class ShiftPlus:
    """S_+ : the '+' component moves one cell right."""


@dataclass(frozen=True)
class ShiftMinus:
    """S_- : the '-' component moves one cell left."""


@dataclass(frozen=True)
class FullShift:
    """S = S_+ S_-."""


@dataclass(frozen=True, eq=False)
class Coin:
    coins: CoinSequence


@dataclass(frozen=True)
class Field:
    field: RationalField


@dataclass(frozen=True)
class GlobalPhase:
    phase: complex

    def __post_init__(self):
        phase = complex(self.phase)
        if abs(abs(phase) - 1.0) > UNITARY_TOL:
            raise NotUnitary(f"global phase must have modulus 1, got {phase}")
        object.__setattr__(self, "phase", phase)


Layer = Union[ShiftPlus, ShiftMinus, FullShift, Coin, Field, GlobalPhase]


@dataclass(frozen=True, eq=False)
class WalkSpec:
    """
    One walk step as layers in application order (first layer acts first).

    The operator is layers[-1] ... layers[0]; e.g. U = S C is (Coin, FullShift).
    """

    layers: Tuple[Layer, ...]
    label: str = "walk"

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))

    @classmethod
    def shift_coin(cls, coins, label: str = "U") -> "WalkSpec":
        return cls((Coin(CoinSequence.coerce(coins)), FullShift()), label)

    @classmethod
    def split_step(cls, coins_1, coins_2, label: str = "W") -> "WalkSpec":
        """W = S_+ C_1 S_- C_2."""
        return cls(
            (
                Coin(CoinSequence.coerce(coins_2)),
                ShiftMinus(),
                Coin(CoinSequence.coerce(coins_1)),
                ShiftPlus(),
            ),
            label,
        )

    @classmethod
    def electric_shift_coin(cls, coins, field: RationalField) -> "WalkSpec":
        """U_Phi = F_Phi U with the plain field."""
        plain = field.with_variant("plain")
        base = cls.shift_coin(coins)
        return cls(base.layers + (Field(plain),), f"U[{plain.label}]")

    @classmethod
    def electric_split_step(cls, coins, field: RationalField) -> "WalkSpec":
        """W_Phi = F~_Phi W with C_1 = C_2 = coins."""
        tilde = field.with_variant("tilde")
        base = cls.split_step(coins, coins)
        return cls(base.layers + (Field(tilde),), f"W[{tilde.label}]")

    @classmethod
    def electric(cls, kind: str, coins, field: RationalField) -> "WalkSpec":
        if kind == "U":
            return cls.electric_shift_coin(coins, field)
        if kind == "W":
            return cls.electric_split_step(coins, field)
        raise EwalkError(f"walk kind must be U or W, got {kind!r}")

    def then(self, other: "WalkSpec") -> "WalkSpec":
        """self first, then other."""
        return WalkSpec(self.layers + other.layers, f"{other.label}*{self.label}")

    def power(self, k: int) -> "WalkSpec":
        if k < 1:
            raise EwalkError(f"walk power must be >= 1, got {k}")
        return WalkSpec(self.layers * k, f"{self.label}^{k}")

    def with_phase(self, phase: complex) -> "WalkSpec":
        return WalkSpec(self.layers + (GlobalPhase(phase),), self.label)

    @property
    def fields(self) -> List[RationalField]:
        return [layer.field for layer in self.layers if isinstance(layer, Field)]

    @property
    def has_field(self) -> bool:
        return bool(self.fields)

    @property
    def shift_count(self) -> Tuple[int, int]:
        """Cells the window can grow per step on the (left, right) side."""
        left = sum(isinstance(l, (ShiftMinus, FullShift)) for l in self.layers)
        right = sum(isinstance(l, (ShiftPlus, FullShift)) for l in self.layers)
        return left, right

    def split_step_coins(self) -> Optional[Tuple[CoinSequence, CoinSequence]]:
        """(C_1, C_2) when the spec starts with a bare split-step block."""
        if len(self.layers) < 4:
            return None
        c2, sm, c1, sp = self.layers[:4]
        if (
            isinstance(c2, Coin)
            and isinstance(sm, ShiftMinus)
            and isinstance(c1, Coin)
            and isinstance(sp, ShiftPlus)
        ):
            return c1.coins, c2.coins
        return None
