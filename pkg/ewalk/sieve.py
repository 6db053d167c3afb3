"""
Even/odd decomposition of the squared shift-coin walk.

U^2 never couples cells of opposite parity. Relabelling even cells 2n -> n
and odd cells 2n+1 -> n turns U^2 into a direct sum of two split-step walks,
and with a field the same holds for U_{Phi/2}^2 up to the phases e^{-+i Phi/2}.
All checks are dense matrix comparisons on rings.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import block_diag
from scipy.stats import unitary_group

from ewalk.banded import RingWindow, build_matrix
from ewalk.errors import EwalkError, IncompatibleRing
from ewalk.models import (
    Coin,
    CoinSequence,
    Field,
    FullShift,
    GlobalPhase,
    RationalField,
    UnitaryCoin,
    WalkSpec,
    unit_phase,
)

logger = logging.getLogger(__name__)

SIEVE_TOL = 1e-13


@dataclass(frozen=True)
class ParityReindex:
    """
    Permutation between full-ring indices and (even block, odd block) indices.

    On a ring of N cells the even block holds cells 0, 2, ... (sub-index j for
    cell 2j) and comes first; the odd block holds cells 1, 3, ... (sub-index j
    for cell 2j+1) and starts at flat index N.
    """

    cells: int
    direction: str = "split"

    def __post_init__(self):
        if self.cells < 2 or self.cells % 2:
            raise IncompatibleRing(f"parity split needs an even ring, got {self.cells} cells")
        if self.direction not in ("split", "merge"):
            raise EwalkError(f"direction must be split or merge, got {self.direction!r}")

    def permutation(self) -> NDArray[np.int64]:
        """perm with out[perm[i]] = in[i]."""
        flat = np.arange(2 * self.cells)
        cell, spin = flat // 2, flat % 2
        split = np.where(cell % 2 == 0, 2 * (cell // 2) + spin, self.cells + 2 * (cell // 2) + spin)
        if self.direction == "split":
            return split
        return np.argsort(split)

    def inverse(self) -> "ParityReindex":
        return ParityReindex(self.cells, "merge" if self.direction == "split" else "split")

    def apply_vector(self, vector: NDArray[np.complex128]) -> NDArray[np.complex128]:
        vector = np.asarray(vector)
        out = np.empty_like(vector)
        out[self.permutation()] = vector
        return out

    def apply(self, matrix: NDArray[np.complex128]) -> NDArray[np.complex128]:
        """P A P^T."""
        perm = self.permutation()
        out = np.empty_like(matrix)
        out[np.ix_(perm, perm)] = matrix
        return out


def sieve_coins(coins) -> Tuple[Tuple[CoinSequence, CoinSequence], Tuple[CoinSequence, CoinSequence]]:
    """
    Coins of the two split-step walks inside U^2.

    Returns:
        ((C_1, C_2), (C~_1, C~_2)) with C_1(n) = C(2n+1), C_2(n) = C(2n),
        C~_1(n) = C(2n+2), C~_2(n) = C(2n+1)
    """
    coins = CoinSequence.coerce(coins)
    even = (coins.reindexed(2, 1), coins.reindexed(2, 0))
    odd = (coins.reindexed(2, 2), coins.reindexed(2, 1))
    return even, odd


def random_coin_sequence(cells: int, rng: np.random.Generator) -> CoinSequence:
    """Periodic rule of Haar-random U(2) coins with the given period."""
    return CoinSequence.periodic(
        [UnitaryCoin.from_matrix(unitary_group.rvs(2, random_state=rng)) for _ in range(cells)]
    )


def _on_ring(coins: CoinSequence, cells: int) -> CoinSequence:
    if coins.kind == "constant":
        return coins
    return coins.sample(range(cells))


def _max_defect(left: NDArray[np.complex128], right: NDArray[np.complex128]) -> float:
    return float(np.max(np.abs(left - right)))


def verify_sieving(coins, cells: int) -> float:
    """
    Max entrywise |P U^2 P^T - (W + W~)| on a ring.

    Args:
        coins: Coin rule of U = S C
        cells: Even ring size N

    Returns:
        The defect

    Raises:
        IncompatibleRing: If cells is odd
    """
    reindex = ParityReindex(cells)
    ring_coins = _on_ring(CoinSequence.coerce(coins), cells)
    squared = build_matrix(WalkSpec.shift_coin(ring_coins).power(2), RingWindow(cells)).to_dense()
    (c1, c2), (d1, d2) = sieve_coins(ring_coins)
    half = RingWindow(cells // 2)
    even = build_matrix(WalkSpec.split_step(c1, c2), half).to_dense()
    odd = build_matrix(WalkSpec.split_step(d1, d2), half).to_dense()
    defect = _max_defect(reindex.apply(squared), block_diag(even, odd))
    logger.debug(f"sieving defect on {cells} cells: {defect:.3e}")
    return defect


def default_ring(field: RationalField) -> int:
    """Smallest ring carrying both the half field and the parity split."""
    return math.lcm(2 * field.den, 4)


def electric_sieve_check(coin, field: RationalField, cells: Optional[int] = None) -> float:
    """
    Max entrywise |P U_{Phi/2}^2 P^T - (e^{-i Phi/2} F~_Phi W + e^{i Phi/2} F~_Phi W~)|.

    Args:
        coin: Constant coin of the walk
        field: Phi as a reduced fraction of 2 pi
        cells: Ring size, a multiple of 2m (default lcm(2m, 4))

    Returns:
        The defect

    Raises:
        IncompatibleRing: If the ring cannot carry the half field
    """
    cells = cells or default_ring(field)
    if cells % (2 * field.den) or cells % 2:
        raise IncompatibleRing(f"ring of {cells} cells is not a multiple of {2 * field.den}")
    reindex = ParityReindex(cells)
    coins = _on_ring(CoinSequence.coerce(coin), cells)
    half = field.with_variant("plain").halved()
    squared = build_matrix(WalkSpec.electric_shift_coin(coins, half).power(2), RingWindow(cells)).to_dense()

    tilde = field.with_variant("tilde")
    (c1, c2), (d1, d2) = sieve_coins(coins)
    half_turn = Fraction(field.num, 2 * field.den)
    sub = RingWindow(cells // 2)
    even = build_matrix(
        WalkSpec.split_step(c1, c2).then(WalkSpec((Field(tilde), GlobalPhase(unit_phase(-half_turn))))),
        sub,
    ).to_dense()
    odd = build_matrix(
        WalkSpec.split_step(d1, d2).then(WalkSpec((Field(tilde), GlobalPhase(unit_phase(half_turn))))),
        sub,
    ).to_dense()
    defect = _max_defect(reindex.apply(squared), block_diag(even, odd))
    logger.debug(f"electric sieving defect for {field.label} on {cells} cells: {defect:.3e}")
    return defect


def commutation_defect(coins, field: RationalField, cells: Optional[int] = None) -> float:
    """Max entrywise |U F_Phi - e^{-i Phi sigma_3} F_Phi U| on a ring."""
    cells = cells or field.den
    coins = _on_ring(CoinSequence.coerce(coins), cells)
    plain = field.with_variant("plain")
    rotation = UnitaryCoin(unit_phase(-plain.turns), 0, 0, unit_phase(plain.turns))
    window = RingWindow(cells)
    left = build_matrix(WalkSpec((Field(plain), Coin(coins), FullShift())), window).to_dense()
    right = build_matrix(
        WalkSpec((Coin(coins), FullShift(), Field(plain), Coin(CoinSequence.constant(rotation)))),
        window,
    ).to_dense()
    return _max_defect(left, right)


def half_field_sign(field: RationalField) -> int:
    """e^{i m Phi / 2} = (-1)^n in exact turns; also checks e^{-i m Phi / 2}."""
    turns = Fraction(field.den * field.num, 2 * field.den)
    up, down = unit_phase(turns), unit_phase(-turns)
    if up != down or up.imag != 0.0:
        raise EwalkError(f"e^(i m Phi/2) is not real for {field.label}")
    return int(up.real)


def parity_defect(coins, cells: int) -> float:
    """Largest |<delta_j, U^2 delta_k>| between cells j, k of opposite parity."""
    ParityReindex(cells)
    ring_coins = _on_ring(CoinSequence.coerce(coins), cells)
    squared = build_matrix(WalkSpec.shift_coin(ring_coins).power(2), RingWindow(cells)).to_dense()
    cell_of = np.arange(2 * cells) // 2
    mixed = (cell_of[:, None] - cell_of[None, :]) % 2 == 1
    return float(np.max(np.abs(squared[mixed]))) if mixed.any() else 0.0


def sieve_report(coins, cells: int, field: Optional[RationalField] = None) -> dict:
    """Defects behind the sieve-check command."""
    report = {
        "cells": cells,
        "sieving_defect": verify_sieving(coins, cells),
        "parity_defect": parity_defect(coins, cells),
        "tolerance": SIEVE_TOL,
    }
    if field is not None:
        report["field"] = field.label
        report["electric_defect"] = electric_sieve_check(coins, field, cells)
        report["half_field_sign"] = half_field_sign(field)
    return report
