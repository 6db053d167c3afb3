"""
Generalized extended CMV matrices and their split-step walk counterparts.

Scalar sites 0 .. 2N-1 of a ring are stored as N blocks of two, so the flat
index of a BandedUnitary equals the scalar site. L carries Theta(alpha_{2n},
rho_{2n}) on {2n, 2n+1}; M carries Theta(alpha_{2n+1}, rho_{2n+1}) on
{2n+1, 2n+2}, the last block wrapping to {2N-1, 0}. E = L M.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from ewalk.banded import BandedUnitary, RingWindow, build_matrix
from ewalk.errors import EwalkError, IncompatibleRing, NotNormalized, NotRepresentable
from ewalk.models import Coin, CoinSequence, FullShift, SU2Coin, UnitaryCoin, WalkSpec, _to_unitary

logger = logging.getLogger(__name__)

PAIR_TOL = 1e-12
CMV_TOL = 1e-13


@dataclass(frozen=True)
class VerblunskyPair:
    """(alpha, rho) with |alpha|^2 + |rho|^2 = 1."""

    alpha: complex
    rho: complex

    def __post_init__(self):
        alpha, rho = complex(self.alpha), complex(self.rho)
        norm = abs(alpha) ** 2 + abs(rho) ** 2
        if abs(norm - 1.0) > PAIR_TOL:
            raise NotNormalized(f"|alpha|^2 + |rho|^2 = {norm!r}, expected 1")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "rho", rho)

    @classmethod
    def normalized(cls, alpha: complex, rho: complex) -> "VerblunskyPair":
        norm = np.hypot(abs(alpha), abs(rho))
        if norm == 0.0:
            raise NotNormalized("(alpha, rho) = (0, 0) has no normalization")
        return cls(alpha / norm, rho / norm)


def theta_matrix(pair: VerblunskyPair) -> NDArray[np.complex128]:
    """Theta(alpha, rho) = [[conj(alpha), rho], [conj(rho), -alpha]], det -1."""
    a, r = pair.alpha, pair.rho
    return np.array([[a.conjugate(), r], [r.conjugate(), -a]], dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class VerblunskySequence:
    """
    Pair rule over scalar sites, shaped like CoinSequence.

    kind is "constant", "periodic" or "explicit"; explicit rules map sites to
    pairs and fall back to a default.
    """

    kind: str
    pairs: Tuple[VerblunskyPair, ...]
    overrides: Mapping[int, VerblunskyPair] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("constant", "periodic", "explicit"):
            raise EwalkError(f"unknown pair rule: {self.kind}")
        if not self.pairs:
            raise EwalkError("pair rule needs at least one pair")

    @classmethod
    def constant(cls, pair: VerblunskyPair) -> "VerblunskySequence":
        return cls("constant", (pair,))

    @classmethod
    def periodic(cls, pairs: Sequence[VerblunskyPair]) -> "VerblunskySequence":
        return cls("periodic", tuple(pairs))

    @classmethod
    def explicit(cls, mapping: Mapping[int, VerblunskyPair], default: VerblunskyPair) -> "VerblunskySequence":
        return cls("explicit", (default,), {int(k): p for k, p in mapping.items()})

    @classmethod
    def coerce(cls, pairs) -> "VerblunskySequence":
        if isinstance(pairs, VerblunskySequence):
            return pairs
        if isinstance(pairs, VerblunskyPair):
            return cls.constant(pairs)
        return cls.periodic(list(pairs))

    def at(self, site: int) -> VerblunskyPair:
        if self.kind == "constant":
            return self.pairs[0]
        if self.kind == "periodic":
            return self.pairs[site % len(self.pairs)]
        return self.overrides.get(site, self.pairs[0])

    def periodized(self, sites: int) -> "VerblunskySequence":
        """Periodic rule repeating sites 0 .. sites-1."""
        if self.kind == "constant":
            return self
        return VerblunskySequence.periodic([self.at(k) for k in range(sites)])

    def thetas(self, sites: Sequence[int]) -> NDArray[np.complex128]:
        return np.stack([theta_matrix(self.at(int(k))) for k in sites])


def random_pairs(sites: int, rng: np.random.Generator) -> VerblunskySequence:
    """Periodic rule with independent uniformly distributed S^3 pairs."""
    raw = rng.normal(size=(sites, 4))
    raw /= np.linalg.norm(raw, axis=1, keepdims=True)
    return VerblunskySequence.periodic(
        [VerblunskyPair(complex(x[0], x[1]), complex(x[2], x[3])) for x in raw]
    )


def _check_sites(sites: int):
    if sites < 2 or sites % 2:
        raise IncompatibleRing(f"CMV ring needs an even number of scalar sites, got {sites}")


def build_LM(pairs, sites: int) -> Tuple[BandedUnitary, BandedUnitary]:
    """
    L and M on a ring of scalar sites.

    Args:
        pairs: VerblunskySequence (or a single pair)
        sites: Even number of scalar sites 2N

    Returns:
        (L, M) as banded operators on N two-site blocks

    Raises:
        IncompatibleRing: If sites is odd
    """
    _check_sites(sites)
    pairs = VerblunskySequence.coerce(pairs)
    cells = sites // 2
    window = RingWindow(cells)
    even = pairs.thetas(range(0, sites, 2))
    odd = pairs.thetas(range(1, sites, 2))

    lower = np.zeros((cells, 2, 1, 2), dtype=np.complex128)
    lower[:, :, 0, :] = even

    upper = np.zeros((cells, 2, 3, 2), dtype=np.complex128)
    # block 2n+1 on {2n+1, 2n+2}: rows of block n (second site) and n+1 (first site)
    upper[:, 1, 1, 1] = odd[:, 0, 0]
    upper[:, 1, 2, 0] = odd[:, 0, 1]
    upper[:, 0, 0, 1] = np.roll(odd[:, 1, 0], 1)
    upper[:, 0, 1, 0] = np.roll(odd[:, 1, 1], 1)
    return BandedUnitary(window, 0, lower), BandedUnitary(window, 1, upper)


@dataclass(frozen=True, eq=False)
class GECMVOperator:
    """E = L M for a pair rule on a ring of 2N scalar sites."""

    pairs: VerblunskySequence
    sites: int

    def __post_init__(self):
        _check_sites(self.sites)
        object.__setattr__(self, "pairs", VerblunskySequence.coerce(self.pairs))

    @property
    def factors(self) -> Tuple[BandedUnitary, BandedUnitary]:
        return build_LM(self.pairs, self.sites)

    @property
    def matrix(self) -> BandedUnitary:
        lower, upper = self.factors
        return lower.compose(upper)

    def to_dense(self) -> NDArray[np.complex128]:
        return self.matrix.to_dense()


def stencil_matrix(pairs, sites: int) -> NDArray[np.complex128]:
    """
    E written entry by entry from its five-diagonal stencil.

    Row 2k:   [2k-1] conj(a_2k) conj(r_2k-1)   [2k] -conj(a_2k) a_2k-1
              [2k+1] r_2k conj(a_2k+1)          [2k+2] r_2k r_2k+1
    Row 2k+1: [2k-1] conj(r_2k) conj(r_2k-1)   [2k] -conj(r_2k) a_2k-1
              [2k+1] -a_2k conj(a_2k+1)         [2k+2] -a_2k r_2k+1
    """
    _check_sites(sites)
    pairs = VerblunskySequence.coerce(pairs)
    dense = np.zeros((sites, sites), dtype=np.complex128)
    for k in range(sites // 2):
        even, odd = 2 * k, 2 * k + 1
        a0, r0 = pairs.at(even).alpha, pairs.at(even).rho
        am, rm = pairs.at((even - 1) % sites).alpha, pairs.at((even - 1) % sites).rho
        ap, rp = pairs.at(odd).alpha, pairs.at(odd).rho
        left, right = (even - 1) % sites, (even + 2) % sites
        entries = (
            (even, left, a0.conjugate() * rm.conjugate()),
            (even, even, -a0.conjugate() * am),
            (even, odd, r0 * ap.conjugate()),
            (even, right, r0 * rp),
            (odd, left, r0.conjugate() * rm.conjugate()),
            (odd, even, -r0.conjugate() * am),
            (odd, odd, -a0 * ap.conjugate()),
            (odd, right, -a0 * rp),
        )
        for row, col, value in entries:
            dense[row, col] += value
    return dense


def base_identification(sites: int) -> NDArray[np.int64]:
    """
    Flat walk index of every scalar site: delta_{2n-1} -> delta_n^+, delta_{2n} -> delta_n^-.

    On a ring of 2N sites this is s -> (s + 1) mod 2N.
    """
    _check_sites(sites)
    return (np.arange(sites) + 1) % sites


def identify(matrix: NDArray[np.complex128]) -> NDArray[np.complex128]:
    """Carry a scalar-site matrix into the walk basis."""
    index = base_identification(matrix.shape[0])
    out = np.empty_like(matrix)
    out[np.ix_(index, index)] = matrix
    return out


def coin_from_pair(pair: VerblunskyPair) -> SU2Coin:
    """sigma_1 Theta(alpha, rho) = [[conj(rho), -alpha], [conj(alpha), rho]]."""
    return SU2Coin(pair.rho.conjugate(), -pair.alpha)


def pair_from_coin(coin) -> VerblunskyPair:
    """
    Solve sigma_1 Theta(alpha, rho) = C.

    Raises:
        NotRepresentable: If C is not of the form [[a, b], [-conj(b), conj(a)]]
    """
    u = _to_unitary(coin)
    if abs(u.d - u.a.conjugate()) > PAIR_TOL or abs(u.c + u.b.conjugate()) > PAIR_TOL:
        raise NotRepresentable(f"coin {u.matrix.tolist()} is not sigma_1 Theta(alpha, rho)")
    return VerblunskyPair.normalized(-u.b, u.a.conjugate())


def cmv_to_walk(pairs, sites: Optional[int] = None) -> WalkSpec:
    """
    Split-step walk with C_1(n) = sigma_1 Theta(pair 2n), C_2(n) = sigma_1 Theta(pair 2n-1).

    Args:
        pairs: Pair rule over scalar sites
        sites: Ring size in scalar sites; the rule is periodized to it first

    Returns:
        The split-step WalkSpec
    """
    pairs = VerblunskySequence.coerce(pairs)
    if pairs.kind == "constant":
        coin = coin_from_pair(pairs.pairs[0])
        return WalkSpec.split_step(coin, coin, label="W[cmv]")
    if sites is None:
        if pairs.kind != "periodic":
            raise EwalkError("explicit pair rules need a ring size")
        sites = len(pairs.pairs) if len(pairs.pairs) % 2 == 0 else 2 * len(pairs.pairs)
    _check_sites(sites)
    ring = pairs.periodized(sites)
    cells = sites // 2
    first = CoinSequence.periodic([coin_from_pair(ring.at(2 * n)) for n in range(cells)])
    second = CoinSequence.periodic([coin_from_pair(ring.at(2 * n - 1)) for n in range(cells)])
    return WalkSpec.split_step(first, second, label="W[cmv]")


def walk_to_cmv(coin) -> Dict[str, VerblunskySequence]:
    """
    Pair rules of U = S C and W = S_+ C S_- C.

    Returns:
        {"U": periodic [(0, 1), (alpha, rho)], "W": constant (alpha, rho)}

    Raises:
        NotRepresentable: If C is not sigma_1 Theta(alpha, rho)
    """
    pair = pair_from_coin(coin)
    return {
        "U": VerblunskySequence.periodic([VerblunskyPair(0, 1), pair]),
        "W": VerblunskySequence.constant(pair),
    }


def walk_spec_to_cmv(spec: WalkSpec) -> VerblunskySequence:
    """
    Pair rule of a shift-coin or split-step spec with constant or periodic coins.

    Raises:
        NotRepresentable: For electric walks or coins outside sigma_1 Theta
    """
    if spec.has_field:
        raise NotRepresentable("electric walks do not correspond to GECMV matrices")
    block = spec.split_step_coins()
    if block is not None and len(spec.layers) == 4:
        first, second = block
    elif len(spec.layers) == 2 and isinstance(spec.layers[0], Coin) and isinstance(spec.layers[1], FullShift):
        first, second = CoinSequence.constant(UnitaryCoin.identity()), spec.layers[0].coins
    else:
        raise NotRepresentable(f"{spec.label} is neither a shift-coin nor a split-step walk")
    if "explicit" in (first.kind, second.kind):
        raise NotRepresentable("explicit coin rules must be sampled onto a ring first")
    if first.kind == second.kind == "constant":
        p1, p2 = pair_from_coin(first.coins[0]), pair_from_coin(second.coins[0])
        if p1 == p2:
            return VerblunskySequence.constant(p1)
        return VerblunskySequence.periodic([p1, p2])
    period = np.lcm(first.period, second.period)
    pairs = []
    for n in range(period):
        pairs.append(pair_from_coin(first.at(n)))
        pairs.append(pair_from_coin(second.at(n + 1)))
    return VerblunskySequence.periodic(pairs)


def cmv_report(pairs, sites: int) -> dict:
    """Stencil, correspondence, boxed-entry, unitarity and round-trip defects."""
    operator = GECMVOperator(VerblunskySequence.coerce(pairs), sites)
    lower, upper = operator.factors
    dense = lower.compose(upper).to_dense()
    walk = cmv_to_walk(operator.pairs, sites)
    walk_dense = build_matrix(walk, RingWindow(sites // 2)).to_dense()
    recovered = walk_spec_to_cmv(walk)
    round_trip = max(
        abs(recovered.at(k).alpha - operator.pairs.at(k).alpha) + abs(recovered.at(k).rho - operator.pairs.at(k).rho)
        for k in range(sites)
    )
    p0, pm = operator.pairs.at(0), operator.pairs.at(sites - 1)
    report = {
        "sites": sites,
        "stencil_defect": float(np.max(np.abs(dense - stencil_matrix(operator.pairs, sites)))),
        "correspondence_defect": float(np.max(np.abs(identify(dense) - walk_dense))),
        "boxed_entry_defect": float(abs(dense[0, 0] + p0.alpha.conjugate() * pm.alpha)),
        "unitarity_defect": max(lower.unitarity_defect(), upper.unitarity_defect()),
        "round_trip_defect": float(round_trip),
        "tolerance": CMV_TOL,
    }
    logger.debug(f"cmv report on {sites} sites: {report}")
    return report
