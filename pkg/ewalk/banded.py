"""
Banded matrices of walk operators on finite windows.

A BandedUnitary stores, for every row cell n, the 2x2 blocks coupling n to
the cells n-w .. n+w. On a ring the column cell is taken mod N and entries
crossing the seam carry the twist phase; on an open window couplings that
leave the window are dropped.
"""

import logging
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from numpy.typing import NDArray

from ewalk.errors import EwalkError, IncompatibleRing
from ewalk.models import (
    Coin,
    Field,
    FullShift,
    GlobalPhase,
    ShiftMinus,
    ShiftPlus,
    WalkSpec,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RingWindow:
    """N cells with periodic boundary and seam twist exp(-i*twist) for S_+."""

    cells: int
    twist: float = 0.0

    def __post_init__(self):
        if self.cells < 1:
            raise IncompatibleRing(f"ring needs at least one cell, got {self.cells}")

    @property
    def size(self) -> int:
        return self.cells

    def cell_indices(self) -> NDArray[np.int64]:
        return np.arange(self.cells, dtype=np.int64)


@dataclass(frozen=True)
class OpenWindow:
    offset: int
    length: int

    def __post_init__(self):
        if self.length < 1:
            raise EwalkError(f"open window needs a positive length, got {self.length}")

    @property
    def size(self) -> int:
        return self.length

    def cell_indices(self) -> NDArray[np.int64]:
        return np.arange(self.offset, self.offset + self.length, dtype=np.int64)


Window = Union[RingWindow, OpenWindow]


@dataclass(frozen=True, eq=False)
class BandedUnitary:
    """
    Banded operator with bands[n, s, d + w, s'] = <delta_n^s, A delta_{n+d}^{s'}>.

    Args:
        window: Ring or open window the operator acts on
        bandwidth: w, the largest cell distance coupled
        bands: Complex array of shape (N, 2, 2w + 1, 2)
    """

    window: Window
    bandwidth: int
    bands: NDArray[np.complex128]

    @property
    def is_ring(self) -> bool:
        return isinstance(self.window, RingWindow)

    @property
    def dim(self) -> int:
        return 2 * self.window.size

    def _columns(self, d: int):
        rows = np.arange(self.window.size)
        cols = rows + d
        if self.is_ring:
            return np.mod(cols, self.window.size), np.ones(rows.size, dtype=bool)
        valid = (cols >= 0) & (cols < self.window.size)
        return np.clip(cols, 0, self.window.size - 1), valid

    def compose(self, other: "BandedUnitary") -> "BandedUnitary":
        """Operator product self @ other (other acts first)."""
        if self.window != other.window:
            raise EwalkError("cannot compose operators on different windows")
        wa, wb = self.bandwidth, other.bandwidth
        size = self.window.size
        out = np.zeros((size, 2, 2 * (wa + wb) + 1, 2), dtype=np.complex128)
        for d1 in range(-wa, wa + 1):
            cols, valid = self._columns(d1)
            contrib = np.einsum("nij,njdk->nidk", self.bands[:, :, d1 + wa, :], other.bands[cols])
            contrib[~valid] = 0.0
            out[:, :, d1 + wa : d1 + wa + 2 * wb + 1, :] += contrib
        return BandedUnitary(self.window, wa + wb, out)

    def to_dense(self) -> NDArray[np.complex128]:
        dense = np.zeros((self.dim, self.dim), dtype=np.complex128)
        rows = np.arange(self.window.size)
        w = self.bandwidth
        for d in range(-w, w + 1):
            cols, valid = self._columns(d)
            for s in (0, 1):
                for t in (0, 1):
                    np.add.at(
                        dense,
                        (2 * rows[valid] + s, 2 * cols[valid] + t),
                        self.bands[valid, s, d + w, t],
                    )
        return dense

    def matvec(self, vector: NDArray[np.complex128]) -> NDArray[np.complex128]:
        v = np.asarray(vector, dtype=np.complex128).reshape(-1, 2)
        out = np.zeros_like(v)
        w = self.bandwidth
        for d in range(-w, w + 1):
            cols, valid = self._columns(d)
            contrib = np.einsum("nij,nj->ni", self.bands[:, :, d + w, :], v[cols])
            contrib[~valid] = 0.0
            out += contrib
        return out.reshape(-1)

    def eigenvalues(self) -> NDArray[np.complex128]:
        return np.linalg.eigvals(self.to_dense())

    def unitarity_defect(self) -> float:
        dense = self.to_dense()
        return float(np.max(np.abs(dense.conj().T @ dense - np.eye(self.dim))))


def _diagonal(window: Window, blocks: NDArray[np.complex128]) -> BandedUnitary:
    return BandedUnitary(window, 0, blocks.reshape(window.size, 2, 1, 2).astype(np.complex128))


def identity_matrix(window: Window) -> BandedUnitary:
    blocks = np.broadcast_to(np.eye(2, dtype=np.complex128), (window.size, 2, 2))
    return _diagonal(window, np.array(blocks))


def _shift(window: Window, components: Tuple[int, ...]) -> BandedUnitary:
    """S_+ (components (0,)), S_- ((1,)) or S = S_+ S_- ((0, 1)) as a bandwidth-1 operator."""
    size = window.size
    twist = getattr(window, "twist", 0.0)
    bands = np.zeros((size, 2, 3, 2), dtype=np.complex128)
    # out+(n) = in+(n-1), out-(n) = in-(n+1)
    moves = ((0, 0, 0, np.exp(-1j * twist)), (1, 2, size - 1, np.exp(1j * twist)))
    for component, offset, seam_row, seam_phase in moves:
        if component not in components:
            bands[:, component, 1, component] = 1.0
            continue
        bands[:, component, offset, component] = 1.0
        bands[seam_row, component, offset, component] = seam_phase if isinstance(window, RingWindow) else 0.0
    return BandedUnitary(window, 1, bands)


def layer_matrix(layer, window: Window) -> BandedUnitary:
    cells = window.cell_indices()
    if isinstance(layer, ShiftPlus):
        return _shift(window, (0,))
    if isinstance(layer, ShiftMinus):
        return _shift(window, (1,))
    if isinstance(layer, FullShift):
        return _shift(window, (0, 1))
    if isinstance(layer, Coin):
        return _diagonal(window, np.array(layer.coins.matrices(cells)))
    if isinstance(layer, Field):
        phases = layer.field.cell_phases(cells)
        blocks = np.zeros((window.size, 2, 2), dtype=np.complex128)
        blocks[:, 0, 0] = phases[:, 0]
        blocks[:, 1, 1] = phases[:, 1]
        return _diagonal(window, blocks)
    if isinstance(layer, GlobalPhase):
        blocks = np.broadcast_to(layer.phase * np.eye(2, dtype=np.complex128), (window.size, 2, 2))
        return _diagonal(window, np.array(blocks))
    raise TypeError(f"unknown layer: {layer!r}")


def check_ring(spec: WalkSpec, window: Window):
    if not isinstance(window, RingWindow):
        return
    for field in spec.fields:
        if window.cells % field.den:
            raise IncompatibleRing(
                f"ring of {window.cells} cells is not a multiple of the field period {field.den}"
            )


def build_matrix(spec: WalkSpec, window: Window) -> BandedUnitary:
    """
    Matrix of one walk step on a ring or an open window.

    Args:
        spec: Walk specification
        window: RingWindow or OpenWindow

    Returns:
        The banded operator layers[-1] ... layers[0]

    Raises:
        IncompatibleRing: If a ring size is not a multiple of a field period
    """
    check_ring(spec, window)
    result = identity_matrix(window)
    for layer in spec.layers:
        result = layer_matrix(layer, window).compose(result)
    logger.debug(f"built {spec.label} on {window}: bandwidth {result.bandwidth}")
    return result
