"""Plate-coordinate geometry: the 5x5 cell grid, 17 aggregate zones, and pitch tensors.

Coordinates are in feet from the catcher's view, origin at the center of the
plate at ground level: ``x`` horizontal (positive toward the catcher's right),
``z`` height above ground.  The strike zone is split into a 3x3 block of equal
cells (zones 0..8, row-major from the top-left), surrounded by a peripheral
ring of 16 cells one band thick.  The ring aggregates into 8 ball zones: four
L-shaped corner zones of 3 cells each (10 upper-left, 12 upper-right, 13
lower-left, 15 lower-right) and four single-cell edge zones (9 top, 11 left,
14 right, 16 bottom).  Anything outside the 5x5 rectangle is FAR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

#: Canonical pitch-type codes, in tensor slice order.
PITCH_TYPES = ("FF", "FT", "FC", "SL", "CU", "CH")
PITCH_INDEX = {p: i for i, p in enumerate(PITCH_TYPES)}

#: Distinguished ZoneId for pitches outside the gridded region.  Ball zones
#: are 9..16 plus FAR; vectors over locations use index 17 for FAR.
FAR = 17

N_ZONES = 17
N_LOCATIONS = N_ZONES + 1  # 17 zones + FAR

# Cell -> zone table, rows indexed 0 (top) to 4 (bottom), cols 0 (left) to 4
# (right), catcher's view.
_CELL_ZONE = (
    (10, 10, 9, 12, 12),
    (10, 0, 1, 2, 12),
    (11, 3, 4, 5, 14),
    (13, 6, 7, 8, 15),
    (13, 13, 16, 15, 15),
)


class InvalidCoords(ValueError):
    """Pitch coordinates are NaN or infinite."""


class FarNotEncodable(ValueError):
    """FAR has no grid cells and cannot be one-hot encoded."""


class UnknownPitchType(ValueError):
    """Pitch code outside the canonical six types."""


def _check_pitch(pitch: str) -> int:
    try:
        return PITCH_INDEX[pitch]
    except KeyError:
        raise UnknownPitchType(f"unknown pitch type {pitch!r}") from None


@dataclass(frozen=True)
class ZoneGrid:
    """Physical measurements of the 5x5 grid.

    The strike zone spans ``[strike_x_min, strike_x_max] x [strike_z_min,
    strike_z_max]`` and is split into 3x3 equal cells; the peripheral ring is
    one ``band`` thick.  Cells are half-open: closed on their minimum edge.
    """

    strike_x_min: float = -0.83
    strike_x_max: float = 0.83
    strike_z_min: float = 1.5
    strike_z_max: float = 3.5
    band: float = 0.4
    # ascending x edges (6) and descending z edges (6); row r spans
    # z in [z_edges[r+1], z_edges[r]), col c spans x in [x_edges[c], x_edges[c+1]).
    x_edges: tuple = field(init=False)
    z_edges: tuple = field(init=False)

    def __post_init__(self):
        if not (self.strike_x_min < self.strike_x_max
                and self.strike_z_min < self.strike_z_max and self.band > 0):
            raise ValueError("degenerate grid measurements")
        wx = (self.strike_x_max - self.strike_x_min) / 3.0
        wz = (self.strike_z_max - self.strike_z_min) / 3.0
        xe = (self.strike_x_min - self.band, self.strike_x_min,
              self.strike_x_min + wx, self.strike_x_min + 2 * wx,
              self.strike_x_max, self.strike_x_max + self.band)
        ze = (self.strike_z_max + self.band, self.strike_z_max,
              self.strike_z_max - wz, self.strike_z_max - 2 * wz,
              self.strike_z_min, self.strike_z_min - self.band)
        object.__setattr__(self, "x_edges", xe)
        object.__setattr__(self, "z_edges", ze)

    def cell_bounds(self, row: int, col: int) -> tuple[float, float, float, float]:
        """(x_lo, x_hi, z_lo, z_hi) of the cell; half-open on the high edges."""
        return (self.x_edges[col], self.x_edges[col + 1],
                self.z_edges[row + 1], self.z_edges[row])

    def cell_center(self, row: int, col: int) -> tuple[float, float]:
        x0, x1, z0, z1 = self.cell_bounds(row, col)
        return (0.5 * (x0 + x1), 0.5 * (z0 + z1))


def default_grid() -> ZoneGrid:
    """The canonical grid: plate half-width 0.83 ft, zone height 1.5..3.5 ft,
    peripheral band 0.4 ft."""
    return ZoneGrid()


def cell_zone(row: int, col: int) -> int:
    return _CELL_ZONE[row][col]


def cells_of_zone(zone: int) -> tuple[tuple[int, int], ...]:
    """Grid cells (row, col) belonging to a zone, in row-major order."""
    if not 0 <= zone <= 16:
        raise ValueError(f"no cells for zone {zone}")
    return tuple((r, c) for r in range(5) for c in range(5)
                 if _CELL_ZONE[r][c] == zone)


def is_strike_zone(zone: int) -> bool:
    """True for the 9 inner zones; ball zones are 9..16 and FAR."""
    return 0 <= zone <= 8


def zone_centroid(grid: ZoneGrid, zone: int) -> tuple[float, float]:
    """Mean of the member-cell centers (for L-zones this may lie outside
    the zone; use a member-cell center when a representative point inside
    the zone is required)."""
    centers = [grid.cell_center(r, c) for r, c in cells_of_zone(zone)]
    return (sum(x for x, _ in centers) / len(centers),
            sum(z for _, z in centers) / len(centers))


def zone_of(grid: ZoneGrid, x: float, z: float) -> int:
    """Zone containing the point, or FAR outside the 5x5 rectangle.

    Boundary points belong to the cell on the lower-coordinate side (cells
    are closed on their minimum edge).
    """
    if not (math.isfinite(x) and math.isfinite(z)):
        raise InvalidCoords(f"non-finite coordinates ({x}, {z})")
    xe, ze = grid.x_edges, grid.z_edges
    if not (xe[0] <= x < xe[5]) or not (ze[5] <= z < ze[0]):
        return FAR
    col = 4
    for c in range(5):
        if x < xe[c + 1]:
            col = c
            break
    row = 0
    for r in range(5):
        if z >= ze[r + 1]:
            row = r
            break
    return _CELL_ZONE[row][col]


def zones_of(grid: ZoneGrid, x: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Vectorized :func:`zone_of`; non-finite entries raise InvalidCoords."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if not (np.isfinite(x).all() and np.isfinite(z).all()):
        raise InvalidCoords("non-finite coordinates in batch")
    xe = np.asarray(grid.x_edges)
    ze_asc = np.asarray(grid.z_edges[::-1])
    col = np.searchsorted(xe, x, side="right") - 1
    zi = np.searchsorted(ze_asc, z, side="right") - 1  # 0..4 from bottom
    out = np.full(x.shape, FAR, dtype=np.int64)
    ok = (col >= 0) & (col <= 4) & (zi >= 0) & (zi <= 4)
    table = np.asarray(_CELL_ZONE)
    row = 4 - zi[ok]
    out[ok] = table[row, col[ok]]
    return out


def build_pitch_tensor(grid: ZoneGrid, pitch: str, zone: int) -> np.ndarray:
    """One-hot 5x5x6 tensor for a pitch thrown to a zone.

    Single-cell zones yield one nonzero entry; the L-shaped corner zones
    {10, 12, 13, 15} yield three, all in the slice of ``pitch``.
    """
    if zone == FAR:
        raise FarNotEncodable("FAR pitches have no cell encoding")
    p = _check_pitch(pitch)
    t = np.zeros((5, 5, 6))
    for r, c in cells_of_zone(zone):
        t[r, c, p] = 1.0
    return t


def decode_pitch_tensor(tensor: np.ndarray) -> tuple[str, int]:
    """Inverse of :func:`build_pitch_tensor`; raises ValueError if the tensor
    is not a valid zone one-hot."""
    t = np.asarray(tensor)
    if t.shape != (5, 5, 6):
        raise ValueError(f"expected shape (5,5,6), got {t.shape}")
    nz = np.argwhere(t != 0)
    if nz.size == 0:
        raise ValueError("empty pitch tensor")
    slices = set(nz[:, 2].tolist())
    if len(slices) != 1:
        raise ValueError("entries span multiple pitch slices")
    pitch = PITCH_TYPES[slices.pop()]
    cells = tuple(sorted((int(r), int(c)) for r, c, _ in nz))
    for zone in range(17):
        if cells == tuple(sorted(cells_of_zone(zone))):
            return pitch, zone
    raise ValueError(f"cells {cells} match no zone")
