"""Static wall primitives: finite rectangles and line segments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

# Wall partners live in their own ID space below every particle ID and the
# empty-slot marker (-1): wall w is stored as -2 - w.
def wall_id(index):
    return -2 - index


def wall_index(partner_id):
    return -2 - partner_id


@dataclass(frozen=True)
class Rectangle:
    corner: tuple
    edge_u: tuple
    edge_v: tuple
    material: int = 0

    def __post_init__(self):
        u = np.asarray(self.edge_u, float)
        v = np.asarray(self.edge_v, float)
        lu, lv = np.linalg.norm(u), np.linalg.norm(v)
        if lu == 0.0 or lv == 0.0:
            raise ConfigError("rectangle edge has zero length", key="wall.rect")
        if abs(u @ v) > 1e-9 * lu * lv:
            raise ConfigError("rectangle edges must be orthogonal", key="wall.rect")


@dataclass(frozen=True)
class Segment:
    a: tuple
    b: tuple
    material: int = 0

    def __post_init__(self):
        if np.linalg.norm(np.subtract(self.b, self.a)) == 0.0:
            raise ConfigError("line segment has zero length", key="wall.line")


def pack_rectangles(rects):
    """(R, 9) float array ``corner|edge_u|edge_v`` plus (R,) material ids."""
    geo = np.zeros((len(rects), 9))
    mats = np.zeros(len(rects), dtype=np.int64)
    for i, r in enumerate(rects):
        geo[i] = np.concatenate([r.corner, r.edge_u, r.edge_v])
        mats[i] = r.material
    return geo, mats


def pack_segments(segs):
    geo = np.zeros((len(segs), 6))
    mats = np.zeros(len(segs), dtype=np.int64)
    for i, s in enumerate(segs):
        geo[i] = np.concatenate([s.a, s.b])
        mats[i] = s.material
    return geo, mats


def box_walls(lo, hi, material=0, top=False):
    """Floor and four side rectangles of an axis-aligned box (optionally a lid)."""
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    ex, ey, ez = np.diag(hi - lo)
    walls = [
        Rectangle(tuple(lo), tuple(ex), tuple(ey), material),
        Rectangle(tuple(lo), tuple(ey), tuple(ez), material),
        Rectangle(tuple(lo + ex), tuple(ey), tuple(ez), material),
        Rectangle(tuple(lo), tuple(ex), tuple(ez), material),
        Rectangle(tuple(lo + ey), tuple(ex), tuple(ez), material),
    ]
    if top:
        walls.append(Rectangle(tuple(lo + ez), tuple(ex), tuple(ey), material))
    return walls
