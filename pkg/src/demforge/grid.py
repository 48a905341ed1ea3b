"""Uniform cell grid, bitonic sort by cell and cell-order reordering."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .contacts import remap_ids

SENTINEL_KEY = np.iinfo(np.int64).max


@dataclass(frozen=True)
class UniformGrid:
    origin: tuple
    cell_size: float
    dims: tuple

    def __post_init__(self):
        if not self.cell_size > 0.0:
            raise ValueError("cell size must be positive")
        if min(self.dims) < 1:
            raise ValueError("grid needs at least one cell per axis")

    @property
    def cell_count(self):
        nx, ny, nz = self.dims
        return nx * ny * nz

    @classmethod
    def covering(cls, lo, hi, cell_size):
        """Smallest grid of ``cell_size`` cells that covers the box."""
        lo = np.asarray(lo, float)
        ext = np.asarray(hi, float) - lo
        dims = tuple(max(1, math.ceil(e / cell_size)) for e in ext)
        return cls(tuple(lo), float(cell_size), dims)

    def coords(self, cell):
        nx, ny, _ = self.dims
        return cell % nx, (cell // nx) % ny, cell // (nx * ny)


def default_cell_size(r_max):
    return 2.0 * r_max * (1.0 + 1e-6)


@dataclass
class SortedOrder:
    """Cell keys and source particle per sorted slot, plus cell ranges."""

    keys: np.ndarray
    perm: np.ndarray
    cell_start: np.ndarray = None
    cell_end: np.ndarray = None


# ---------------------------------------------------------------------------
# hashing
# ---------------------------------------------------------------------------


@njit(cache=True)
def _cell_of(x, y, z, ox, oy, oz, h, nx, ny, nz):
    cx = int(math.floor((x - ox) / h))
    cy = int(math.floor((y - oy) / h))
    cz = int(math.floor((z - oz) / h))
    clamped = False
    if cx < 0:
        cx, clamped = 0, True
    elif cx >= nx:
        cx, clamped = nx - 1, True
    if cy < 0:
        cy, clamped = 0, True
    elif cy >= ny:
        cy, clamped = ny - 1, True
    if cz < 0:
        cz, clamped = 0, True
    elif cz >= nz:
        cz, clamped = nz - 1, True
    return cx + cy * nx + cz * nx * ny, clamped


@njit(cache=True, parallel=True)
def _hash_all(pos, ox, oy, oz, h, nx, ny, nz, keys, clamped):
    for i in prange(pos.shape[0]):
        keys[i], clamped[i] = _cell_of(pos[i, 0], pos[i, 1], pos[i, 2], ox, oy, oz, h, nx, ny, nz)


def calc_hash(position, grid):
    """Linear cell index of one position; returns ``(index, clamped)``."""
    ox, oy, oz = grid.origin
    nx, ny, nz = grid.dims
    p = np.asarray(position, float)
    c, clamped = _cell_of(p[0], p[1], p[2], ox, oy, oz, grid.cell_size, nx, ny, nz)
    return int(c), bool(clamped)


def calc_hash_all(pos, grid):
    """Cell key per particle and the number of clamped (out-of-box) particles."""
    n = len(pos)
    keys = np.empty(n, dtype=np.int64)
    clamped = np.empty(n, dtype=np.bool_)
    ox, oy, oz = grid.origin
    nx, ny, nz = grid.dims
    _hash_all(pos, ox, oy, oz, grid.cell_size, nx, ny, nz, keys, clamped)
    return keys, int(np.count_nonzero(clamped))


# ---------------------------------------------------------------------------
# bitonic sort
# ---------------------------------------------------------------------------


@njit(cache=True, parallel=True)
def _bitonic_pass(keys, vals, k, j):
    n = keys.shape[0]
    for i in prange(n):
        l = i ^ j
        if l > i:
            a = keys[i]
            b = keys[l]
            if (i & k) == 0:
                swap = a > b
            else:
                swap = a < b
            if swap:
                keys[i] = b
                keys[l] = a
                v = vals[i]
                vals[i] = vals[l]
                vals[l] = v


def _bitonic_network(keys, vals):
    n = keys.shape[0]
    passes = 0
    k = 2
    while k <= n:
        j = k // 2
        while j > 0:
            _bitonic_pass(keys, vals, k, j)
            passes += 1
            j //= 2
        k *= 2
    return passes


def bitonic_sort(keys, values):
    """Sort ``(key, value)`` pairs by key with a full bitonic network.

    The input is padded to a power of two with ``SENTINEL_KEY`` and the
    padding stripped afterwards.  Equal keys are never exchanged, so the
    output order of ties is fixed by the network alone.

    Returns
    -------
    sorted_keys, sorted_values : ndarray
    """
    keys = np.asarray(keys, dtype=np.int64)
    values = np.asarray(values, dtype=np.int64)
    if keys.shape != values.shape:
        raise ValueError("keys and values differ in length")
    n = len(keys)
    if n == 0:
        return keys.copy(), values.copy()
    size = 1 << (n - 1).bit_length()
    k = np.full(size, SENTINEL_KEY, dtype=np.int64)
    v = np.full(size, -1, dtype=np.int64)
    k[:n] = keys
    v[:n] = values
    _bitonic_network(k, v)
    return k[:n].copy(), v[:n].copy()


def bitonic_pass_count(n):
    """Compare-exchange passes the network runs for ``n`` keys."""
    if n <= 1:
        return 0
    stages = (n - 1).bit_length()
    return stages * (stages + 1) // 2


# ---------------------------------------------------------------------------
# cell ranges and reorder
# ---------------------------------------------------------------------------


@njit(cache=True)
def _cell_bounds(sorted_keys, cell_start, cell_end):
    n = sorted_keys.shape[0]
    for i in range(n):
        c = sorted_keys[i]
        if i == 0 or c != sorted_keys[i - 1]:
            cell_start[c] = i
        if i == n - 1 or c != sorted_keys[i + 1]:
            cell_end[c] = i + 1


def find_cell_bounds(sorted_keys, cell_count):
    start = np.zeros(cell_count, dtype=np.int64)
    end = np.zeros(cell_count, dtype=np.int64)
    _cell_bounds(np.asarray(sorted_keys, dtype=np.int64), start, end)
    return start, end


def find_cell_bounds_and_reorder(order, particles, table, cell_count):
    """Fill cell ranges and permute particles and contact history into cell order."""
    order.cell_start, order.cell_end = find_cell_bounds(order.keys, cell_count)
    return order, particles.permuted(order.perm), remap_ids(table, order.perm)


def sort_by_cell(pos, grid):
    keys, clamps = calc_hash_all(pos, grid)
    sk, perm = bitonic_sort(keys, np.arange(len(keys), dtype=np.int64))
    return SortedOrder(sk, perm), clamps


# ---------------------------------------------------------------------------
# neighborhood
# ---------------------------------------------------------------------------


@njit(cache=True)
def _neighbor_range(c, nx, ny, nz):
    cx = c % nx
    cy = (c // nx) % ny
    cz = c // (nx * ny)
    return (
        max(cx - 1, 0), min(cx + 1, nx - 1),
        max(cy - 1, 0), min(cy + 1, ny - 1),
        max(cz - 1, 0), min(cz + 1, nz - 1),
    )


def neighbor_cells(cell, grid):
    """Clipped 3x3x3 block around ``cell`` (z outermost, x innermost)."""
    nx, ny, nz = grid.dims
    if not 0 <= cell < grid.cell_count:
        raise IndexError(f"cell {cell} outside grid of {grid.cell_count} cells")
    x0, x1, y0, y1, z0, z1 = _neighbor_range(cell, nx, ny, nz)
    return [
        x + y * nx + z * nx * ny
        for z in range(z0, z1 + 1)
        for y in range(y0, y1 + 1)
        for x in range(x0, x1 + 1)
    ]
