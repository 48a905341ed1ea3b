"""Per-particle tangential-displacement history with mark/sweep lifetime.

Each particle owns a fixed row of ``K`` slots.  A slot holds a partner ID
(a particle index, or a wall ID from :mod:`demforge.walls`), the stored slip
vector and a ``touched`` flag.  Both bodies of a particle pair keep their
own slot, so a kernel thread only ever writes the row of its own particle.

Lifecycle per step: the sweep deletes slots that were not touched by the
previous force pass and clears the flags of the survivors; the force pass
then looks up (or creates) a slot for every contact it finds and marks it.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

from .errors import ContactCapacityError

EMPTY = -1
DEFAULT_CAPACITY = 16


@njit(cache=True)
def _find_slot(partner_tab, touched_tab, i, partner):
    """Slot of ``partner`` in row ``i`` (inserting it if absent), or -1 when full.

    Marks the slot touched; a fresh slot starts with zero slip, which the
    caller is responsible for writing.
    """
    free = -1
    for k in range(partner_tab.shape[1]):
        p = partner_tab[i, k]
        if p == partner:
            touched_tab[i, k] = True
            return k, False
        if p == EMPTY and free < 0:
            free = k
    if free >= 0:
        partner_tab[i, free] = partner
        touched_tab[i, free] = True
    return free, True


@njit(cache=True, parallel=True)
def _sweep(partner, disp, touched):
    n, cap = partner.shape
    for i in prange(n):
        for k in range(cap):
            if partner[i, k] == EMPTY:
                continue
            if touched[i, k]:
                touched[i, k] = False
            else:
                partner[i, k] = EMPTY
                disp[i, k, 0] = 0.0
                disp[i, k, 1] = 0.0
                disp[i, k, 2] = 0.0


@njit(cache=True, parallel=True)
def _remap(partner, inverse):
    n, cap = partner.shape
    for i in prange(n):
        for k in range(cap):
            p = partner[i, k]
            if p >= 0:
                partner[i, k] = inverse[p]


class ContactTable:
    """Fixed-capacity sparse store of per-pair slip vectors."""

    def __init__(self, n, capacity=DEFAULT_CAPACITY):
        if capacity < 1:
            raise ValueError("contact capacity must be >= 1")
        self.partner = np.full((n, capacity), EMPTY, dtype=np.int64)
        self.disp = np.zeros((n, capacity, 3))
        self.touched = np.zeros((n, capacity), dtype=np.bool_)

    @property
    def capacity(self):
        return self.partner.shape[1]

    def __len__(self):
        return self.partner.shape[0]

    def copy(self):
        t = ContactTable.__new__(ContactTable)
        t.partner = self.partner.copy()
        t.disp = self.disp.copy()
        t.touched = self.touched.copy()
        return t

    def live_count(self):
        return int(np.count_nonzero(self.partner != EMPTY))

    def pairs(self):
        """``{(owner, partner): slip}`` for every live slot."""
        out = {}
        for i, k in zip(*np.nonzero(self.partner != EMPTY)):
            out[(int(i), int(self.partner[i, k]))] = self.disp[i, k].copy()
        return out

    def equals(self, other):
        """Bitwise equality of all slot arrays."""
        return (
            np.array_equal(self.partner, other.partner)
            and np.array_equal(self.touched, other.touched)
            and self.disp.tobytes() == other.disp.tobytes()
        )


def lookup_or_insert(table, particle, partner):
    """Slot index for ``(particle, partner)``, created with zero slip if new.

    The returned slot is marked touched; read or write its slip through
    ``table.disp[particle, slot]``.
    """
    slot, fresh = _find_slot(table.partner, table.touched, particle, partner)
    if slot < 0:
        raise ContactCapacityError(particle, table.capacity)
    if fresh:
        table.disp[particle, slot] = 0.0
    return slot


def initialize_contact_ids(table):
    """Sweep: drop untouched slots, clear the flag on the rest."""
    _sweep(table.partner, table.disp, table.touched)
    return table


def remap_ids(table, perm):
    """Relabel the table after particles are permuted.

    ``perm[new] = old``: row ``new`` receives old row ``perm[new]`` and every
    particle partner ID ``old`` becomes ``inverse[old]``.  Wall IDs are kept.
    """
    perm = np.asarray(perm, dtype=np.int64)
    inverse = np.empty_like(perm)
    inverse[perm] = np.arange(len(perm), dtype=np.int64)
    out = ContactTable.__new__(ContactTable)
    out.partner = table.partner[perm]
    out.disp = table.disp[perm]
    out.touched = table.touched[perm]
    _remap(out.partner, inverse)
    return out
