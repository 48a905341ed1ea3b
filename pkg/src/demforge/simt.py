"""Lockstep warp cost model for the Collide kernel.

Each particle is one lane.  A lane's trace is the ordered list of contact
candidates it examined, each flagged by whether the pair was in contact.
One candidate is one loop block: a cheap contact check, plus an expensive
force evaluation when the pair touches.

Baseline (force computed inline)::

    cycles = sum_j [c_check + c_force * any_lane_contacts_at(j)]

Every iteration in which one lane computes a force costs the whole warp the
force time.  Two-phase (contacts recorded first, forces afterwards)::

    phase1 = sum_j [c_check + c_store * any_lane_contacts_at(j)]
    phase2 = max_lane_contacts * (c_load + c_force)

Idle lanes of a partial warp cost nothing and do no useful work.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit, prange

BASELINE = "baseline"
TWO_PHASE = "two_phase"
VARIANTS = (BASELINE, TWO_PHASE)


@dataclass(frozen=True)
class WarpCostParams:
    warp_size: int = 32
    c_check: float = 1.0
    c_force: float = 20.0
    c_store: float = 1.0
    c_load: float = 1.0

    def __post_init__(self):
        if self.warp_size < 1:
            raise ValueError("warp size must be >= 1")
        if min(self.c_check, self.c_force, self.c_store, self.c_load) < 0:
            raise ValueError("warp costs must be non-negative")
        if not self.c_force > self.c_check:
            raise ValueError("force cost must exceed check cost")


@dataclass
class LaneTrace:
    """Candidates examined by one lane and whether each was a contact."""

    candidates: np.ndarray
    contacts: np.ndarray

    def __post_init__(self):
        self.contacts = np.asarray(self.contacts, dtype=np.bool_)
        if self.candidates is None:
            self.candidates = np.arange(len(self.contacts), dtype=np.int64)
        self.candidates = np.asarray(self.candidates, dtype=np.int64)

    @classmethod
    def from_flags(cls, flags):
        return cls(None, flags)

    @property
    def length(self):
        return len(self.contacts)

    @property
    def contact_count(self):
        return int(np.count_nonzero(self.contacts))


class TraceBuffer:
    """All lane traces of one Collide launch, stored CSR-style.

    Lane ``i`` owns events ``offsets[i]:offsets[i+1]``.
    """

    def __init__(self, offsets, candidates, contacts):
        self.offsets = offsets
        self.candidates = candidates
        self.contacts = contacts

    @classmethod
    def from_lanes(cls, lanes):
        lengths = [lane.length for lane in lanes]
        offsets = np.zeros(len(lanes) + 1, dtype=np.int64)
        np.cumsum(lengths, out=offsets[1:])
        if lanes:
            cand = np.concatenate([lane.candidates for lane in lanes]).astype(np.int64)
            flags = np.concatenate([lane.contacts for lane in lanes]).astype(np.bool_)
        else:
            cand = np.zeros(0, dtype=np.int64)
            flags = np.zeros(0, dtype=np.bool_)
        return cls(offsets, cand, flags)

    def __len__(self):
        return len(self.offsets) - 1

    def lane(self, i):
        a, b = self.offsets[i], self.offsets[i + 1]
        return LaneTrace(self.candidates[a:b], self.contacts[a:b])

    def lanes(self):
        return [self.lane(i) for i in range(len(self))]

    def equals(self, other):
        return (
            np.array_equal(self.offsets, other.offsets)
            and np.array_equal(self.candidates, other.candidates)
            and np.array_equal(self.contacts, other.contacts)
        )

    @property
    def lengths(self):
        return np.diff(self.offsets)

    @property
    def contact_counts(self):
        csum = np.concatenate([[0], np.cumsum(self.contacts, dtype=np.int64)])
        return csum[self.offsets[1:]] - csum[self.offsets[:-1]]


# ---------------------------------------------------------------------------
# per-warp reference functions
# ---------------------------------------------------------------------------


def group_warps(traces, warp_size):
    """Consecutive chunks of ``warp_size`` lanes; the last may be partial."""
    traces = list(traces)
    return [traces[i : i + warp_size] for i in range(0, len(traces), warp_size)]


def _contact_iterations(warp):
    lmax = max((lane.length for lane in warp), default=0)
    hit = np.zeros(lmax, dtype=np.bool_)
    for lane in warp:
        hit[: lane.length] |= lane.contacts
    return lmax, hit


def warp_cycles_baseline(warp, params):
    lmax, hit = _contact_iterations(warp)
    return lmax * params.c_check + int(hit.sum()) * params.c_force


def warp_cycles_two_phase(warp, params):
    lmax, hit = _contact_iterations(warp)
    cmax = max((lane.contact_count for lane in warp), default=0)
    phase1 = lmax * params.c_check + int(hit.sum()) * params.c_store
    return phase1 + cmax * (params.c_load + params.c_force)


def useful_cycles(lane, params, variant):
    """Cycles the lane itself needs, ignoring the rest of the warp."""
    c = lane.contact_count
    work = lane.length * params.c_check + c * params.c_force
    if variant == TWO_PHASE:
        work += c * (params.c_store + params.c_load)
    return work


def warp_cycles(warp, params, variant):
    if variant == BASELINE:
        return warp_cycles_baseline(warp, params)
    if variant == TWO_PHASE:
        return warp_cycles_two_phase(warp, params)
    raise ValueError(f"unknown collide variant {variant!r}")


def utilization(warp, params, variant):
    """Useful lane-cycles over occupied lane-cycles; 1.0 for an idle warp."""
    cycles = warp_cycles(warp, params, variant)
    if cycles == 0:
        return 1.0
    useful = sum(useful_cycles(lane, params, variant) for lane in warp)
    return useful / (len(warp) * cycles)


# ---------------------------------------------------------------------------
# whole-launch evaluation
# ---------------------------------------------------------------------------


@dataclass
class WarpReport:
    cycles_baseline: np.ndarray
    cycles_two_phase: np.ndarray
    useful_baseline: np.ndarray
    useful_two_phase: np.ndarray
    lanes: np.ndarray

    @property
    def utilization_baseline(self):
        return _ratio(self.useful_baseline, self.lanes * self.cycles_baseline)

    @property
    def utilization_two_phase(self):
        return _ratio(self.useful_two_phase, self.lanes * self.cycles_two_phase)

    @property
    def total_baseline(self):
        return float(self.cycles_baseline.sum())

    @property
    def total_two_phase(self):
        return float(self.cycles_two_phase.sum())

    @property
    def speedup(self):
        """Baseline over two-phase aggregate cycles (1.0 when both are zero)."""
        if self.total_two_phase == 0.0:
            return 1.0
        return self.total_baseline / self.total_two_phase

    @property
    def aggregate_utilization_baseline(self):
        return _agg(self.useful_baseline, self.lanes * self.cycles_baseline)

    @property
    def aggregate_utilization_two_phase(self):
        return _agg(self.useful_two_phase, self.lanes * self.cycles_two_phase)

    @property
    def warps(self):
        return len(self.lanes)


def _ratio(num, den):
    out = np.ones_like(num, dtype=np.float64)
    nz = den > 0
    out[nz] = num[nz] / den[nz]
    return out


def _agg(num, den):
    d = float(den.sum())
    return 1.0 if d == 0.0 else float(num.sum()) / d


@njit(cache=True, parallel=True)
def _evaluate(offsets, flags, w, c_check, c_force, c_store, c_load, out):
    n = offsets.shape[0] - 1
    nwarps = out.shape[0]
    for wi in prange(nwarps):
        a = wi * w
        b = min(a + w, n)
        lmax = 0
        cmax = 0
        ltot = 0
        ctot = 0
        for i in range(a, b):
            length = offsets[i + 1] - offsets[i]
            c = 0
            for e in range(offsets[i], offsets[i + 1]):
                if flags[e]:
                    c += 1
            lmax = max(lmax, length)
            cmax = max(cmax, c)
            ltot += length
            ctot += c
        hits = 0
        for j in range(lmax):
            for i in range(a, b):
                if offsets[i] + j < offsets[i + 1] and flags[offsets[i] + j]:
                    hits += 1
                    break
        out[wi, 0] = lmax * c_check + hits * c_force
        out[wi, 1] = lmax * c_check + hits * c_store + cmax * (c_load + c_force)
        out[wi, 2] = ltot * c_check + ctot * c_force
        out[wi, 3] = out[wi, 2] + ctot * (c_store + c_load)
        out[wi, 4] = b - a


def evaluate(traces, params):
    """Model both Collide variants over every warp of a launch."""
    n = len(traces)
    w = params.warp_size
    nwarps = (n + w - 1) // w
    out = np.zeros((nwarps, 5))
    _evaluate(
        traces.offsets, traces.contacts, w,
        float(params.c_check), float(params.c_force),
        float(params.c_store), float(params.c_load), out,
    )
    return WarpReport(
        cycles_baseline=out[:, 0].copy(),
        cycles_two_phase=out[:, 1].copy(),
        useful_baseline=out[:, 2].copy(),
        useful_two_phase=out[:, 3].copy(),
        lanes=out[:, 4].copy(),
    )
