"""The per-step kernel pipeline.

Kernels run in this order, each a data-parallel map over particles with a
barrier in between::

    Integrate -> CalcHash -> BitonicSort -> FindCellBoundsAndReorder
    -> ForceGravity -> InitializeContactIDs -> Collide
    -> CollideRectangle -> CollideLine

Integrate consumes the forces of the previous step, so a fresh simulation
primes its force accumulators once (every kernel but Integrate) before the
first step.

Inside Collide a logical thread owns one particle: it reads neighbors but
writes only its own force, torque and contact-table row, which keeps every
variant deterministic under any thread count.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from numba import njit, prange

from . import simt
from .contacts import DEFAULT_CAPACITY, EMPTY, ContactTable, _find_slot, initialize_contact_ids
from .errors import ContactCapacityError, KernelError
from .grid import (
    UniformGrid,
    _neighbor_range,
    bitonic_sort,
    calc_hash_all,
    default_cell_size,
    find_cell_bounds_and_reorder,
    SortedOrder,
)
from .physics import COINCIDENT_TOL, _closest_on_rectangle, _closest_on_segment, _interact
from .walls import pack_rectangles, pack_segments

KERNELS = (
    "Integrate",
    "CalcHash",
    "BitonicSort",
    "FindCellBoundsAndReorder",
    "ForceGravity",
    "InitializeContactIDs",
    "Collide",
    "CollideRectangle",
    "CollideLine",
)

ERR_CAPACITY = 1
ERR_COINCIDENT = 2
ERR_NONFINITE = 3

_REASONS = {
    ERR_CAPACITY: "contact capacity exceeded",
    ERR_COINCIDENT: "coincident centers, contact normal undefined",
    ERR_NONFINITE: "non-finite force or torque",
}


# ---------------------------------------------------------------------------
# integration and gravity
# ---------------------------------------------------------------------------


@njit(cache=True, parallel=True)
def _integrate(pos, vel, omg, force, torque, mass, radius, h, err):
    for i in prange(pos.shape[0]):
        ok = True
        for a in range(3):
            if not (math.isfinite(force[i, a]) and math.isfinite(torque[i, a])):
                ok = False
        if not ok:
            err[i] = ERR_NONFINITE
            continue
        inv_m = 1.0 / mass[i]
        inv_i = 1.0 / (0.4 * mass[i] * radius[i] * radius[i])
        for a in range(3):
            vel[i, a] += force[i, a] * inv_m * h
            pos[i, a] += vel[i, a] * h
            omg[i, a] += torque[i, a] * inv_i * h


@njit(cache=True, parallel=True)
def _gravity(force, torque, mass, gx, gy, gz):
    for i in prange(force.shape[0]):
        force[i, 0] = mass[i] * gx
        force[i, 1] = mass[i] * gy
        force[i, 2] = mass[i] * gz
        torque[i, 0] = 0.0
        torque[i, 1] = 0.0
        torque[i, 2] = 0.0


def integrate(particles, force, torque, dt):
    """Semi-implicit Euler: velocities first, positions with the new velocity."""
    err = np.zeros(len(particles), dtype=np.int64)
    _integrate(particles.pos, particles.vel, particles.omega, force, torque,
               particles.mass, particles.radius, dt, err)
    _raise_first("Integrate", err, particles)
    return particles


def force_gravity(particles, force, torque, gravity):
    """Reset the accumulators to ``m * g`` and zero torque."""
    gx, gy, gz = (float(g) for g in gravity)
    _gravity(force, torque, particles.mass, gx, gy, gz)
    return force


def _raise_first(kernel, err, particles, step=None):
    bad = np.flatnonzero(err)
    if len(bad):
        i = bad[0]
        raise KernelError(kernel, int(particles.ids[i]), _REASONS[int(err[i])], step=step)


# ---------------------------------------------------------------------------
# particle-particle contact
# ---------------------------------------------------------------------------


@njit(cache=True)
def _pair_apply(i, j, dx, dy, dz, dist, pos, vel, omg, rad, mass, mat,
                bt, bn, alpha, mu, partner, disp, touched, h, acc):
    """Physics for one detected contact of particle ``i`` with ``j``.

    Adds force/torque into ``acc`` (fx, fy, fz, tx, ty, tz, max friction
    ratio) and returns an error code.
    """
    if dist < COINCIDENT_TOL:
        return ERR_COINCIDENT
    slot, fresh = _find_slot(partner, touched, i, j)
    if slot < 0:
        return ERR_CAPACITY
    if fresh:
        disp[i, slot, 0] = 0.0
        disp[i, slot, 1] = 0.0
        disp[i, slot, 2] = 0.0
    nx = dx / dist
    ny = dy / dist
    nz = dz / dist
    r1 = rad[i]
    r2 = rad[j]
    m1 = mass[i]
    m2 = mass[j]
    a = mat[i]
    b = mat[j]
    out = _interact(
        nx, ny, nz, (r1 + r2) - dist,
        vel[i, 0] - vel[j, 0], vel[i, 1] - vel[j, 1], vel[i, 2] - vel[j, 2],
        r1 * omg[i, 0] + r2 * omg[j, 0],
        r1 * omg[i, 1] + r2 * omg[j, 1],
        r1 * omg[i, 2] + r2 * omg[j, 2],
        disp[i, slot, 0], disp[i, slot, 1], disp[i, slot, 2],
        r1 * r2 / (r1 + r2), m1 * m2 / (m1 + m2),
        bt[a, b], bn[a, b], alpha[a, b], mu[a, b], r1, h,
    )
    fx, fy, fz, tx, ty, tz, d0, d1, d2, _, ft, fn = out
    disp[i, slot, 0] = d0
    disp[i, slot, 1] = d1
    disp[i, slot, 2] = d2
    acc[0] += fx
    acc[1] += fy
    acc[2] += fz
    acc[3] += tx
    acc[4] += ty
    acc[5] += tz
    _track_friction(ft, fn, mu[a, b], acc)
    return 0


@njit(cache=True)
def _track_friction(ft, fn, mu, acc):
    if ft > 0.0:
        lim = mu * fn
        r = ft / lim if lim > 0.0 else np.inf
        if r > acc[6]:
            acc[6] = r


@njit(cache=True)
def _separation(pos, i, j):
    dx = pos[j, 0] - pos[i, 0]
    dy = pos[j, 1] - pos[i, 1]
    dz = pos[j, 2] - pos[i, 2]
    return dx, dy, dz, math.sqrt(dx * dx + dy * dy + dz * dz)


@njit(cache=True, parallel=True)
def _count_candidates(keys, cell_start, cell_end, nx, ny, nz, counts):
    for i in prange(keys.shape[0]):
        x0, x1, y0, y1, z0, z1 = _neighbor_range(keys[i], nx, ny, nz)
        c = -1
        for cz in range(z0, z1 + 1):
            for cy in range(y0, y1 + 1):
                for cx in range(x0, x1 + 1):
                    cell = cx + cy * nx + cz * nx * ny
                    c += cell_end[cell] - cell_start[cell]
        counts[i] = c


@njit(cache=True, parallel=True)
def _collide_baseline(pos, vel, omg, rad, mass, mat, keys, cell_start, cell_end,
                      nx, ny, nz, bt, bn, alpha, mu, partner, disp, touched,
                      force, torque, h, toff, tcand, tflag, fratio, ncontact, err):
    for i in prange(pos.shape[0]):
        acc = np.zeros(7)
        for k in range(3):
            acc[k] = force[i, k]
            acc[3 + k] = torque[i, k]
        x0, x1, y0, y1, z0, z1 = _neighbor_range(keys[i], nx, ny, nz)
        e = toff[i]
        nc = 0
        code = 0
        for cz in range(z0, z1 + 1):
            for cy in range(y0, y1 + 1):
                for cx in range(x0, x1 + 1):
                    cell = cx + cy * nx + cz * nx * ny
                    for j in range(cell_start[cell], cell_end[cell]):
                        if j == i or code != 0:
                            continue
                        dx, dy, dz, dist = _separation(pos, i, j)
                        hit = dist < rad[i] + rad[j]
                        tcand[e] = j
                        tflag[e] = hit
                        e += 1
                        if hit:
                            nc += 1
                            code = _pair_apply(i, j, dx, dy, dz, dist, pos, vel, omg, rad,
                                               mass, mat, bt, bn, alpha, mu, partner, disp,
                                               touched, h, acc)
        err[i] = code
        ncontact[i] = nc
        fratio[i] = acc[6]
        for k in range(3):
            force[i, k] = acc[k]
            torque[i, k] = acc[3 + k]


@njit(cache=True, parallel=True)
def _collide_two_phase(pos, vel, omg, rad, mass, mat, keys, cell_start, cell_end,
                       nx, ny, nz, bt, bn, alpha, mu, partner, disp, touched,
                       force, torque, h, toff, tcand, tflag, fratio, ncontact, err,
                       found):
    cap = found.shape[1]
    for i in prange(pos.shape[0]):
        # phase 1: contact checks only, partner IDs kept in the local list
        x0, x1, y0, y1, z0, z1 = _neighbor_range(keys[i], nx, ny, nz)
        e = toff[i]
        nc = 0
        code = 0
        for cz in range(z0, z1 + 1):
            for cy in range(y0, y1 + 1):
                for cx in range(x0, x1 + 1):
                    cell = cx + cy * nx + cz * nx * ny
                    for j in range(cell_start[cell], cell_end[cell]):
                        if j == i:
                            continue
                        dx, dy, dz, dist = _separation(pos, i, j)
                        hit = dist < rad[i] + rad[j]
                        tcand[e] = j
                        tflag[e] = hit
                        e += 1
                        if hit:
                            if nc == cap:
                                code = ERR_CAPACITY
                            else:
                                found[i, nc] = j
                                nc += 1
        ncontact[i] = nc
        if code != 0:
            err[i] = code
            continue

        # phase 2: force evaluation over the recorded partners
        acc = np.zeros(7)
        for k in range(3):
            acc[k] = force[i, k]
            acc[3 + k] = torque[i, k]
        for q in range(nc):
            j = found[i, q]
            dx, dy, dz, dist = _separation(pos, i, j)
            code = _pair_apply(i, j, dx, dy, dz, dist, pos, vel, omg, rad, mass, mat,
                               bt, bn, alpha, mu, partner, disp, touched, h, acc)
            if code != 0:
                break
        err[i] = code
        fratio[i] = acc[6]
        for k in range(3):
            force[i, k] = acc[k]
            torque[i, k] = acc[3 + k]


# ---------------------------------------------------------------------------
# walls
# ---------------------------------------------------------------------------


@njit(cache=True)
def _wall_apply(i, wid, wmat, qx, qy, qz, pos, vel, omg, rad, mass, mat,
                bt, bn, alpha, mu, partner, disp, touched, h, acc):
    dx = qx - pos[i, 0]
    dy = qy - pos[i, 1]
    dz = qz - pos[i, 2]
    dist = math.sqrt(dx * dx + dy * dy + dz * dz)
    r1 = rad[i]
    if not dist < r1:
        return 0, False
    if dist < COINCIDENT_TOL:
        return ERR_COINCIDENT, True
    slot, fresh = _find_slot(partner, touched, i, wid)
    if slot < 0:
        return ERR_CAPACITY, True
    if fresh:
        disp[i, slot, 0] = 0.0
        disp[i, slot, 1] = 0.0
        disp[i, slot, 2] = 0.0
    a = mat[i]
    out = _interact(
        dx / dist, dy / dist, dz / dist, r1 - dist,
        vel[i, 0], vel[i, 1], vel[i, 2],
        r1 * omg[i, 0], r1 * omg[i, 1], r1 * omg[i, 2],
        disp[i, slot, 0], disp[i, slot, 1], disp[i, slot, 2],
        r1, mass[i], bt[a, wmat], bn[a, wmat], alpha[a, wmat], mu[a, wmat], r1, h,
    )
    fx, fy, fz, tx, ty, tz, d0, d1, d2, _, ft, fn = out
    disp[i, slot, 0] = d0
    disp[i, slot, 1] = d1
    disp[i, slot, 2] = d2
    acc[0] += fx
    acc[1] += fy
    acc[2] += fz
    acc[3] += tx
    acc[4] += ty
    acc[5] += tz
    _track_friction(ft, fn, mu[a, wmat], acc)
    return 0, True


@njit(cache=True, parallel=True)
def _collide_rectangles(pos, vel, omg, rad, mass, mat, rects, rmats, id_base,
                        bt, bn, alpha, mu, partner, disp, touched, force, torque,
                        h, fratio, ncontact, err):
    for i in prange(pos.shape[0]):
        if err[i] != 0:
            continue
        acc = np.zeros(7)
        for k in range(3):
            acc[k] = force[i, k]
            acc[3 + k] = torque[i, k]
        acc[6] = fratio[i]
        code = 0
        for w in range(rects.shape[0]):
            g = rects[w]
            qx, qy, qz = _closest_on_rectangle(pos[i, 0], pos[i, 1], pos[i, 2],
                                               g[0], g[1], g[2], g[3], g[4], g[5],
                                               g[6], g[7], g[8])
            ex = qx - pos[i, 0]
            ey = qy - pos[i, 1]
            ez = qz - pos[i, 2]
            if not math.sqrt(ex * ex + ey * ey + ez * ez) < rad[i]:
                continue
            code, hit = _wall_apply(i, -2 - (id_base + w), rmats[w], qx, qy, qz, pos, vel,
                                    omg, rad, mass, mat, bt, bn, alpha, mu, partner,
                                    disp, touched, h, acc)
            if hit:
                ncontact[i] += 1
            if code != 0:
                break
        err[i] = code
        fratio[i] = acc[6]
        for k in range(3):
            force[i, k] = acc[k]
            torque[i, k] = acc[3 + k]


@njit(cache=True, parallel=True)
def _collide_segments(pos, vel, omg, rad, mass, mat, segs, smats, id_base,
                      bt, bn, alpha, mu, partner, disp, touched, force, torque,
                      h, fratio, ncontact, err):
    for i in prange(pos.shape[0]):
        if err[i] != 0:
            continue
        acc = np.zeros(7)
        for k in range(3):
            acc[k] = force[i, k]
            acc[3 + k] = torque[i, k]
        acc[6] = fratio[i]
        code = 0
        for w in range(segs.shape[0]):
            g = segs[w]
            qx, qy, qz = _closest_on_segment(pos[i, 0], pos[i, 1], pos[i, 2],
                                             g[0], g[1], g[2], g[3], g[4], g[5])
            ex = qx - pos[i, 0]
            ey = qy - pos[i, 1]
            ez = qz - pos[i, 2]
            if not math.sqrt(ex * ex + ey * ey + ez * ez) < rad[i]:
                continue
            code, hit = _wall_apply(i, -2 - (id_base + w), smats[w], qx, qy, qz, pos, vel,
                                    omg, rad, mass, mat, bt, bn, alpha, mu, partner,
                                    disp, touched, h, acc)
            if hit:
                ncontact[i] += 1
            if code != 0:
                break
        err[i] = code
        fratio[i] = acc[6]
        for k in range(3):
            force[i, k] = acc[k]
            torque[i, k] = acc[3 + k]


# ---------------------------------------------------------------------------
# orchestration
# ---------------------------------------------------------------------------


@dataclass
class CollideResult:
    trace: simt.TraceBuffer
    contacts: np.ndarray  # particle-particle contacts per particle
    friction_ratio: np.ndarray  # max |F_t| / (mu |F_n|) per particle


@dataclass
class StepMetrics:
    step: int
    wall_ns: dict = field(default_factory=dict)
    cycles_baseline: float = 0.0
    cycles_two_phase: float = 0.0
    utilization_baseline: float = 1.0
    utilization_two_phase: float = 1.0
    contacts: int = 0
    max_contacts_per_particle: int = 0
    wall_contacts: int = 0
    clamps: int = 0
    friction_ratio: float = 0.0

    @property
    def modeled_speedup(self):
        if self.cycles_two_phase == 0.0:
            return 1.0
        return self.cycles_baseline / self.cycles_two_phase


class Simulation:
    """Particle state plus everything a step needs.

    Parameters
    ----------
    particles : ParticleSet
    materials : MaterialTable
    dt : float
    domain : (lo, hi)
        Box the grid covers; particles outside it clamp to boundary cells.
    """

    def __init__(self, particles, materials, dt, domain, gravity=(0.0, 0.0, -9.81),
                 rectangles=(), segments=(), cell_size=None,
                 capacity=DEFAULT_CAPACITY, variant=simt.BASELINE,
                 warp=None, prime=True):
        if not dt > 0.0:
            raise ValueError("dt must be positive")
        if variant not in simt.VARIANTS:
            raise ValueError(f"unknown collide variant {variant!r}")
        lo, hi = (np.asarray(d, dtype=np.float64) for d in domain)
        if not np.all(hi > lo):
            raise ValueError("domain box is degenerate")
        self.particles = particles
        self.materials = materials
        self.dt = float(dt)
        self.gravity = tuple(float(g) for g in gravity)
        self.domain = (lo, hi)
        r_max = float(particles.radius.max()) if len(particles) else 1.0
        self.cell_size = default_cell_size(r_max) if cell_size is None else float(cell_size)
        self.grid = UniformGrid.covering(lo, hi, self.cell_size)
        self.rectangles = list(rectangles)
        self.segments = list(segments)
        self.rect_geo, self.rect_mat = pack_rectangles(self.rectangles)
        self.seg_geo, self.seg_mat = pack_segments(self.segments)
        self.table = ContactTable(len(particles), capacity)
        self.variant = variant
        self.warp = warp or simt.WarpCostParams()
        n = len(particles)
        self.force = np.zeros((n, 3))
        self.torque = np.zeros((n, 3))
        self.order = None
        self.step_index = 0
        self.last = None
        if prime:
            self.prime()

    @property
    def n(self):
        return len(self.particles)

    # -- kernels ---------------------------------------------------------

    def _args(self):
        p = self.particles
        return (p.pos, p.vel, p.omega, p.radius, p.mass, p.material)

    def _mat_args(self):
        m = self.materials
        return (m.bracket_t, m.bracket_n, m.alpha, m.mu)

    def sort_and_reorder(self):
        keys, clamps = calc_hash_all(self.particles.pos, self.grid)
        sk, perm = bitonic_sort(keys, np.arange(self.n, dtype=np.int64))
        order = SortedOrder(sk, perm)
        self.order, self.particles, self.table = find_cell_bounds_and_reorder(
            order, self.particles, self.table, self.grid.cell_count
        )
        # keep accumulators aligned so a following Integrate stays valid
        self.force = self.force[perm]
        self.torque = self.torque[perm]
        return clamps

    def collide(self, variant=None, force=None, torque=None, table=None):
        """Run one Collide variant; accumulators and table default to the live ones."""
        variant = variant or self.variant
        force = self.force if force is None else force
        torque = self.torque if torque is None else torque
        table = self.table if table is None else table
        o = self.order
        nx, ny, nz = self.grid.dims
        n = self.n
        counts = np.empty(n, dtype=np.int64)
        _count_candidates(o.keys, o.cell_start, o.cell_end, nx, ny, nz, counts)
        toff = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=toff[1:])
        tcand = np.empty(toff[-1], dtype=np.int64)
        tflag = np.empty(toff[-1], dtype=np.bool_)
        fratio = np.zeros(n)
        ncontact = np.zeros(n, dtype=np.int64)
        err = np.zeros(n, dtype=np.int64)
        common = (*self._args(), o.keys, o.cell_start, o.cell_end, nx, ny, nz,
                  *self._mat_args(), table.partner, table.disp, table.touched,
                  force, torque, self.dt, toff, tcand, tflag, fratio, ncontact, err)
        if variant == simt.BASELINE:
            _collide_baseline(*common)
        elif variant == simt.TWO_PHASE:
            found = np.empty((n, table.capacity), dtype=np.int64)
            _collide_two_phase(*common, found)
        else:
            raise ValueError(f"unknown collide variant {variant!r}")
        self._check(err, "Collide")
        return CollideResult(simt.TraceBuffer(toff, tcand, tflag), ncontact, fratio)

    def collide_walls(self, result):
        err = np.zeros(self.n, dtype=np.int64)
        wall_hits = np.zeros(self.n, dtype=np.int64)
        t0 = time.perf_counter_ns()
        if len(self.rectangles):
            _collide_rectangles(*self._args(), self.rect_geo, self.rect_mat, 0,
                                *self._mat_args(), self.table.partner, self.table.disp,
                                self.table.touched, self.force, self.torque, self.dt,
                                result.friction_ratio, wall_hits, err)
            self._check(err, "CollideRectangle")
        t1 = time.perf_counter_ns()
        if len(self.segments):
            _collide_segments(*self._args(), self.seg_geo, self.seg_mat, len(self.rectangles),
                              *self._mat_args(), self.table.partner, self.table.disp,
                              self.table.touched, self.force, self.torque, self.dt,
                              result.friction_ratio, wall_hits, err)
            self._check(err, "CollideLine")
        t2 = time.perf_counter_ns()
        return wall_hits, t1 - t0, t2 - t1

    def _check(self, err, kernel):
        bad = np.flatnonzero(err)
        if not len(bad):
            return
        i = int(bad[0])
        pid = int(self.particles.ids[i])
        if err[i] == ERR_CAPACITY:
            exc = KernelError(kernel, pid, _REASONS[ERR_CAPACITY], step=self.step_index)
            exc.__cause__ = ContactCapacityError(pid, self.table.capacity)
            raise exc
        raise KernelError(kernel, pid, _REASONS[int(err[i])], step=self.step_index)

    # -- step ------------------------------------------------------------

    def _force_phase(self, metrics, compare=False):
        t = time.perf_counter_ns
        t0 = t()
        keys, clamps = calc_hash_all(self.particles.pos, self.grid)
        t1 = t()
        sk, perm = bitonic_sort(keys, np.arange(self.n, dtype=np.int64))
        t2 = t()
        self.order, self.particles, self.table = find_cell_bounds_and_reorder(
            SortedOrder(sk, perm), self.particles, self.table, self.grid.cell_count
        )
        t3 = t()
        force_gravity(self.particles, self.force, self.torque, self.gravity)
        t4 = t()
        initialize_contact_ids(self.table)
        t5 = t()
        if compare:
            result = self._collide_compared(metrics)
        else:
            result = self.collide()
        t6 = t()
        wall_hits, t_rect, t_line = self.collide_walls(result)
        w = metrics.wall_ns
        w["CalcHash"] = t1 - t0
        w["BitonicSort"] = t2 - t1
        w["FindCellBoundsAndReorder"] = t3 - t2
        w["ForceGravity"] = t4 - t3
        w["InitializeContactIDs"] = t5 - t4
        w.setdefault("Collide", t6 - t5)
        w["CollideRectangle"] = t_rect
        w["CollideLine"] = t_line

        report = simt.evaluate(result.trace, self.warp)
        metrics.cycles_baseline = report.total_baseline
        metrics.cycles_two_phase = report.total_two_phase
        metrics.utilization_baseline = report.aggregate_utilization_baseline
        metrics.utilization_two_phase = report.aggregate_utilization_two_phase
        metrics.contacts = int(result.contacts.sum()) // 2
        metrics.max_contacts_per_particle = int(result.contacts.max()) if self.n else 0
        metrics.wall_contacts = int(wall_hits.sum())
        metrics.clamps = clamps
        metrics.friction_ratio = float(result.friction_ratio.max()) if self.n else 0.0
        self.last = result
        self.last_report = report
        return metrics

    def _collide_compared(self, metrics):
        """Run both variants on identical inputs; abort unless bitwise equal."""
        f0, t0, tab0 = self.force.copy(), self.torque.copy(), self.table.copy()
        results, outs = {}, {}
        for variant in simt.VARIANTS:
            f, tq, tab = f0.copy(), t0.copy(), tab0.copy()
            start = time.perf_counter_ns()
            results[variant] = self.collide(variant, f, tq, tab)
            metrics.wall_ns[f"Collide[{variant}]"] = time.perf_counter_ns() - start
            outs[variant] = (f, tq, tab)
        (fa, ta, taba), (fb, tb, tabb) = outs[simt.BASELINE], outs[simt.TWO_PHASE]
        if not (fa.tobytes() == fb.tobytes() and ta.tobytes() == tb.tobytes() and taba.equals(tabb)):
            raise KernelError("Collide", -1, "collide variants disagree", step=self.step_index)
        if not results[simt.BASELINE].trace.equals(results[simt.TWO_PHASE].trace):
            raise KernelError("Collide", -1, "collide traces disagree", step=self.step_index)
        f, tq, tab = outs[self.variant]
        self.force[:] = f
        self.torque[:] = tq
        self.table = tab
        metrics.wall_ns["Collide"] = metrics.wall_ns[f"Collide[{self.variant}]"]
        return results[self.variant]

    def prime(self):
        """Compute forces for the current state without moving particles."""
        self.initial_metrics = self._force_phase(StepMetrics(step=self.step_index))
        return self.initial_metrics

    def step(self, compare=False):
        metrics = StepMetrics(step=self.step_index + 1)
        t0 = time.perf_counter_ns()
        err = np.zeros(self.n, dtype=np.int64)
        p = self.particles
        _integrate(p.pos, p.vel, p.omega, self.force, self.torque, p.mass, p.radius, self.dt, err)
        self._check(err, "Integrate")
        metrics.wall_ns["Integrate"] = time.perf_counter_ns() - t0
        self.step_index += 1
        self._force_phase(metrics, compare=compare)
        return metrics

    def run(self, steps, compare=False):
        return [self.step(compare=compare) for _ in range(steps)]

    # -- views -----------------------------------------------------------

    def by_id(self):
        """Particle state ordered by original particle ID."""
        return self.particles.permuted(np.argsort(self.particles.ids, kind="stable"))

    def copy(self):
        import copy

        return copy.deepcopy(self)
