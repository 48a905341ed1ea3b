import math

import numpy as np
import pytest

from demforge import verify
from demforge.errors import ContactCapacityError, KernelError
from demforge.materials import MaterialTable
from demforge.particles import ParticleSet
from demforge.physics import MaterialParams
from demforge.pipeline import KERNELS, Simulation, force_gravity, integrate
from demforge.simt import BASELINE, TWO_PHASE
from demforge.walls import Rectangle

GLASS = MaterialParams(0.3, 1e5 / 2.6, 1e5, 0.9, 0.3)
BOX = ((-10.0, -10.0, -10.0), (10.0, 10.0, 10.0))


def sim_of(pos, vel=None, omega=None, material=GLASS, dt=1e-3, gravity=(0, 0, 0), **kw):
    ps = ParticleSet.uniform(np.array(pos, float), 1.0, 1.0, 0,
                             vel=None if vel is None else np.array(vel, float),
                             omega=None if omega is None else np.array(omega, float))
    return Simulation(ps, MaterialTable([material]), dt, kw.pop("domain", BOX), gravity=gravity, **kw)


# -- integrate / gravity ---------------------------------------------------


def test_free_fall_step():
    ps = ParticleSet.uniform(np.array([[1.0, 2.0, 3.0]]), 0.5, 2.0)
    f = np.array([[0.0, 0.0, -19.6]])
    integrate(ps, f, np.zeros((1, 3)), 1e-3)
    assert ps.vel[0].tolist() == [0.0, 0.0, -19.6 * (1.0 / 2.0) * 1e-3]
    assert ps.pos[0].tolist() == [1.0, 2.0, 3.0 + ps.vel[0, 2] * 1e-3]


def test_uniform_motion_and_spin_up():
    ps = ParticleSet.uniform(np.zeros((1, 3)), 0.5, 2.0, vel=np.array([[1.0, -2.0, 0.5]]),
                             omega=np.array([[0.1, 0.2, 0.3]]))
    integrate(ps, np.zeros((1, 3)), np.zeros((1, 3)), 0.01)
    assert np.allclose(ps.pos[0], (0.01, -0.02, 0.005), rtol=0, atol=1e-17)
    assert ps.omega[0].tolist() == [0.1, 0.2, 0.3]
    ps.omega[:] = 0.0
    integrate(ps, np.zeros((1, 3)), np.array([[0.0, 0.0, 4.0]]), 0.01)
    assert ps.omega[0, 2] == pytest.approx(4.0 * 0.01 / (0.4 * 2.0 * 0.25), rel=1e-15)


def test_non_finite_force_aborts_with_particle_id():
    ps = ParticleSet.uniform(np.zeros((3, 3)), 0.5, 1.0)
    f = np.zeros((3, 3))
    f[1, 0] = np.nan
    with pytest.raises(KernelError) as e:
        integrate(ps, f, np.zeros((3, 3)), 1e-3)
    assert e.value.particle == 1 and e.value.kernel == "Integrate"


def test_gravity_increments():
    ps = ParticleSet(
        pos=np.zeros((2, 3)), vel=np.zeros((2, 3)), omega=np.zeros((2, 3)),
        radius=np.ones(2), mass=np.array([1.0, 3.0]), material=np.zeros(2, dtype=np.int64),
        ids=np.arange(2),
    )
    f, t = np.zeros((2, 3)), np.zeros((2, 3))
    force_gravity(ps, f, t, (0, 0, -9.8))
    assert f[:, 2].tolist() == [-9.8, -29.400000000000002]
    assert f[1, 2] / f[0, 2] == pytest.approx(3.0)
    force_gravity(ps, f, t, (0, 0, 0))
    assert not f.any()


def test_single_particle_step_is_free_fall():
    sim = sim_of([[0.0, 0.0, 0.0]], gravity=(0, 0, -9.8))
    m = sim.step()
    vz = -9.8 * (1.0 / 1.0) * 1e-3
    assert sim.particles.vel[0].tolist() == [0.0, 0.0, vz]
    assert sim.particles.pos[0].tolist() == [0.0, 0.0, vz * 1e-3]
    assert list(m.wall_ns)[: len(KERNELS)] == list(KERNELS)


# -- Collide ---------------------------------------------------------------


def test_separated_pair_records_a_miss():
    # cells 5 and 6 along x, so each is the other's neighbor
    sim = sim_of([[0.5, 0.0, 0.0], [3.0, 0.0, 0.0]])
    tr = sim.last.trace
    assert tr.lengths.tolist() == [1, 1]
    assert not tr.contacts.any()
    assert not sim.force.any()


def test_isolated_particle_has_empty_trace():
    sim = sim_of([[0.0, 0.0, 0.0], [8.0, 8.0, 8.0]])
    assert sim.last.trace.lengths.tolist() == [0, 0]
    assert not sim.force.any()


def test_small_dense_packing_matches_oracle():
    sim = verify.dense_state(64, 3)
    results = verify.check_oracle(sim)
    for r in results:
        assert r.passed, r.line()


@pytest.mark.parametrize("seed", range(5))
def test_variants_bitwise_equal(seed):
    sim = verify.dense_state(512, seed)
    assert verify.check_variants(sim).passed


def test_no_contacts_means_no_phase_two():
    sim = sim_of([[0.0, 0.0, 0.0], [2.5, 0.0, 0.0]], variant=TWO_PHASE)
    assert sim.last.contacts.sum() == 0
    rep = sim.last_report
    assert rep.total_two_phase == rep.total_baseline


def test_variant_swap_gives_same_trajectory():
    a = verify.dense_state(300, 11)
    b = a.copy()
    a.variant, b.variant = BASELINE, TWO_PHASE
    a.run(20)
    b.run(20)
    for f in ("pos", "vel", "omega"):
        assert getattr(a.particles, f).tobytes() == getattr(b.particles, f).tobytes()
    assert a.table.equals(b.table)


def test_compare_mode_checks_and_records_both():
    sim = verify.dense_state(200, 4)
    m = sim.step(compare=True)
    assert "Collide[baseline]" in m.wall_ns and "Collide[two_phase]" in m.wall_ns


def test_capacity_overflow_aborts():
    sim = verify.dense_state(125, 1, steps=0)
    small = Simulation(sim.particles.copy(), sim.materials, sim.dt, sim.domain, capacity=2,
                       prime=False)
    with pytest.raises(KernelError) as e:
        small.prime()
    assert isinstance(e.value.__cause__, ContactCapacityError)
    assert e.value.kernel == "Collide"


def test_coincident_centers_abort():
    with pytest.raises(KernelError) as e:
        sim_of([[1.0, 1.0, 1.0], [1.0, 1.0, 1.0]])
    assert "coincident" in str(e.value)


# -- walls -----------------------------------------------------------------


FLOOR = Rectangle((-8.0, -8.0, 0.0), (16.0, 0.0, 0.0), (0.0, 16.0, 0.0), 0)


def test_resting_particle_gets_pure_normal_force():
    dn = 0.01
    sim = sim_of([[4.0, -4.0, 1.0 - dn]], rectangles=[FLOOR])
    bn = 2.0 * (2.0 - 0.09) / 1e5
    kn = (4.0 / 3.0) * math.sqrt(1.0) / bn
    assert sim.force[0, 2] == pytest.approx(kn * dn**1.5, rel=1e-9)
    assert sim.force[0, 0] == 0.0 and sim.force[0, 1] == 0.0
    assert not sim.torque.any()
    assert sim.initial_metrics.wall_contacts == 1


def test_particle_away_from_walls_feels_nothing():
    sim = sim_of([[0.0, 0.0, 3.0]], rectangles=[FLOOR])
    assert not sim.force.any() and sim.initial_metrics.wall_contacts == 0


def test_sliding_on_plane_caps_at_mu():
    sim = sim_of([[0.0, 0.0, 0.99]], vel=[[5.0, 0.0, 0.0]], rectangles=[FLOOR])
    f = sim.force[0]
    assert f[0] < 0.0
    assert abs(f[0]) == pytest.approx(0.3 * abs(f[2]), rel=1e-12)
    assert sim.initial_metrics.friction_ratio == pytest.approx(1.0, rel=1e-12)


def test_wall_slip_history_persists():
    sim = sim_of([[0.0, 0.0, 0.995]], vel=[[1e-3, 0.0, 0.0]], rectangles=[FLOOR])
    d0 = sim.table.disp[0, 0].copy()
    sim.step()
    assert sim.table.partner[0, 0] == -2
    assert sim.table.disp[0, 0, 0] != d0[0]


# -- physical properties ---------------------------------------------------


def head_on(eps, dt, speed=1.0):
    mat = MaterialParams(0.3, 1e5 / 2.6, 1e5, eps, 0.0)
    sim = sim_of([[0.0, 0.0, 0.0], [2.0 + 0.01, 0.0, 0.0]],
                 vel=[[0.5 * speed, 0, 0], [-0.5 * speed, 0, 0]], material=mat, dt=dt)
    touching = 0
    while True:
        m = sim.step()
        if m.contacts:
            touching += 1
        elif touching:
            break
    v = sim.by_id().vel
    return (v[1, 0] - v[0, 0]) / speed, touching


def test_head_on_restitution():
    e, steps = head_on(0.9, 1e-4)
    assert steps >= 200
    assert 0.855 <= e <= 0.945


def test_momentum_conserved_without_gravity_or_walls():
    sim = verify.dense_state(216, 2, walls=False, steps=0)
    sim.gravity = (0.0, 0.0, 0.0)
    sim.particles.vel[:] = verify.random_velocities(sim.n, 0.5, 9)
    sim.prime()
    r = verify.check_momentum(sim, steps=300)
    assert r.passed, r.line()


def test_dissipation_on_oblique_impacts():
    r = verify.check_dissipation(GLASS, 1.0, 1.0, 2e-4, 1.0, trials=6, seed=3)
    assert r.passed, r.line()


def test_friction_bound_in_dense_run():
    sim = verify.dense_state(343, 5)
    ratios = [m.friction_ratio for m in sim.run(100)]
    assert max(ratios) > 0.99  # some contacts actually slide
    assert verify.check_friction(ratios).passed


def test_determinism():
    a = verify.dense_state(200, 8)
    b = verify.dense_state(200, 8)
    a.run(10)
    b.run(10)
    assert a.particles.pos.tobytes() == b.particles.pos.tobytes()
    assert a.table.equals(b.table)
