"""Contact mechanics for spherical particles and static walls.

Normal force is Hertzian (``k_n * delta_n**1.5``) with a dashpot whose
coefficient scales as ``delta_n**0.25``; the tangential force is a linear
spring on the accumulated slip ``delta_t`` plus a dashpot, capped by
Coulomb sliding friction.  When the cap engages, ``delta_t`` is solved back
from the capped force so the spring never stores more than the friction
limit allows.

Sign conventions: the normal ``n`` points from particle 1 toward its
partner, the relative velocity is ``v1 - v2`` (particle 1 relative to the
partner), and every returned force/torque acts on particle 1.

The scalar ``_``-prefixed functions are numba-compiled and shared verbatim
by the public helpers below and by the pipeline kernels, so a force
evaluated through this API is bit-for-bit the force a kernel applies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConfigError, DegenerateContactError

# Below this center distance the contact normal is treated as undefined.
COINCIDENT_TOL = 1e-12
# Below this tangential magnitude a capped force has no usable direction.
DEGENERATE_FT = 1e-15


@dataclass(frozen=True)
class MaterialParams:
    """Elastic and frictional constants of one material."""

    poisson_ratio: float
    shear_modulus: float
    youngs_modulus: float
    restitution: float
    sliding_friction: float

    def __post_init__(self):
        if not 0.0 <= self.poisson_ratio < 0.5:
            raise ConfigError("poisson ratio must lie in [0, 0.5)", key="poisson")
        if not self.shear_modulus > 0.0:
            raise ConfigError("shear modulus must be positive", key="shear_modulus")
        if not self.youngs_modulus > 0.0:
            raise ConfigError("Young's modulus must be positive", key="youngs_modulus")
        if not 0.0 < self.restitution <= 1.0:
            raise ConfigError("restitution must lie in (0, 1]", key="restitution")
        if not self.sliding_friction >= 0.0:
            raise ConfigError("sliding friction must be >= 0", key="mu_d")


@dataclass(frozen=True)
class ContactPartner:
    """The body particle 1 touches.

    Walls carry ``radius = mass = inf`` and zero velocities; the coefficient
    formulas then take their analytic limits instead of using the sentinels.
    """

    kind: str  # "particle", "rectangle" or "line"
    radius: float
    mass: float
    velocity: np.ndarray
    angular_velocity: np.ndarray
    material_id: int = 0

    @property
    def is_wall(self):
        return self.kind != "particle"

    @classmethod
    def wall(cls, kind, material_id=0):
        zero = np.zeros(3)
        return cls(kind, math.inf, math.inf, zero, zero, material_id)


@dataclass(frozen=True)
class ContactGeometry:
    normal: np.ndarray
    overlap: float
    contact_point: np.ndarray
    relative_velocity: np.ndarray
    normal_speed: float
    tangential_velocity: np.ndarray


@dataclass(frozen=True)
class ContactCoefficients:
    k_t: float
    k_n: float
    eta_n: float
    eta_t: float


@dataclass(frozen=True)
class ContactForce:
    force: np.ndarray
    torque: np.ndarray
    tangential_displacement: np.ndarray
    capped: bool
    normal_magnitude: float
    tangential_magnitude: float


# ---------------------------------------------------------------------------
# compiled scalar cores
# ---------------------------------------------------------------------------


@njit(cache=True)
def restitution_alpha(eps):
    """Damping prefactor for a pairwise restitution coefficient.

    ``alpha(eps) = -2 ln(eps) / sqrt(pi**2 + ln(eps)**2)``, zero at ``eps = 1``.
    """
    if eps >= 1.0:
        return 0.0
    le = math.log(eps)
    return -2.0 * le / math.sqrt(math.pi * math.pi + le * le)


@njit(cache=True)
def _coefficients(r_eff, m_eff, bracket_t, bracket_n, alpha, dn):
    kt = 8.0 * math.sqrt(r_eff * dn) / bracket_t
    kn = (4.0 / 3.0) * math.sqrt(r_eff) / bracket_n
    eta = alpha * math.sqrt(m_eff * kn * math.sqrt(dn))
    return kt, kn, eta


@njit(cache=True)
def _tangential_velocity(vx, vy, vz, nx, ny, nz, sx, sy, sz):
    # s = r1*w1 + r2*w2; the spin term is s x n
    vn = vx * nx + vy * ny + vz * nz
    vtx = (vx - vn * nx) + (sy * nz - sz * ny)
    vty = (vy - vn * ny) + (sz * nx - sx * nz)
    vtz = (vz - vn * nz) + (sx * ny - sy * nx)
    return vn, vtx, vty, vtz


@njit(cache=True)
def _update_displacement(dx, dy, dz, nx, ny, nz, vtx, vty, vtz, h):
    dd = dx * nx + dy * ny + dz * nz
    return (
        (dx - dd * nx) + vtx * h,
        (dy - dd * ny) + vty * h,
        (dz - dd * nz) + vtz * h,
    )


@njit(cache=True)
def _cap(ftx, fty, ftz, ft, limit, dtx, dty, dtz, kt):
    """Coulomb cap; returns (ftx, fty, ftz, dtx, dty, dtz, capped)."""
    if not ft > limit:
        return ftx, fty, ftz, dtx, dty, dtz, False
    if ft < DEGENERATE_FT:
        return 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, True
    s = limit / ft
    ftx *= s
    fty *= s
    ftz *= s
    return ftx, fty, ftz, -ftx / kt, -fty / kt, -ftz / kt, True


@njit(cache=True)
def _force(nx, ny, nz, dn, vn, vtx, vty, vtz, dtx, dty, dtz, kt, kn, eta, mu, r1):
    """Spring-dashpot force with sliding cap and torque on particle 1.

    Returns (fx, fy, fz, tx, ty, tz, dtx, dty, dtz, capped, |F_t|, |F_n|),
    the tangential pair measured after the cap.
    """
    fel = kn * (dn * math.sqrt(dn))
    evn = eta * vn
    fx = -kt * dtx - eta * vtx - fel * nx - evn * nx
    fy = -kt * dty - eta * vty - fel * ny - evn * ny
    fz = -kt * dtz - eta * vtz - fel * nz - evn * nz

    fns = fx * nx + fy * ny + fz * nz
    ftx = fx - fns * nx
    fty = fy - fns * ny
    ftz = fz - fns * nz
    ft = math.sqrt(ftx * ftx + fty * fty + ftz * ftz)
    fn = abs(fns)
    ftx, fty, ftz, dtx, dty, dtz, capped = _cap(
        ftx, fty, ftz, ft, mu * fn, dtx, dty, dtz, kt
    )
    if capped:
        fx = fns * nx + ftx
        fy = fns * ny + fty
        fz = fns * nz + ftz
        ft = math.sqrt(ftx * ftx + fty * fty + ftz * ftz)

    tx = r1 * (ny * fz - nz * fy)
    ty = r1 * (nz * fx - nx * fz)
    tz = r1 * (nx * fy - ny * fx)
    return fx, fy, fz, tx, ty, tz, dtx, dty, dtz, capped, ft, fn


@njit(cache=True)
def _interact(
    nx, ny, nz, dn,
    vx, vy, vz, sx, sy, sz,
    d0x, d0y, d0z,
    r_eff, m_eff, bracket_t, bracket_n, alpha, mu, r1, h,
):
    """Full per-contact update: slip velocity, slip integration, force."""
    vn, vtx, vty, vtz = _tangential_velocity(vx, vy, vz, nx, ny, nz, sx, sy, sz)
    dtx, dty, dtz = _update_displacement(d0x, d0y, d0z, nx, ny, nz, vtx, vty, vtz, h)
    kt, kn, eta = _coefficients(r_eff, m_eff, bracket_t, bracket_n, alpha, dn)
    return _force(nx, ny, nz, dn, vn, vtx, vty, vtz, dtx, dty, dtz, kt, kn, eta, mu, r1)


@njit(cache=True)
def _closest_on_rectangle(px, py, pz, cx, cy, cz, ux, uy, uz, wx, wy, wz):
    rx = px - cx
    ry = py - cy
    rz = pz - cz
    s = (rx * ux + ry * uy + rz * uz) / (ux * ux + uy * uy + uz * uz)
    t = (rx * wx + ry * wy + rz * wz) / (wx * wx + wy * wy + wz * wz)
    s = min(max(s, 0.0), 1.0)
    t = min(max(t, 0.0), 1.0)
    return cx + s * ux + t * wx, cy + s * uy + t * wy, cz + s * uz + t * wz


@njit(cache=True)
def _closest_on_segment(px, py, pz, ax, ay, az, bx, by, bz):
    ux = bx - ax
    uy = by - ay
    uz = bz - az
    s = ((px - ax) * ux + (py - ay) * uy + (pz - az) * uz) / (ux * ux + uy * uy + uz * uz)
    s = min(max(s, 0.0), 1.0)
    return ax + s * ux, ay + s * uy, az + s * uz


# ---------------------------------------------------------------------------
# public API
# ---------------------------------------------------------------------------


def _vec(a):
    return np.asarray(a, dtype=np.float64).reshape(3)


def contact_geometry(pos1, r1, pos2, r2, v1, v2, w1, w2):
    """Geometry of the contact between particle 1 and a partner.

    Returns ``None`` when the surfaces do not overlap.  A wall partner is
    passed as its closest point with ``r2 = 0`` and zero velocities.

    Raises
    ------
    DegenerateContactError
        If the centers (or center and wall point) coincide.
    """
    pos1, pos2 = _vec(pos1), _vec(pos2)
    v1, v2, w1, w2 = _vec(v1), _vec(v2), _vec(w1), _vec(w2)
    d = pos2 - pos1
    dist = math.sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
    if dist >= r1 + r2:
        return None
    if dist < COINCIDENT_TOL:
        raise DegenerateContactError(
            f"centers coincide (distance {dist:.3e}); contact normal undefined"
        )
    n = d / dist
    dn = (r1 + r2) - dist
    v = v1 - v2
    s = r1 * w1 + r2 * w2
    vn, vtx, vty, vtz = _tangential_velocity(v[0], v[1], v[2], n[0], n[1], n[2], s[0], s[1], s[2])
    return ContactGeometry(
        normal=n,
        overlap=dn,
        contact_point=pos1 + n * (r1 - 0.5 * dn),
        relative_velocity=v,
        normal_speed=vn,
        tangential_velocity=np.array([vtx, vty, vtz]),
    )


def pair_restitution(mat1, mat2):
    """Default pairwise restitution, the geometric mean of both materials."""
    return math.sqrt(mat1.restitution * mat2.restitution)


def pair_friction(mat1, mat2):
    """Default pairwise sliding-friction coefficient (geometric mean)."""
    return math.sqrt(mat1.sliding_friction * mat2.sliding_friction)


def compliance_brackets(mat1, mat2):
    """The two compliance sums entering ``k_t`` and ``k_n``."""
    bt = (2.0 - mat1.poisson_ratio) / mat1.shear_modulus + (
        2.0 - mat2.poisson_ratio
    ) / mat2.shear_modulus
    bn = (2.0 - mat1.poisson_ratio**2) / mat1.youngs_modulus + (
        2.0 - mat2.poisson_ratio**2
    ) / mat2.youngs_modulus
    return bt, bn


def effective_radius(r1, r2):
    if math.isinf(r2):
        return r1
    return r1 * r2 / (r1 + r2)


def effective_mass(m1, m2):
    if math.isinf(m2):
        return m1
    return m1 * m2 / (m1 + m2)


def contact_coefficients(geom, mat1, mat2, r1, r2, m1, m2, restitution=None):
    """Spring and damping coefficients for an overlapping pair.

    ``r2 = m2 = inf`` selects the wall limits (effective radius ``r1``,
    effective mass ``m1``).  ``restitution`` overrides the pair default.
    """
    dn = geom.overlap if isinstance(geom, ContactGeometry) else float(geom)
    if not dn > 0.0:
        raise ValueError("coefficients need a positive overlap")
    eps = pair_restitution(mat1, mat2) if restitution is None else restitution
    bt, bn = compliance_brackets(mat1, mat2)
    kt, kn, eta = _coefficients(
        effective_radius(r1, r2), effective_mass(m1, m2), bt, bn, restitution_alpha(eps), dn
    )
    return ContactCoefficients(k_t=kt, k_n=kn, eta_n=eta, eta_t=eta)


def update_tangential_displacement(delta_old, n, v_t, dt):
    """Rotate the stored slip into the current tangent plane and integrate."""
    d, n, vt = _vec(delta_old), _vec(n), _vec(v_t)
    return np.array(_update_displacement(d[0], d[1], d[2], n[0], n[1], n[2], vt[0], vt[1], vt[2], dt))


def contact_force(geom, coeffs, delta_t, mu_d, r1):
    """Force and torque on particle 1 for an already-updated ``delta_t``."""
    n, vt, d = geom.normal, geom.tangential_velocity, _vec(delta_t)
    out = _force(
        n[0], n[1], n[2], geom.overlap, geom.normal_speed,
        vt[0], vt[1], vt[2], d[0], d[1], d[2],
        coeffs.k_t, coeffs.k_n, coeffs.eta_n, mu_d, r1,
    )
    return ContactForce(
        force=np.array(out[0:3]),
        torque=np.array(out[3:6]),
        tangential_displacement=np.array(out[6:9]),
        capped=bool(out[9]),
        tangential_magnitude=out[10],
        normal_magnitude=out[11],
    )


def sliding_cap(f_t, f_n_magnitude, mu_d, delta_t, k_t):
    """Apply the Coulomb cap alone; returns ``(f_t, delta_t, capped)``."""
    f, d = _vec(f_t), _vec(delta_t)
    ft = math.sqrt(f @ f)
    out = _cap(f[0], f[1], f[2], ft, mu_d * f_n_magnitude, d[0], d[1], d[2], k_t)
    return np.array(out[0:3]), np.array(out[3:6]), bool(out[6])


def closest_point_rectangle(pos, corner, edge_u, edge_v):
    p, c, u, w = _vec(pos), _vec(corner), _vec(edge_u), _vec(edge_v)
    q = np.array(_closest_on_rectangle(*p, *c, *u, *w))
    return q, float(np.linalg.norm(q - p))


def closest_point_line(pos, a, b):
    p, a, b = _vec(pos), _vec(a), _vec(b)
    q = np.array(_closest_on_segment(*p, *a, *b))
    return q, float(np.linalg.norm(q - p))
