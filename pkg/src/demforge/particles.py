"""Structure-of-arrays particle state."""

from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np


@dataclass
class ParticleSet:
    """Parallel per-particle arrays.

    ``ids`` carries each particle's original index so snapshots stay stable
    while the arrays are permuted into cell order every step.
    """

    pos: np.ndarray
    vel: np.ndarray
    omega: np.ndarray
    radius: np.ndarray
    mass: np.ndarray
    material: np.ndarray
    ids: np.ndarray = field(default=None)

    def __post_init__(self):
        n = len(self.radius)
        self.pos = np.ascontiguousarray(self.pos, dtype=np.float64).reshape(n, 3)
        self.vel = np.ascontiguousarray(self.vel, dtype=np.float64).reshape(n, 3)
        self.omega = np.ascontiguousarray(self.omega, dtype=np.float64).reshape(n, 3)
        self.radius = np.ascontiguousarray(self.radius, dtype=np.float64)
        self.mass = np.ascontiguousarray(self.mass, dtype=np.float64)
        self.material = np.ascontiguousarray(self.material, dtype=np.int64)
        if self.ids is None:
            self.ids = np.arange(n, dtype=np.int64)
        self.ids = np.ascontiguousarray(self.ids, dtype=np.int64)
        if not (len(self.mass) == len(self.material) == len(self.ids) == n):
            raise ValueError("particle arrays differ in length")
        if n and (self.radius.min() <= 0.0 or self.mass.min() <= 0.0):
            raise ValueError("radii and masses must be positive")

    def __len__(self):
        return len(self.radius)

    @classmethod
    def uniform(cls, pos, radius, mass, material=0, vel=None, omega=None):
        pos = np.asarray(pos, dtype=np.float64)
        n = len(pos)
        return cls(
            pos=pos,
            vel=np.zeros((n, 3)) if vel is None else vel,
            omega=np.zeros((n, 3)) if omega is None else omega,
            radius=np.full(n, radius, dtype=np.float64),
            mass=np.full(n, mass, dtype=np.float64),
            material=np.full(n, material, dtype=np.int64),
        )

    def copy(self):
        return ParticleSet(**{f.name: getattr(self, f.name).copy() for f in fields(self)})

    def permuted(self, perm):
        """New set whose slot ``i`` holds old particle ``perm[i]``."""
        return ParticleSet(**{f.name: getattr(self, f.name)[perm] for f in fields(self)})

    def inertia(self):
        return 0.4 * self.mass * self.radius**2

    def kinetic_energy(self):
        trans = 0.5 * np.sum(self.mass * np.einsum("ij,ij->i", self.vel, self.vel))
        rot = 0.5 * np.sum(self.inertia() * np.einsum("ij,ij->i", self.omega, self.omega))
        return trans + rot

    def momentum(self):
        return (self.mass[:, None] * self.vel).sum(axis=0)
