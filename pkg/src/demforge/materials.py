"""Material registry and the per-pair lookup tables the kernels read."""

from __future__ import annotations

import numpy as np

from .physics import (
    MaterialParams,
    compliance_brackets,
    pair_friction,
    pair_restitution,
    restitution_alpha,
)


class MaterialTable:
    """Named materials plus dense ``(M, M)`` pair tables.

    ``restitution_pairs`` maps ``(a, b)`` (ids or names) to an explicit pair
    restitution; unlisted pairs use the geometric mean.
    """

    def __init__(self, materials, names=None, restitution_pairs=None):
        self.materials = list(materials)
        if not self.materials:
            raise ValueError("at least one material is required")
        self.names = list(names) if names is not None else [str(i) for i in range(len(self.materials))]
        m = len(self.materials)
        self.restitution = np.zeros((m, m))
        for a in range(m):
            for b in range(m):
                self.restitution[a, b] = pair_restitution(self.materials[a], self.materials[b])
        for (a, b), eps in (restitution_pairs or {}).items():
            a, b = self.index(a), self.index(b)
            if not 0.0 < eps <= 1.0:
                raise ValueError("pair restitution must lie in (0, 1]")
            self.restitution[a, b] = self.restitution[b, a] = eps

        self.bracket_t = np.zeros((m, m))
        self.bracket_n = np.zeros((m, m))
        self.alpha = np.zeros((m, m))
        self.mu = np.zeros((m, m))
        for a in range(m):
            for b in range(m):
                ma, mb = self.materials[a], self.materials[b]
                self.bracket_t[a, b], self.bracket_n[a, b] = compliance_brackets(ma, mb)
                self.alpha[a, b] = restitution_alpha(self.restitution[a, b])
                self.mu[a, b] = pair_friction(ma, mb)

    def __len__(self):
        return len(self.materials)

    def index(self, key):
        if isinstance(key, str):
            return self.names.index(key)
        return int(key)

    def __getitem__(self, key):
        return self.materials[self.index(key)]

    @classmethod
    def single(cls, **kwargs):
        return cls([MaterialParams(**kwargs)])
