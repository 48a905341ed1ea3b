"""Flat ``key = value`` run configuration.

Example::

    dt = 1e-5
    domain.min.x = 0
    ...
    material.glass.poisson = 0.25
    particles.material = glass

Vectors (wall corners and edges) are three numbers separated by spaces or
commas.  ``#`` starts a comment.  Unknown keys and malformed values are
rejected with the offending key and line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import ConfigError
from .physics import MaterialParams
from .simt import VARIANTS, WarpCostParams

_MATERIAL_FIELDS = {
    "poisson": "poisson_ratio",
    "shear_modulus": "shear_modulus",
    "youngs_modulus": "youngs_modulus",
    "restitution": "restitution",
    "mu_d": "sliding_friction",
}
_AXES = ("x", "y", "z")
_NAME = r"[A-Za-z_][A-Za-z0-9_\-]*"


@dataclass
class ParticleBlock:
    count: int = 0
    radius: float = 0.0
    mass: float = 0.0
    material: str = ""
    init: str = "lattice"
    jitter: float = 0.1
    lattice_spacing: float = None
    snapshot: str = None

    @property
    def spacing(self):
        return self.lattice_spacing if self.lattice_spacing is not None else 2.2 * self.radius


@dataclass
class RectSpec:
    corner: tuple
    edge_u: tuple
    edge_v: tuple
    material: str


@dataclass
class LineSpec:
    a: tuple
    b: tuple
    material: str


@dataclass
class SimConfig:
    dt: float
    domain_min: tuple
    domain_max: tuple
    particles: ParticleBlock
    materials: dict
    gravity: tuple = (0.0, 0.0, -9.81)
    cell_size: float = None
    restitution_pairs: dict = field(default_factory=dict)
    rects: dict = field(default_factory=dict)
    lines: dict = field(default_factory=dict)
    capacity: int = 16
    warp: WarpCostParams = field(default_factory=WarpCostParams)
    steps: int = 100
    warmup_steps: int = 0
    snapshot_every: int = 0
    collide_variant: str = "baseline"
    seed: int = 0
    base_dir: Path = field(default=None, compare=False)

    def with_overrides(self, steps=None, variant=None, seed=None):
        cfg = self
        if steps is not None:
            cfg = replace(cfg, steps=int(steps))
        if variant is not None:
            if variant not in VARIANTS:
                raise ConfigError(f"unknown collide variant {variant!r}", key="run.collide_variant")
            cfg = replace(cfg, collide_variant=variant)
        if seed is not None:
            cfg = replace(cfg, seed=int(seed))
        return cfg

    def material_names(self):
        return list(self.materials)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


def _float(key, text, line):
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"expected a number, got {text!r}", key=key, line=line) from None


def _int(key, text, line):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"expected an integer, got {text!r}", key=key, line=line) from None


def _vector(key, text, line):
    parts = [p for p in re.split(r"[,\s]+", text.strip()) if p]
    if len(parts) != 3:
        raise ConfigError(f"expected three components, got {text!r}", key=key, line=line)
    return tuple(_float(key, p, line) for p in parts)


def read_pairs(text):
    """``[(key, value, line)]`` from config text; raises on malformed lines."""
    out = []
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, value = (s.strip() for s in body.split("=", 1))
        if not key or not value:
            raise ConfigError("empty key or value", key=key or None, line=lineno)
        if key in seen:
            raise ConfigError(f"duplicate key (first on line {seen[key]})", key=key, line=lineno)
        seen[key] = lineno
        out.append((key, value, lineno))
    return out


def parse_text(text, base_dir=None):
    pairs = read_pairs(text)
    raw = {}
    lines = {}
    materials = {}
    rects, lines_w, eps_pairs = {}, {}, {}
    scalar = {
        "dt", "gravity.x", "gravity.y", "gravity.z",
        *(f"domain.{e}.{a}" for e in ("min", "max") for a in _AXES),
        "grid.cell_size",
        *(f"particles.{k}" for k in ("count", "radius", "mass", "material", "init",
                                     "jitter", "lattice_spacing", "snapshot")),
        "contacts.capacity",
        *(f"simt.{k}" for k in ("warp_size", "c_check", "c_force", "c_store", "c_load")),
        *(f"run.{k}" for k in ("steps", "warmup_steps", "snapshot_every", "collide_variant")),
        "seed",
    }
    for key, value, ln in pairs:
        lines[key] = ln
        if key in scalar:
            raw[key] = value
            continue
        m = re.fullmatch(rf"material\.({_NAME})\.(\w+)", key)
        if m and m.group(2) in _MATERIAL_FIELDS:
            materials.setdefault(m.group(1), {})[m.group(2)] = (_float(key, value, ln), ln)
            continue
        m = re.fullmatch(rf"restitution\.({_NAME})\.({_NAME})", key)
        if m:
            eps_pairs[(m.group(1), m.group(2))] = _float(key, value, ln)
            continue
        m = re.fullmatch(r"wall\.rect\.(\d+)\.(corner|edge_u|edge_v|material)", key)
        if m:
            rects.setdefault(int(m.group(1)), {})[m.group(2)] = (value, ln)
            continue
        m = re.fullmatch(r"wall\.line\.(\d+)\.(a|b|material)", key)
        if m:
            lines_w.setdefault(int(m.group(1)), {})[m.group(2)] = (value, ln)
            continue
        raise ConfigError("unknown key", key=key, line=ln)

    def need(key):
        if key not in raw:
            raise ConfigError("missing required key", key=key)
        return raw[key]

    def get(key, conv, default):
        if key not in raw:
            return default
        return conv(key, raw[key], lines[key])

    dt = _float("dt", need("dt"), lines.get("dt"))
    if not dt > 0.0:
        raise ConfigError("must be positive", key="dt", line=lines["dt"])

    lo = tuple(_float(k, need(k), lines.get(k)) for k in (f"domain.min.{a}" for a in _AXES))
    hi = tuple(_float(k, need(k), lines.get(k)) for k in (f"domain.max.{a}" for a in _AXES))
    for a, l, h in zip(_AXES, lo, hi):
        if not h > l:
            raise ConfigError("domain box is degenerate", key=f"domain.max.{a}")

    gravity = tuple(get(f"gravity.{a}", _float, d) for a, d in zip(_AXES, (0.0, 0.0, -9.81)))

    if not materials:
        raise ConfigError("at least one material is required", key="material")
    mats = {}
    for name, fields_ in materials.items():
        for short in _MATERIAL_FIELDS:
            if short not in fields_:
                raise ConfigError("missing required key", key=f"material.{name}.{short}")
        try:
            mats[name] = MaterialParams(**{_MATERIAL_FIELDS[k]: v for k, (v, _) in fields_.items()})
        except ConfigError as exc:
            raise ConfigError(str(exc).split(": ", 1)[-1], key=f"material.{name}.{exc.key}") from None

    for (a, b), eps in eps_pairs.items():
        for nm in (a, b):
            if nm not in mats:
                raise ConfigError(f"unknown material {nm!r}", key=f"restitution.{a}.{b}")
        if not 0.0 < eps <= 1.0:
            raise ConfigError("must lie in (0, 1]", key=f"restitution.{a}.{b}")

    init = raw.get("particles.init", "lattice")
    if init not in ("lattice", "snapshot"):
        raise ConfigError("expected 'lattice' or 'snapshot'", key="particles.init")
    pb = ParticleBlock(
        count=_int("particles.count", need("particles.count"), lines.get("particles.count"))
        if init == "lattice" else get("particles.count", _int, 0),
        radius=_float("particles.radius", need("particles.radius"), lines.get("particles.radius")),
        mass=_float("particles.mass", need("particles.mass"), lines.get("particles.mass")),
        material=need("particles.material"),
        init=init,
        jitter=get("particles.jitter", _float, 0.1),
        lattice_spacing=get("particles.lattice_spacing", _float, None),
        snapshot=raw.get("particles.snapshot"),
    )
    if pb.count < 0:
        raise ConfigError("must be >= 0", key="particles.count")
    if not pb.radius > 0.0:
        raise ConfigError("must be positive", key="particles.radius")
    if not pb.mass > 0.0:
        raise ConfigError("must be positive", key="particles.mass")
    if pb.material not in mats:
        raise ConfigError(f"unknown material {pb.material!r}", key="particles.material")
    if not 0.0 <= pb.jitter < 0.5:
        raise ConfigError("must lie in [0, 0.5)", key="particles.jitter")
    if not pb.spacing > 2.0 * pb.radius:
        raise ConfigError("must exceed the particle diameter", key="particles.lattice_spacing")
    if init == "snapshot" and pb.snapshot is None:
        raise ConfigError("missing required key", key="particles.snapshot")

    rect_specs = {}
    for idx, f in sorted(rects.items()):
        for k in ("corner", "edge_u", "edge_v", "material"):
            if k not in f:
                raise ConfigError("missing required key", key=f"wall.rect.{idx}.{k}")
        mat = f["material"][0]
        if mat not in mats:
            raise ConfigError(f"unknown material {mat!r}", key=f"wall.rect.{idx}.material")
        rect_specs[idx] = RectSpec(
            *(_vector(f"wall.rect.{idx}.{k}", *f[k]) for k in ("corner", "edge_u", "edge_v")), mat
        )
    line_specs = {}
    for idx, f in sorted(lines_w.items()):
        for k in ("a", "b", "material"):
            if k not in f:
                raise ConfigError("missing required key", key=f"wall.line.{idx}.{k}")
        mat = f["material"][0]
        if mat not in mats:
            raise ConfigError(f"unknown material {mat!r}", key=f"wall.line.{idx}.material")
        line_specs[idx] = LineSpec(*(_vector(f"wall.line.{idx}.{k}", *f[k]) for k in ("a", "b")), mat)

    cell_size = get("grid.cell_size", _float, None)
    if cell_size is not None and not cell_size > 0.0:
        raise ConfigError("must be positive", key="grid.cell_size")

    capacity = get("contacts.capacity", _int, 16)
    if capacity < 1:
        raise ConfigError("must be >= 1", key="contacts.capacity")

    try:
        warp = WarpCostParams(
            warp_size=get("simt.warp_size", _int, 32),
            c_check=get("simt.c_check", _float, 1.0),
            c_force=get("simt.c_force", _float, 20.0),
            c_store=get("simt.c_store", _float, 1.0),
            c_load=get("simt.c_load", _float, 1.0),
        )
    except ValueError as exc:
        raise ConfigError(str(exc), key="simt") from None

    variant = raw.get("run.collide_variant", "baseline")
    if variant not in VARIANTS:
        raise ConfigError(f"expected one of {VARIANTS}", key="run.collide_variant")
    steps = get("run.steps", _int, 100)
    warmup = get("run.warmup_steps", _int, 0)
    every = get("run.snapshot_every", _int, 0)
    for key, v in (("run.steps", steps), ("run.warmup_steps", warmup), ("run.snapshot_every", every)):
        if v < 0:
            raise ConfigError("must be >= 0", key=key)

    return SimConfig(
        dt=dt, domain_min=lo, domain_max=hi, particles=pb, materials=mats,
        gravity=gravity, cell_size=cell_size, restitution_pairs=eps_pairs,
        rects=rect_specs, lines=line_specs, capacity=capacity, warp=warp,
        steps=steps, warmup_steps=warmup, snapshot_every=every,
        collide_variant=variant, seed=get("seed", _int, 0),
        base_dir=Path(base_dir) if base_dir is not None else None,
    )


def parse_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_text(text, base_dir=path.parent)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _vec_text(v):
    return " ".join(repr(float(x)) for x in v)


def serialize(cfg):
    """Config text that parses back to an equal :class:`SimConfig`."""
    out = [f"dt = {cfg.dt!r}"]
    out += [f"gravity.{a} = {g!r}" for a, g in zip(_AXES, cfg.gravity)]
    out += [f"domain.min.{a} = {v!r}" for a, v in zip(_AXES, cfg.domain_min)]
    out += [f"domain.max.{a} = {v!r}" for a, v in zip(_AXES, cfg.domain_max)]
    if cfg.cell_size is not None:
        out.append(f"grid.cell_size = {cfg.cell_size!r}")
    for name, m in cfg.materials.items():
        for short, attr in _MATERIAL_FIELDS.items():
            out.append(f"material.{name}.{short} = {getattr(m, attr)!r}")
    for (a, b), eps in cfg.restitution_pairs.items():
        out.append(f"restitution.{a}.{b} = {eps!r}")
    p = cfg.particles
    if p.init == "lattice" or p.count:
        out.append(f"particles.count = {p.count}")
    out += [
        f"particles.radius = {p.radius!r}",
        f"particles.mass = {p.mass!r}",
        f"particles.material = {p.material}",
        f"particles.init = {p.init}",
        f"particles.jitter = {p.jitter!r}",
    ]
    if p.lattice_spacing is not None:
        out.append(f"particles.lattice_spacing = {p.lattice_spacing!r}")
    if p.snapshot is not None:
        out.append(f"particles.snapshot = {p.snapshot}")
    for i, r in cfg.rects.items():
        out += [
            f"wall.rect.{i}.corner = {_vec_text(r.corner)}",
            f"wall.rect.{i}.edge_u = {_vec_text(r.edge_u)}",
            f"wall.rect.{i}.edge_v = {_vec_text(r.edge_v)}",
            f"wall.rect.{i}.material = {r.material}",
        ]
    for i, s in cfg.lines.items():
        out += [
            f"wall.line.{i}.a = {_vec_text(s.a)}",
            f"wall.line.{i}.b = {_vec_text(s.b)}",
            f"wall.line.{i}.material = {s.material}",
        ]
    w = cfg.warp
    out += [
        f"contacts.capacity = {cfg.capacity}",
        f"simt.warp_size = {w.warp_size}",
        f"simt.c_check = {w.c_check!r}",
        f"simt.c_force = {w.c_force!r}",
        f"simt.c_store = {w.c_store!r}",
        f"simt.c_load = {w.c_load!r}",
        f"run.steps = {cfg.steps}",
        f"run.warmup_steps = {cfg.warmup_steps}",
        f"run.snapshot_every = {cfg.snapshot_every}",
        f"run.collide_variant = {cfg.collide_variant}",
        f"seed = {cfg.seed}",
    ]
    return "\n".join(out) + "\n"
