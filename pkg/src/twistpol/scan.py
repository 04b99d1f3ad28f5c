"""Radial, grid and single-point scans over the impact parameter.

A scan is described by a :class:`ScanConfig`, which round-trips through a
flat ``key = value`` text format::

    kind = grid
    theta_k = 0.1
    l_f = 1
    field_mask = -1, 0, 1
    observables = B1, B2
    half_width = 3.0
    n_cells = 201
    mode.0.m_gamma = -2
    mode.0.helicity = 1
    mode.0.weight_re = 1.0
    mode.0.weight_im = 0.0

Observables: ``lz``, ``B<K>``, ``T<K><M>`` (complex, e.g. ``T2-1``),
``cartesian`` (l_f = 1), ``photon_sdm`` and ``relations`` (l_f = 1).
"""

from __future__ import annotations

import math
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .beam import Beam, TwistedMode, field_components
from .density import pure_density
from .polarization import (
    CARTESIAN_FIELDS,
    alignment,
    cartesian_from_density,
    mean_lz,
    photon_atom_relations,
    tensor_polarization,
)
from .transition import AtomPosition, TransitionSpec, amplitude_set

__all__ = [
    "ConfigError",
    "ModeSpec",
    "ScanConfig",
    "ScanGrid",
    "dump_config",
    "emit_csv",
    "emit_plot_script",
    "evaluate",
    "parse_config",
    "run_grid_scan",
    "run_point",
    "run_radial_scan",
    "run_scan",
]

# Cells whose excitation probability falls below this fraction of the
# scan maximum are nodes.
NODE_RELATIVE = 1e-12

KINDS = ("radial", "grid", "point")
_T_RE = re.compile(r"^T(\d)(-?\d)$")
_B_RE = re.compile(r"^B(\d)$")
_SDM_LABEL = {1: "p", 0: "0", -1: "m"}


class ConfigError(ValueError):
    """Invalid scan configuration; the message names the offending field."""


@dataclass(frozen=True)
class ModeSpec:
    m_gamma: int
    helicity: int
    weight_re: float = 1.0
    weight_im: float = 0.0


@dataclass(frozen=True)
class ScanConfig:
    modes: tuple[ModeSpec, ...] = (ModeSpec(1, 1),)
    theta_k: float = 0.1
    l_f: int = 1
    field_mask: tuple[int, ...] = (-1, 0, 1)
    kind: str = "radial"
    b_max: float = 20.0
    n_steps: int = 401
    phi_b: float = 0.0
    half_width: float = 3.0
    n_cells: int = 201
    b: float = 0.5
    observables: tuple[str, ...] = ("lz",)

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        object.__setattr__(self, "field_mask", tuple(sorted(set(self.field_mask))))
        object.__setattr__(self, "observables", tuple(self.observables))
        validate(self)

    def beam(self) -> Beam:
        return Beam(tuple(TwistedMode(m.m_gamma, m.helicity, self.theta_k,
                                      complex(m.weight_re, m.weight_im))
                          for m in self.modes))

    def transition(self) -> TransitionSpec:
        return TransitionSpec(self.l_f, frozenset(self.field_mask))


def _fail(name: str, msg: str):
    raise ConfigError(f"{name}: {msg}")


def validate(cfg: ScanConfig) -> None:
    if not cfg.modes:
        _fail("mode", "at least one mode is required")
    for i, m in enumerate(cfg.modes):
        if m.helicity not in (-1, 1):
            _fail(f"mode.{i}.helicity", f"must be +1 or -1, got {m.helicity}")
        if m.weight_re == 0 and m.weight_im == 0:
            _fail(f"mode.{i}.weight_re", "mode weight must be non-zero")
    if not 0 < cfg.theta_k < math.pi / 2:
        _fail("theta_k", f"must lie in (0, pi/2), got {cfg.theta_k}")
    if cfg.l_f < 1:
        _fail("l_f", f"must be >= 1, got {cfg.l_f}")
    if not cfg.field_mask or not set(cfg.field_mask) <= {-1, 0, 1}:
        _fail("field_mask", f"non-empty subset of -1, 0, 1 required, got {cfg.field_mask}")
    if cfg.kind not in KINDS:
        _fail("kind", f"must be one of {', '.join(KINDS)}, got {cfg.kind!r}")
    if cfg.n_steps < 2:
        _fail("n_steps", f"must be >= 2, got {cfg.n_steps}")
    if cfg.b_max <= 0:
        _fail("b_max", f"must be positive, got {cfg.b_max}")
    if cfg.half_width <= 0:
        _fail("half_width", f"must be positive, got {cfg.half_width}")
    if cfg.n_cells < 2:
        _fail("n_cells", f"must be >= 2, got {cfg.n_cells}")
    if cfg.b < 0:
        _fail("b", f"must be non-negative, got {cfg.b}")
    if not cfg.observables:
        _fail("observables", "at least one observable is required")
    for name in cfg.observables:
        observable_columns(name, cfg.l_f)


def observable_columns(name: str, l_f: int) -> list[str]:
    """CSV column names produced by one observable; validates the name."""
    if name == "lz":
        return ["lz"]
    if m := _B_RE.match(name):
        K = int(m.group(1))
        if not 1 <= K <= 2 * l_f:
            _fail("observables", f"{name} needs 1 <= K <= {2 * l_f}")
        return [name]
    if m := _T_RE.match(name):
        K, M = int(m.group(1)), int(m.group(2))
        if not 0 <= K <= 2 * l_f or abs(M) > K:
            _fail("observables", f"{name} out of range for l_f = {l_f}")
        return [f"{name}_re", f"{name}_im"]
    if name == "cartesian":
        if l_f != 1:
            _fail("observables", "cartesian requires l_f = 1")
        return list(CARTESIAN_FIELDS)
    if name == "photon_sdm":
        cols = []
        for i, a in enumerate((1, 0, -1)):
            for b in (1, 0, -1)[i:]:
                tag = f"sdm_{_SDM_LABEL[a]}{_SDM_LABEL[b]}"
                cols += [tag] if a == b else [f"{tag}_re", f"{tag}_im"]
        return cols
    if name == "relations":
        if l_f != 1:
            _fail("observables", "relations requires l_f = 1")
        return ["relation_max_dev"]
    _fail("observables", f"unknown observable {name!r}")


# ---------------------------------------------------------------------------
# Config text format
# ---------------------------------------------------------------------------

_SCALARS = {f.name: f for f in fields(ScanConfig) if f.name not in ("modes", "field_mask", "observables")}
_MODE_KEYS = {f.name: f.type for f in fields(ModeSpec)}


def _convert(name: str, raw: str, kind: str):
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        return raw
    except ValueError:
        _fail(name, f"cannot parse {raw!r} as {kind}")


def parse_config(text: str) -> ScanConfig:
    """Parse the ``key = value`` format; raises :class:`ConfigError`."""
    values: dict = {}
    modes: dict[int, dict] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key.startswith("mode."):
            parts = key.split(".")
            if len(parts) != 3 or not parts[1].isdigit() or parts[2] not in _MODE_KEYS:
                raise ConfigError(f"line {lineno}: bad mode key {key!r}")
            kind = _MODE_KEYS[parts[2]]
            modes.setdefault(int(parts[1]), {})[parts[2]] = _convert(key, raw, kind)
        elif key in ("field_mask", "observables"):
            items = [s.strip() for s in raw.split(",") if s.strip()]
            if key == "field_mask":
                items = [_convert(key, s, "int") for s in items]
            values[key] = tuple(items)
        elif key in _SCALARS:
            values[key] = _convert(key, raw, _SCALARS[key].type)
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    if modes:
        specs = []
        for idx in sorted(modes):
            entry = modes[idx]
            for req in ("m_gamma", "helicity"):
                if req not in entry:
                    _fail(f"mode.{idx}.{req}", "missing")
            specs.append(ModeSpec(**entry))
        values["modes"] = tuple(specs)
    return ScanConfig(**values)


def dump_config(cfg: ScanConfig) -> str:
    lines = []
    for name in _SCALARS:
        lines.append(f"{name} = {getattr(cfg, name)!r}".replace("'", ""))
    lines.append("field_mask = " + ", ".join(str(v) for v in cfg.field_mask))
    lines.append("observables = " + ", ".join(cfg.observables))
    for i, m in enumerate(cfg.modes):
        for key in _MODE_KEYS:
            lines.append(f"mode.{i}.{key} = {getattr(m, key)!r}")
    return "\n".join(lines) + "\n"


def load_config(path) -> ScanConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    return parse_config(text)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

@dataclass
class ScanGrid:
    """Scan axes, per-cell observable columns and the node mask.

    ``columns`` and ``node_mask`` share ``shape``; masked cells hold NaN.
    Grid arrays are indexed ``[i_x, i_y]``.
    """

    kind: str
    axes: dict[str, np.ndarray]
    columns: dict[str, np.ndarray]
    node_mask: np.ndarray
    config: ScanConfig | None = field(default=None, repr=False)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.node_mask.shape

    def coordinates(self) -> dict[str, np.ndarray]:
        """Per-cell coordinate arrays, in the CSV axis order."""
        if self.kind == "grid":
            bx, by = np.meshgrid(self.axes["b_x"], self.axes["b_y"], indexing="ij")
            return {"b_x": bx, "b_y": by}
        return dict(self.axes)


def _amplitude_vectors(beam, spec, b, phi, workers: int) -> np.ndarray:
    # Elementwise work only, so the split into chunks cannot change values.
    def job(sl):
        return amplitude_set(beam, spec, AtomPosition(b[sl], phi[sl])).vector()

    if workers <= 1 or b.shape[0] < 2:
        return job(slice(None))
    bounds = np.linspace(0, b.shape[0], min(workers, b.shape[0]) + 1).astype(int)
    slices = [slice(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:])]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(job, slices))
    return np.concatenate(parts, axis=0)


def evaluate(beam: Beam, spec: TransitionSpec, b, phi_b, observables,
             workers: int = 1, node_relative: float = NODE_RELATIVE):
    """Observable columns and node mask on arrays ``b``, ``phi_b``."""
    b, phi = np.broadcast_arrays(np.asarray(b, float), np.asarray(phi_b, float))
    b = np.atleast_1d(b)
    phi = np.atleast_1d(phi)
    vec = _amplitude_vectors(beam, spec, b, phi, workers)
    intensity = np.sum(np.abs(vec) ** 2, axis=-1)
    peak = intensity.max() if intensity.size else 0.0
    floor = node_relative * peak if peak > 0 else 0.0
    rho, node = pure_density(vec, floor)
    node = node | (intensity <= 0.0)

    cols: dict[str, np.ndarray] = {}
    for name in observables:
        if name == "lz":
            cols["lz"] = mean_lz(rho)
        elif m := _B_RE.match(name):
            cols[name] = alignment(rho, int(m.group(1)))
        elif m := _T_RE.match(name):
            t = tensor_polarization(rho, int(m.group(1)), int(m.group(2)))
            cols[f"{name}_re"], cols[f"{name}_im"] = np.real(t), np.imag(t)
        elif name == "cartesian":
            cols.update(cartesian_from_density(rho).as_dict())
        elif name == "photon_sdm":
            fvec = field_components(beam, b, phi).vector()
            fint = np.sum(np.abs(fvec) ** 2, axis=-1)
            fpeak = fint.max()
            frho, fnode = pure_density(fvec, node_relative * fpeak if fpeak > 0 else 0.0)
            names = observable_columns("photon_sdm", spec.l_f)
            it = iter(names)
            for i in range(3):
                for j in range(i, 3):
                    v = frho[..., i, j]
                    if i == j:
                        cols[next(it)] = np.real(v)
                    else:
                        cols[next(it)] = np.real(v)
                        cols[next(it)] = np.imag(v)
            for n in names:
                cols[n] = np.where(fnode, np.nan, cols[n])
        elif name == "relations":
            with np.errstate(invalid="ignore"):
                rep = photon_atom_relations(beam, AtomPosition(b, phi))
            cols["relation_max_dev"] = np.asarray(rep.max_discrepancy, float)
        else:
            raise ConfigError(f"observables: unknown observable {name!r}")
    for key, v in cols.items():
        v = np.asarray(v, float)
        if key.startswith("sdm_"):
            cols[key] = v
        else:
            cols[key] = np.where(node, np.nan, v)
    return cols, node


def run_radial_scan(cfg: ScanConfig, workers: int = 1) -> ScanGrid:
    if cfg.kind != "radial":
        cfg = replace(cfg, kind="radial")
    b = np.linspace(0.0, cfg.b_max, cfg.n_steps)
    cols, node = evaluate(cfg.beam(), cfg.transition(), b, np.full_like(b, cfg.phi_b),
                          cfg.observables, workers)
    return ScanGrid("radial", {"b": b}, cols, node, cfg)


def run_grid_scan(cfg: ScanConfig, workers: int = 1) -> ScanGrid:
    if cfg.kind != "grid":
        cfg = replace(cfg, kind="grid")
    axis = np.linspace(-cfg.half_width, cfg.half_width, cfg.n_cells)
    bx, by = np.meshgrid(axis, axis, indexing="ij")
    pos = AtomPosition.from_cartesian(bx, by)
    cols, node = evaluate(cfg.beam(), cfg.transition(), pos.b, pos.phi_b,
                          cfg.observables, workers)
    return ScanGrid("grid", {"b_x": axis, "b_y": axis.copy()}, cols, node, cfg)


def run_point(cfg: ScanConfig) -> ScanGrid:
    """Single-cell scan at ``(cfg.b, cfg.phi_b)``; a node is relative to itself."""
    if cfg.kind != "point":
        cfg = replace(cfg, kind="point")
    b = np.array([cfg.b])
    phi = np.array([cfg.phi_b])
    cols, node = evaluate(cfg.beam(), cfg.transition(), b, phi, cfg.observables, 1, 0.0)
    return ScanGrid("point", {"b": b, "phi_b": phi}, cols, node, cfg)


def run_scan(cfg: ScanConfig, workers: int = 1) -> ScanGrid:
    if cfg.kind == "radial":
        return run_radial_scan(cfg, workers)
    if cfg.kind == "grid":
        return run_grid_scan(cfg, workers)
    return run_point(cfg)


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

NODE = "NODE"


def _fmt(v: float) -> str:
    return NODE if math.isnan(v) else f"{v:.17e}"


def emit_csv(grid: ScanGrid, path) -> Path:
    """Header plus one row per cell; NaN (node) values are written as NODE."""
    path = Path(path)
    coords = grid.coordinates()
    names = list(coords) + list(grid.columns)
    flat = [np.asarray(a, float).ravel() for a in coords.values()]
    flat += [np.asarray(a, float).ravel() for a in grid.columns.values()]
    lines = [",".join(names)]
    for row in zip(*flat):
        lines.append(",".join(_fmt(float(v)) for v in row))
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc.strerror or exc}") from exc
    return path


_PLOT_HEADER = '''\
#!/usr/bin/env python3
"""Plots for {csv} (generated by twistpol)."""
import csv
import os

import numpy as np
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
CSV_FILE = os.path.join(HERE, {csv!r})


def load():
    with open(CSV_FILE, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = np.array([[np.nan if v == "NODE" else float(v) for v in r] for r in body])
    return header, data

'''

_PLOT_RADIAL = '''\
def main():
    header, data = load()
    b = data[:, 0]
    fig, ax = plt.subplots()
    for k, name in enumerate(header[1:], start=1):
        ax.plot(b, data[:, k], label=name)
    ax.set_xlabel("b (wavelengths)")
    ax.legend()
    fig.savefig(os.path.join(HERE, {png!r}), dpi=150)
    plt.show()


if __name__ == "__main__":
    main()
'''

_PLOT_GRID = '''\
def main():
    header, data = load()
    nx, ny = {nx}, {ny}
    bx = data[:, 0].reshape(nx, ny)
    by = data[:, 1].reshape(nx, ny)
    for k, name in enumerate(header[2:], start=2):
        z = data[:, k].reshape(nx, ny)
        fig = plt.figure(figsize=(11, 4.5))
        ax = fig.add_subplot(1, 2, 1)
        cs = ax.contourf(bx, by, z, levels=40)
        fig.colorbar(cs, ax=ax)
        ax.set_xlabel("b_x (wavelengths)")
        ax.set_ylabel("b_y (wavelengths)")
        ax.set_title(name)
        ax3 = fig.add_subplot(1, 2, 2, projection="3d")
        ax3.plot_surface(bx, by, np.ma.masked_invalid(z), cmap="viridis")
        ax3.set_xlabel("b_x")
        ax3.set_ylabel("b_y")
        fig.savefig(os.path.join(HERE, {stem!r} + "_" + name + ".png"), dpi=150)
    plt.show()


if __name__ == "__main__":
    main()
'''


def emit_plot_script(grid: ScanGrid, csv_path, path=None) -> Path:
    """Write a matplotlib script that reads ``csv_path`` (same directory).

    Radial scans get line plots; grids get contour and 3-D surface plots.
    """
    csv_path = Path(csv_path)
    path = Path(path) if path is not None else csv_path.with_name(csv_path.stem + "_plot.py")
    text = _PLOT_HEADER.format(csv=csv_path.name)
    if grid.kind == "grid":
        nx, ny = grid.shape
        text += _PLOT_GRID.format(nx=nx, ny=ny, stem=csv_path.stem)
    else:
        text += _PLOT_RADIAL.format(png=csv_path.stem + ".png")
    try:
        path.write_text(text)
        os.chmod(path, 0o755)
    except OSError as exc:
        raise OSError(f"cannot write plot script to {path}: {exc.strerror or exc}") from exc
    return path
