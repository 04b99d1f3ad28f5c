"""Command-line interface: ``twistpol {ratio,scan-lz,grid-bk,point,check}``."""

from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import checks
from .density import NodePointError
from .polarization import (
    density_from_amplitudes,
    photon_atom_relations,
    polarization_report,
)
from .beam import photon_density_matrix
from .scan import (
    ConfigError,
    ModeSpec,
    ScanConfig,
    emit_csv,
    emit_plot_script,
    load_config,
    run_grid_scan,
    run_radial_scan,
)
from .transition import AtomPosition, amplitude_set, quintiero_ratio

EXPERIMENT = (2.21, 0.13)
SUPERPOSITION = (ModeSpec(-2, 1), ModeSpec(3, -1))


def _mode(text: str) -> ModeSpec:
    parts = [p.strip() for p in text.split(",")]
    if not 2 <= len(parts) <= 4:
        raise argparse.ArgumentTypeError("mode is M_GAMMA,HELICITY[,WEIGHT_RE[,WEIGHT_IM]]")
    try:
        vals = [int(parts[0]), int(parts[1])] + [float(p) for p in parts[2:]]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    return ModeSpec(*vals)


def _common(p: argparse.ArgumentParser, out_default: str | None = None):
    p.add_argument("--config", type=Path, help="key = value scan configuration file")
    p.add_argument("--theta-k", type=float, help="cone (pitch) angle in radians")
    p.add_argument("--no-longitudinal", action="store_true", help="drop the A_z field component")
    p.add_argument("--mode", type=_mode, action="append", metavar="M,L[,WRE[,WIM]]",
                   help="beam mode; repeat for a superposition")
    p.add_argument("--l-f", type=int, help="final orbital angular momentum")
    p.add_argument("--observables", help="comma-separated observable list")
    if out_default is not None:
        p.add_argument("--out", type=Path, default=Path(out_default), help="CSV output path")


def _config(args, base: ScanConfig) -> ScanConfig:
    cfg = load_config(args.config) if args.config else base
    upd = {}
    if args.theta_k is not None:
        upd["theta_k"] = args.theta_k
    if args.mode:
        upd["modes"] = tuple(args.mode)
    if args.l_f is not None:
        upd["l_f"] = args.l_f
    if args.no_longitudinal:
        upd["field_mask"] = tuple(v for v in cfg.field_mask if v != 0) or (-1, 1)
    for key in ("grid_n", "half_width", "b_max", "n_steps", "phi_b", "b"):
        val = getattr(args, key, None)
        if val is not None:
            upd["n_cells" if key == "grid_n" else key] = val
    if args.observables:
        upd["observables"] = tuple(s.strip() for s in args.observables.split(",") if s.strip())
    elif "l_f" in upd and not args.config and base.kind == "grid":
        upd["observables"] = tuple(f"B{K}" for K in range(1, 2 * upd["l_f"] + 1))
    return replace(cfg, **upd)


def cmd_ratio(args) -> int:
    theta = args.theta_k if args.theta_k is not None else 0.001
    t0 = time.perf_counter()
    with_az = quintiero_ratio(theta, args.b, True)
    without = quintiero_ratio(theta, args.b, False)
    dt = time.perf_counter() - t0
    lo, hi = EXPERIMENT[0] - EXPERIMENT[1], EXPERIMENT[0] + EXPERIMENT[1]
    print("S1/2 -> D5/2 amplitude ratio |M(m_gamma=0, m_j=-1/2)| / |M(m_gamma=2, m_j=3/2)|")
    print(f"  theta_k = {theta:g} rad, b = {args.b:g} wavelengths")
    print(f"  with A_z    : {with_az:.6f}   (paraxial limit 3/sqrt(2) = {3 / math.sqrt(2):.6f})")
    print(f"  without A_z : {without:.6f}   (paraxial limit 1/sqrt(2) = {1 / math.sqrt(2):.6f})")
    inside = lo <= with_az <= hi
    print(f"  measured    : {EXPERIMENT[0]} +- {EXPERIMENT[1]}  "
          f"({'consistent' if inside else 'outside'} with the A_z result)")
    print(f"  elapsed     : {dt * 1e3:.2f} ms")
    return 0


def _write(grid, out: Path, quiet=False):
    csv_path = emit_csv(grid, out)
    script = emit_plot_script(grid, csv_path)
    n_nodes = int(grid.node_mask.sum())
    if not quiet:
        print(f"wrote {csv_path} ({grid.node_mask.size} cells, {n_nodes} nodes) and {script}")


def cmd_scan_lz(args) -> int:
    base = ScanConfig(kind="radial", observables=("lz",))
    cfg = replace(_config(args, base), kind="radial")
    t0 = time.perf_counter()
    grid = run_radial_scan(cfg, args.workers)
    _write(grid, args.out)
    print(f"radial scan: {cfg.n_steps} points in {time.perf_counter() - t0:.2f} s")
    return 0


def cmd_grid_bk(args) -> int:
    base = ScanConfig(modes=SUPERPOSITION, kind="grid", observables=("B1", "B2"))
    cfg = replace(_config(args, base), kind="grid")
    t0 = time.perf_counter()
    grid = run_grid_scan(cfg, args.workers)
    _write(grid, args.out)
    print(f"grid scan: {cfg.n_cells}x{cfg.n_cells} cells in {time.perf_counter() - t0:.2f} s")
    return 0


def _fmt_c(z: complex) -> str:
    return f"{z.real: .10f}{z.imag:+.10f}j"


def cmd_point(args) -> int:
    base = ScanConfig(modes=SUPERPOSITION, kind="point")
    cfg = replace(_config(args, base), kind="point")
    beam, spec = cfg.beam(), cfg.transition()
    pos = AtomPosition(cfg.b, cfg.phi_b)
    amps = amplitude_set(beam, spec, pos)
    print(f"beam: {', '.join(f'(m_gamma={m.m_gamma}, helicity={m.helicity:+d}, w={m.weight:g})' for m in beam.modes)}")
    print(f"theta_k = {cfg.theta_k:g}, l_f = {spec.l_f}, field components {sorted(spec.field_mask)}")
    print(f"atom at b = {cfg.b:g}, phi_b = {cfg.phi_b:g}")
    print("amplitudes (arbitrary normalisation):")
    for m in amps.m_values:
        print(f"  m_f = {int(m):+d}: {_fmt_c(amps.amps[int(m)])}")
    try:
        rho = density_from_amplitudes(amps)
    except NodePointError as exc:
        print(f"node: {exc}")
        return 1
    rep = polarization_report(rho)
    print("populations w(m_f):", " ".join(f"{w:.10f}" for w in rep.populations))
    print(f"<l_z> = {rep.mean_lz:.10f}")
    for K, v in rep.alignment.items():
        print(f"B_{K} = {v: .10f}")
    print("multipoles T_KM:")
    for (K, M), v in rep.multipoles.items():
        print(f"  T_{K}{M:+d} = {_fmt_c(v)}")
    if rep.cartesian is not None:
        print("cartesian polarizations:")
        for k, v in rep.cartesian.as_dict().items():
            print(f"  {k:>14} = {v: .10f}")
    try:
        sdm = photon_density_matrix(beam, cfg.b, cfg.phi_b)
        print("photon spin-density matrix at the atom (+1, 0, -1):")
        for row in sdm.entries:
            print("  " + "  ".join(_fmt_c(v) for v in row))
    except NodePointError as exc:
        print(f"photon field: {exc}")
    if spec.l_f == 1:
        try:
            rel = photon_atom_relations(beam, pos)
        except NodePointError as exc:
            print(f"relations: {exc}")
        else:
            print("photon vs atom relations (photon, signed atom):")
            for k, (lhs, rhs) in rel.pairs.items():
                print(f"  {k:>14}: {lhs: .10f}  {rhs: .10f}")
            print(f"  max discrepancy {rel.max_discrepancy:.3e}; "
                  f"vs field at mirrored point {rel.mirror_discrepancy:.3e}")
    return 0


def cmd_check(args) -> int:
    return 0 if checks.run_all(args.seed) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="twistpol", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("ratio", help="S->D amplitude ratio with and without A_z")
    r.add_argument("--theta-k", type=float, help="cone angle (default 0.001)")
    r.add_argument("--b", type=float, default=0.0, help="impact parameter (wavelengths)")
    r.set_defaults(func=cmd_ratio)

    s = sub.add_parser("scan-lz", help="<l_z> (and other observables) versus b")
    _common(s, "scan_lz.csv")
    s.add_argument("--b-max", type=float)
    s.add_argument("--n-steps", type=int)
    s.add_argument("--phi-b", type=float)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_scan_lz)

    g = sub.add_parser("grid-bk", help="B_K maps over (b_x, b_y)")
    _common(g, "grid_bk.csv")
    g.add_argument("--grid-n", type=int, help="cells per axis")
    g.add_argument("--half-width", type=float, help="half width of the square (wavelengths)")
    g.add_argument("--workers", type=int, default=1)
    g.set_defaults(func=cmd_grid_bk)

    pt = sub.add_parser("point", help="full polarization report at one location")
    _common(pt)
    pt.add_argument("--b", type=float)
    pt.add_argument("--phi-b", type=float)
    pt.set_defaults(func=cmd_point)

    c = sub.add_parser("check", help="run the built-in invariant checks")
    c.add_argument("--seed", type=int, default=2024)
    c.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, NodePointError, OSError) as exc:
        print(f"twistpol: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
