"""Command-line front end.

    slitlab <kind> --config PATH --out DIR [--seed N] [--dry-run] [--threads N]

Exit codes: 0 success, 1 numerical failure, 2 configuration error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from slitlab import __version__, fields, interference, io, propagator, topology
from slitlab.config import KINDS, ConfigError, RunConfig, load_config
from slitlab.currents import (
    density,
    normalized_current,
    pauli_current_parts,
    reduction_residual,
    schrodinger_current,
)
from slitlab.fields import ComplexField2D, GridError, GridSpec, PauliField2D, commensurate_momentum
from slitlab.verify import run_verify

log = logging.getLogger("slitlab")

EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG = 0, 1, 2


class NumericalFailure(RuntimeError):
    pass


def _grid(cfg: RunConfig) -> GridSpec:
    b = cfg.block("grid")
    return GridSpec(b["nx"], b["ny"], b["lx"], b["ly"])


def build_simulation(cfg: RunConfig):
    """(grid, slits, evolution, packet, fringe kwargs, snapshot_every) from a simulate config."""
    grid = _grid(cfg)
    p = cfg.block("packet")
    packet = propagator.PacketParams(center=(p["x0"], p["y0"]), width=p["width"], momentum=(p["kx"], p["ky"]))
    e = cfg.block("evolution")
    s = cfg.block("slits")
    height = s["height"] if "height" in s else s["height_factor"] * np.hypot(p["kx"], p["ky"]) ** 2 / (2 * e["mass"])
    slits = propagator.SlitGeometry(barrier_x=s["barrier_x"], thickness=s["thickness"], width=s["width"],
                                    separation=s["separation"], height=float(height), mode=s["mode"],
                                    center_y=s["center_y"])
    dt = e.get("dt") or propagator.recommended_dt(grid, slits.height, e["mass"])
    n_steps = e.get("n_steps") or propagator.auto_n_steps(packet, slits, e["screen_x"], dt, e["mass"])
    evo = propagator.EvolutionConfig(dt=dt, n_steps=n_steps, mass=e["mass"], absorber_width=e["absorber_width"],
                                     absorber_strength=e["absorber_strength"], screen_x=e["screen_x"])
    fr = cfg.blocks.get("fringe", {})
    fringe = {"fit_halfwidth": fr.get("fit_halfwidth"), "vis_halfwidth": fr.get("vis_halfwidth")}
    return grid, slits, evo, packet, fringe, e["snapshot_every"]


def build_field(cfg: RunConfig, seed: int):
    """Scalar or spinor field from the [field] block."""
    grid = _grid(cfg)
    f = cfg.block("field")
    src = f["source"]
    X, Y = grid.mesh()
    if src == "vortex":
        if "vortices" not in f:
            raise ConfigError("[field] source = vortex needs 'vortices = x0 y0 m; ...'")
        for row in f["vortices"]:
            if len(row) != 3 or row[2] != int(row[2]):
                raise ConfigError("each vortex needs 'x0 y0 m' with integer m")
        return topology.vortex_field(grid, f["vortices"], f.get("envelope"))
    if src == "plane_wave":
        return fields.plane_wave(grid, commensurate_momentum(grid, f["mx"], f["my"]), f["amplitude"])
    if src == "packet":
        if "width" not in f:
            raise ConfigError("[field] source = packet needs 'width'")
        return fields.gaussian_packet(grid, (f["x0"], f["y0"]), f["width"], (f["kx"], f["ky"]))
    if src == "random_spinor":
        rng = np.random.default_rng(seed)
        return PauliField2D(grid, fields.random_band_limited(grid, 2, f["band"], rng))
    if src == "snapshot":
        if "path" not in f:
            raise ConfigError("[field] source = snapshot needs 'path'")
        path = Path(f["path"])
        if not path.is_absolute():
            path = Path(cfg.source).parent / path
        try:
            fld = io.read_snapshot(path)
        except (OSError, io.SnapshotError) as exc:
            raise ConfigError(f"cannot load snapshot {path}: {exc}") from exc
        if fld.grid != grid:
            raise ConfigError(f"snapshot grid {fld.grid} differs from [grid] {grid}")
        return fld
    raise ConfigError(f"unknown [field] source {src!r}")


def _summary_from_pattern(fp: propagator.FringePattern) -> dict:
    return {
        "spacing": fp.spacing,
        "spacing_spectral": fp.spacing_spectral,
        "predicted_spacing": fp.predicted_spacing,
        "spacing_deviation_pct": fp.spacing_deviation_pct,
        "spacing_spectral_deviation_pct": 100 * abs(fp.spacing_spectral - fp.predicted_spacing) / fp.predicted_spacing,
        "visibility": fp.visibility,
        "n_peaks": fp.n_peaks,
        "reliable": fp.reliable,
        "estimators_agree": fp.info["estimators_agree"],
        "transmitted": fp.info["transmitted"],
        "final_norm": fp.info["final_norm"],
        "screen_distance": fp.info["screen_distance"],
        "wavelength": fp.info["wavelength"],
    }


def cmd_simulate(cfg: RunConfig, out: Path, seed: int) -> int:
    grid, slits, evo, packet, fringe, snap_every = build_simulation(cfg)
    snap_dir = out / "snapshots" if snap_every else None
    fp = propagator.run_double_slit(grid, slits, evo, packet, snapshot_every=snap_every or None,
                                    snapshot_dir=snap_dir, **fringe)
    io.write_csv(out / "screen.csv", ["y", "intensity"], [fp.y, fp.intensity])
    summary = _summary_from_pattern(fp)
    summary["config"] = cfg.to_dict()
    summary["resolved"] = {k: fp.info[k] for k in ("grid", "slits", "evolution", "packet")}
    summary["provenance"] = {"version": __version__, "nx": grid.nx, "ny": grid.ny, "dt": evo.dt,
                             "n_steps": evo.n_steps, "seed": seed}
    io.write_json(out / "summary.json", summary)
    if not fp.reliable:
        raise NumericalFailure(f"fringe fit unreliable: only {fp.n_peaks} peaks detected")
    return EXIT_OK


def cmd_currents(cfg: RunConfig, out: Path, seed: int) -> int:
    fld = build_field(cfg, seed)
    f = cfg.block("field")
    m, scheme = f["mass"], f["scheme"]
    grid = fld.grid
    X, Y = grid.mesh()
    report: dict = {"source": f["source"], "mass": m, "scheme": scheme}
    if isinstance(fld, ComplexField2D):
        rho = density(fld).values
        J = schrodinger_current(fld, m, scheme)
        Jt = normalized_current(fld, scheme=scheme)
        Jt_raw = normalized_current(fld, scheme=scheme, form="raw")
        io.write_csv(out / "currents.csv", ["x", "y", "rho", "Jx", "Jy", "Jt_x", "Jt_y", "defined"],
                     [X, Y, rho, J.values[0], J.values[1], Jt.values[0], Jt.values[1], Jt.mask])
        ok = Jt.mask
        report["consistency_mJ_over_rho"] = float(np.max(np.abs(m * J.values[:, ok] / rho[ok] - Jt.values[:, ok]))) \
            if ok.any() else None
        report["raw_vs_components"] = float(np.max(np.abs(Jt_raw.values - Jt.values)))
        report["max_J"] = J.max_norm()
    elif isinstance(fld, PauliField2D):
        conv, spin = pauli_current_parts(fld, m, scheme)
        total = conv + spin
        rho = np.sum(np.abs(fld.values) ** 2, axis=0)
        io.write_csv(out / "currents.csv",
                     ["x", "y", "rho", "conv_x", "conv_y", "spin_x", "spin_y", "Jx", "Jy"],
                     [X, Y, rho, conv.values[0], conv.values[1], spin.values[0], spin.values[1],
                      total.values[0], total.values[1]])
        report["reduction_residual"] = reduction_residual(fld, m, scheme)
        report["max_conv"] = conv.max_norm()
        report["max_spin"] = spin.max_norm()
    else:
        raise ConfigError("currents needs a scalar or two-component field")
    report["seed"] = seed
    io.write_json(out / "currents.json", report)
    return EXIT_OK


def _loops(cfg: RunConfig, grid: GridSpec) -> list[tuple[str, topology.LoopPath]]:
    b = cfg.block("loops")
    loops = []
    for i, row in enumerate(b.get("circles", [])):
        if len(row) != 4:
            raise ConfigError("circle loops need 'cx cy r n'")
        loops.append((f"circle{i}", topology.circle_loop((row[0], row[1]), row[2], int(row[3]), grid)))
    for i, row in enumerate(b.get("rectangles", [])):
        if len(row) != 5:
            raise ConfigError("rectangle loops need 'x0 x1 y0 y1 n_per_side'")
        loops.append((f"rect{i}", topology.rectangle_loop(*row[:4], n_per_side=int(row[4]))))
    if not loops:
        raise ConfigError("[loops] defines no loops")
    return loops


def cmd_winding(cfg: RunConfig, out: Path, seed: int) -> int:
    fld = build_field(cfg, seed)
    if not isinstance(fld, ComplexField2D):
        raise ConfigError("winding needs a scalar field")
    w = cfg.blocks.get("winding", {"scheme": "spectral"})
    loops = _loops(cfg, fld.grid)
    results = []
    failed = []
    for name, loop in loops:
        try:
            r = topology.winding_number(fld, loop, w.get("eps0"), w["scheme"], strict=False)
        except topology.WindingError as exc:
            failed.append(name)
            results.append({"loop": name, "error": str(exc)})
            continue
        if not r.agree:
            failed.append(name)
        results.append({"loop": name, **r.to_dict(), "unwrapped_k": r.unwrapped_k})
    vort = topology.vortex_scan(fld, w.get("eps0"))
    io.write_csv(out / "vortices.csv", ["i", "j", "x", "y", "charge", "low_density", "under_resolved"],
                 [np.array([v.i for v in vort], dtype=int), np.array([v.j for v in vort], dtype=int),
                  [v.x for v in vort], [v.y for v in vort], np.array([v.charge for v in vort], dtype=int),
                  np.array([v.low_density for v in vort], dtype=bool),
                  np.array([v.under_resolved for v in vort], dtype=bool)])
    io.write_json(out / "winding.json", {"loops": results, "n_vortices": len(vort),
                                         "total_charge": topology.total_charge(vort), "seed": seed})
    if failed:
        raise NumericalFailure(f"winding unavailable or estimators disagree on: {', '.join(failed)}")
    return EXIT_OK


def cmd_predict(cfg: RunConfig, out: Path, seed: int) -> int:
    b = cfg.block("interference")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", interference.ParaxialWarning)
        setup = interference.ConventionalSetup(b["wavelength"], b["separation"], b["screen_distance"])
    spacing = interference.conventional_spacing(setup, b["half_angle"])
    y0 = b.get("y_min", -2.5 * spacing)
    y1 = b.get("y_max", 2.5 * spacing)
    y = np.linspace(y0, y1, b["n_samples"])
    coupling = interference.CouplingStrength(b["q_prime"])
    I_self = interference.self_action_pattern(setup, y, coupling)
    I_conv = interference.conventional_intensity(setup, y, b["half_angle"])
    io.write_csv(out / "pattern.csv", ["y", "I_self", "I_conventional"], [y, I_self, I_conv])
    exact_dr, _ = interference.path_difference(setup, spacing)
    report = {
        "predicted_spacing": spacing,
        "half_angle": b["half_angle"],
        "q_prime": b["q_prime"],
        "p": setup.p,
        "equivalence_residual_A_equals_p": interference.equivalence_residual(setup, setup.p, 1),
        "q_prime_at_first_maximum": interference.extract_qprime(float(exact_dr), setup.wavelength, 1),
        "warnings": [str(w.message) for w in caught],
    }
    io.write_json(out / "predict.json", report)
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, out: Path, seed: int) -> int:
    b = cfg.block("sweep")
    if b["k_max"] < b["k_min"]:
        raise ConfigError("[sweep] k_max must be >= k_min")
    ks = list(range(b["k_min"], b["k_max"] + 1))
    weights = b.get("weights")
    if weights is not None and len(weights) != len(ks):
        raise ConfigError(f"[sweep] weights has {len(weights)} entries, window has {len(ks)}")
    rows = interference.visibility_sweep(b["qq_primes"], ks, weights)
    io.write_csv(out / "sweep.csv", ["qq_prime", "visibility"], [[r[0] for r in rows], [r[1] for r in rows]])
    io.write_json(out / "sweep.json", {"k_min": b["k_min"], "k_max": b["k_max"],
                                       "weights": weights or "uniform",
                                       "results": [{"qq_prime": q, "visibility": v} for q, v in rows]})
    return EXIT_OK


def cmd_coupling(cfg: RunConfig, out: Path, seed: int) -> int:
    b = cfg.blocks.get("coupling", {"E0_eV": -13.6, "V_T_volt": 20.0, "voltage_V": 50e3})
    try:
        est = interference.virial_estimate(b["E0_eV"], b["V_T_volt"])
        demo = interference.demo_experiment_numbers(b["voltage_V"])
    except ValueError as exc:
        raise ConfigError(f"[coupling]: {exc}") from exc
    io.write_json(out / "coupling.json", {"estimate": est.to_dict(), "demo_experiment": demo})
    return EXIT_OK


def cmd_verify(cfg: RunConfig | None, out: Path, seed: int, perturb_gamma: bool = False) -> int:
    report = run_verify(seed, perturb_gamma)
    report["version"] = __version__
    io.write_json(out / "verify.json", report)
    for c in report["checks"]:
        print(f"{'PASS' if c['passed'] else 'FAIL'} {c['name']} ({c['seconds']:.2f} s)")
    return EXIT_OK if report["passed"] else EXIT_NUMERIC


COMMANDS = {
    "simulate": cmd_simulate,
    "currents": cmd_currents,
    "winding": cmd_winding,
    "predict": cmd_predict,
    "visibility-sweep": cmd_sweep,
    "estimate-coupling": cmd_coupling,
}


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="slitlab", description="Double-slit self-interference toolkit")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind)
        p.add_argument("--config", type=Path, required=kind not in ("verify", "estimate-coupling"))
        p.add_argument("--out", type=Path, default=Path("out"))
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--dry-run", action="store_true")
        p.add_argument("--threads", type=int, default=1)
        if kind == "verify":
            p.add_argument("--perturb-gamma", action="store_true")
    return ap


def _prepare_out(out: Path) -> None:
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory {out} not writable: {exc}") from exc


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    args = make_parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        fields.set_fft_workers(args.threads)
        cfg = load_config(args.config, args.kind) if args.config is not None else RunConfig(args.kind)
        if args.kind == "simulate":
            grid, slits, evo, packet, _, _ = build_simulation(cfg)
            resolved = {"grid": grid, "slits": slits, "evolution": evo, "packet": packet}
            propagator.check_stability(propagator.build_slit_potential(grid, slits), evo)
        else:
            resolved = {}
        if args.dry_run:
            from dataclasses import asdict
            echo = cfg.to_dict()
            echo["resolved"] = {k: asdict(v) for k, v in resolved.items()}
            echo["seed"] = args.seed
            print(json.dumps(io._jsonable(echo), indent=2, sort_keys=True))
            return EXIT_OK
        _prepare_out(args.out)
        if args.kind == "verify":
            return cmd_verify(cfg, args.out, args.seed, args.perturb_gamma)
        return COMMANDS[args.kind](cfg, args.out, args.seed)
    except (ConfigError, GridError, topology.LoopError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, propagator.PropagationError, topology.WindingError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
