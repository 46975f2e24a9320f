"""Command-line pipeline: density grids to registers, Ising problems and solver runs.

User-facing units are MHz (for frequencies divided by 2 pi), microseconds and
micrometers; everything is converted to rad/s and seconds at the boundary.
Every command writes a ``*.manifest.json`` next to its outputs that can be fed
to ``q3p replay``.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .constants import (
    C6_DEFAULT,
    DELTA_MAX_DEFAULT,
    DURATION_DEFAULT,
    LATTICE_SPACING_DEFAULT,
    MHZ,
    OMEGA_MAX_DEFAULT,
    US,
)
from .emulator import NoiseModel, SampleHistogram, landscape_scan
from .field import (
    GaussianComponent,
    Plane,
    ScalarField,
    load_grid,
    log_smooth,
    normalize,
    save_grid,
    slice_volume,
    synthesize_mixture,
)
from .ising import PlacementProblem, compile_problem, exact_solve
from .qae import run_qae
from .register import Register, build_register, fit_to_traps, triangular_layout
from .vqa import OptimizerConfig, run_vqa

log = logging.getLogger("q3p")

PRESETS = {
    "paper-mup": {"cycles": 50, "shots": 200},
    "paper-si": {"cycles": 200, "shots": 200},
}
# never recorded in manifests: they must not change any output
_VOLATILE = ("threads", "func", "command")


class UsageError(Exception):
    pass


# -- helpers ----------------------------------------------------------------


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_json(path, data) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _read_json(path):
    return json.loads(Path(path).read_text())


def _write_manifest(args, inputs, outputs, manifest_path) -> None:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in _VOLATILE}
    _write_json(
        manifest_path,
        {
            "tool": "q3p",
            "version": __version__,
            "command": args.command,
            "params": params,
            "seed": params.get("seed"),
            "inputs": {str(p): _sha256(p) for p in inputs if p},
            "outputs": {str(p): _sha256(p) for p in outputs},
        },
    )
    log.info("wrote manifest %s", manifest_path)


def _load_noise(spec) -> NoiseModel | None:
    if spec is None:
        return None
    if spec == "device":
        return NoiseModel.device()
    return NoiseModel.from_dict(_read_json(spec))


def _load_register(path) -> Register:
    return Register.from_dict(_read_json(path))


def _problem_from_args(args) -> tuple[PlacementProblem, Register | None]:
    """Load ``--problem`` or compile one from ``--grid`` plus a register."""
    register = _load_register(args.register) if args.register else None
    if args.problem:
        problem = PlacementProblem.from_dict(_read_json(args.problem))
        return problem, register
    if not args.grid:
        raise UsageError("give --problem, or --grid with --register or --threshold")
    g = load_grid(args.grid)
    if register is None:
        if args.threshold is None:
            raise UsageError("--grid needs --register or --threshold")
        register = build_register(g, args.threshold, args.lattice_spacing)
    if args.exclusion_radius is None:
        radius = register.blockade_radius / register.scale
    else:
        radius = args.exclusion_radius
    amps = args.amplitudes if args.amplitudes == "local" else float(args.amplitudes)
    problem = compile_problem(
        g,
        register.field_sites,
        args.variance,
        amps,
        radius,
        double_count=not args.half_pairs,
    )
    for w in problem.warnings:
        log.warning(w)
    return problem, register


def _inputs(args) -> list:
    paths = [getattr(args, k, None) for k in ("problem", "grid", "register", "noise_file")]
    return [p for p in paths if p and p != "device"]


def _write_histogram(hist: SampleHistogram, out_dir: Path, fmt: str) -> Path:
    if fmt == "json":
        path = out_dir / "histogram.json"
        _write_json(path, hist.to_dict())
    else:
        path = out_dir / "histogram.csv"
        path.write_text(hist.to_csv())
    return path


def _read_histogram(path) -> SampleHistogram:
    path = Path(path)
    if path.suffix == ".json":
        data = _read_json(path)
        counts = {k: int(v) for k, v in data["counts"].items()}
        hist = SampleHistogram(counts, sum(counts.values()))
        hist.winner = data.get("winner")
        return hist
    return SampleHistogram.from_csv(path.read_text())


def _landscape_csv(matrix, deltas, durations) -> str:
    # first row: durations in us; each following row: detuning in MHz then values
    lines = ["delta_mhz/duration_us," + ",".join(repr(float(t / US)) for t in durations)]
    for d, row in zip(deltas, matrix):
        lines.append(",".join([repr(float(d / MHZ))] + [repr(float(v)) for v in row]))
    return "\n".join(lines) + "\n"


def _read_landscape_csv(text):
    rows = [r.split(",") for r in text.strip().splitlines()]
    durations = np.array([float(x) for x in rows[0][1:]]) * US
    deltas = np.array([float(r[0]) for r in rows[1:]]) * MHZ
    matrix = np.array([[float(x) for x in r[1:]] for r in rows[1:]])
    return matrix, deltas, durations


def _plots_enabled(args) -> bool:
    return not getattr(args, "no_plot", False)


# -- commands ---------------------------------------------------------------


def cmd_synth(args) -> int:
    spec = _read_json(args.components)
    comps_data = spec["components"] if isinstance(spec, dict) else spec
    comps = [GaussianComponent.from_dict(c) for c in comps_data]
    grid = spec.get("grid", {}) if isinstance(spec, dict) else {}
    spacing = args.spacing if args.spacing is not None else grid.get("spacing", 0.1)
    if args.shape or "shape" in grid:
        shape = tuple(args.shape or grid["shape"])
        origin = args.origin or grid.get("origin") or [0.0] * len(shape)
    else:
        centers = np.array([c.center for c in comps])
        pad = args.margin * max(np.sqrt(c.variance) for c in comps)
        lo = centers.min(axis=0) - pad
        hi = centers.max(axis=0) + pad
        shape = tuple(int(np.ceil(x)) + 1 for x in (hi - lo) / spacing)
        origin = lo.tolist()
    template = ScalarField(np.zeros(shape), spacing, origin)
    g = synthesize_mixture(comps, template)
    if not args.raw:
        g = normalize(g)
    save_grid(g, args.out)
    _write_manifest(args, [args.components], [args.out], f"{args.out}.manifest.json")
    print(args.out)
    return 0


def cmd_slice(args) -> int:
    vol = load_grid(args.grid)
    plane = Plane(tuple(args.origin), tuple(args.u), tuple(args.v))
    shape = tuple(args.size) if args.size else None
    slices = slice_volume(vol, plane, args.n_slices, args.spacing, shape, args.step)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    for k, s in enumerate(slices):
        if args.log_sigma:
            s = log_smooth(s, args.log_sigma)
        if not args.raw:
            s = normalize(s)
        path = out_dir / f"slice_{k}.json"
        save_grid(s, path)
        outputs.append(path)
        print(path)
    _write_manifest(args, [args.grid], outputs, out_dir / "slice.manifest.json")
    return 0


def cmd_register(args) -> int:
    g = load_grid(args.grid)
    reg = build_register(
        g,
        args.threshold,
        args.lattice_spacing,
        args.pitch,
        args.c6 * 1e6,
        args.omega_max * MHZ,
    )
    if args.layout:
        rows, cols = args.layout
        reg = fit_to_traps(reg, triangular_layout(rows, cols, args.lattice_spacing))
    _write_json(args.out, reg.to_dict())
    outputs = [args.out]
    if args.svg and _plots_enabled(args):
        from .plotting import plot_register

        plot_register(reg, args.svg, field=g)
        outputs.append(args.svg)
    _write_manifest(args, [args.grid], outputs, f"{args.out}.manifest.json")
    print(f"{len(reg)} sites -> {args.out}")
    return 0


def cmd_compile(args) -> int:
    problem, _ = _problem_from_args(args)
    _write_json(args.out, problem.to_dict())
    _write_manifest(args, _inputs(args), [args.out], f"{args.out}.manifest.json")
    print(args.out)
    return 0


def cmd_exact(args) -> int:
    problem, _ = _problem_from_args(args)
    placement = exact_solve(problem, enforce_exclusion=not args.no_exclusion)
    out = placement.to_dict()
    if args.out:
        _write_json(args.out, out)
        _write_manifest(args, _inputs(args), [args.out], f"{args.out}.manifest.json")
    print(json.dumps(out, sort_keys=True))
    return 0


def _solver_outputs(args, result, out_dir: Path, extra=()) -> list:
    outputs = [_write_histogram(result.histogram, out_dir, args.format)]
    winner = out_dir / "winner.json"
    _write_json(winner, result.summary())
    outputs.append(winner)
    if _plots_enabled(args):
        from .plotting import plot_histogram

        svg = out_dir / "histogram.svg"
        plot_histogram(result.histogram, svg)
        outputs.append(svg)
    return outputs + list(extra)


def cmd_qae(args) -> int:
    problem, register = _problem_from_args(args)
    if register is None:
        raise UsageError("qae needs --register (or --grid with --threshold)")
    result = run_qae(
        problem,
        register,
        shots=args.shots,
        noise=_load_noise(args.noise_file),
        seed=args.seed,
        duration=args.duration * US,
        omega_max=args.omega_max * MHZ,
        delta_max=args.delta_max * MHZ,
        c=None if args.c is None else args.c * MHZ,
        trajectories=args.trajectories,
        threads=args.threads,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    pulse_path = out_dir / "pulse.json"
    _write_json(pulse_path, result.pulse.to_dict())
    outputs = _solver_outputs(args, result, out_dir, [pulse_path])
    _write_manifest(args, _inputs(args), outputs, out_dir / "qae.manifest.json")
    print(json.dumps(result.summary(), sort_keys=True))
    return 0


def cmd_vqa(args) -> int:
    problem, register = _problem_from_args(args)
    if register is None:
        raise UsageError("vqa needs --register (or --grid with --threshold)")
    config = OptimizerConfig(
        m=args.m,
        n_c=args.cycles,
        n_r=args.random_cycles,
        shots_per_cycle=args.shots,
        minimizer=args.minimizer,
        omega_max=args.omega_max * MHZ,
        delta_max=args.delta_max * MHZ,
        duration=args.duration * US,
        seed=args.seed,
        final_shots=args.final_shots,
    )
    result = run_vqa(problem, register, config, _load_noise(args.noise_file), threads=args.threads)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    trace = out_dir / "trace.jsonl"
    trace.write_text("".join(r.to_json() + "\n" for r in result.trace))
    pulse_path = out_dir / "pulse.json"
    _write_json(pulse_path, result.pulse.to_dict())
    extra = [trace, pulse_path]
    if _plots_enabled(args):
        from .plotting import plot_trace

        plot_trace([r.cost_estimate for r in result.trace], out_dir / "trace.svg")
        extra.append(out_dir / "trace.svg")
    outputs = _solver_outputs(args, result, out_dir, extra)
    _write_manifest(args, _inputs(args), outputs, out_dir / "vqa.manifest.json")
    print(json.dumps(result.summary(), sort_keys=True))
    return 0


def cmd_landscape(args) -> int:
    if args.shots > 0 and args.seed is None:
        raise UsageError("--seed is required when --shots > 0")
    register = _load_register(args.register)
    deltas = np.linspace(args.delta_min, args.delta_max, args.n_delta) * MHZ
    durations = np.linspace(0.0, args.t_max, args.n_t) * US
    matrix = landscape_scan(
        register,
        args.bitstring,
        args.omega * MHZ,
        deltas,
        durations,
        shots=args.shots,
        noise=_load_noise(args.noise_file),
        seed=args.seed or 0,
        threads=args.threads,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.format == "json":
        path = out_dir / "landscape.json"
        _write_json(
            path,
            {
                "bitstring": args.bitstring,
                "delta_mhz": (deltas / MHZ).tolist(),
                "duration_us": (durations / US).tolist(),
                "probability": matrix.tolist(),
            },
        )
    else:
        path = out_dir / "landscape.csv"
        path.write_text(_landscape_csv(matrix, deltas, durations))
    outputs = [path]
    if _plots_enabled(args):
        from .plotting import plot_landscape

        plot_landscape(matrix, deltas, durations, out_dir / "landscape.svg", args.bitstring)
        outputs.append(out_dir / "landscape.svg")
    _write_manifest(args, _inputs(args), outputs, out_dir / "landscape.manifest.json")
    print(path)
    return 0


def cmd_plot(args) -> int:
    from . import plotting

    if args.hist:
        plotting.plot_histogram(_read_histogram(args.hist), args.out, winner=args.winner)
    elif args.landscape:
        matrix, deltas, durations = _read_landscape_csv(Path(args.landscape).read_text())
        plotting.plot_landscape(matrix, deltas, durations, args.out, args.bitstring)
    elif args.trace:
        lines = Path(args.trace).read_text().splitlines()
        plotting.plot_trace([json.loads(x)["cost_estimate"] for x in lines if x.strip()], args.out)
    elif args.register:
        g = load_grid(args.grid) if args.grid else None
        plotting.plot_register(_load_register(args.register), args.out, g, args.bitstring)
    else:
        raise UsageError("plot needs one of --hist, --landscape, --trace, --register")
    print(args.out)
    return 0


def cmd_replay(args) -> int:
    """Re-run a recorded command and check its outputs hash identically."""
    manifest = _read_json(args.manifest)
    params = dict(manifest["params"])
    command = manifest["command"]
    for path, digest in manifest["inputs"].items():
        if _sha256(path) != digest:
            raise ValueError(f"input {path} changed since the recorded run")
    ns = argparse.Namespace(**params, threads=args.threads, command=command)
    rc = COMMANDS[command](ns)
    if rc != 0:
        return rc
    bad = [p for p, d in manifest["outputs"].items() if _sha256(p) != d]
    if bad:
        print("replay mismatch: " + ", ".join(bad), file=sys.stderr)
        return 1
    print(f"replay ok: {len(manifest['outputs'])} outputs identical")
    return 0


COMMANDS = {
    "synth": cmd_synth,
    "slice": cmd_slice,
    "register": cmd_register,
    "compile": cmd_compile,
    "exact": cmd_exact,
    "qae": cmd_qae,
    "vqa": cmd_vqa,
    "landscape": cmd_landscape,
    "plot": cmd_plot,
    "replay": cmd_replay,
}


# -- parser -----------------------------------------------------------------


def _add_problem_options(p) -> None:
    g = p.add_argument_group("problem")
    g.add_argument("--problem", help="compiled problem JSON (skips compilation)")
    g.add_argument("--grid", help="normalized 2D density grid (json-grid or dx)")
    g.add_argument("--register", help="register JSON; its field_sites become the problem sites")
    g.add_argument("--threshold", type=float, help="build the register from --grid at this density fraction")
    g.add_argument("--lattice-spacing", type=float, default=LATTICE_SPACING_DEFAULT, help="trap spacing (um) when building a register")
    g.add_argument("--variance", type=float, default=5.0, help="Gaussian variance (grid units squared)")
    g.add_argument("--amplitudes", default="1.0", help="Gaussian amplitude, or 'local' for density-proportional amplitudes")
    g.add_argument("--exclusion-radius", type=float, help="minimum separation (grid units); None maps the blockade radius to grid units")
    g.add_argument("--half-pairs", action="store_true", help="count each unordered pair once instead of twice")


def _add_hardware_options(p) -> None:
    g = p.add_argument_group("pulse")
    g.add_argument("--duration", type=float, default=DURATION_DEFAULT / US, help="pulse duration (us)")
    g.add_argument("--omega-max", type=float, default=OMEGA_MAX_DEFAULT / MHZ, help="peak Rabi frequency / 2pi (MHz)")
    g.add_argument("--delta-max", type=float, default=DELTA_MAX_DEFAULT / MHZ, help="detuning bound / 2pi (MHz)")


def _add_run_options(p, shots: int, seed_required: bool = True) -> None:
    g = p.add_argument_group("run")
    g.add_argument("--seed", type=int, required=seed_required, default=None, help="RNG seed")
    g.add_argument("--shots", type=int, default=shots, help="measurement shots")
    g.add_argument("--noise", dest="noise_file", default=None, help="noise-model JSON, or 'device' for the calibrated device values")
    g.add_argument("--out-dir", default=".", help="output directory")
    g.add_argument("--format", choices=("csv", "json"), default="csv", help="tabular output format")
    g.add_argument("--no-plot", action="store_true", help="skip SVG figures")


def build_parser(preset: str | None = None) -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="q3p", description=__doc__.splitlines()[0], formatter_class=fmt)
    parser.add_argument("--version", action="version", version=f"q3p {__version__}")
    parser.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="worker threads for independent trajectories and scan cells")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("synth", help="Gaussian-mixture density on a grid", formatter_class=fmt)
    p.add_argument("--components", required=True, help="JSON list of {center, variance, amplitude} (optionally under 'components' with a 'grid' template)")
    p.add_argument("--out", required=True, help="output grid file (.json or .dx)")
    p.add_argument("--shape", type=int, nargs="+", help="grid points per axis")
    p.add_argument("--spacing", type=float, help="grid step; None uses the components file value or 0.1")
    p.add_argument("--origin", type=float, nargs="+", help="coordinate of the first grid point")
    p.add_argument("--margin", type=float, default=5.0, help="padding in standard deviations when the grid is inferred")
    p.add_argument("--raw", action="store_true", help="do not normalize")

    p = sub.add_parser("slice", help="cut a 3D density into parallel 2D slices", formatter_class=fmt)
    p.add_argument("--grid", required=True, help="3D density grid (dx or json-grid)")
    p.add_argument("--origin", type=float, nargs=3, required=True, help="point on the first slicing plane")
    p.add_argument("--u", type=float, nargs=3, required=True, help="first in-plane unit axis")
    p.add_argument("--v", type=float, nargs=3, required=True, help="second in-plane unit axis")
    p.add_argument("--n-slices", type=int, default=6, help="number of slices")
    p.add_argument("--spacing", type=float, default=0.5, help="distance between slices")
    p.add_argument("--step", type=float, help="in-plane sampling step; None uses the smallest grid spacing")
    p.add_argument("--size", type=int, nargs=2, help="in-plane sample counts")
    p.add_argument("--log-sigma", type=float, default=None, help="apply the negated LoG filter with this width (grid cells)")
    p.add_argument("--raw", action="store_true", help="do not normalize the slices")
    p.add_argument("--out-dir", default=".", help="output directory")

    p = sub.add_parser("register", help="place traps over the dense part of a 2D grid", formatter_class=fmt)
    p.add_argument("--grid", required=True, help="2D density grid")
    p.add_argument("--threshold", type=float, required=True, help="keep traps where density >= threshold * max")
    p.add_argument("--lattice-spacing", type=float, default=LATTICE_SPACING_DEFAULT, help="neighbouring trap distance (um)")
    p.add_argument("--pitch", type=float, help="candidate trap pitch in grid units; None uses 5 grid cells")
    p.add_argument("--c6", type=float, default=C6_DEFAULT / 1e6, help="C6 coefficient (rad/us * um^6)")
    p.add_argument("--omega-max", type=float, default=OMEGA_MAX_DEFAULT / MHZ, help="Rabi frequency / 2pi (MHz) defining the blockade radius")
    p.add_argument("--layout", type=int, nargs=2, metavar=("ROWS", "COLS"), help="snap onto a triangular trap layout of this size")
    p.add_argument("--out", required=True, help="register JSON")
    p.add_argument("--svg", help="optional figure of the register over the density")
    p.add_argument("--no-plot", action="store_true", help="skip the figure even if --svg is given")

    p = sub.add_parser("compile", help="build the Ising placement problem", formatter_class=fmt)
    _add_problem_options(p)
    p.add_argument("--out", required=True, help="problem JSON")

    p = sub.add_parser("exact", help="exact classical optimum", formatter_class=fmt)
    _add_problem_options(p)
    p.add_argument("--no-exclusion", action="store_true", help="ignore the exclusion radius")
    p.add_argument("--out", help="placement JSON (also printed)")

    p = sub.add_parser("qae", help="adiabatic solver with local detunings", formatter_class=fmt)
    _add_problem_options(p)
    _add_hardware_options(p)
    _add_run_options(p, shots=1000)
    p.add_argument("--c", type=float, default=None, help="initial detuning magnitude / 2pi (MHz); None uses --delta-max")
    p.add_argument("--trajectories", type=int, default=None, help="noisy trajectories; None runs one per shot")

    p = sub.add_parser("vqa", help="Bayesian-optimized global pulse", formatter_class=fmt)
    _add_problem_options(p)
    _add_hardware_options(p)
    base = PRESETS.get(preset, {})
    _add_run_options(p, shots=base.get("shots", 200))
    p.add_argument("--preset", choices=sorted(PRESETS), default=preset, help="cycle/shot presets")
    p.add_argument("--m", type=int, default=9, help="control points per channel")
    p.add_argument("--cycles", type=int, default=base.get("cycles", 50), help="total optimisation cycles")
    p.add_argument("--random-cycles", type=int, default=10, help="initial random cycles")
    p.add_argument("--minimizer", choices=("gp", "dummy"), default="gp", help="proposal strategy")
    p.add_argument("--final-shots", type=int, default=None, help="shots for the final re-run; None reuses --shots")

    p = sub.add_parser("landscape", help="probability of a bitstring over (detuning, duration)", formatter_class=fmt)
    p.add_argument("--register", required=True, help="register JSON")
    p.add_argument("--bitstring", required=True, help="target bitstring")
    p.add_argument("--omega", type=float, default=1.0, help="constant Rabi frequency / 2pi (MHz)")
    p.add_argument("--delta-min", type=float, default=-2.0, help="lowest detuning / 2pi (MHz)")
    p.add_argument("--delta-max", type=float, default=4.0, help="highest detuning / 2pi (MHz)")
    p.add_argument("--n-delta", type=int, default=8, help="detuning grid points")
    p.add_argument("--t-max", type=float, default=3.0, help="longest duration (us)")
    p.add_argument("--n-t", type=int, default=8, help="duration grid points (starting at 0)")
    _add_run_options(p, shots=0, seed_required=False)

    p = sub.add_parser("plot", help="render an SVG from saved outputs", formatter_class=fmt)
    p.add_argument("--hist", help="histogram CSV or JSON")
    p.add_argument("--winner", help="bitstring to highlight")
    p.add_argument("--landscape", help="landscape CSV")
    p.add_argument("--trace", help="VQA trace JSON-lines")
    p.add_argument("--register", help="register JSON")
    p.add_argument("--grid", help="density drawn under --register")
    p.add_argument("--bitstring", help="occupied sites / title")
    p.add_argument("--out", required=True, help="SVG path")

    p = sub.add_parser("replay", help="re-run a manifest and verify identical outputs", formatter_class=fmt)
    p.add_argument("manifest", help="manifest JSON written by an earlier run")
    return parser


def _preset_from_argv(argv) -> str | None:
    for k, a in enumerate(argv):
        if a == "--preset" and k + 1 < len(argv):
            return argv[k + 1] if argv[k + 1] in PRESETS else None
        if a.startswith("--preset="):
            v = a.split("=", 1)[1]
            return v if v in PRESETS else None
    return None


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(
        level=os.environ.get("Q3P_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser(_preset_from_argv(argv))
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    from threadpoolctl import threadpool_limits

    try:
        # BLAS stays single-threaded so reductions (and outputs) do not depend on --threads
        with threadpool_limits(1):
            return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    except (ValueError, RuntimeError, OSError, KeyError, TypeError) as exc:
        print(f"q3p {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
