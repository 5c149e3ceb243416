"""Command-line pipeline: profile -> Evans gate -> simulation -> diagnostics.

Subcommands: profile, evans, simulate, analyze, run (full pipeline),
sweep, kernels verify.  Experiments are declared in JSON configs
(schema-validated, unknown keys rejected); outputs are JSON metadata,
CSV series, and gnuplot-ready plot tables.  Re-running a config
reproduces byte-identical data files (the report carries one isolated
timestamp field).

Exit codes: 0 success, 2 gate refusal, 3 numerical failure,
4 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from dataclasses import asdict
from importlib import resources
from pathlib import Path

import numpy as np

import shockstab
from shockstab import analysis as _analysis
from shockstab import kernels as _kernels
from shockstab import models as _models
from shockstab import profile as _profile
from shockstab import sim as _sim
from shockstab import spectral as _spectral

try:
    import jsonschema
except ImportError:  # pragma: no cover
    jsonschema = None

FORMAT_VERSION = 1

# fitted decay-rate targets and the tolerances they are checked against
THEORY_TARGETS = {
    "L2": (-0.25, 0.08),
    "Linf": (-0.50, 0.12),
    "H4": (-0.25, 0.10),
    "deltadot": (-0.50, 0.15),
}


class ConfigError(ValueError):
    pass


class GateRefusal(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["format_version", "model", "endstates"],
    "properties": {
        "format_version": {"const": FORMAT_VERSION},
        "name": {"type": "string"},
        "model": {
            "type": "object",
            "additionalProperties": False,
            "required": ["name"],
            "properties": {
                "name": {"type": "string"},
                "params": {"type": "object"},
            },
        },
        "endstates": {
            "type": "object",
            "additionalProperties": False,
            "required": ["minus", "plus"],
            "properties": {
                "minus": {"type": "array", "items": {"type": "number"}},
                "plus": {"type": "array", "items": {"type": "number"}},
            },
        },
        "profile": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "halfwidth": {"type": ["number", "null"]},
                "h": {"type": "number"},
                "polish": {"type": "boolean"},
            },
        },
        "evans": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "R": {"type": ["number", "null"]},
                "rho": {"type": "number"},
                "halfwidth": {"type": ["number", "null"]},
            },
        },
        "simulation": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "halfwidth": {"type": "number"},
                "h": {"type": "number"},
                "T": {"type": "number"},
                "dt": {"type": ["number", "null"]},
                "cfl_safety": {"type": "number"},
                "kappa4": {"type": "number"},
                "perturbation": {"type": "object"},
                "snapshot_stride": {"type": ["integer", "null"]},
                "probe_stations": {"type": "array",
                                   "items": {"type": "number"}},
                "smallness_threshold": {"type": "number"},
                "seed": {"type": "integer"},
            },
        },
        "analysis": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "fit_window": {"type": ["array", "null"],
                               "items": {"type": "number"}},
                "kernel_normalization": {"enum": ["calibrated", "paper"]},
            },
        },
        "sweep": {"type": "array", "items": {"type": "object"}},
    },
}

_DEFAULTS = {
    "profile": {"halfwidth": None, "h": 0.01, "polish": True},
    "evans": {"R": None, "rho": 1e-3, "halfwidth": None},
    "simulation": {},
    "analysis": {"fit_window": None, "kernel_normalization": "calibrated"},
}


def load_config(path_or_name: str) -> dict:
    """Load a config file; bare names resolve to bundled configs."""
    p = Path(path_or_name)
    if p.exists():
        text = p.read_text()
    else:
        ref = resources.files("shockstab") / "configs" / f"{path_or_name}.json"
        if not ref.is_file():
            raise ConfigError(f"no config file or bundled config {path_or_name!r}")
        text = ref.read_text()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    validate_config(cfg)
    merged = {k: dict(v) for k, v in _DEFAULTS.items()}
    for key, val in cfg.items():
        if key in merged and isinstance(val, dict):
            merged[key].update(val)
        else:
            merged[key] = val
    merged["_hash"] = hashlib.sha256(
        json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:16]
    return merged


def validate_config(cfg: dict):
    if jsonschema is None:  # pragma: no cover
        raise ConfigError("jsonschema is required for config validation")
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config rejected: {exc.message}") from exc


def bundled_configs():
    ref = resources.files("shockstab") / "configs"
    return sorted(p.name[:-5] for p in ref.iterdir() if p.name.endswith(".json"))


# ---------------------------------------------------------------------------
# pipeline stages
# ---------------------------------------------------------------------------

def _build_model(cfg):
    return _models.get_model(cfg["model"]["name"],
                             **cfg["model"].get("params", {}))


def stage_profile(cfg, model):
    pc = cfg["profile"]
    prof = _profile.solve_profile(
        model, np.asarray(cfg["endstates"]["minus"], dtype=float),
        np.asarray(cfg["endstates"]["plus"], dtype=float),
        halfwidth=pc["halfwidth"], h=pc["h"], polish=pc["polish"])
    cd = _profile.characteristic_data(model, prof)
    return prof, cd


def stage_evans(cfg, model, prof):
    ec = cfg["evans"]
    return _spectral.verify_condition_D(model, prof, R=ec["R"], rho=ec["rho"],
                                        halfwidth=ec["halfwidth"])


def stage_simulate(cfg, model, prof, shock_type):
    sc = dict(cfg["simulation"])
    if "probe_stations" in sc:
        sc["probe_stations"] = tuple(sc["probe_stations"])
    if "perturbation" in sc:
        sc["perturbation"] = dict(sc["perturbation"])
    config = _sim.SimulationConfig(**sc)
    return _sim.run_simulation(model, prof, config, shock_type=shock_type)


def stage_analyze(cfg, model, run, prof, cd):
    ac = cfg["analysis"]
    kernel = _kernels.build_kernel(prof, cd,
                                   normalization=ac["kernel_normalization"])
    window = tuple(ac["fit_window"]) if ac["fit_window"] else None
    return _analysis.analyze_run(model, run, kernel, fit_window=window)


def run_experiment(cfg: dict, outdir: Path, force: bool = False,
                   verbose: bool = False) -> dict:
    """Execute the full pipeline and write all artifacts.

    The Evans verdict gates the simulation (the spectral hypothesis
    comes before the nonlinear conclusion); --force overrides the gate
    for stable-looking exploratory runs, but never for overcompressive
    waves, which the downstream theory does not cover.
    """
    outdir.mkdir(parents=True, exist_ok=True)
    report = {
        "format_version": FORMAT_VERSION,
        "config_hash": cfg["_hash"],
        "name": cfg.get("name", "experiment"),
        "code_version": shockstab.__version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "stages": {},
    }

    def log(msg):
        if verbose:
            print(msg, file=sys.stderr)

    def fail(stage, exc):
        report["stages"][stage] = {"status": "failed", "error": str(exc)}
        _write_json(outdir / "report.json", report)
        raise

    model = _build_model(cfg)

    try:
        log("stage: profile")
        prof, cd = stage_profile(cfg, model)
    except Exception as exc:
        fail("profile", exc)
    shock_type = _profile.classify_shock(cd)
    rep = _models.check_assumptions(model, prof.U_minus, prof.U_plus)
    report["assumptions"] = rep.summary()
    report["profile"] = _profile.profile_metadata(prof, cd)
    report["stages"]["profile"] = {"status": "ok"}
    _profile.profile_to_csv(prof, outdir / "profile.csv")
    _profile.save_profile_metadata(prof, outdir / "profile.json", cd)

    if shock_type is _profile.ShockType.OVERCOMPRESSIVE:
        report["stages"]["gate"] = {
            "status": "refused",
            "reason": "overcompressive unsupported"}
        _write_json(outdir / "report.json", report)
        raise GateRefusal("overcompressive unsupported")

    try:
        log("stage: evans")
        evans = stage_evans(cfg, model, prof)
    except Exception as exc:
        fail("evans", exc)
    report["evans"] = {
        "winding_excised": evans.winding,
        "winding_origin": evans.origin_winding,
        "origin_log10": evans.origin_log10,
        "contour_max_log10": evans.contour_max_log10,
        "R": evans.R, "rho": evans.rho,
        "n_points": evans.details["n_points"],
        "verdict": evans.verdict,
        "tolerance": "windings integer-exact; |D(0)| below contour max by 1e-6",
    }
    report["stages"]["evans"] = {"status": "ok"}
    _write_evans_csv(outdir / "evans.csv", evans)

    if not evans.verdict and not force:
        report["stages"]["gate"] = {
            "status": "refused",
            "reason": "Evans stability condition failed; use --force to "
                      "simulate anyway"}
        _write_json(outdir / "report.json", report)
        raise GateRefusal("Evans stability condition failed")

    try:
        log("stage: simulate")
        run = stage_simulate(cfg, model, prof, shock_type)
    except Exception as exc:
        fail("simulate", exc)
    report["simulation"] = {
        "dt": run.dt,
        "n_snapshots": int(run.times.size),
        "boundary_quietness": run.boundary_quietness,
        "ledger_residual_per_time": run.ledger["residual_per_time"],
        "ledger_tolerance": 1e-8,
    }
    report["stages"]["simulate"] = {"status": "ok"}
    save_run(run, outdir)

    try:
        log("stage: analyze")
        diag = stage_analyze(cfg, model, run, prof, cd)
    except Exception as exc:
        fail("analyze", exc)
    report["stages"]["analyze"] = {"status": "ok"}
    report["diagnostics"] = diagnostics_record(diag, shock_type)
    _write_json(outdir / "diag.json", report["diagnostics"])
    _write_diag_csv(outdir / "diag.csv", diag)
    emit_plotdata(outdir / "plots", diag, evans)

    _write_json(outdir / "report.json", report)
    return report


def diagnostics_record(diag, shock_type):
    rec = {
        "shock_type": shock_type.value,
        "exponents": {},
        "zeta": {
            "final": float(diag.zeta[-1]),
            "half_ratio": float(diag.zeta[-1]
                                / np.interp(diag.times[-1] / 2.0, diag.times,
                                            diag.zeta)),
            "tolerance": "saturation gate zeta(T)/zeta(T/2) < 1.1",
        },
        "vertical": {},
        "damping": {k: (float(v) if isinstance(v, (int, float)) else v)
                    for k, v in diag.damping.items()},
        "phase": {
            "delta_final": float(diag.phase.delta_kernel[-1]),
            "delta_lsq_final": float(diag.phase.delta_lsq[-1]),
            "max_discrepancy": float(np.max(diag.phase.discrepancy)),
            "picard_iterations": int(diag.phase.picard_iters),
        },
    }
    for key, (target, tol) in THEORY_TARGETS.items():
        got, ci = diag.exponents.get(key, (np.nan, np.nan))
        rec["exponents"][key] = {
            "fitted": float(got), "ci": float(ci),
            "theory": target, "tolerance": tol,
            "matches_theory": bool(np.isfinite(got)
                                   and abs(got - target) <= tol),
        }
    for xs, (tf, vint) in diag.vertical.items():
        half = float(np.interp(tf[-1] / 2.0, tf, vint))
        rec["vertical"][f"{xs:g}"] = {
            "final": float(vint[-1]),
            "half_ratio": float(vint[-1] / half) if half > 0 else 1.0,
            "tolerance": "bounded-accumulation gate ratio < 1.15",
        }
    return rec


# ---------------------------------------------------------------------------
# artifact writers
# ---------------------------------------------------------------------------

def _fmt(x):
    return f"{float(x):.17g}"


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def _write_evans_csv(path, evans):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["Re_lambda", "Im_lambda", "Re_D", "Im_D",
                    "cumulative_argument"])
        for row in evans.csv_rows():
            w.writerow([_fmt(v) for v in row])


def save_run(run, outdir: Path, csv_snapshots: int = 20):
    """Persist a simulation: lossless npz plus CSV chunks and an index."""
    outdir.mkdir(parents=True, exist_ok=True)
    station_keys = sorted(run.stations["index"])
    np.savez_compressed(
        outdir / "run.npz", x=run.x, steady=run.steady,
        steady_prime=run.steady_prime, times=run.times,
        snapshots=run.snapshots, diag_times=run.diag_times,
        station_positions=np.array(station_keys, dtype=float),
        station_indices=np.array([run.stations["index"][k]
                                  for k in station_keys], dtype=int),
        station_series=np.array([run.stations["series"][k]
                                 for k in station_keys]),
        **{f"norm_{k}": v for k, v in run.norms_raw.items()})
    idx = {
        "model": run.model_name,
        "dt": run.dt,
        "h": run.h,
        "station_halfwindow": run.stations["halfwindow"],
        "times": [float(t) for t in run.times],
        "npz": "run.npz",
        "csv_chunks": [],
        "ledger": run.ledger,
    }
    step = max(1, run.times.size // csv_snapshots)
    for k0 in range(0, run.times.size, step):
        name = f"snapshots_{k0:05d}.csv"
        with open(outdir / name, "w", newline="") as fh:
            w = csv.writer(fh)
            n = run.snapshots.shape[2]
            w.writerow(["x"] + [f"W_{c+1}" for c in range(n)])
            for i in range(run.x.size):
                w.writerow([_fmt(run.x[i])]
                           + [_fmt(v) for v in run.snapshots[k0, i]])
        idx["csv_chunks"].append({"file": name, "time": float(run.times[k0])})
    _write_json(outdir / "run.idx.json", idx)


def _write_diag_csv(path, diag):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        keys = sorted(diag.norms)
        w.writerow(["t", "delta", "deltadot", "delta_lsq", "zeta"] + keys)
        for k, t in enumerate(diag.times):
            w.writerow([_fmt(t), _fmt(diag.phase.delta_kernel[k]),
                        _fmt(diag.phase.deltadot_kernel[k]),
                        _fmt(diag.phase.delta_lsq[k]), _fmt(diag.zeta[k])]
                       + [_fmt(diag.norms[key][k]) for key in keys])


def emit_plotdata(outdir: Path, diag, evans=None):
    """Gnuplot-ready whitespace tables for the standard figures."""
    outdir.mkdir(parents=True, exist_ok=True)
    t = diag.times
    with open(outdir / "decay.dat", "w") as fh:
        fh.write("# log-log norm decay; reference slopes: "
                 "L2 -1/4, Linf -1/2, H4 -1/4\n")
        fh.write("# t  L2  Linf  H4  ref_quarter  ref_half\n")
        for k in range(t.size):
            ref4 = diag.norms["L2"][0] * ((1 + t[k]) / (1 + t[0])) ** -0.25
            ref2 = diag.norms["Linf"][0] * ((1 + t[k]) / (1 + t[0])) ** -0.5
            fh.write(" ".join(_fmt(v) for v in (
                t[k], diag.norms["L2"][k], diag.norms["Linf"][k],
                diag.norms["H4"][k], ref4, ref2)) + "\n")
    with open(outdir / "phase.dat", "w") as fh:
        fh.write("# t  delta  delta_lsq  deltadot_weighted "
                 "(weight (1+t)^1/2; reference decay -1/2)\n")
        for k in range(t.size):
            fh.write(" ".join(_fmt(v) for v in (
                t[k], diag.phase.delta_kernel[k], diag.phase.delta_lsq[k],
                abs(diag.phase.deltadot_kernel[k]) * (1 + t[k]) ** 0.5))
                + "\n")
    with open(outdir / "vertical.dat", "w") as fh:
        stations = sorted(diag.vertical)
        fh.write("# t  " + "  ".join(f"x={s:g}" for s in stations) + "\n")
        tf = diag.vertical[stations[0]][0]
        for k in range(0, tf.size, max(1, tf.size // 2000)):
            fh.write(" ".join([_fmt(tf[k])] + [
                _fmt(diag.vertical[s][1][k]) for s in stations]) + "\n")
    if evans is not None:
        with open(outdir / "evans.dat", "w") as fh:
            fh.write("# Re_D  Im_D (image of the stability contour, "
                     "relative scale)\n")
            for row in evans.csv_rows():
                fh.write(f"{_fmt(row[2])} {_fmt(row[3])}\n")


# ---------------------------------------------------------------------------
# kernel verification entry
# ---------------------------------------------------------------------------

def kernels_verify(cfg, which, t_max, outpath):
    model = _build_model(cfg)
    prof, cd = stage_profile(cfg, model)
    report = {"which": which, "model": model.name}
    if which in ("ebounds", "all"):
        ker = _kernels.build_kernel(prof, cd, normalization="paper")
        report["ebounds"] = _kernels.verify_ebounds(ker, t_max=t_max)
    if which in ("aux", "all"):
        speeds = [float(a) for a in cd.a_minus if abs(a) > 1e-10]
        widths = [float(b) for b in cd.beta_minus]
        report["aux"] = _kernels.verify_aux_bounds(
            speeds=tuple(speeds), widths=tuple(widths[:len(speeds)]),
            t_max=t_max)
    verdicts = [v.get("verdict") for k, v in report.items()
                if isinstance(v, dict)]
    report["verdict"] = bool(all(verdicts))
    if outpath:
        _write_json(Path(outpath), report)
    return report


# ---------------------------------------------------------------------------
# argument parsing and dispatch
# ---------------------------------------------------------------------------

def _parser():
    ap = argparse.ArgumentParser(
        prog="shockstab",
        description="viscous shock stability laboratory")
    ap.add_argument("--config", help="config file path or bundled name "
                    f"(bundled: {', '.join(bundled_configs())})")
    ap.add_argument("--out", default="out", help="output directory")
    ap.add_argument("--force", action="store_true",
                    help="simulate even if the Evans gate fails")
    ap.add_argument("--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("profile", help="solve the wave and export it")
    ev = sub.add_parser("evans", help="verify the Evans stability condition")
    ev.add_argument("--contour", nargs="*", default=[],
                    metavar="KEY=VAL", help="override R=.. rho=..")
    sub.add_parser("simulate", help="run the time integration")
    an = sub.add_parser("analyze", help="diagnostics for a stored run")
    an.add_argument("--run", required=True, help="run.idx.json of a run")
    an.add_argument("--csv", default=None)
    sub.add_parser("run", help="full pipeline")
    sw = sub.add_parser("sweep", help="fan out configs from the sweep list")
    sw.add_argument("--jobs", type=int, default=1)
    kv = sub.add_parser("kernels", help="kernel bound certification")
    kv_sub = kv.add_subparsers(dest="kernels_command", required=True)
    kvv = kv_sub.add_parser("verify")
    kvv.add_argument("--which", choices=["ebounds", "aux", "all"],
                     default="all")
    kvv.add_argument("--tmax", type=float, default=1e3)
    kvv.add_argument("--out-report", dest="out_report", default=None)
    return ap


def _need_config(args):
    if not args.config:
        raise ConfigError("this command requires --config")
    return load_config(args.config)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    outdir = Path(args.out)
    try:
        if args.command == "profile":
            cfg = _need_config(args)
            model = _build_model(cfg)
            prof, cd = stage_profile(cfg, model)
            outdir.mkdir(parents=True, exist_ok=True)
            _profile.profile_to_csv(prof, outdir / "profile.csv")
            _profile.save_profile_metadata(prof, outdir / "profile.json", cd)
            print(f"profile residual {prof.residual:.3e}; "
                  f"{_profile.classify_shock(cd).value} wave")
        elif args.command == "evans":
            cfg = _need_config(args)
            for item in args.contour:
                key, val = item.split("=", 1)
                if key not in ("R", "rho"):
                    raise ConfigError(f"unknown contour key {key!r}")
                cfg["evans"][key] = float(val)
            model = _build_model(cfg)
            prof, cd = stage_profile(cfg, model)
            res = stage_evans(cfg, model, prof)
            outdir.mkdir(parents=True, exist_ok=True)
            _write_evans_csv(outdir / "evans.csv", res)
            _write_json(outdir / "evans.json", {
                "winding_excised": res.winding,
                "winding_origin": res.origin_winding,
                "verdict": res.verdict, "R": res.R, "rho": res.rho})
            print(f"windings: excised={res.winding} origin={res.origin_winding}"
                  f" -> {'pass' if res.verdict else 'FAIL'}")
            if not res.verdict:
                return 2
        elif args.command == "simulate":
            cfg = _need_config(args)
            model = _build_model(cfg)
            prof, cd = stage_profile(cfg, model)
            st = _profile.classify_shock(cd)
            if st is _profile.ShockType.OVERCOMPRESSIVE:
                print("refused: overcompressive unsupported", file=sys.stderr)
                return 2
            run = stage_simulate(cfg, model, prof, st)
            save_run(run, outdir)
            print(f"run saved; ledger residual/time "
                  f"{max(run.ledger['residual_per_time']):.3e}")
        elif args.command == "analyze":
            cfg = _need_config(args)
            run = load_run(Path(args.run))
            model = _build_model(cfg)
            prof, cd = stage_profile(cfg, model)
            diag = stage_analyze(cfg, model, run, prof, cd)
            outdir.mkdir(parents=True, exist_ok=True)
            st = _profile.classify_shock(cd)
            _write_json(outdir / "diag.json", diagnostics_record(diag, st))
            _write_diag_csv(Path(args.csv) if args.csv else outdir / "diag.csv",
                            diag)
            emit_plotdata(outdir / "plots", diag)
            print("diagnostics written")
        elif args.command == "run":
            cfg = _need_config(args)
            report = run_experiment(cfg, outdir, force=args.force,
                                    verbose=args.verbose)
            exps = report["diagnostics"]["exponents"]
            print(f"{report['name']}: {report['profile']['shock_type']} wave; "
                  "exponents "
                  + ", ".join(f"{k}={v['fitted']:.3f}" for k, v in exps.items()))
        elif args.command == "sweep":
            cfg = _need_config(args)
            sweeps = cfg.get("sweep")
            if not sweeps:
                raise ConfigError("config has no sweep list")
            for i, override in enumerate(sweeps):
                sub_cfg = json.loads(json.dumps({k: v for k, v in cfg.items()
                                                 if k not in ("sweep", "_hash")}))
                for key, val in override.items():
                    if isinstance(val, dict) and key in sub_cfg:
                        sub_cfg[key].update(val)
                    else:
                        sub_cfg[key] = val
                sub_cfg["_hash"] = hashlib.sha256(
                    json.dumps(sub_cfg, sort_keys=True).encode()).hexdigest()[:16]
                rundir = outdir / f"run-{i:04d}"
                run_experiment(sub_cfg, rundir, force=args.force,
                               verbose=args.verbose)
                print(f"sweep member {i} done -> {rundir}")
        elif args.command == "kernels":
            cfg = _need_config(args)
            rep = kernels_verify(cfg, args.which, args.tmax,
                                 args.out_report)
            print(json.dumps({k: v for k, v in rep.items()
                              if k in ("which", "verdict")}))
            if not rep["verdict"]:
                return 3
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 4
    except GateRefusal as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 2
    except (_profile.ProfileError, _spectral.SpectralError,
            _sim.SimulationError, _analysis.AnalysisError,
            _kernels.KernelError, _models.ModelError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


def load_run(idx_path: Path) -> _sim.SimulationRun:
    """Rehydrate a stored simulation from its index file."""
    if not idx_path.exists():
        raise ConfigError(f"run index {idx_path} not found")
    idx = json.loads(idx_path.read_text())
    data = np.load(idx_path.parent / idx["npz"])
    cfg = _sim.SimulationConfig()
    positions = [float(x) for x in data["station_positions"]]
    stations = {
        "halfwindow": idx["station_halfwindow"],
        "index": {x: int(i) for x, i in zip(positions,
                                            data["station_indices"])},
        "series": {x: data["station_series"][k]
                   for k, x in enumerate(positions)},
    }
    run = _sim.SimulationRun(
        model_name=idx["model"], x=data["x"], steady=data["steady"],
        steady_prime=data["steady_prime"], times=data["times"],
        snapshots=data["snapshots"], diag_times=data["diag_times"],
        norms_raw={k[5:]: data[k] for k in data.files
                   if k.startswith("norm_")},
        stations=stations,
        ledger=idx["ledger"], config=cfg, dt=idx["dt"],
        boundary_quietness=0.0, profile=None)
    return run


if __name__ == "__main__":
    sys.exit(main())
