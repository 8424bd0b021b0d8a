"""Command-line runner for the exchange, tomography, noise, lowering and spectrum experiments.

Every run writes ``record.json`` (config echo, payload, payload hash, wall
time) into ``--out`` and, where it applies, plot-ready ``bloch.csv`` or
``chi.csv``. The payload is serialized with sorted keys and fixed float
formatting so that equal configs and seeds give byte-identical payloads.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 verification mismatch.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import tempfile
import time
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import braiding, ite, majorana, optics, tomography

EXPERIMENTS = ("braid", "tomography", "noise", "lower", "spectrum", "ite-convergence")
COMMANDS = EXPERIMENTS + ("validate",)
RECORD_TAG = "mzmbraid.record/1"
DEFAULTS = {
    "t": ite.DEFAULT_T,
    "shots": None,
    "seed": 0,
    "leakage": 0.0,
    "kind": "flip",
    "trials": 100,
    "trace": False,
    "out": None,
}
# hardware-limited experimental values kept for comparison only
REFERENCES = {
    "braid": {"process_fidelity_experiment": 0.9413},
    "tomography": {"process_fidelity_experiment": 0.9413},
    "noise": {"flip_fidelity_experiment": 0.9791, "phase_fidelity_experiment": 0.9699},
}

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_MISMATCH = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


class VerificationError(RuntimeError):
    pass


# -- config -------------------------------------------------------------------

def load_schema(name: str) -> dict:
    text = resources.files("mzmbraid").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def _error_path(err: jsonschema.ValidationError) -> str:
    return "/".join(str(p) for p in err.absolute_path) or "<root>"


def validate_config(cfg: dict) -> list[str]:
    """Schema diagnostics as ``path: message`` strings (empty when valid)."""
    if not isinstance(cfg, dict):
        return ["<root>: config must be a JSON object"]
    validator = jsonschema.Draft202012Validator(load_schema("config"))
    out = []
    for err in sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path)):
        path = _error_path(err)
        if path == "experiment" and err.validator == "enum":
            out.append(f"experiment: unknown experiment {err.instance!r}; valid names: {', '.join(EXPERIMENTS)}")
        else:
            out.append(f"{path}: {err.message}")
    return out


def validate_record(record: dict) -> list[str]:
    validator = jsonschema.Draft202012Validator(load_schema("record"))
    return [f"{_error_path(e)}: {e.message}" for e in validator.iter_errors(record)]


def resolve_config(cfg: dict) -> dict:
    problems = validate_config(cfg)
    if problems:
        raise ConfigError("\n".join(problems))
    full = dict(DEFAULTS)
    full.update(cfg)
    return full


def _t_value(t) -> float:
    return math.inf if t == "inf" else float(t)


# -- serialization ------------------------------------------------------------

def _clean(x):
    """Round-trip-stable JSON form: finite floats, complex as [re, im], inf as a string."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [_clean(float(x.real)), _clean(float(x.imag))]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return float(f"{x:.15g}") + 0.0
    return x


def canonical_json(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, separators=(",", ":"))


def payload_hash(payload: dict) -> str:
    return hashlib.sha256(canonical_json(payload).encode()).hexdigest()


def atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([f"{v:.12g}" if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def bloch_csv(pairs) -> str:
    rows = [[p["label"], *p["initial"], *p["final"]] for p in pairs]
    return _csv(rows, ["label", "p1_init", "p2_init", "p3_init", "p1_final", "p2_final", "p3_final"])


def chi_csv(chi) -> str:
    rows = []
    for i, a in enumerate(tomography.PAULI_LABELS):
        for j, b in enumerate(tomography.PAULI_LABELS):
            z = complex(chi[i][j][0], chi[i][j][1]) if isinstance(chi[i][j], list) else complex(chi[i][j])
            rows.append([a, b, float(z.real), float(z.imag)])
    return _csv(rows, ["row", "col", "re", "im"])


# -- experiments --------------------------------------------------------------

def run_braid(cfg: dict) -> dict:
    t = _t_value(cfg["t"])
    ex = braiding.exchange_operator(t)
    pair = braiding.ground_basis_h0()
    gphase = braiding.geometric_phase(pair.basis1, braiding.braid_projectors()) - braiding.geometric_phase(
        pair.basis0, braiding.braid_projectors()
    )
    states = braiding.axis_states()
    traj = braiding.braid_trajectory([s for _, s in states], t)
    sign, dev = braiding.rotation_fit(traj)
    return {
        "t": t,
        "exchange_matrix": ex.matrix,
        "relative_phase": ex.relative_phase,
        "distance_to_minus_i": ex.distance_reference,
        "distance_to_plus_i": ex.distance_mirror,
        "off_diagonal": ex.off_diagonal,
        "singular_spread": ex.singular_spread,
        "geometric_phase_difference": gphase,
        "rotation_sign": sign,
        "rotation_max_deviation": dev,
        "bloch_pairs": [
            {"label": lab, "initial": list(a.as_tuple()), "final": list(b.as_tuple())}
            for (lab, _), (a, b) in zip(states, traj)
        ],
        "references": REFERENCES["braid"],
    }


def run_tomography(cfg: dict) -> dict:
    t = _t_value(cfg["t"])
    shots = cfg["shots"]
    pm = tomography.process_tomography(braiding.braid_channel(t), shots=shots, rng=cfg["seed"])
    ideal = tomography.chi_from_unitary(braiding.ideal_exchange_z(braiding.MIRROR_EXCHANGE))
    reference = tomography.chi_from_unitary(braiding.ideal_exchange_z(braiding.REFERENCE_EXCHANGE))
    return {
        "t": t,
        "shots": shots,
        "seed": cfg["seed"],
        "chi": pm.chi,
        "psd_repaired": pm.psd_repaired,
        "fidelity": tomography.process_fidelity(pm, ideal),
        "fidelity_minus_i_reference": tomography.process_fidelity(pm, reference),
        "references": REFERENCES["tomography"],
    }


def run_noise(cfg: dict) -> dict:
    t = _t_value(cfg["t"])
    flip, phase = braiding.noise_operators()
    d = flip if cfg["kind"] == "flip" else phase
    lam, resid = braiding.noise_immunity_check(d)
    prot = braiding.protection_channel(d, t)
    return {
        "t": t,
        "kind": cfg["kind"],
        "operator": d.spin.to_text(),
        "lambda": lam.real,
        "lambda_imag": lam.imag,
        "residual": resid,
        "protection_fidelity": prot.fidelity,
        "chi": prot.process.chi,
        "success_probability": dict(sorted(prot.success_probability.items())),
        "leakage": prot.leakage,
        "references": REFERENCES["noise"],
    }


def run_lower(cfg: dict, trace_out=None) -> dict:
    sched = ite.braid_schedule(_t_value(cfg["t"]))
    pipe = optics.lower(sched)
    report = optics.verify_lowering(sched, cfg["trials"], pipe, seed=cfg["seed"])
    uniform = pipe.stages[0].basis @ (np.ones(pipe.n_modes) / math.sqrt(pipe.n_modes))
    de0 = optics.OpticalPipeline((pipe.stages[0], pipe.stages[1], optics.Stage(
        "Measure", "Measure", pipe.n_modes, pipe.stages[1].modes_out, pipe.stages[1].modes_out,
        basis=pipe.stages[0].basis)))
    trace: list = []
    optics.simulate_pipeline(pipe, braiding.ground_basis_h0().basis0, trace)
    if trace_out is not None:
        print(optics.format_trace(trace), file=trace_out)
    payload = {
        "stages": pipe.names,
        "pipeline": pipe.to_json(),
        "verification": {
            "trials": report.trials,
            "passes": report.passes,
            "max_state_error": report.max_state_error,
            "max_probability_error": report.max_probability_error,
            "failures": list(report.failures),
        },
        "uniform_de0_success_probability": optics.simulate_pipeline(de0, uniform).success_probability,
        "trace_zero_3s": [
            {"stage": r.name, "modes_in": r.modes_in, "modes_out": r.modes_out,
             "probability": r.cumulative_probability}
            for r in trace
        ],
    }
    lk = cfg["leakage"]
    ideal = tomography.chi_from_unitary(braiding.ideal_exchange_z())
    leaky = optics.imperfect_dissipation(pipe, lk)
    pm = tomography.process_tomography(optics.logical_channel(leaky))
    payload["leakage"] = {
        "value": lk,
        "process_fidelity": tomography.process_fidelity(pm, ideal),
        "success_probability_zero_3s": optics.simulate_pipeline(leaky, braiding.ground_basis_h0().basis0).success_probability,
    }
    if not report.ok:
        payload["_mismatch"] = True
    return payload


def run_spectrum(cfg: dict) -> dict:
    spin = majorana.spin_hamiltonians()
    ferm = majorana.kitaev_hamiltonians()
    reports = {r.index: r for r in majorana.convention_report()}
    matches = []
    for j in range(3):
        r = reports[j]
        rec = majorana.reconcile(r.jw_image, *majorana.RECONCILIATION[j])
        ok, dev = majorana.spectra_match(rec, spin[j])
        matches.append({
            "index": j,
            "raw_match": r.spectra_match,
            "raw_max_deviation": r.max_deviation,
            "reconciled_match": ok,
            "reconciled_max_deviation": dev,
            "relabel_sites": list(majorana.RECONCILIATION[j][0]),
            "offset": majorana.RECONCILIATION[j][1],
        })
    return {
        "spin": {f"H{j}": ite.eig_hermitian(h).eigenvalues for j, h in enumerate(spin)},
        "fermionic": {
            f"H{j}": np.linalg.eigvalsh(majorana.majorana_to_dense(m)) for j, m in enumerate(ferm)
        },
        "matches": matches,
    }


def run_ite_convergence(cfg: dict) -> dict:
    rng = np.random.default_rng(cfg["seed"])
    s = rng.normal(size=8) + 1j * rng.normal(size=8)
    ts = list(range(1, 7))
    h0, h1, _ = majorana.spin_hamiltonians()
    curves = {}
    for name, h in (("H0", h0), ("H1", h1)):
        ys = ite.convergence_curve(h, ts, s)
        curves[name] = {
            "gap": ite.eig_hermitian(h).gap,
            "excited_amplitude": ys,
            "log_slope": ite.fit_log_slope(ts, ys),
        }
    return {"seed": cfg["seed"], "times": ts, "curves": curves}


RUNNERS = {
    "braid": run_braid,
    "tomography": run_tomography,
    "noise": run_noise,
    "spectrum": run_spectrum,
    "ite-convergence": run_ite_convergence,
}


def run(cfg: dict, trace_out=None) -> dict:
    """Execute one experiment and return its record (not yet written)."""
    cfg = resolve_config(cfg)
    start = time.perf_counter()
    name = cfg["experiment"]
    body = run_lower(cfg, trace_out if cfg["trace"] else None) if name == "lower" else RUNNERS[name](cfg)
    mismatch = body.pop("_mismatch", False)
    payload = _clean({"experiment": name, **body})
    record = {
        "schema": RECORD_TAG,
        "config": _clean(cfg),
        "payload": payload,
        "payload_sha256": payload_hash(payload),
        "duration_s": time.perf_counter() - start,
    }
    problems = validate_record(record)
    if problems:
        raise VerificationError("record fails its schema: " + "; ".join(problems))
    if mismatch:
        record["_mismatch"] = True
    return record


def write_outputs(record: dict, out: Path) -> list[Path]:
    out = Path(out)
    written = []
    rec = {k: v for k, v in record.items() if not k.startswith("_")}
    atomic_write(out / "record.json", json.dumps(rec, sort_keys=True, indent=2) + "\n")
    written.append(out / "record.json")
    payload = record["payload"]
    if "bloch_pairs" in payload:
        atomic_write(out / "bloch.csv", bloch_csv(payload["bloch_pairs"]))
        written.append(out / "bloch.csv")
    if "chi" in payload:
        atomic_write(out / "chi.csv", chi_csv(payload["chi"]))
        written.append(out / "chi.csv")
    return written


# -- argument handling --------------------------------------------------------

def _t_arg(text: str):
    if text.strip().lower() in ("inf", "infinity"):
        return "inf"
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a duration: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mzmbraid", description=__doc__.split("\n")[0])
    p.add_argument("command", nargs="?", help=f"one of: {', '.join(COMMANDS)}")
    p.add_argument("path", nargs="?", help="config file for 'validate'")
    p.add_argument("--experiment", help="experiment name (alternative to the positional command)")
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--t", type=_t_arg, help="evolution time (number or 'inf')")
    p.add_argument("--shots", type=int, help="shots per tomography setting (default: exact)")
    p.add_argument("--seed", type=int)
    p.add_argument("--leakage", type=float, help="imperfect dissipation amplitude-squared leak")
    p.add_argument("--kind", help="noise kind: flip or phase")
    p.add_argument("--trials", type=int, help="random inputs for lowering verification")
    p.add_argument("--trace", action="store_true", default=None, help="print the per-stage trace")
    p.add_argument("--out", help="output directory")
    return p


def _read_config(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            path = args.path or args.config
            if not path:
                raise ConfigError("validate needs a config file path")
            problems = validate_config(_read_config(path))
            for line in problems:
                print(f"{path}: {line}", file=sys.stderr)
            if problems:
                return EXIT_CONFIG
            print(f"{path}: ok")
            return EXIT_OK
        cfg = _read_config(args.config) if args.config else {}
        if args.command is not None:
            if args.command not in EXPERIMENTS:
                raise ConfigError(f"unknown command {args.command!r}; valid names: {', '.join(COMMANDS)}")
            cfg["experiment"] = args.command
        if args.experiment is not None:
            cfg["experiment"] = args.experiment
        for key in ("t", "shots", "seed", "leakage", "kind", "trials", "trace", "out"):
            val = getattr(args, key)
            if val is not None:
                cfg[key] = val
        if "experiment" not in cfg:
            raise ConfigError(f"no experiment given; valid names: {', '.join(EXPERIMENTS)}")
        record = run(cfg, trace_out=sys.stdout)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except VerificationError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    out = record["config"].get("out")
    if out:
        for path in write_outputs(record, Path(out)):
            print(path)
    else:
        print(json.dumps({k: v for k, v in record.items() if not k.startswith("_")}, sort_keys=True, indent=2))
    if record.get("_mismatch"):
        print("verification failure: pipeline disagrees with the dense computation", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
