"""Command-line front end: batch measures, postulate validation, error
exponents, conversion experiments, and result reporting.

Configuration comes from a TOML file and/or flags (flags win); the
RESCOMP_SEED environment variable overrides the configured seed.  Result
files (CSV/JSON) are deterministic for a fixed manifest: numeric output is
printed at 12 significant digits and no timing data enters result files
(wall time lives in manifest.json only).  Files are written to a temporary
name and renamed, so failed runs leave no partial outputs.

Exit codes: 0 success; 1 configuration error; 2 solver non-convergence
(results still written, flagged); 3 validation failure; 4 free conversion
target; 5 dimension cap exceeded.
"""

from __future__ import annotations

import json
import os
import sys
import tempfile
import time

import click
import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .core import (
    DensityMatrix,
    HermitianOperator,
    SubsystemShape,
    basis_state,
    bell_state,
    maximally_coherent_state,
    maximally_mixed_state,
    random_density_matrix,
)
from .errors import (
    ConfigError,
    DimensionCap,
    NonConvergence,
    RescompError,
    TargetIsFree,
)
from .freesets import (
    GibbsSingleton,
    IncoherentFamily,
    MaxMixedSingleton,
    PPTFamily,
    family_from_obj,
    validate_postulates,
)
from .hypothesis import stein_exponent_sequence
from .measures import (
    SolverConfig,
    global_robustness,
    log_robustness,
    regularized_estimate,
    relative_entropy_of_resource,
    smoothed_log_robustness,
    trace_distance_of_resource,
)
from .protocol import rate_experiment
from .serialize import state_from_obj, state_to_obj


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def _write_atomic(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-rescomp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_csv(path: str, columns, rows):
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(v) if not isinstance(v, str) else v for v in row))
    _write_atomic(path, "\n".join(lines) + "\n")


def _load_toml(path):
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}")


def _parse_dims(text: str):
    try:
        dims = tuple(int(p) for p in text.split(","))
    except ValueError:
        raise ConfigError(f"invalid dimension list {text!r}")
    if not dims or any(d < 1 for d in dims):
        raise ConfigError(f"invalid dimension list {text!r}")
    return dims


def parse_family(descriptor: str):
    """Family from a builtin descriptor string or a JSON descriptor file.

    Builtins: incoherent:DIMS, ppt:DIMS:FACTORS, maxmixed:DIMS,
    gibbs:D:BETA (ladder Hamiltonian diag(0..D-1)); DIMS like "2" or "2,2".
    """
    if descriptor.endswith(".json") or os.path.sep in descriptor:
        if not os.path.exists(descriptor):
            raise ConfigError(f"family file not found: {descriptor}")
        with open(descriptor) as fh:
            try:
                return family_from_obj(json.load(fh))
            except (ValueError, KeyError) as exc:
                raise ConfigError(f"invalid family file {descriptor}: {exc}")
    parts = descriptor.split(":")
    kind = parts[0]
    try:
        if kind == "incoherent" and len(parts) == 2:
            return IncoherentFamily(SubsystemShape(_parse_dims(parts[1])))
        if kind == "ppt" and len(parts) == 3:
            dims = _parse_dims(parts[1])
            factors = [int(f) for f in parts[2].split(",")]
            return PPTFamily(SubsystemShape(dims), factors)
        if kind == "maxmixed" and len(parts) == 2:
            return MaxMixedSingleton(SubsystemShape(_parse_dims(parts[1])))
        if kind == "gibbs" and len(parts) == 3:
            d = int(parts[1])
            beta = float(parts[2])
            shape = SubsystemShape((d,))
            ham = HermitianOperator(shape, np.diag(np.arange(d)).astype(complex))
            return GibbsSingleton(shape, ham, beta)
    except (ValueError, RescompError) as exc:
        raise ConfigError(f"invalid family descriptor {descriptor!r}: {exc}")
    raise ConfigError(f"unrecognized family descriptor {descriptor!r}")


def parse_state(descriptor: str):
    """(state_id, DensityMatrix) from a builtin descriptor or a JSON file.

    Builtins: plus_state:D, bell_state, basis_state:D:I, mixed:DIMS,
    random:SEED:DIMS:RANK.
    """
    if descriptor.endswith(".json") or os.path.sep in descriptor:
        if not os.path.exists(descriptor):
            raise ConfigError(f"state file not found: {descriptor}")
        with open(descriptor) as fh:
            try:
                return os.path.basename(descriptor), state_from_obj(json.load(fh))
            except (ValueError, KeyError, RescompError) as exc:
                raise ConfigError(f"invalid state file {descriptor}: {exc}")
    parts = descriptor.split(":")
    try:
        if parts[0] == "plus_state" and len(parts) == 2:
            return descriptor, maximally_coherent_state(int(parts[1]))
        if parts[0] == "bell_state" and len(parts) == 1:
            return descriptor, bell_state()
        if parts[0] == "basis_state" and len(parts) == 3:
            return descriptor, basis_state((int(parts[1]),), int(parts[2]))
        if parts[0] == "mixed" and len(parts) == 2:
            return descriptor, maximally_mixed_state(_parse_dims(parts[1]))
        if parts[0] == "random" and len(parts) == 4:
            seed = int(parts[1])
            dims = _parse_dims(parts[2])
            rank = int(parts[3])
            return descriptor, random_density_matrix(dims, rank=rank, seed=seed)
    except (ValueError, RescompError) as exc:
        raise ConfigError(f"invalid state descriptor {descriptor!r}: {exc}")
    raise ConfigError(f"unrecognized state descriptor {descriptor!r}")


def _merge_config(config_path, flag_values: dict) -> dict:
    cfg = {}
    if config_path:
        cfg.update(_load_toml(config_path))
    for key, value in flag_values.items():
        if value is not None and value != ():
            cfg[key] = list(value) if isinstance(value, tuple) else value
    if "RESCOMP_SEED" in os.environ:
        try:
            cfg["seed"] = int(os.environ["RESCOMP_SEED"])
        except ValueError:
            raise ConfigError("RESCOMP_SEED must be an integer")
    return cfg


def _solver_config(cfg: dict) -> SolverConfig:
    solver = dict(cfg.get("solver", {}))
    solver.setdefault("seed", int(cfg.get("seed", 0)))
    try:
        return SolverConfig(**solver)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid solver configuration: {exc}")


def _outdir(cfg: dict) -> str:
    path = cfg.get("output_dir", ".")
    os.makedirs(path, exist_ok=True)
    if not os.access(path, os.W_OK):
        raise ConfigError(f"output directory not writable: {path}")
    return path


def _write_manifest(outdir, command, cfg, outputs, wall_s):
    manifest = {
        "command": command,
        "config": cfg,
        "seed": int(cfg.get("seed", 0)),
        "versions": {
            "rescomp": __version__,
            "numpy": np.__version__,
            "python": sys.version.split()[0],
        },
        "outputs": sorted(outputs),
        "wall_time_s": wall_s,
    }
    import scipy

    manifest["versions"]["scipy"] = scipy.__version__
    _write_atomic(
        os.path.join(outdir, "manifest.json"),
        json.dumps(manifest, indent=2, sort_keys=True) + "\n",
    )


_EXIT_CODES = [
    (ConfigError, 1),
    (TargetIsFree, 4),
    (DimensionCap, 5),
]


def _dispatch(command, cfg, runner):
    """Run a subcommand body, mapping package errors to exit codes and
    always writing the manifest for whatever outputs were produced."""
    t0 = time.monotonic()
    outputs = []
    code = 0
    try:
        code = runner(outputs) or 0
    except NonConvergence as exc:
        click.echo(f"error: solver did not converge: {exc}", err=True)
        code = 2
    except tuple(e for e, _ in _EXIT_CODES) as exc:
        for etype, ecode in _EXIT_CODES:
            if isinstance(exc, etype):
                click.echo(f"error: {exc}", err=True)
                code = ecode
                break
    except RescompError as exc:
        click.echo(f"error: {exc}", err=True)
        code = 1
    try:
        outdir = _outdir(cfg)
        _write_manifest(outdir, command, cfg, outputs, time.monotonic() - t0)
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        code = code or 1
    sys.exit(code)


@click.group()
def main():
    """Resource-theory measures, validation, exponents, and conversion."""


_MEASURE_TOKENS = ("E", "R", "logR", "smoothedLR", "T", "Einf")


@main.command()
@click.option("--config", "config_path", type=str, default=None)
@click.option("--family", type=str, default=None)
@click.option("--state", "states", type=str, multiple=True)
@click.option("--measures", type=str, default=None, help="comma list of "
              + ",".join(_MEASURE_TOKENS))
@click.option("--eps", type=float, default=None, help="smoothing radius for smoothedLR")
@click.option("--n-max", type=int, default=None, help="copies for Einf")
@click.option("--output-dir", type=str, default=None)
@click.option("--seed", type=int, default=None)
def measure(config_path, family, states, measures, eps, n_max, output_dir, seed):
    """Compute measures for each state against a free-set family."""
    cfg = _merge_config(config_path, {
        "family": family, "states": states, "measures": measures,
        "eps": eps, "n_max": n_max, "output_dir": output_dir, "seed": seed,
    })

    def runner(outputs):
        if "family" not in cfg:
            raise ConfigError("a family descriptor is required")
        if not cfg.get("states"):
            raise ConfigError("at least one state is required")
        fam = parse_family(cfg["family"])
        tokens = [t.strip() for t in str(cfg.get("measures", "E")).split(",") if t.strip()]
        for t in tokens:
            if t not in _MEASURE_TOKENS:
                raise ConfigError(f"unknown measure {t!r}")
        solver = _solver_config(cfg)
        smoothing = float(cfg.get("eps", 0.05))
        copies = int(cfg.get("n_max", 3))
        rows, detail, nonconverged = [], {}, False
        for descriptor in cfg["states"]:
            state_id, rho = parse_state(descriptor)
            for token in tokens:
                n_col = 1
                try:
                    if token == "E":
                        res = relative_entropy_of_resource(rho, fam, solver)
                        value, gap = res.value, res.gap_bound
                    elif token == "R":
                        res = global_robustness(rho, fam, solver)
                        value, gap = res.value, res.gap_bound
                    elif token == "logR":
                        res = global_robustness(rho, fam, solver)
                        value, gap = float(np.log2(1.0 + res.value)), res.gap_bound
                    elif token == "smoothedLR":
                        res = smoothed_log_robustness(rho, fam, smoothing, solver)
                        value, gap = res.value, res.gap_bound
                    elif token == "T":
                        res = trace_distance_of_resource(rho, fam, solver)
                        value, gap = res.value, res.gap_bound
                    else:  # Einf
                        seq = regularized_estimate(rho, fam, copies, solver)
                        value, gap = seq.estimate, seq.gap_bound
                        n_col = copies
                        detail.setdefault(state_id, {})["Einf_sequence"] = seq.to_obj()
                except NonConvergence as exc:
                    if exc.result is None:
                        raise
                    res = exc.result
                    value, gap = res.value, res.gap_bound
                    nonconverged = True
                rows.append((token, fam.describe(), state_id, n_col, value, gap))
                if token in ("E", "R", "smoothedLR", "T"):
                    detail.setdefault(state_id, {})[token] = res.to_obj()
        outdir = _outdir(cfg)
        csv_path = os.path.join(outdir, "measures.csv")
        _write_csv(csv_path, ("measure", "family", "state_id", "n", "value", "gap"), rows)
        json_path = os.path.join(outdir, "measures.json")
        _write_atomic(json_path, json.dumps(detail, indent=2, sort_keys=True) + "\n")
        outputs.extend([csv_path, json_path])
        return 2 if nonconverged else 0

    _dispatch("measure", cfg, runner)


@main.command()
@click.option("--config", "config_path", type=str, default=None)
@click.option("--family", type=str, default=None)
@click.option("--samples", type=int, default=None)
@click.option("--output-dir", type=str, default=None)
@click.option("--seed", type=int, default=None)
def validate(config_path, family, samples, output_dir, seed):
    """Randomized check of the free-set closure postulates."""
    cfg = _merge_config(config_path, {
        "family": family, "samples": samples, "output_dir": output_dir, "seed": seed,
    })

    def runner(outputs):
        if "family" not in cfg:
            raise ConfigError("a family descriptor is required")
        count = int(cfg.get("samples", 25))
        if count < 1:
            raise ConfigError("samples must be >= 1")
        fam = parse_family(cfg["family"])
        report = validate_postulates(fam, samples=count, seed=int(cfg.get("seed", 0)))
        outdir = _outdir(cfg)
        path = os.path.join(outdir, "postulates.txt")
        _write_atomic(path, "\n".join(report.lines()) + "\n")
        outputs.append(path)
        for line in report.lines():
            click.echo(line, err=True)
        failed = [c for c in report.checks if not c.passed]
        for check in failed:
            if check.counterexample is not None:
                cpath = os.path.join(outdir, f"counterexample_{check.name}.json")
                _write_atomic(
                    cpath,
                    json.dumps(state_to_obj(check.counterexample),
                               indent=2, sort_keys=True) + "\n",
                )
                outputs.append(cpath)
        return 3 if failed else 0

    _dispatch("validate", cfg, runner)


@main.command()
@click.option("--config", "config_path", type=str, default=None)
@click.option("--family", type=str, default=None)
@click.option("--state", "state_desc", type=str, default=None)
@click.option("--n-max", type=int, default=None)
@click.option("--eps", type=float, default=None)
@click.option("--output-dir", type=str, default=None)
@click.option("--seed", type=int, default=None)
def stein(config_path, family, state_desc, n_max, eps, output_dir, seed):
    """Hypothesis-testing error exponents -log2(beta_n)/n for n = 1..n_max."""
    cfg = _merge_config(config_path, {
        "family": family, "state": state_desc, "n_max": n_max,
        "eps": eps, "output_dir": output_dir, "seed": seed,
    })

    def runner(outputs):
        if "family" not in cfg or "state" not in cfg:
            raise ConfigError("stein needs --family and --state")
        fam = parse_family(cfg["family"])
        state_id, rho = parse_state(cfg["state"])
        copies = int(cfg.get("n_max", 4))
        level = float(cfg.get("eps", 0.05))
        solver = _solver_config(cfg)
        seq = stein_exponent_sequence(rho, fam, copies, level, solver)
        rows = [
            (n, beta, exponent, seq.e_infinity_estimate)
            for n, beta, exponent in seq.entries
        ]
        outdir = _outdir(cfg)
        csv_path = os.path.join(outdir, "stein.csv")
        _write_csv(csv_path, ("n", "beta", "exponent", "e_infinity_estimate"), rows)
        summary = {
            "state": state_id,
            "family": fam.describe(),
            "eps": level,
            "e_infinity_estimate": seq.e_infinity_estimate,
            "final_exponent": seq.entries[-1][2],
        }
        json_path = os.path.join(outdir, "stein.json")
        _write_atomic(json_path, json.dumps(summary, indent=2, sort_keys=True) + "\n")
        outputs.extend([csv_path, json_path])

    _dispatch("stein", cfg, runner)


@main.command()
@click.option("--config", "config_path", type=str, default=None)
@click.option("--source", type=str, default=None)
@click.option("--target", type=str, default=None)
@click.option("--family", type=str, default=None)
@click.option("--n-max", type=int, default=None)
@click.option("--output-dir", type=str, default=None)
@click.option("--seed", type=int, default=None)
def convert(config_path, source, target, family, n_max, output_dir, seed):
    """Conversion-rate experiment source -> target for n = 1..n_max."""
    cfg = _merge_config(config_path, {
        "source": source, "target": target, "family": family,
        "n_max": n_max, "output_dir": output_dir, "seed": seed,
    })

    def runner(outputs):
        for key in ("source", "target", "family"):
            if key not in cfg:
                raise ConfigError(f"convert needs --{key}")
        fam = parse_family(cfg["family"])
        _, rho = parse_state(cfg["source"])
        _, sigma = parse_state(cfg["target"])
        copies = int(cfg.get("n_max", 4))
        solver = _solver_config(cfg)
        report = rate_experiment(rho, sigma, fam, copies, solver)
        outdir = _outdir(cfg)
        csv_path = os.path.join(outdir, "convert.csv")
        _write_csv(csv_path, report.CSV_COLUMNS, report.entries)
        json_path = os.path.join(outdir, "convert.json")
        _write_atomic(json_path, json.dumps(report.to_obj(), indent=2,
                                            sort_keys=True) + "\n")
        outputs.extend([csv_path, json_path])

    _dispatch("convert", cfg, runner)


@main.command()
@click.option("--config", "config_path", type=str, default=None)
@click.option("--input-dir", type=str, default=None)
@click.option("--output-dir", type=str, default=None)
def report(config_path, input_dir, output_dir):
    """Summarize the result files of previous runs into report.json."""
    cfg = _merge_config(config_path, {
        "input_dir": input_dir, "output_dir": output_dir,
    })

    def runner(outputs):
        src = cfg.get("input_dir")
        if not src or not os.path.isdir(src):
            raise ConfigError(f"input directory not found: {src}")
        summary = {"files": []}
        for name in sorted(os.listdir(src)):
            if not name.endswith(".csv"):
                continue
            with open(os.path.join(src, name)) as fh:
                lines = fh.read().strip().split("\n")
            summary["files"].append({
                "name": name,
                "columns": lines[0].split(","),
                "rows": len(lines) - 1,
            })
        manifest_path = os.path.join(src, "manifest.json")
        if os.path.exists(manifest_path):
            with open(manifest_path) as fh:
                manifest = json.load(fh)
            summary["source_manifest"] = {
                k: manifest.get(k) for k in ("command", "seed", "versions")
            }
        outdir = _outdir(cfg)
        path = os.path.join(outdir, "report.json")
        _write_atomic(path, json.dumps(summary, indent=2, sort_keys=True) + "\n")
        outputs.append(path)

    _dispatch("report", cfg, runner)


if __name__ == "__main__":
    main()
