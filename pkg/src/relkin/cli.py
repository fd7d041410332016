"""Command-line driver: ``relkin <experiment> [--config PATH] [--out DIR] ...``.

Writes ``results.csv`` (long format: experiment, c, parameter, value) and
``summary.json`` into the output directory.  Exit codes: 0 pass, 1 threshold
not met, 2 configuration error, 3 numerical failure.
"""

import argparse
import csv
import inspect
import json
import os
import sys
import time
from types import SimpleNamespace

SUBCOMMANDS = (
    "bessel",
    "kernels",
    "nu",
    "basis-limit",
    "coercivity",
    "psi1",
    "euler-limit",
    "kernel-limit",
    "selftest",
)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


class ConfigError(Exception):
    pass


def _set_threads(n):
    # must run before numpy is imported to take effect on the BLAS pool
    n = os.environ.get("RELKIN_THREADS", n)
    if n is None:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = str(int(n))


def load_config(path):
    """Read a TOML (``.toml``) or JSON file into a flat dictionary."""
    if path is None:
        return {}
    try:
        if path.endswith(".json"):
            with open(path) as fh:
                cfg = json.load(fh)
        else:
            try:
                import tomllib
            except ModuleNotFoundError:
                import tomli as tomllib
            with open(path, "rb") as fh:
                cfg = tomllib.load(fh)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a table")
    return cfg


def validate_config(func, cfg, seed=None):
    """Check ``cfg`` keys against the experiment's parameters; unknown keys are rejected."""
    params = inspect.signature(func).parameters
    cfg = dict(cfg)
    cfg.pop("experiment", None)
    unknown = sorted(set(cfg) - set(params))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    for k, v in cfg.items():
        default = params[k].default
        if isinstance(default, tuple) and isinstance(v, list):
            cfg[k] = tuple(tuple(x) if isinstance(x, list) else x for x in v)
        elif isinstance(default, bool) and not isinstance(v, bool):
            raise ConfigError(f"{k} must be a boolean")
        elif isinstance(default, (int, float)) and not isinstance(default, bool):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{k} must be a number")
    if seed is not None and "seed" in params:
        cfg["seed"] = seed
    return cfg


def _selftest(seed=0):
    from . import experiments as ex

    results = [
        ex.bessel_suite(seed=seed),
        ex.micro_suite(n=10_000, seed=seed),
        ex.basis_limit(seed=seed),
        ex.positivity_suite(n_states=20, seed=seed),
        ex.kernel_oracle_check(n_pairs=20, seed=seed),
    ]
    out = ex.ExperimentResult("selftest")
    for r in results:
        out.rows.extend((c, f"{r.name}:{p}", v) for c, p, v in r.rows)
        out.summary[r.name] = {"passed": bool(r.passed), **r.summary}
    out.passed = all(r.passed for r in results)
    return out


def _json_default(obj):
    import numpy as np

    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(type(obj).__name__)


def write_outputs(result, out_dir, plot=False):
    """Write ``results.csv``, ``summary.json`` and optionally ``<name>.dat``."""
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "results.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["experiment", "c", "parameter", "value"])
        for c, p, v in result.rows:
            w.writerow([result.name, repr(float(c)) if c != "" else "", p, repr(float(v))])
    summary = {"experiment": result.name, "passed": bool(result.passed), **result.summary}
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    if result.series:
        from .euler import write_timeseries_csv

        write_timeseries_csv(os.path.join(out_dir, "timeseries.csv"), SimpleNamespace(**result.series))
    if plot:
        # gnuplot blocks separated by blank lines, one per parameter
        blocks = {}
        for c, p, v in result.rows:
            if c != "":
                blocks.setdefault(p, []).append((float(c), v))
        with open(os.path.join(out_dir, f"{result.name}.dat"), "w") as fh:
            for p, pts in blocks.items():
                fh.write(f"# {p}\n")
                for c, v in pts:
                    fh.write(f"{c!r} {v!r}\n")
                fh.write("\n\n")


def build_parser():
    ap = argparse.ArgumentParser(prog="relkin", description="Relativistic kinetic theory numerical experiments.")
    ap.add_argument("experiment", choices=SUBCOMMANDS)
    ap.add_argument("--config", metavar="PATH", help="TOML or JSON file of experiment parameters")
    ap.add_argument("--out", metavar="DIR", default="relkin-out", help="output directory")
    ap.add_argument("--threads", metavar="N", type=int, help="BLAS threads (RELKIN_THREADS overrides)")
    ap.add_argument("--plot", action="store_true", help="also write gnuplot .dat data")
    ap.add_argument("--seed", metavar="U64", type=int, help="seed for randomized experiments")
    return ap


def run(argv=None):
    """Parse ``argv``, run the experiment and return the exit code."""
    args = build_parser().parse_args(argv)
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("error: seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    _set_threads(args.threads)

    import numpy as np

    from . import experiments as ex
    from .errors import RelkinError, UsageError

    func = _selftest if args.experiment == "selftest" else ex.EXPERIMENTS[args.experiment]
    try:
        cfg = load_config(args.config)
        if "experiment" in cfg and cfg["experiment"] != args.experiment:
            raise ConfigError(f"config is for {cfg['experiment']!r}, not {args.experiment!r}")
        kwargs = validate_config(func, cfg, args.seed)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    t0 = time.perf_counter()
    try:
        result = func(**kwargs)
    except (UsageError, TypeError) as exc:
        print(f"error: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RelkinError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        diag = getattr(exc, "diagnostics", None)
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        if diag:
            print(json.dumps(diag, default=_json_default), file=sys.stderr)
        return EXIT_NUMERIC
    elapsed = time.perf_counter() - t0
    write_outputs(result, args.out, args.plot)
    status = "PASS" if result.passed else "FAIL"
    print(f"{args.experiment}: {status} ({elapsed:.1f} s) -> {args.out}")
    return EXIT_OK if result.passed else EXIT_FAIL


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
