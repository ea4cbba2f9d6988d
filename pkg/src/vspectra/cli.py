"""``vspectra`` command-line entry point.

Exit codes: 0 success, 1 usage or config error, 2 a check failed,
3 numerical abort (vacuum, non-finite state, step failure).

Every command writes its outputs into ``--out`` and finishes by writing
``manifest.json`` (via an atomic rename) listing the files it produced.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import json
import math
import os
import sys
from contextlib import ExitStack
from pathlib import Path

import numpy as np

from . import __version__
from .dispersion import (
    WindowError,
    default_eta,
    find_growth_max,
    scan_table,
)
from .instability import CertificateError, RegimeError, certify
from .model import (
    DEFAULT_STABLE,
    DEFAULT_UNSTABLE,
    ConfigError,
    ModelParams,
    Stability,
    classify_stability,
    derive_coeffs,
    load_params,
)
from .semigroup import COMPONENTS, DecayDiagnostic, decay_envelope_check, decay_series
from .verify import SUITES, run_suite

EXIT_OK, EXIT_USAGE, EXIT_FAIL, EXIT_ABORT = 0, 1, 2, 3


class UsageError(Exception):
    pass


# -- serialisation ----------------------------------------------------------

def fmt(x):
    """17 significant digits, enough to round-trip any double."""
    return format(float(x), ".17g")


def _json_text(obj, indent=0):
    pad, inner = "  " * indent, "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, (str, Path)):
        return json.dumps(str(obj))
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_json_text(v, indent + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [inner + _json_text(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if hasattr(obj, "value"):  # enums
        return json.dumps(obj.value)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


class RunManifest:
    """Tracks every file a command emits; written last, atomically."""

    def __init__(self, out: Path, command, config):
        self.out = out
        self.command = command
        self.config = config
        self.started = _now()
        self.files = []
        self.summary = {}

    def _record(self, path):
        self.files.append(str(path.relative_to(self.out)))
        return path

    def write_json(self, name, obj):
        path = self.out / name
        path.write_text(_json_text(obj) + "\n")
        return self._record(path)

    def write_csv(self, name, header, rows):
        path = self.out / name
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
        return self._record(path)

    def finish(self, passed):
        self.summary["pass"] = passed
        body = {
            "command": self.command, "version": __version__, "config": self.config,
            "started": self.started, "finished": _now(), "files": self.files,
            "summary": self.summary,
        }
        tmp = self.out / ".manifest.json.tmp"
        tmp.write_text(_json_text(body) + "\n")
        os.replace(tmp, self.out / "manifest.json")


def _now():
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


# -- config -----------------------------------------------------------------

def _params(args) -> ModelParams:
    if args.config is not None and args.preset is not None:
        raise UsageError("give either a config path or --preset, not both")
    if args.preset is not None:
        return DEFAULT_STABLE if args.preset == "stable" else DEFAULT_UNSTABLE
    if args.config is None:
        raise UsageError("a config path or --preset is required")
    return load_params(args.config)


def _config_echo(args, params: ModelParams):
    flags = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out")}
    return {"model": params.as_dict(), "pressure": params.pressure.describe(),
            "flags": flags}


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _parse_sweep(text):
    """``1e-4:1e-7`` -> one delta per decade, both ends included."""
    try:
        lo, hi = (float(x) for x in text.split(":"))
    except ValueError as exc:
        raise UsageError(f"--delta-sweep expects 'start:stop', got {text!r}") from exc
    if lo <= 0 or hi <= 0:
        raise UsageError("--delta-sweep bounds must be positive")
    n = int(round(abs(math.log10(lo / hi)))) + 1
    # trim geomspace round-off so 1e-4:1e-7 yields exactly 1e-4, 1e-5, ...
    return [float(f"{x:.12g}") for x in np.geomspace(lo, hi, n)]


# -- commands ---------------------------------------------------------------

def cmd_dispersion(args):
    params = _params(args)
    coeffs = derive_coeffs(params)
    out = _out_dir(args.out)
    man = RunManifest(out, f"dispersion {args.action}", _config_echo(args, params))
    stability = classify_stability(coeffs, params.nu)
    summary = {"stability": stability.value, "a": coeffs.a, "b": coeffs.b,
               "discriminant": coeffs.discriminant}
    if args.action == "scan":
        _, eta2 = default_eta(coeffs, params)
        r_max = args.r_max if args.r_max is not None else 10 * eta2
        grid = np.geomspace(args.r_min, r_max, args.points)
        table = scan_table(coeffs, params, grid)
        rows = [list(row[:-1]) + [int(row[-1])] for row in table]
        man.write_csv("scan.csv", ["r", "re_lambda1", "im_lambda1", "re_lambda2",
                                   "im_lambda2", "re_lambda3", "im_lambda3", "min_gap",
                                   "degenerate"], rows)
    if stability is Stability.UNSTABLE:
        growth = find_growth_max(coeffs, params)
        summary.update(Theta=growth.Theta, xi0=growth.xi0, branch=growth.branch_index,
                       lambda0=[growth.lambda0.real, growth.lambda0.imag])
        passed = growth.Theta > 0
    else:
        passed = True
    man.write_json("summary.json", summary)
    man.summary.update(stability=stability.value)
    man.finish(passed)
    print(f"stability={stability.value}" + (f" Theta={fmt(summary['Theta'])}"
                                            if "Theta" in summary else ""))
    return EXIT_OK if passed else EXIT_FAIL


def cmd_semigroup(args):
    params = _params(args)
    coeffs = derive_coeffs(params)
    if classify_stability(coeffs, params.nu) is not Stability.STABLE:
        raise UsageError("semigroup decay applies to stable parameters only")
    out = _out_dir(args.out)
    man = RunManifest(out, f"semigroup {args.action}", _config_echo(args, params))
    if args.action == "decay":
        times, series = decay_series(coeffs, params)
        rows = [(t, c, k, series[(c, k)][j]) for j, t in enumerate(times)
                for c in COMPONENTS for k in range(4)]
        man.write_csv("decay.csv", ["t", "component", "k", "norm"], rows)
        passed = all(np.all(np.isfinite(v)) for v in series.values())
    else:
        checks = [c.as_dict() for c in decay_envelope_check(coeffs, params)]
        passed = all(c["pass"] for c in checks)
        man.write_json("check.json", {"pass": passed, "checks": checks})
        for c in checks:
            print(f"{c['field']:>4s} k={c['k']} fitted={c['exponent_fitted']:+.4f} "
                  f"expected={c['exponent_expected']:+.2f} {'PASS' if c['pass'] else 'FAIL'}")
    man.finish(passed)
    return EXIT_OK if passed else EXIT_FAIL


def cmd_instability(args):
    params = _params(args)
    coeffs = derive_coeffs(params)
    if classify_stability(coeffs, params.nu) is not Stability.UNSTABLE:
        raise UsageError("instability certify needs unstable parameters")
    growth = find_growth_max(coeffs, params)
    theta_bar = args.theta_bar if args.theta_bar is not None else growth.Theta / 4
    if not 0 < theta_bar < growth.Theta / 2:
        raise UsageError(f"--theta-bar must lie in (0, {fmt(growth.Theta / 2)})")
    t_max = args.t_max if args.t_max is not None else 20.0 / growth.Theta
    if t_max <= 0 or growth.Theta * t_max > 40:
        raise UsageError(f"--t-max must lie in (0, {fmt(40 / growth.Theta)}]")
    out = _out_dir(args.out)
    man = RunManifest(out, "instability certify", _config_echo(args, params))
    cert = certify(coeffs, params, theta_bar=theta_bar, t_max=t_max, growth=growth)
    man.write_json("certificate.json", cert)
    man.finish(cert["pass"])
    print(f"Theta={fmt(cert['Theta'])} worst_ratio={fmt(cert['worst_ratio'])} "
          f"{'PASS' if cert['pass'] else 'FAIL'}")
    return EXIT_OK if cert["pass"] else EXIT_FAIL


def _run_dir(root: Path, echo) -> Path:
    digest = hashlib.sha256(_json_text(echo).encode()).hexdigest()[:12]
    stamp = _dt.datetime.now(_dt.timezone.utc).strftime("%Y%m%dT%H%M%S")
    base = root / f"{stamp}-{digest}"
    path, i = base, 1
    while path.exists():
        path = Path(f"{base}-{i}")
        i += 1
    path.mkdir(parents=True)
    return path


def cmd_simulate(args):
    from .nonlinear import (
        Stepper,
        StepperConfig,
        TorusGrid,
        default_dt,
        random_perturbation,
        run,
        run_escape_experiment,
    )

    params = _params(args)
    coeffs = derive_coeffs(params)
    if args.dim not in (1, 3):
        raise UsageError("--dim must be 1 or 3")
    if args.n < 8 or args.n & (args.n - 1):
        raise UsageError("--n must be a power of two >= 8")
    for name in ("L", "t_max", "dt", "amplitude"):
        value = getattr(args, name)
        if value is not None and value <= 0:
            raise UsageError(f"--{name.replace('_', '-')} must be positive")
    echo = _config_echo(args, params)
    out = _run_dir(_out_dir(args.out), echo)
    man = RunManifest(out, "simulate", echo)
    meta = {"version": __version__, "config": echo,
            "derived": {"a": coeffs.a, "b": coeffs.b, "discriminant": coeffs.discriminant,
                        "stability": classify_stability(coeffs, params.nu).value}}

    if args.delta_sweep:
        if args.dim != 1:
            raise UsageError("--delta-sweep runs in one dimension (--dim 1)")
        deltas = _parse_sweep(args.delta_sweep)
        exp = run_escape_experiment(params, coeffs, deltas, n=args.n, dt=args.dt,
                                    t_max=args.t_max, record_every=args.record_every)
        rows = [(t, name, k, value, delta)
                for delta, rec in exp.records.items() for (t, name, k, value) in rec.rows]
        man.write_csv("norms.csv", ["t", "field", "k", "norm", "delta"], rows)
        man.write_json("escape.json", [
            {"delta": r.delta, "T_delta": r.T_delta, "crossed": r.crossed,
             "predicted": r.predicted} for r in exp.results])
        info = exp.as_dict()
        info.pop("runs")
        meta["escape"] = info
        expected = 1.0 / exp.Theta
        passed = exp.slope is not None and abs(exp.slope - expected) <= 0.1 * expected
        man.summary.update(slope=exp.slope, slope_expected=expected)
    else:
        L = args.L if args.L is not None else 2 * math.pi
        grid = TorusGrid(dim=args.dim, n=args.n, L=L)
        dt = args.dt if args.dt is not None else default_dt(grid, coeffs)
        stepper = Stepper(grid, params, coeffs, StepperConfig(dt=dt))
        state = random_perturbation(grid, args.amplitude, seed=args.seed)
        mean0 = state.mean_rho()
        t_max = args.t_max if args.t_max is not None else 10.0
        state, record = run(state, stepper, t_max, record_every=args.record_every,
                            orders=range(4))
        man.write_csv("norms.csv", ["t", "field", "k", "norm"], record.rows)
        drift = abs(state.mean_rho() - mean0)
        defect = state.hermitian_defect()
        passed = drift < 1e-10 and defect < 1e-12
        meta["grid"] = {"dim": args.dim, "n": args.n, "L": L, "dt": dt, "steps": len(record.t)}
        man.summary.update(mean_rho_drift=drift, hermitian_defect=defect)
    man.write_json("meta.json", meta)
    man.finish(passed)
    print(str(out))
    return EXIT_OK if passed else EXIT_FAIL


def cmd_verify(args):
    if args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}")
    params = _params(args)
    out = _out_dir(args.out)
    man = RunManifest(out, f"verify {args.suite}", _config_echo(args, params))
    report = run_suite(args.suite, params)
    man.write_json(f"verify_{args.suite}.json", report)
    for c in report["checks"]:
        print(f"{'PASS' if c['pass'] else 'FAIL'} {c['name']}")
    man.finish(report["pass"])
    return EXIT_OK if report["pass"] else EXIT_FAIL


# -- parser -----------------------------------------------------------------

def _common(p, default_out):
    p.add_argument("config", nargs="?", help="INI file with a [model] section")
    p.add_argument("--preset", choices=("stable", "unstable"),
                   help="use a built-in parameter set instead of a config file")
    p.add_argument("--out", default=default_out, help="output directory")


def build_parser():
    parser = argparse.ArgumentParser(prog="vspectra", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"vspectra {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dispersion", help="eigenvalue scan and growth summary")
    p.add_argument("action", choices=("scan", "growth"))
    _common(p, "vspectra-out")
    p.add_argument("--r-min", type=float, default=1e-4)
    p.add_argument("--r-max", type=float, default=None)
    p.add_argument("--points", type=int, default=4096)
    p.set_defaults(func=cmd_dispersion)

    p = sub.add_parser("semigroup", help="linear decay series and exponent check")
    p.add_argument("action", choices=("decay", "check"))
    _common(p, "vspectra-out")
    p.set_defaults(func=cmd_semigroup)

    p = sub.add_parser("instability", help="growth-sandwich certificate")
    p.add_argument("action", choices=("certify",))
    _common(p, "vspectra-out")
    p.add_argument("--theta-bar", type=float, default=None)
    p.add_argument("--t-max", type=float, default=None)
    p.set_defaults(func=cmd_instability)

    p = sub.add_parser("simulate", help="nonlinear run on a periodic box")
    _common(p, "runs")
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--L", type=float, default=None)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--amplitude", type=float, default=1e-3)
    p.add_argument("--delta-sweep", default=None, metavar="START:STOP")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--record-every", type=int, default=10)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run a named verification battery")
    _common(p, "vspectra-out")
    # validated by hand so an unknown name maps to exit code 1 with a clear message
    p.add_argument("--suite", required=True, help=" | ".join(SUITES))
    p.set_defaults(func=cmd_verify)
    return parser


def _thread_limit():
    raw = os.environ.get("VSPECTRA_THREADS")
    if raw is None or raw == "":
        return None
    try:
        n = int(raw)
    except ValueError as exc:
        raise UsageError(f"VSPECTRA_THREADS must be a positive integer, got {raw!r}") from exc
    if n < 1:
        raise UsageError(f"VSPECTRA_THREADS must be a positive integer, got {raw!r}")
    return n


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        with ExitStack() as stack:
            threads = _thread_limit()
            if threads is not None:
                import scipy.fft
                from threadpoolctl import threadpool_limits

                stack.enter_context(threadpool_limits(limits=threads))
                stack.enter_context(scipy.fft.set_workers(threads))
            return args.func(args)
    except ConfigError as exc:
        print(f"vspectra: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, RegimeError, WindowError) as exc:
        print(f"vspectra: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CertificateError, DecayDiagnostic, AssertionError) as exc:
        print(f"vspectra: check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (FloatingPointError, OverflowError) as exc:
        print(f"vspectra: numerical abort: {exc}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
