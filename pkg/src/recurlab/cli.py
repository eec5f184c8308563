"""Command-line front end.

Subcommands::

    recurlab analyze  TARGET   ladder, uc modulus, range net and ergodic mean of a signal
    recurlab scan     TARGET   almost-period scan, one CSV row per shift
    recurlab solve    TARGET   bounded (Green) or initial-value solve with residual summary
    recurlab verify   NAME...  run registered experiments ("all" runs every one)
    recurlab report   PATH...  re-emit saved report JSON as CSV tables or canonical JSON

``TARGET`` is a path to a JSON/YAML document, an inline JSON object, or (for
``analyze`` and ``scan``) the name of a built-in signal.

Exit codes: 0 success, 1 a checked claim failed, 2 configuration error,
3 numeric guard, 4 solver hypothesis violated.
"""

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import analysis as A
from .config import (
    NAMED_SIGNALS,
    load_document,
    parse_range,
    parse_signal,
    parse_system,
    parse_window,
    serialize_signal,
)
from .errors import (
    ConfigError,
    DimensionError,
    HypothesisViolation,
    NotDifferentiableError,
    NumericGuardError,
)
from .experiments import Report, list_experiments, run_experiment, experiment_config, write_csv, _plain
from .systems import NeutralSystem, green_bounded_solve, ivp_halfline_solve, kernel_norms, residual, verify_52

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_HYPOTHESIS = 4

OUT_ENV = "RECURLAB_OUT"
DEFAULT_OUT = "recurlab-out"


# ---------------------------------------------------------------------------
# argument validation
# ---------------------------------------------------------------------------


def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be positive and finite: {text!r}")
    return v


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return v


def _range(text):
    parts = text.replace(":", ",").split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"range must look like LO,HI: {text!r}")
    try:
        lo, hi = (float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"range bounds must be numbers: {text!r}")
    if not (math.isfinite(lo) and math.isfinite(hi) and hi >= lo):
        raise argparse.ArgumentTypeError(f"range must satisfy LO <= HI: {text!r}")
    return [lo, hi]


def build_parser():
    p = argparse.ArgumentParser(prog="recurlab", description="Recurrence and almost-periodicity laboratory.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, target_help, nargs="?"):
        sp.add_argument("target", nargs=nargs, help=target_help)
        sp.add_argument("--config", metavar="PATH", help="config document (JSON or YAML) or inline JSON")
        sp.add_argument("--out", metavar="DIR", help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
        sp.add_argument("--step", type=_positive_float, help="grid step override")
        sp.add_argument("--range", type=_range, metavar="LO,HI", help="scan range / horizon override")
        sp.add_argument("--ladder-depth", type=_positive_int, help="ladder depth override")
        sp.add_argument("--workers", type=_positive_int, default=1, help="worker threads for scans")
        sp.add_argument("--format", choices=("csv", "json"), help="report format")
        return sp

    common(sub.add_parser("analyze", help="classify a signal"), "signal name, descriptor file or inline JSON")
    common(sub.add_parser("scan", help="scan an almost-period set"), "signal name, scan document or inline JSON")
    common(sub.add_parser("solve", help="solve a linear system"), "solve document or inline JSON")
    common(sub.add_parser("verify", help="run registered experiments"), "experiment names or 'all'", nargs="*")
    common(sub.add_parser("report", help="re-emit saved reports"), "report JSON files or directories", nargs="*")
    return p


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _out_dir(args):
    return Path(args.out or os.environ.get(OUT_ENV) or DEFAULT_OUT)


def _overrides(args):
    """CLI overrides that shape the result (the worker count never does)."""
    o = {}
    if args.step is not None:
        o["step"] = args.step
    if args.range is not None:
        o["range"] = args.range
    if args.ladder_depth is not None:
        o["ladder_depth"] = args.ladder_depth
    return o


def _document(args, allow_name=False):
    src = args.config
    target = args.target
    if src is not None and target is not None:
        raise ConfigError("give the input either positionally or with --config, not both")
    src = src if src is not None else target
    if src is None:
        raise ConfigError("no input document given")
    if allow_name and isinstance(src, str) and src in NAMED_SIGNALS:
        return {"signal": src}
    return load_document(src)


def _take(doc, allowed, what):
    unknown = sorted(set(doc) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown {what} keys: {', '.join(unknown)}")
    out = dict(allowed)
    out.update(doc)
    return out


def _sub(doc, key, allowed):
    v = doc.get(key)
    if v is None:
        return dict(allowed)
    if not isinstance(v, dict):
        raise ConfigError(f"{key!r} must be a mapping")
    return _take(v, allowed, key)


def _num(v, what, positive=False, integer=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{what} must be a number, got {v!r}")
    if integer and int(v) != v:
        raise ConfigError(f"{what} must be an integer, got {v!r}")
    if not math.isfinite(v) or (positive and not v > 0):
        raise ConfigError(f"{what} must be {'positive and ' if positive else ''}finite, got {v!r}")
    return int(v) if integer else float(v)


def _signal_doc(doc):
    """Accept either a run document with a ``signal`` key or a bare descriptor."""
    if isinstance(doc, dict) and ("signal" in doc or "signals" in doc):
        return doc
    return {"signal": doc}


def _report(command, parameters, overrides):
    return Report(command, _plain(parameters), provenance={"package_version": __version__, "overrides": _plain(overrides)})


def _emit(report, args, default_fmt):
    fmt = args.format or default_fmt
    paths = report.write(_out_dir(args), fmt)
    for p in paths:
        print(f"wrote {p}")
    return paths


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

ANALYZE_KEYS = {
    "signal": None,
    "ladder_depth": 3,
    "step": A.DEFAULT_STEP,
    "window_step": A.DEFAULT_STEP,
    "s_cap": A.DEFAULT_S_CAP,
    "origin": None,
    "uc": None,
    "net": None,
    "ergodic": None,
}
UC_KEYS = {"window": 10.0, "deltas": [0.01, 0.05, 0.1, 0.5]}
NET_KEYS = {"range": [-100.0, 100.0], "step": 0.05, "eps": 0.1}
ERGODIC_KEYS = {"T": [50.0, 100.0, 200.0], "probes": [0.0, 1.0, 2.0], "tol": 1e-2}


def cmd_analyze(args):
    doc = _take(_signal_doc(_document(args, allow_name=True)), ANALYZE_KEYS, "analyze")
    ov = _overrides(args)
    f = parse_signal(doc["signal"])
    depth = _num(ov.get("ladder_depth", doc["ladder_depth"]), "ladder_depth", positive=True, integer=True)
    step = _num(ov.get("step", doc["step"]), "step", positive=True)
    wstep = _num(doc["window_step"], "window_step", positive=True)
    s_cap = _num(doc["s_cap"], "s_cap", positive=True)
    origin = None if doc["origin"] is None else _num(doc["origin"], "origin")
    uc = _sub(doc, "uc", UC_KEYS)
    net = _sub(doc, "net", NET_KEYS)
    if "range" in ov:
        net["range"] = ov["range"]
    erg = _sub(doc, "ergodic", ERGODIC_KEYS)

    params = {
        "signal": serialize_signal(f),
        "ladder_depth": depth,
        "step": step,
        "window_step": wstep,
        "s_cap": s_cap,
        "origin": origin,
        "uc": uc,
        "net": net,
        "ergodic": erg,
    }
    report = _report("analyze", params, ov)

    verdict = A.recurrence_ladder(f, depth, s_cap=s_cap, step=step, window_step=wstep, origin=origin,
                                  workers=args.workers)
    cols = ["rung", "eps", "window_lo", "window_hi", "scan_lo", "scan_hi", "max_gap", "gap_bound", "members", "passed"]
    t = report.table("ladder", cols)
    for row in verdict.certificate:
        t.add(*(row[c] for c in cols))
    report.table("classification", ["verdict", "failed_rung"]).add(verdict.verdict, verdict.failed_rung)

    deltas = [_num(d, "uc delta") for d in uc["deltas"]]
    t = report.table("uc_modulus", ["delta", "modulus"])
    for d, v in A.uc_modulus(f, parse_window(uc["window"], wstep), deltas):
        t.add(d, v)

    lo, hi = parse_range(net["range"])
    nstep = _num(net["step"], "net step", positive=True)
    neps = _num(net["eps"], "net eps", positive=True)
    grid = lo + nstep * np.arange(int(math.floor((hi - lo) / nstep + 1e-9)) + 1)
    report.table("range_net", ["eps", "grid_lo", "grid_hi", "samples", "net_size"]).add(
        neps, lo, hi, len(grid), A.range_net(f, grid, neps)
    )

    E = A.ergodic_mean(f, [_num(T, "ergodic T", positive=True) for T in erg["T"]],
                       [_num(x, "ergodic probe") for x in erg["probes"]], _num(erg["tol"], "ergodic tol", positive=True))
    t = report.table("ergodic", ["T", "sup_deviation"])
    for T, dev in E.deviations:
        t.add(T, dev)
    report.table("ergodic_mean", ["component", "mean"])
    for k, z in enumerate(np.atleast_1d(E.mean)):
        report.tables["ergodic_mean"].add(k, complex(z))
    report.table("ergodic_verdict", ["ergodic"]).add(E.ergodic)

    _emit(report, args, "json")
    print(f"verdict: {verdict.describe()}")
    return EXIT_OK


SCAN_KEYS = {
    "signal": None,
    "signals": None,
    "eps": None,
    "window": None,
    "window_step": A.DEFAULT_STEP,
    "range": None,
    "step": A.DEFAULT_STEP,
    "refine": True,
    "strict": False,
    "rows": "members",
}


def cmd_scan(args):
    doc = _take(_signal_doc(_document(args, allow_name=True)), SCAN_KEYS, "scan")
    ov = _overrides(args)
    if (doc["signal"] is None) == (doc["signals"] is None):
        raise ConfigError("give exactly one of 'signal' or 'signals'")
    if doc["signal"] is not None:
        f = parse_signal(doc["signal"])
        sig_param = serialize_signal(f)
    else:
        if not isinstance(doc["signals"], list) or not doc["signals"]:
            raise ConfigError("'signals' must be a non-empty list")
        parts = [parse_signal(d) for d in doc["signals"]]
        f = A.joint_tuple(parts)
        sig_param = [serialize_signal(g) for g in parts]
    if doc["eps"] is None or doc["window"] is None:
        raise ConfigError("scan needs 'eps' and 'window'")
    if doc["rows"] not in ("members", "all"):
        raise ConfigError("rows must be 'members' or 'all'")
    for k in ("refine", "strict"):
        if not isinstance(doc[k], bool):
            raise ConfigError(f"{k!r} must be true or false")
    eps = _num(doc["eps"], "eps", positive=True)
    wstep = _num(doc["window_step"], "window_step", positive=True)
    window = parse_window(doc["window"], wstep)
    step = _num(ov.get("step", doc["step"]), "step", positive=True)
    rng = ov.get("range", doc["range"])
    if rng is None:
        raise ConfigError("scan needs a 'range' (or --range)")
    lo, hi = parse_range(rng)

    trace = doc["rows"] == "all"
    E = A.almost_period_set(f, eps, window, (lo, hi), step, refine=doc["refine"], strict=doc["strict"],
                            trace=trace, workers=args.workers)
    params = {"signal": sig_param, "eps": eps, "window": doc["window"], "window_step": wstep, "range": [lo, hi],
              "step": step, "refine": doc["refine"], "strict": doc["strict"], "rows": doc["rows"]}
    report = _report("scan", params, ov)
    rows = report.table("scan", ["tau", "sup_dist", "accepted"])
    if trace:
        taus, supd, acc = E.trace
        for tau, s, a in zip(taus, supd, acc):
            rows.add(float(tau), float(s), bool(a))
    else:
        t = window.samples()
        base = f.evaluate(t)
        for tau in E.members:
            rows.add(tau, float(A._vnorm(f.evaluate(t + tau) - base).max()), True)
    report.table("summary", ["eps", "scan_lo", "scan_hi", "step", "members", "max_gap", "refined"]).add(
        eps, lo, hi, step, len(E.members), E.max_gap, E.refined
    )
    _emit(report, args, "csv")
    print(f"members: {len(E.members)}  max_gap: {E.max_gap:g}")
    return EXIT_OK


SOLVE_KEYS = {
    "system": None,
    "forcing": None,
    "solver": "green",
    "horizon": 100.0,
    "step": None,
    "init": None,
    "alpha": 0.0,
    "residual_max": None,
}


def cmd_solve(args):
    doc = _take(_document(args), SOLVE_KEYS, "solve")
    ov = _overrides(args)
    if doc["system"] is None or doc["forcing"] is None:
        raise ConfigError("solve needs 'system' and 'forcing'")
    system = parse_system(doc["system"])
    if isinstance(system, NeutralSystem):
        return _solve_neutral(args, doc, system, ov)
    f = parse_signal(doc["forcing"])
    solver = doc["solver"]
    if solver not in ("green", "ivp"):
        raise ConfigError(f"solver must be 'green' or 'ivp', got {solver!r}")
    step = ov.get("step", doc["step"])
    step = (1.0 / 32.0 if solver == "green" else 1e-2) if step is None else _num(step, "step", positive=True)
    horizon = ov.get("range", doc["horizon"])
    if isinstance(horizon, list):
        horizon = list(parse_range(horizon))
    else:
        horizon = _num(horizon, "horizon", positive=True)

    params = {"system": system.to_dict(), "forcing": serialize_signal(f), "solver": solver, "step": step,
              "horizon": horizon}
    if solver == "green":
        if doc["init"] is not None:
            raise ConfigError("'init' only applies to the ivp solver")
        traj = green_bounded_solve(system, f, horizon, step=step)
    else:
        if doc["init"] is None:
            raise ConfigError("the ivp solver needs 'init'")
        if isinstance(horizon, list):
            raise ConfigError("the ivp horizon is a length, not a span")
        alpha = _num(doc["alpha"], "alpha")
        init = [_parse_init(v) for v in doc["init"]]
        params.update(alpha=alpha, init=init)
        traj = ivp_halfline_solve(system, f, init, alpha=alpha, horizon=horizon, step=step)

    res = residual(system, traj, f)
    report = _report("solve", params, ov)
    t = report.table("summary", ["quantity", "value"])
    t.add("residual_sup", res)
    lo, hi = traj.span
    t.add("span_lo", lo)
    t.add("span_hi", hi)
    t.add("nodes", int(traj.derivatives.shape[1]))
    for k in range(traj.order + 1):
        t.add(f"sup_y{k}", traj.sup(k))
    for key in sorted(traj.meta):
        t.add(f"meta_{key}", traj.meta[key])
    if solver == "green":
        kn = kernel_norms(system)
        t.add("kernel_g1", kn.g1)
        t.add("kernel_tail", kn.tail)
    if doc["residual_max"] is not None:
        report.claim("residual within bound", res <= _num(doc["residual_max"], "residual_max", positive=True),
                     ["summary"], residual=res, bound=doc["residual_max"])

    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    tp = out / "solve__trajectory.csv"
    write_csv(tp, traj.csv_header(), traj.csv_rows())
    print(f"wrote {tp}")
    _emit(report, args, "json")
    print(f"residual: {res:.3e}")
    return EXIT_OK if report.passed else EXIT_FAILED


def _parse_init(v):
    if isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
        return complex(v[0], v[1])
    return complex(_num(v, "initial value"))


def _solve_neutral(args, doc, system, ov):
    """Neutral systems get the symbol check only; the solvers handle ODEs."""
    if doc["solver"] != "green" or doc["init"] is not None:
        raise ConfigError("neutral systems support the symbol check only")
    chk = verify_52(system)
    report = _report("solve", {"system": system.to_dict()}, ov)
    report.table("symbol_check", ["ok", "min_abs_det", "omega"]).add(chk.ok, chk.min_abs_det, chk.omega)
    _emit(report, args, "json")
    if not chk.ok:
        raise HypothesisViolation(f"leading delay symbol nearly singular at omega={chk.omega:g}")
    raise ConfigError("bounded solves are implemented for ODE systems; the symbol check passed")


# experiment-parameter names each CLI override maps onto
_VERIFY_MAP = {"step": "step", "range": "scan_range", "ladder_depth": "ladder_depth"}


def cmd_verify(args):
    names = list(args.target or [])
    if not names:
        raise ConfigError("name at least one experiment, or 'all'")
    if "all" in names:
        names = list_experiments()
    known = set(list_experiments())
    unknown = [n for n in names if n not in known]
    if unknown:
        raise ConfigError(f"unknown experiment(s): {', '.join(unknown)}; known: {', '.join(sorted(known))}")
    per = load_document(args.config) if args.config else {}
    bad = sorted(set(per) - known)
    if bad:
        raise ConfigError(f"config names unknown experiments: {', '.join(bad)}")
    cli_ov = _overrides(args)
    all_ok = True
    for name in names:
        ov = dict(per.get(name) or {})
        defaults = experiment_config(name, ov)
        for k, key in _VERIFY_MAP.items():
            if k in cli_ov and key in defaults:
                ov[key] = cli_ov[k]
        report = run_experiment(name, ov, workers=args.workers)
        report.provenance["overrides"] = _plain(ov)
        _emit(report, args, "json")
        print(f"{name}: {'PASS' if report.passed else 'FAIL'}")
        all_ok = all_ok and report.passed
    return EXIT_OK if all_ok else EXIT_FAILED


def cmd_report(args):
    targets = list(args.target or [])
    if args.config:
        targets.append(args.config)
    if not targets:
        for name in list_experiments():
            print(name)
        return EXIT_OK
    files = []
    for t in targets:
        p = Path(t)
        if p.is_dir():
            files.extend(sorted(p.glob("*.json")))
        elif p.is_file():
            files.append(p)
        else:
            raise ConfigError(f"no such report: {p}")
    all_ok = True
    for p in files:
        try:
            doc = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{p} is not valid JSON: {exc}") from exc
        rep = _load_report(doc, p)
        _emit(rep, args, "csv")
        print(f"{rep.experiment}: {'PASS' if rep.passed else 'FAIL'}")
        all_ok = all_ok and rep.passed
    return EXIT_OK if all_ok else EXIT_FAILED


def _load_report(doc, path):
    need = {"experiment", "parameters", "provenance", "tables", "verdicts"}
    if not isinstance(doc, dict) or not need <= set(doc):
        raise ConfigError(f"{path} is not a report document")
    rep = Report(doc["experiment"], doc["parameters"], provenance=doc["provenance"])
    for name, t in doc["tables"].items():
        tab = rep.table(name, t["columns"])
        tab.rows.extend(t["rows"])
    rep.verdicts.extend(doc["verdicts"])
    return rep


COMMANDS = {"analyze": cmd_analyze, "scan": cmd_scan, "solve": cmd_solve, "verify": cmd_verify, "report": cmd_report}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, DimensionError, NotDifferentiableError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericGuardError as exc:
        print(f"numeric guard: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except HypothesisViolation as exc:
        print(f"hypothesis violated: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS


if __name__ == "__main__":
    sys.exit(main())
