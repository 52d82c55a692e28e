"""Command-line front end: ``micromaser {evolve,sweep,qfunc}``.

Every command writes CSV files plus ``manifest.json`` into ``--out``.  Files
are written to a temporary name and renamed, and nothing is written until
the whole computation has succeeded.  Errors go to stderr as a single line
``error: <kind>: <detail>`` with a non-zero exit code.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import logging
import math
import os
import sys
import tempfile

from . import config as cfgmod
from .errors import ConfigError, ConsistencyError, InvalidParameterError
from .experiments import evolve_and_record, find_optimum_time, sweep_interaction_time
from .quasiprob import quasiprob_grid

log = logging.getLogger("micromaser")

DEFAULT_GRID = (-8.0, 8.0, -8.0, 8.0, 81, 81)


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    if isinstance(x, int):
        return str(x)
    return format(float(x), ".17g")


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _write_atomic(directory, name, text):
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, os.path.join(directory, name))
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _publish(out_dir, command, resolved, files, extra=None):
    """Write all artifacts, then the manifest that lists them."""
    os.makedirs(out_dir, exist_ok=True)
    manifest = cfgmod.RunManifest(command, resolved, extra=extra or {})
    for name, text in files.items():
        manifest.artifacts[name] = hashlib.sha256(text.encode()).hexdigest()
    for name, text in files.items():
        _write_atomic(out_dir, name, text)
    _write_atomic(out_dir, "manifest.json", manifest.to_json())
    return manifest


def cmd_evolve(config_path, out_dir):
    resolved = cfgmod.load(config_path)
    rec = evolve_and_record(cfgmod.experiment_config(resolved))
    files = {"evolution.csv": _csv_text(["N", "zeta", "mean_n", "mandel_q"], rec.rows())}
    for n_atoms, pops in sorted(rec.snapshots.items()):
        files[f"pn_N{n_atoms}.csv"] = _csv_text(["n", "p"], enumerate(pops.tolist()))
    return _publish(out_dir, "evolve", resolved, files)


def cmd_sweep(config_path, out_dir):
    resolved = cfgmod.load(config_path)
    values = resolved["lambda_t_values"]
    if len(set(values)) != len(values):
        log.warning("duplicate lambda_t values removed (%d -> %d)", len(values), len(set(values)))
        resolved["lambda_t_values"] = sorted(set(values))
    cfg = cfgmod.experiment_config(resolved)
    table = sweep_interaction_time(cfg, resolved["lambda_t_values"], workers=resolved["workers"])
    best = find_optimum_time(cfg, energy_floor=resolved["energy_floor"], table=table)
    files = {
        "sweep.csv": _csv_text(
            ["lambda_t", "zeta_final", "mean_n_final"],
            ((r.lambda_t, r.zeta_final, r.mean_n_final) for r in table),
        )
    }
    extra = {"optimum": None if best is None else {"lambda_t": best[0], "zeta": best[1]}}
    return _publish(out_dir, "sweep", resolved, files, extra)


def cmd_qfunc(config_path, s, grid, out_dir):
    if not (math.isfinite(s) and -1.0 <= s < 1.0):
        raise InvalidParameterError(f"s must lie in [-1, 1), got {s!r}")
    resolved = cfgmod.load(config_path)
    re_min, re_max, im_min, im_max, n_re, n_im = grid
    rec = evolve_and_record(cfgmod.experiment_config(resolved))
    g = quasiprob_grid(rec.final_state, (re_min, re_max), (im_min, im_max), int(n_re), int(n_im), s)
    files = {"grid.csv": _csv_text(["re_beta", "im_beta", "value"], g.rows())}
    extra = {"s": s, "grid": list(grid), "integral": g.integral()}
    return _publish(out_dir, "qfunc", resolved, files, extra)


def _parse_grid(text):
    parts = text.split(",")
    if len(parts) != 6:
        raise argparse.ArgumentTypeError("expected re_min,re_max,im_min,im_max,n_re,n_im")
    try:
        lo = [float(p) for p in parts[:4]]
        counts = [int(p) for p in parts[4:]]
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed grid {text!r}") from None
    return (*lo, *counts)


def build_parser():
    parser = argparse.ArgumentParser(prog="micromaser", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("evolve", "diagnostics after each injected atom"),
        ("sweep", "final diagnostics over a grid of transit times"),
        ("qfunc", "quasiprobability grid of the final field"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, help="YAML key-value configuration")
        p.add_argument("--out", required=True, help="output directory")
        if name == "qfunc":
            p.add_argument("--s", type=float, default=-1.0, help="ordering parameter, -1 (Husimi) <= s < 1")
            p.add_argument("--grid", type=_parse_grid, default=DEFAULT_GRID,
                           help="re_min,re_max,im_min,im_max,n_re,n_im (default -8,8,-8,8,81,81); "
                           "write --grid=-4,4,... when the first bound is negative")
    return parser


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="warning: %(message)s", stream=sys.stderr)
    args = build_parser().parse_args(argv)
    try:
        if args.command == "evolve":
            cmd_evolve(args.config, args.out)
        elif args.command == "sweep":
            cmd_sweep(args.config, args.out)
        else:
            cmd_qfunc(args.config, args.s, args.grid, args.out)
    except ConfigError as exc:
        print(f"error: invalid-config: {exc}", file=sys.stderr)
        return 2
    except InvalidParameterError as exc:
        print(f"error: invalid-parameter: {exc}", file=sys.stderr)
        return 2
    except ConsistencyError as exc:
        print(f"error: internal-consistency: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
