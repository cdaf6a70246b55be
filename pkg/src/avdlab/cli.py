"""Command-line entry point: ``avdlab {simulate,table,rates,verify,compare}``.

Exit status is 0 when every check behind the requested output passes, 1 on
any failure and 2 for an invalid config, preset name or flag.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from pathlib import Path

from .experiments import (
    PRESETS,
    ConfigError,
    PresetResult,
    get_preset,
    load_config,
    run,
    run_preset,
)
from .series import write_csv

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, help="directory for report bundles")
    common.add_argument("--rel-tol", type=float, help="override the integrator relative tolerance")
    common.add_argument("--horizon", type=float, help="override the final time of every run")
    common.add_argument("--format", choices=("csv", "json"), default="csv", help="stdout format")

    p = argparse.ArgumentParser(prog="avdlab", description="Inertial dynamics with Tikhonov regularization.")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("simulate", parents=[common], help="run one YAML experiment config")
    s.add_argument("config", type=Path)
    for name, text in (("table", "print the table of a preset"),
                       ("rates", "print fitted decay exponents of a preset"),
                       ("compare", "compare a preset with its published table")):
        sp = sub.add_parser(name, parents=[common], help=text)
        sp.add_argument("preset", choices=PRESETS)
    v = sub.add_parser("verify", parents=[common], help="run every check of a preset, or of all presets")
    v.add_argument("preset", choices=PRESETS + ("all",))
    return p


def _csv(header, rows) -> str:
    buf = io.StringIO()
    write_csv(buf, header, rows)
    return buf.getvalue()


def _emit(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _write_preset(res: PresetResult, out: Path) -> None:
    root = out / res.preset.name
    for r in res.results.values():
        r.write(root)
    with open(root / "table.csv", "w", newline="") as fh:
        res.table.to_csv(fh)
    if res.comparison is not None:
        with open(root / "comparison.csv", "w", newline="") as fh:
            res.comparison.to_csv(fh)
    (root / "report.json").write_text(json.dumps(_preset_json(res), indent=2, sort_keys=True) + "\n")


def _preset_json(res: PresetResult) -> dict:
    d = {
        "preset": res.preset.name,
        "description": res.preset.description,
        "passed": res.passed,
        "configs": {k: r.config.to_dict() for k, r in res.results.items()},
        "checks": [c.as_dict() for c in res.checks()],
        "table": res.table.to_dict(),
    }
    if res.comparison is not None:
        d["comparison"] = {"table": res.comparison.table_id, "oracle_backed": res.comparison.oracle_backed,
                           "passed": res.comparison.passed, "failed_cells": res.comparison.failed_cells()}
    return d


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config).with_overrides(rel_tol=args.rel_tol, horizon=args.horizon)
    res = run(cfg)
    if args.out is not None:
        res.write(args.out)
    if args.format == "json":
        _emit(json.dumps(res.summary(), indent=2, sort_keys=True))
    else:
        _emit(_csv(["name", "passed", "value", "threshold"],
                   ((c.name, str(c.passed).lower(), c.value, c.threshold) for c in res.checks)))
    return EXIT_OK if res.passed else EXIT_FAIL


def _run(args, name) -> PresetResult:
    res = run_preset(name, rel_tol=args.rel_tol, horizon=args.horizon)
    if args.out is not None:
        _write_preset(res, args.out)
    return res


def _cmd_table(args) -> int:
    res = _run(args, args.preset)
    if args.format == "json":
        _emit(json.dumps({"preset": args.preset, "configs": _preset_json(res)["configs"],
                          "table": res.table.to_dict()}, indent=2, sort_keys=True))
    else:
        _emit(res.table.to_csv())
    complete = all(r.provenance != "failed" for r in res.table.rows)
    return EXIT_OK if complete and all(r.error is None for r in res.results.values()) else EXIT_FAIL


def _cmd_rates(args) -> int:
    res = _run(args, args.preset)
    fits = res.rate_fits()
    checks = [c for c in res.checks() if c.name.endswith("rate_exponent")]
    if args.format == "json":
        _emit(json.dumps({"preset": args.preset, "configs": _preset_json(res)["configs"],
                          "rates": {k: f.as_dict() for k, f in fits.items()},
                          "checks": [c.as_dict() for c in checks]}, indent=2, sort_keys=True))
    else:
        _emit(_csv(["key", "exponent", "r_squared", "t_lo", "t_hi", "n_points", "method"],
                   ((k, f.exponent, f.r_squared, f.window[0], f.window[1], f.n_points, f.method)
                    for k, f in fits.items())))
    if not fits:
        return EXIT_FAIL
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL


def _cmd_verify(args) -> int:
    names = PRESETS if args.preset == "all" else (args.preset,)
    results = [_run(args, n) for n in names]
    if args.format == "json":
        _emit(json.dumps([_preset_json(r) for r in results], indent=2, sort_keys=True))
    else:
        rows = [(r.preset.name, c.name, str(c.passed).lower(), c.value, c.threshold)
                for r in results for c in r.checks()]
        _emit(_csv(["preset", "check", "passed", "value", "threshold"], rows))
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def _cmd_compare(args) -> int:
    if get_preset(args.preset).reference is None:
        raise ConfigError(f"preset {args.preset} has no reference table")
    res = _run(args, args.preset)
    cmp_ = res.comparison
    if cmp_ is None:
        for c in res.cross:
            print(c.line(), file=sys.stderr)
        return EXIT_FAIL
    if args.format == "json":
        _emit(json.dumps({"preset": args.preset, "configs": _preset_json(res)["configs"],
                          "table": cmp_.table_id, "oracle_backed": cmp_.oracle_backed,
                          "passed": cmp_.passed,
                          "cells": [c.__dict__ for c in cmp_.cells]}, indent=2, sort_keys=True))
    else:
        _emit(cmp_.to_csv())
    if not cmp_.passed:
        print(f"failed cells: {', '.join(cmp_.failed_cells())}", file=sys.stderr)
    return EXIT_OK if cmp_.passed else EXIT_FAIL


_COMMANDS = {"simulate": _cmd_simulate, "table": _cmd_table, "rates": _cmd_rates,
             "verify": _cmd_verify, "compare": _cmd_compare}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
