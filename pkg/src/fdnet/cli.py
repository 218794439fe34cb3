"""``fdnet`` command-line front end."""

import argparse
import csv
import logging
import sys
from pathlib import Path

from fdnet import config as cfgmod
from fdnet import harness
from fdnet.errors import ConfigError, FdnetError

log = logging.getLogger("fdnet")

CSV_HEADER = ("sweep_param", "sweep_value", "metric", "mean", "stderr", "trials")


def fmt_number(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    return f"{float(v):.12g}"


def emit_csv(records, path) -> Path:
    """Write records in long format: one row per (sweep value, metric)."""
    if not records:
        raise ValueError("no records to write")
    path = Path(path)
    with open(path, "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in records:
            w.writerow((r.sweep_param, fmt_number(r.sweep_value), r.metric,
                        fmt_number(r.mean), fmt_number(r.standard_error), str(r.trials)))
    return path


def emit_wide_csv(records, path) -> Path:
    """Plot-ready table: one row per sweep value, mean and stderr per metric."""
    path = Path(path)
    metrics = list(dict.fromkeys(r.metric for r in records))
    rows = {}
    for r in records:
        rows.setdefault(r.sweep_value, {})[r.metric] = r
    with open(path, "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([records[0].sweep_param] + [f"{m}{s}" for m in metrics for s in ("", "_stderr")])
        for value, by_metric in rows.items():
            line = [fmt_number(value)]
            for m in metrics:
                rec = by_metric.get(m)
                line += [fmt_number(rec.mean), fmt_number(rec.standard_error)] if rec else ["", ""]
            w.writerow(line)
    return path


def load_config(path) -> cfgmod.ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    return cfgmod.parse_config(text)


def _cmd_run(args):
    cfg = load_config(args.config)
    if args.seed is not None or args.trials is not None:
        cfg = cfg.replace(
            base_seed=cfg.base_seed if args.seed is None else args.seed,
            trials=cfg.trials if args.trials is None else args.trials,
        )
    records = harness.run_experiment(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.config).stem
    long_path = emit_csv(records, out / f"{stem}.csv")
    wide_path = emit_wide_csv(records, out / f"{stem}_wide.csv")
    print(long_path)
    print(wide_path)
    return 0


def _cmd_validate(args):
    cfg = load_config(args.config)
    print(f"ok: {cfg.kind}, {cfg.trials} trials, sweep {cfg.sweep_param} over {len(cfg.sweep_values)} values")
    if args.verbose:
        sys.stdout.write(cfgmod.serialize_config(cfg))
    return 0


def _cmd_list(args):
    for kind in cfgmod.KINDS:
        param, values = cfgmod.DEFAULT_SWEEPS[kind]
        metrics = ", ".join(sorted(cfgmod.SCHEMA[kind]))
        print(f"{kind}: sweep {param} = {', '.join(fmt_number(v) for v in values)}")
        if args.verbose:
            print(f"    parameters: {metrics}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fdnet", description="Full-duplex resource allocation experiments.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment and write CSV results")
    run.add_argument("--config", required=True)
    run.add_argument("--out", default=".")
    run.add_argument("--seed", type=int)
    run.add_argument("--trials", type=int)
    run.set_defaults(func=_cmd_run)

    val = sub.add_parser("validate", help="check a config without running trials")
    val.add_argument("--config", required=True)
    val.set_defaults(func=_cmd_validate)

    lst = sub.add_parser("list-experiments", help="list experiment kinds and default sweeps")
    lst.set_defaults(func=_cmd_list)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"fdnet: config error: {exc}", file=sys.stderr)
        return 2
    except (FdnetError, OSError) as exc:
        print(f"fdnet: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
