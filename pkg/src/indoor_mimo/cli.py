"""Command-line front end: configuration, campaign invocation, CSV/JSON output.

Precedence, lowest first: scenario preset, ``--config`` JSON file,
``INDOOR_MIMO_*`` environment variables, command-line flags.

Output files (one per result family, schemas stable):

=========================  ====================================================
cdf_sinr.csv               scheme, scenario, i_outdoor_dbm, n_nulls, sinr_db,
                           probability
cdf_rate.csv               scheme, scenario, i_outdoor_dbm, n_nulls, rate_mbps,
                           probability
avg_vs_interference.csv    scheme, scenario, i_outdoor_dbm, mean_mbps
p5_vs_interference.csv     scheme, scenario, i_outdoor_dbm, p5_mbps
rates_vs_nulls.csv         scheme, scenario, i_outdoor_dbm, n_nulls, mean_mbps,
                           p5_mbps
run_manifest.json          config snapshot, version, seed, timing, file list
=========================  ====================================================

CDF files cover the lowest interference level of the sweep. The two
interference files use each scenario's default null count for EDA-ZF.
``i_outdoor_dbm`` is ``-inf`` (``null`` in JSON) without outdoor
interference.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import time
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .engine import CampaignSummary, empirical_cdf, run_campaign
from .link import DEFAULT_MCS, McsTable
from .precoding import SCHEMES
from .scenario import DENSITIES, NO_INTERFERENCE, ConfigError, ScenarioConfig

ENV_PREFIX = "INDOOR_MIMO_"

DEFAULT_INTERFERENCE = (NO_INTERFERENCE, *np.arange(-100.0, -59.0, 5.0))

FILES = {
    "cdf_sinr": ["scheme", "scenario", "i_outdoor_dbm", "n_nulls", "sinr_db",
                 "probability"],
    "cdf_rate": ["scheme", "scenario", "i_outdoor_dbm", "n_nulls", "rate_mbps",
                 "probability"],
    "avg_vs_interference": ["scheme", "scenario", "i_outdoor_dbm", "mean_mbps"],
    "p5_vs_interference": ["scheme", "scenario", "i_outdoor_dbm", "p5_mbps"],
    "rates_vs_nulls": ["scheme", "scenario", "i_outdoor_dbm", "n_nulls",
                       "mean_mbps", "p5_mbps"],
}


@dataclass
class RunOptions:
    configs: list[ScenarioConfig]
    schemes: tuple[str, ...]
    out_dir: Path
    fmt: str
    mcs: McsTable
    workers: int


def _float_list(text: str) -> tuple[float, ...]:
    """``-60``, ``none``, ``-100,-80,-60`` or an inclusive range ``-100:-60:5``."""
    out: list[float] = []
    for part in text.split(","):
        part = part.strip().lower()
        if part in ("none", "off", "-inf"):
            out.append(NO_INTERFERENCE)
        elif ":" in part:
            lo, hi, *step = (float(v) for v in part.split(":"))
            step = step[0] if step else 1.0
            if step <= 0:
                raise argparse.ArgumentTypeError("range step must be positive")
            n = int(math.floor((hi - lo) / step + 1e-9)) + 1
            out.extend(lo + k * step for k in range(max(n, 0)))
        else:
            out.append(float(part))
    return tuple(out)


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(round(v)) for v in _float_list(text))
    except (ValueError, OverflowError):
        raise argparse.ArgumentTypeError(f"not an integer list: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="indoor-mimo",
        description="Indoor multi-cell MIMO downlink Monte-Carlo campaigns.",
        epilog="Values starting with '-' that are not plain numbers need "
               "'=', e.g. --outdoor-dbm=-100:-60:5. Every flag can also be "
               f"set through {ENV_PREFIX}<FLAG>, e.g. {ENV_PREFIX}DROPS=50.")
    p.add_argument("--scenario", default=None,
                   help="sparse, intermediate, dense, a comma list, or all "
                        "(default all)")
    p.add_argument("--scheme", default=None,
                   help="zf, nemimo, edazf, a comma list, or all (default all)")
    p.add_argument("--nulls", type=int, default=None,
                   help="EDA-ZF null count (default n_ant/4)")
    p.add_argument("--nulls-sweep", type=_int_list, default=None,
                   help="extra EDA-ZF null counts, e.g. 0:16 "
                        "(default 0..n_ant-max_sched)")
    p.add_argument("--outdoor-dbm", type=_float_list, default=None,
                   help="outdoor interference over the band: scalar, list, "
                        "range, or none (default none plus -100:-60:5)")
    p.add_argument("--drops", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out-dir", type=Path, default=None)
    p.add_argument("--mcs-table", type=Path, default=None,
                   help="CSV with min_sinr_db,spectral_efficiency columns")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--config", type=Path, default=None,
                   help="flat JSON object of ScenarioConfig fields")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _env_args(parser: argparse.ArgumentParser, environ) -> list[str]:
    out = []
    for action in parser._actions:
        if not action.option_strings or action.dest == "help":
            continue
        flag = max(action.option_strings, key=len)
        value = environ.get(ENV_PREFIX + flag.lstrip("-").replace("-", "_").upper())
        if value is None:
            continue
        if action.nargs == 0:
            if value.lower() in ("1", "true", "yes"):
                out.append(flag)
        else:
            out.append(f"{flag}={value}")
    return out


def _choices(text: str | None, allowed: Sequence[str], what: str) -> tuple[str, ...]:
    if text is None or text == "all":
        return tuple(allowed)
    items = tuple(t.strip() for t in text.split(",") if t.strip())
    bad = [t for t in items if t not in allowed]
    if bad or not items:
        raise ConfigError(f"unknown {what} {bad or text!r}; expected one of "
                          f"{', '.join(allowed)} or all")
    return items


def _load_config_file(path: Path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a flat JSON object")
    unknown = set(data) - set(ScenarioConfig.field_names())
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    if "outdoor_interference_dbm" in data:
        v = data["outdoor_interference_dbm"]
        v = v if isinstance(v, list) else [v]
        data["outdoor_interference_dbm"] = [
            NO_INTERFERENCE if x is None else float(x) for x in v]
    return data


def parse_run(argv: Sequence[str] | None = None, environ=None) -> RunOptions:
    """Resolve flags, environment and config file into a run description.

    Invalid input exits with a usage error (status 2).
    """
    parser = build_parser()
    environ = os.environ if environ is None else environ
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(_env_args(parser, environ) + argv)
    if args.verbose:
        logging.basicConfig(level=logging.INFO)
    try:
        file_values = _load_config_file(args.config) if args.config else {}
        scenario_arg = args.scenario or file_values.get("density")
        densities = _choices(scenario_arg, DENSITIES, "scenario")
        schemes = _choices(args.scheme, SCHEMES, "scheme")
        configs = []
        for d in densities:
            values = {k: v for k, v in file_values.items() if k != "density"}
            base = ScenarioConfig.preset(d)
            values.setdefault("outdoor_interference_dbm", DEFAULT_INTERFERENCE)
            values.setdefault("nulls_sweep", tuple(
                range(base.n_ant - base.max_sched_per_bs + 1)))
            flags = {"n_nulls": args.nulls, "nulls_sweep": args.nulls_sweep,
                     "outdoor_interference_dbm": args.outdoor_dbm,
                     "n_drops": args.drops, "seed": args.seed}
            values.update({k: v for k, v in flags.items() if v is not None})
            configs.append(ScenarioConfig.preset(d, **values))
        mcs = McsTable.from_csv(args.mcs_table) if args.mcs_table else DEFAULT_MCS
        workers = 1 if args.workers is None else args.workers
        if workers < 1:
            raise ConfigError("--workers must be at least 1")
        if configs[0].seed < 0:
            raise ConfigError("--seed must be non-negative")
    except (ConfigError, ValueError, TypeError, OSError) as e:
        parser.error(str(e))
    return RunOptions(configs, schemes, args.out_dir or Path("results"),
                      args.format or "csv", mcs, workers)


def parse_config(argv: Sequence[str] | None = None, environ=None
                 ) -> ScenarioConfig:
    """The configuration of the first selected scenario."""
    return parse_run(argv, environ).configs[0]


def _cdf_level(summary: CampaignSummary, scenario: str) -> float | None:
    levels = [k.i_outdoor_dbm for k in summary.cells if k.scenario == scenario]
    return min(levels) if levels else None


def result_tables(summary: CampaignSummary) -> dict[str, list[list]]:
    """Rows of every output file, in a deterministic order."""
    tables: dict[str, list[list]] = {name: [] for name in FILES}
    default_nulls = {c.density: c.n_nulls for c in summary.configs}
    keys = sorted(summary.cells, key=lambda k: (
        k.scheme, DENSITIES.index(k.scenario) if k.scenario in DENSITIES else 99,
        k.scenario, k.i_outdoor_dbm, k.n_nulls))
    for k in keys:
        cell = summary.cells[k]
        if cell.aborted or cell.throughput_mbps.size == 0:
            continue
        is_default = k.scheme != "edazf" or k.n_nulls == default_nulls.get(k.scenario)
        head = [k.scheme, k.scenario, k.i_outdoor_dbm]
        if is_default and k.i_outdoor_dbm == _cdf_level(summary, k.scenario):
            for v, pr in empirical_cdf(cell.sinr_db):
                tables["cdf_sinr"].append(head + [k.n_nulls, float(v), float(pr)])
            for v, pr in empirical_cdf(cell.throughput_mbps):
                tables["cdf_rate"].append(head + [k.n_nulls, float(v), float(pr)])
        if is_default:
            tables["avg_vs_interference"].append(head + [cell.mean_mbps])
            tables["p5_vs_interference"].append(head + [cell.p5_mbps])
        if k.scheme == "edazf":
            tables["rates_vs_nulls"].append(
                head + [k.n_nulls, cell.mean_mbps, cell.p5_mbps])
    return tables


def _json_value(v):
    if isinstance(v, float) and math.isinf(v) and v < 0:
        return None
    return v


def _config_snapshot(config: ScenarioConfig) -> dict:
    snap = asdict(config)
    snap["outdoor_interference_dbm"] = [
        _json_value(v) for v in config.outdoor_interference_dbm]
    return snap


def emit_results(summary: CampaignSummary, out_dir, fmt: str = "csv",
                 wall_clock_s: float | None = None) -> dict[str, Path]:
    """Write one file per result family plus ``run_manifest.json``.

    Returns the written paths keyed by table name (and ``manifest``).
    """
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}
    for name, rows in result_tables(summary).items():
        path = out_dir / f"{name}.{fmt}"
        if fmt == "csv":
            with open(path, "w", newline="") as f:
                w = csv.writer(f, lineterminator="\n")
                w.writerow(FILES[name])
                w.writerows(rows)
        else:
            records = [{c: _json_value(v) for c, v in zip(FILES[name], row)}
                       for row in rows]
            path.write_text(json.dumps(records, indent=1) + "\n")
        paths[name] = path

    manifest = {
        "tool": "indoor-mimo",
        "version": __version__,
        "seed": summary.configs[0].seed if summary.configs else None,
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "wall_clock_s": wall_clock_s,
        "ok": summary.ok,
        "configs": [_config_snapshot(c) for c in summary.configs],
        "mcs_table": asdict(summary.mcs),
        "failed_drops": {
            f"{k.scheme}/{k.scenario}/{k.i_outdoor_dbm}/{k.n_nulls}": c.n_failed
            for k, c in summary.cells.items() if c.n_failed},
        "files": {name: p.name for name, p in paths.items()},
    }
    mpath = out_dir / "run_manifest.json"
    mpath.write_text(json.dumps(manifest, indent=2, default=_json_value) + "\n")
    paths["manifest"] = mpath
    return paths


def main(argv: Sequence[str] | None = None) -> int:
    opts = parse_run(argv)
    start = time.perf_counter()
    summary = run_campaign(opts.configs, opts.schemes, opts.mcs, opts.workers)
    elapsed = time.perf_counter() - start
    try:
        paths = emit_results(summary, opts.out_dir, opts.fmt, elapsed)
    except OSError as e:
        print(f"indoor-mimo: cannot write results: {e}", file=sys.stderr)
        return 1
    print(f"wrote {len(paths)} files to {opts.out_dir} in {elapsed:.1f} s")
    return 0 if summary.ok else 1


if __name__ == "__main__":
    sys.exit(main())
