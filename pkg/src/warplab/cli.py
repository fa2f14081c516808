"""Scenario runner: config parsing, suite execution, CSV reports.

Configs are line-oriented key = value text; `model` may repeat.

    # example scenario
    model = exp_cone:0.5, 4
    model = euclidean, 3
    r_range = 0.1, 100, 100
    t_range = 0.1, 100, 1200
    suites = identities, gradient
    tolerance.liyau_bound = 1e-6
    output_dir = out
    seed = 0

Empty `suites` means all suites.  Every model is validated at load time
(admissible parameters, nonnegative curvature, nonparabolicity) and parse
errors are collected with their line numbers rather than reported
one-at-a-time.

Outputs are one CSV per (suite, model) cell plus summary.csv with columns
check_id, anchor, model, value, tolerance, passed.  Runs are deterministic:
identical configs produce byte-identical outputs (fixed float formatting,
no timestamps; the seed field is reserved, every computation here is
deterministic).  The exit code of `warplab run` is 0 iff every check
passed; failing check ids go to stderr.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import cones
from .checks import CHECKS, SUITES, CheckRecord, ModelContext, run_model_suite
from .green import solve_green
from .heat import entropy_series
from .profiles import (ManifoldModel, ParabolicModelError, ProfileError,
                       curvature_report, make_model)

ENV_OUTPUT_DIR = "WARPLAB_OUTPUT_DIR"


class ConfigError(ValueError):
    """Invalid scenario config; carries every error found, with line numbers."""

    def __init__(self, errors):
        super().__init__("; ".join(errors))
        self.errors = list(errors)


@dataclass
class ScenarioConfig:
    models: list[ManifoldModel]
    r_range: tuple = (0.1, 100.0, 100)
    t_range: tuple = (0.1, 100.0, 1200)
    suites: tuple = SUITES
    tolerances: dict = field(default_factory=dict)
    output_dir: str = "warplab-out"
    seed: int = 0


def parse_model_spec(spec: str) -> ManifoldModel:
    """`family[:param], n` -> validated model."""
    parts = [p.strip() for p in spec.split(",")]
    if len(parts) != 2:
        raise ProfileError(f"expected 'family[:param], n', got {spec!r}")
    fam_par, n_str = parts
    try:
        n = int(n_str)
    except ValueError:
        raise ProfileError(f"dimension must be an integer, got {n_str!r}")
    if ":" in fam_par:
        fam, par = fam_par.split(":", 1)
        try:
            params = (float(par),)
        except ValueError:
            raise ProfileError(f"bad profile parameter {par!r}")
    else:
        fam, params = fam_par, ()
    return make_model(fam.strip(), params, n)


def _parse_triple(value: str, points_min: int, name: str):
    parts = [p.strip() for p in value.split(",")]
    if len(parts) != 3:
        raise ValueError(f"{name} needs 'min, max, points'")
    lo, hi = float(parts[0]), float(parts[1])
    pts = int(parts[2])
    if not (0 < lo < hi):
        raise ValueError(f"{name} needs 0 < min < max")
    if pts < points_min:
        raise ValueError(f"{name} needs at least {points_min} points")
    return (lo, hi, pts)


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a scenario config, collecting all errors."""
    errors: list[str] = []
    models: list[ManifoldModel] = []
    fields: dict = {}
    tolerances: dict = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value'")
            continue
        key, value = (p.strip() for p in line.split("=", 1))
        try:
            if key == "model":
                models.append(parse_model_spec(value))
            elif key == "r_range":
                fields["r_range"] = _parse_triple(value, 50, "r_range")
            elif key == "t_range":
                fields["t_range"] = _parse_triple(value, 30, "t_range")
            elif key == "suites":
                names = tuple(s.strip() for s in value.split(",") if s.strip())
                unknown = [s for s in names if s not in SUITES]
                if unknown:
                    raise ValueError(f"unknown suites {unknown}")
                fields["suites"] = names or SUITES
            elif key == "output_dir":
                fields["output_dir"] = value
            elif key == "seed":
                fields["seed"] = int(value)
            elif key.startswith("tolerance."):
                cid = key.split(".", 1)[1]
                if cid not in CHECKS:
                    raise ValueError(f"unknown check id {cid!r}")
                tolerances[cid] = float(value)
            else:
                raise ValueError(f"unknown key {key!r}")
        except (ValueError, ProfileError, ParabolicModelError) as exc:
            errors.append(f"line {lineno}: {exc}")

    if not models:
        errors.append("no admissible model declared")
    for m in models:
        rep = curvature_report(m, np.geomspace(1e-3, 1e3, 50))
        if rep.min_ricci < -1e-10:
            errors.append(f"model {m.label()} has negative Ricci curvature")
    if errors:
        raise ConfigError(errors)
    return ScenarioConfig(models=models, tolerances=tolerances, **fields)


# ---------------------------------------------------------------------------
# scenario execution

@dataclass
class SuiteSummary:
    records: list[CheckRecord]
    files: list[str]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def failing_ids(self) -> list[str]:
        return sorted({f"{r.check_id}[{r.model}]"
                       for r in self.records if not r.passed})


def _sanitize(label: str) -> str:
    return (label.replace(":", "-").replace(",", "_").replace("=", "")
            .replace("(", "").replace(")", ""))


def _write_summary(path: str, records: list[CheckRecord]):
    with open(path, "w") as fh:
        fh.write("# warplab-summary-v1\n")
        fh.write("check_id,anchor,model,value,tolerance,passed\n")
        for r in records:
            fh.write(f"{r.check_id},\"{r.anchor}\",{r.model},"
                     f"{format(r.value, '.17g')},"
                     f"{format(r.tolerance, '.17g')},"
                     f"{str(r.passed).lower()}\n")


def _cell_artifacts(suite: str, ctx: ModelContext, out_dir: str) -> list[str]:
    """Side-channel CSVs per cell (the gnuplot-ready data files)."""
    base = os.path.join(out_dir, f"{suite}_{_sanitize(ctx.label)}")
    files = []
    if suite == "identities":
        path = base + ".csv"
        ctx.monotone_report().dump_csv(path)
        files.append(path)
    elif suite == "entropy":
        path = base + ".csv"
        entropy_series(ctx.heat()).dump_csv(path)
        files.append(path)
    elif suite == "cones":
        path = base + ".csv"
        ctx.theta().dump_csv(path)
        files.append(path)
        vpath = base + "_verdicts.log"
        lines = [cones.dini_check(ctx.theta(), alpha=1.5).log_line()]
        if ctx.green().tail_slope > 0 and not ctx.is_flat:
            lines.append(cones.unique_cone_scenario(ctx.green()).log_line())
        with open(vpath, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        files.append(vpath)
    elif suite == "fund" and not ctx.is_flat and ctx.green().tail_slope > 0:
        fr = cones.fund_ratio_report(ctx.green(), ctx.theta(), 0.1, 2.0)
        path = base + ".csv"
        with open(path, "w") as fh:
            fh.write("# warplab-fund-v1\n")
            fh.write("r," + ",".join(s.name for s in fr.series) + "\n")
            for i, r in enumerate(fr.r_grid):
                vals = [s.values[i] for s in fr.series]
                fh.write(",".join(format(v, ".17g") for v in [r] + vals) + "\n")
        files.append(path)
    elif suite == "koch":
        path = os.path.join(out_dir, "koch.csv")
        cones.koch_theta(6, math.pi - 0.1).dump_csv(path)
        files.append(path)
    return files


def run_scenario(config: ScenarioConfig) -> SuiteSummary:
    """Execute every requested (model, suite) cell and write reports.

    A failing cell (exception) is recorded as a failed `<suite>_execution`
    record; remaining cells still run.
    """
    out_dir = os.environ.get(ENV_OUTPUT_DIR, config.output_dir)
    os.makedirs(out_dir, exist_ok=True)
    records: list[CheckRecord] = []
    files: list[str] = []

    contexts = [ModelContext(m, config.r_range, config.t_range,
                             config.tolerances) for m in config.models]
    for suite in config.suites:
        if suite == "koch":
            cells = [None]
        else:
            cells = contexts
        for ctx in cells:
            label = "(koch)" if ctx is None else ctx.label
            try:
                if ctx is None:
                    from .checks import run_koch
                    records.extend(run_koch(config.tolerances))
                    files.extend(_cell_artifacts("koch", contexts[0], out_dir))
                else:
                    records.extend(run_model_suite(suite, ctx))
                    files.extend(_cell_artifacts(suite, ctx, out_dir))
            except Exception as exc:  # fail isolation per cell
                records.append(CheckRecord(
                    check_id=f"{suite}_execution",
                    anchor=f"suite executed without error ({exc})",
                    model=label, value=math.inf, tolerance=0.0, passed=False))

    summary_path = os.path.join(out_dir, "summary.csv")
    _write_summary(summary_path, records)
    files.append(summary_path)
    return SuiteSummary(records=records, files=files)


def list_checks() -> str:
    """One line per check: id, suite, anchor (the stable summary strings)."""
    lines = [f"{cid}  [{suite}]  {anchor}  (tolerance {tol:g})"
             for cid, (suite, anchor, tol) in CHECKS.items()]
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# entry point

def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="warplab",
        description="Numerical laboratory for Green's functions, monotone "
                    "quantities and heat-kernel entropies on rotationally "
                    "symmetric manifolds with nonnegative Ricci curvature.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario config")
    p_run.add_argument("config", help="path to the scenario config file")
    p_run.add_argument("--output-dir", default=None,
                       help=f"override output directory (also {ENV_OUTPUT_DIR})")

    sub.add_parser("list-checks", help="print every check id and its anchor")

    p_dump = sub.add_parser("dump-green",
                            help="dump the Green table (rho,G,b,db,Q) to CSV")
    p_dump.add_argument("model", help="model spec, e.g. 'exp_cone:0.5, 4'")
    p_dump.add_argument("csv", help="output CSV path")

    args = parser.parse_args(argv)

    if args.command == "list-checks":
        print(list_checks())
        return 0

    if args.command == "dump-green":
        try:
            model = parse_model_spec(args.model)
        except (ProfileError, ParabolicModelError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        solve_green(model).dump_csv(args.csv)
        print(f"wrote {args.csv}")
        return 0

    try:
        with open(args.config) as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        config = parse_config(text)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return 2
    if args.output_dir:
        config.output_dir = args.output_dir
    summary = run_scenario(config)
    n_pass = sum(r.passed for r in summary.records)
    print(f"{n_pass}/{len(summary.records)} checks passed; "
          f"reports in {os.environ.get(ENV_OUTPUT_DIR, config.output_dir)}")
    if not summary.passed:
        for cid in summary.failing_ids():
            print(f"FAIL {cid}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
