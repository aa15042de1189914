"""Command-line runner: ``seema {exponent,simulate,sweep-region,bounds}``.

Tables go to ``--out`` (or stdout) as CSV with a header row and floats at 17
significant digits, or as JSON.  The fully resolved scenario is written next
to the table as ``<out>.scenario.json`` (to stderr when printing to stdout).

Exit codes: 0 success, 2 scenario error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .channel import EQUAL, BoundUnavailable, fading_hoeffding_bound, verify_A1
from .config import ResolvedScenario, ScenarioError, bundled, load_scenario
from .infotheory import (RateReport, asymptotic_exponent_iid, bernoulli_log_mgf, chernoff_bound_iid,
                         exponent_sweep_dc, mixture_log_mgf, rate_report)
from .markov import ReducibilityError, markov_log_mgf
from .model import DC_IN_AWGN, ONE_SIDED, CalibrationError, DegenerateProbabilityError
from .sim import SEEMA, IncompatibleScheme, energy_at_pe, estimate_errors

EXIT_OK, EXIT_SCENARIO, EXIT_NUMERIC = 0, 2, 3

SIMULATE_COLUMNS = ("N", "scheme", "Pe", "ci95", "avg_energy", "transmit_fraction", "errors_H0", "errors_H1",
                    "trials")
ENERGY_COLUMNS = ("Pe_target", "scheme", "avg_energy")
EXPONENT_COLUMNS = ("path", "exponent_H0", "exponent_H1", "exponent", "threshold", "argsup_H0", "argsup_H1")
SWEEP_COLUMNS = ("X_L", "transmit_fraction", "exponent")
BOUNDS_COLUMNS = ("N", "hoeffding_H0", "hoeffding_H1", "chernoff_H0", "chernoff_H1", "valid", "mc_Pe", "mc_ci95",
                  "violation")

Table = Tuple[Sequence[str], List[tuple]]


def exponent_report(rs: ResolvedScenario) -> Tuple[str, RateReport]:
    """Pick the analytical path for the scenario and compute both exponents.

    Paths: iid-closed-form (identical sensors, equal gains), iid-fading,
    local-iid (several observation groups), markov-perron.
    """
    sc = rs.scenario
    ch, Z = sc.channel, sc.Z_value
    profiles = sc.group_profiles()

    if sc.is_markov:
        prof = profiles[0]
        gain = lambda t: ch.log_mgf(t, prof.A / Z)  # noqa: E731
        lam0 = markov_log_mgf(sc.field, 0, gain)
        lam1 = markov_log_mgf(sc.field, 1, gain)
        tau = math.log((1 - prof.p0) / (1 - prof.p1))
        return "markov-perron", rate_report(lam0, lam1, tau)

    weights = np.array([w for _, w in sc.groups])
    weights = weights / weights.sum()
    tau = float(sum(w * math.log((1 - p.p0) / (1 - p.p1)) for w, p in zip(weights, profiles)))

    def lam(h):
        parts = [(w, bernoulli_log_mgf(p.p1 if h else p.p0, (lambda t, a=p.A: ch.log_mgf(t, a / Z))))
                 for w, p in zip(weights, profiles)]
        return parts[0][1] if len(parts) == 1 else mixture_log_mgf(parts)

    report = rate_report(lam(0), lam(1), tau)
    if len(profiles) > 1:
        return "local-iid", report
    if ch.kind == EQUAL and ch.gain == Z:
        p = profiles[0]
        value = asymptotic_exponent_iid(p.p0, p.p1)
        x = tau / p.A
        t_star = [math.log(x * (1 - q) / (q * (1 - x))) / p.A for q in (p.p0, p.p1)]
        closed = RateReport(value, value, tau, t_star[0], t_star[1], report.lambda_H0, report.lambda_H1)
        return "iid-closed-form", closed
    return "iid-fading", report


def cmd_exponent(rs: ResolvedScenario) -> Table:
    path, r = exponent_report(rs)
    return EXPONENT_COLUMNS, [(path, r.exponent_H0, r.exponent_H1, r.exponent, r.threshold, r.argsup_H0, r.argsup_H1)]


def cmd_simulate(rs: ResolvedScenario) -> Table:
    if rs.sweep_variable == "X_L":
        raise ScenarioError("X_L sweeps are analytical; use sweep-region")
    if rs.trials < 1:
        raise ScenarioError("simulate needs at least one trial")
    results = {s: [] for s in rs.schemes}
    rows = []
    for N in rs.N_grid:
        res = estimate_errors(rs.at(N), rs.schemes, rs.trials, rs.seed, rs.workers)
        for s in rs.schemes:
            r = res[s]
            results[s].append(r)
            rows.append((N, s, r.Pe, r.ci95, r.avg_energy, r.transmit_fraction, r.errors_H0, r.errors_H1, r.trials))
    if rs.sweep_variable != "Pe_target":
        return SIMULATE_COLUMNS, rows
    out = []
    for target in rs.grid:
        for s in rs.schemes:
            out.append((target, s, float(energy_at_pe(results[s], [target])[0])))
    return ENERGY_COLUMNS, out


def cmd_sweep_region(rs: ResolvedScenario) -> Table:
    sc = rs.scenario
    if rs.sweep_variable != "X_L":
        raise ScenarioError("sweep-region needs a sweep over X_L")
    if sc.is_markov or len(sc.groups) != 1 or sc.groups[0][0].kind != DC_IN_AWGN:
        raise ScenarioError("sweep-region needs a single dc-in-awgn observation model")
    if sc.region.shape != ONE_SIDED:
        raise ScenarioError("sweep-region uses one-sided regions")
    model = sc.groups[0][0]
    sweep = exponent_sweep_dc(model.theta, model.noise_var, rs.grid, sc.priors)
    return SWEEP_COLUMNS, sweep.rows()


def cmd_bounds(rs: ResolvedScenario) -> Table:
    """Finite-sample bounds per N, with an optional Monte Carlo column.

    ``violation`` is 1 when a prior-weighted bound falls below Pe - 3 ci95.
    """
    sc = rs.scenario
    if sc.is_markov:
        raise ScenarioError("finite-sample bounds assume independent sensors")
    nan = float("nan")
    rows = []
    for N in rs.N_grid:
        scN = rs.at(N)
        cfg = scN.detector()
        q0, q1 = scN.priors
        try:
            hb = fading_hoeffding_bound(cfg, sc.channel, sc.noise.sigma2, scN.E_N)
            hoeff = (hb.H0, hb.H1)
            valid = hb.valid
        except BoundUnavailable:
            hoeff = (nan, nan)
            valid = verify_A1(cfg, sc.channel, N_cap=N)[2] is not None
        cher = (nan, nan)
        if cfg.is_iid and sc.channel.kind == EQUAL and sc.channel.gain == cfg.Z:
            cb = chernoff_bound_iid(cfg, sc.noise.sigma2, scN.E_N)
            cher = (cb.H0, cb.H1)
        mc_pe = mc_ci = nan
        violation = 0
        if rs.trials > 0:
            r = estimate_errors(scN, (SEEMA,), rs.trials, rs.seed, rs.workers)[SEEMA]
            mc_pe, mc_ci = r.Pe, r.ci95
            for b0, b1 in (hoeff, cher):
                if not math.isnan(b0) and q0 * b0 + q1 * b1 < mc_pe - 3 * mc_ci:
                    violation = 1
        rows.append((N, hoeff[0], hoeff[1], cher[0], cher[1], int(valid), mc_pe, mc_ci, violation))
    return BOUNDS_COLUMNS, rows


COMMANDS = {
    "exponent": cmd_exponent,
    "simulate": cmd_simulate,
    "sweep-region": cmd_sweep_region,
    "bounds": cmd_bounds,
}


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def render(columns, rows, fmt: str, document: dict) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
        return buf.getvalue()

    def clean(v):
        if isinstance(v, (np.integer,)):
            return int(v)
        if isinstance(v, (float, np.floating)):
            return None if not math.isfinite(v) else float(v)
        return v

    payload = {"columns": list(columns), "rows": [dict(zip(columns, map(clean, r))) for r in rows],
               "scenario": document}
    return json.dumps(payload, indent=2) + "\n"


def _scenario_path(arg: str) -> Path:
    path = Path(arg)
    if path.exists() or path.suffix:
        return path
    return bundled(arg)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seema", description="Censoring-based detection over multiple-access "
                                                                "channels: exponents, bounds and Monte Carlo.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=(fn.__doc__ or "").strip().splitlines()[0] if fn.__doc__ else None)
        p.add_argument("--scenario", required=True, help="scenario JSON file or bundled scenario name")
        p.add_argument("--seed", type=int, default=None, help="unsigned 64-bit seed (overrides mc.seed)")
        p.add_argument("--trials", type=int, default=None, help="trials per hypothesis (overrides mc.trials)")
        p.add_argument("--out", default=None, help="output file (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.seed is not None and not 0 <= args.seed < 2 ** 64:
            raise ScenarioError("seed must be an unsigned 64-bit integer")
        if args.trials is not None and args.trials < 0:
            raise ScenarioError("trials must be nonnegative")
        rs = load_scenario(_scenario_path(args.scenario), seed=args.seed, trials=args.trials)
        columns, rows = COMMANDS[args.command](rs)
    except (ScenarioError, IncompatibleScheme, CalibrationError, DegenerateProbabilityError,
            ReducibilityError) as exc:
        print(f"seema: scenario error: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    except (ArithmeticError, FloatingPointError) as exc:
        print(f"seema: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    record = {"command": args.command, "scenario": rs.document}
    text = render(columns, rows, args.format, rs.document)
    sidecar = json.dumps(record, indent=2) + "\n"
    if args.out:
        out = Path(args.out)
        out.write_text(text, encoding="utf-8")
        Path(str(out) + ".scenario.json").write_text(sidecar, encoding="utf-8")
    else:
        sys.stdout.write(text)
        if args.format == "csv":
            sys.stderr.write(sidecar)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
