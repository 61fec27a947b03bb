"""Command line front end.

Subcommands::

    freeplate compute        spectrum JSON
    freeplate bounds         bound table CSV
    freeplate verify         spectrum JSON + per-m bound check CSV, exit 1 on failure
    freeplate fourier-check  N/D inequality report CSV

Exit codes: 0 all enabled checks pass, 1 some check failed, 2 bad config
or arguments.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bounds as bd
from .domains import DomainSpec, Kind
from .exact_spectra import OracleSpec
from .fourier_verify import R_GRID_HI, FourierField, master_inequality_check, write_report_csv
from .ritz import NotConverged, Operator, Spectrum, compute_spectrum

log = logging.getLogger("freeplate")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
CHECKS = ("bounds", "fourier", "oracle")
BOUND_RTOL = 1e-6
ORACLE_RTOL = 1e-6
ORACLE_ABS = 1e-8

VERIFY_COLUMNS = ("m", "sum_computed", "sum_bound", "eig_computed", "eig_bound",
                  "slack_sum", "slack_eig", "status")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    domain: DomainSpec
    operator: Operator = Operator.PLATE
    tau: float = 0.0
    count: int = 6
    m_max: int = 0
    checks: frozenset = frozenset()
    target_rel_tol: float = 1e-8
    require_converged: bool = False
    fourier_m: tuple[int, ...] = ()
    outputs: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict, base_dir: Path | None = None) -> "ExperimentConfig":
        try:
            domain = DomainSpec.from_dict(d["domain"])
            operator = Operator(str(d.get("operator", "plate")).lower())
            tau = float(d.get("tau", 0.0))
            count = int(d.get("count", 6))
            m_max = int(d.get("m_max", max(count - 1, 0)))
            checks = frozenset(d.get("checks", ()))
            target = float(d.get("target_rel_tol", 1e-8))
            fourier_m = tuple(int(m) for m in d.get("fourier_m", range(0, min(m_max, 5) + 1)))
            outputs = dict(d.get("output", {}))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid config: {exc}") from exc
        if count < 1:
            raise ConfigError("count must be >= 1")
        if m_max < 0:
            raise ConfigError("m_max must be >= 0")
        if not math.isfinite(tau) or tau < 0:
            raise ConfigError("tau must be nonnegative")
        if not checks <= set(CHECKS):
            raise ConfigError(f"unknown checks {sorted(checks - set(CHECKS))}")
        if checks & {"bounds", "fourier"} and count < m_max + 1:
            raise ConfigError(f"count {count} must be >= m_max + 1 = {m_max + 1}")
        if "fourier" in checks:
            if operator is not Operator.PLATE:
                raise ConfigError("the fourier check applies to plate spectra")
            if any(m < 0 or m + 1 > count for m in fourier_m):
                raise ConfigError("fourier_m entries must lie in [0, count - 1]")
        if "oracle" in checks:
            try:
                OracleSpec(domain, operator, tau)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        if base_dir is not None:
            outputs = {k: str(base_dir / v) for k, v in outputs.items()}
        return cls(domain, operator, tau, count, m_max, checks, target,
                   bool(d.get("require_converged", False)), fourier_m, outputs)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return ExperimentConfig.from_dict(data, path.parent)


@contextlib.contextmanager
def _open_out(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def fmt(x) -> str:
    return f"{float(x):.11e}"


def spectrum_for(cfg: ExperimentConfig) -> Spectrum:
    try:
        spec = compute_spectrum(cfg.domain, cfg.operator, cfg.tau, cfg.count, cfg.target_rel_tol)
    except NotConverged as exc:
        log.warning("%s", exc)
        spec = exc.spectrum
    return spec


def verification_rows(spec: Spectrum, m_max: int, rtol: float = BOUND_RTOL) -> list[dict]:
    """Compare partial sums and single eigenvalues against the matching bounds."""
    n, vol = spec.domain.dimension, spec.domain.volume()
    rows = []
    for m in range(1, m_max + 1):
        b = bd.BoundInput(n, vol, spec.tau, m)
        if spec.operator is Operator.MEMBRANE:
            sum_bound, eig_bound = bd.kroger_sum_bound(b), bd.kroger_eig_bound(b)
        else:
            sum_bound, eig_bound = bd.plate_sum_bound(b), bd.plate_eig_bound(b)
        s = float(np.sum(spec.values[:m]))
        e = float(spec.values[m])
        slack_sum, slack_eig = sum_bound - s, eig_bound - e
        ok = slack_sum >= -rtol * sum_bound and slack_eig >= -rtol * max(eig_bound, 1.0)
        rows.append({"m": m, "sum_computed": s, "sum_bound": sum_bound, "eig_computed": e,
                     "eig_bound": eig_bound, "slack_sum": slack_sum, "slack_eig": slack_eig,
                     "status": "pass" if ok else "FAIL"})
    return rows


def write_verification_csv(rows, stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(VERIFY_COLUMNS)
    for row in rows:
        w.writerow([row["m"], *(fmt(row[k]) for k in VERIFY_COLUMNS[1:-1]), row["status"]])


def oracle_deviation(spec: Spectrum, cfg: ExperimentConfig) -> np.ndarray:
    exact = OracleSpec(cfg.domain, cfg.operator, cfg.tau).spectrum(len(spec)).values
    return np.abs(spec.values - exact) / np.maximum(np.abs(exact), ORACLE_ABS / ORACLE_RTOL)


def fourier_field(spec: Spectrum, ms) -> FourierField:
    """Field resolving frequencies up to the largest radius any checked m needs."""
    b = bd.BoundInput(spec.domain.dimension, spec.domain.volume(), 0.0, max(max(ms, default=1), 1))
    return FourierField(spec, r_max=R_GRID_HI * bd.threshold_radius(b))


def run(config_path) -> int:
    """Run every enabled check of a config file; returns the exit code."""
    try:
        cfg = load_config(config_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    spec = spectrum_for(cfg)
    failed = False
    if cfg.require_converged and not spec.converged:
        print("check failed: spectrum not converged", file=sys.stderr)
        failed = True
    with _open_out(cfg.outputs.get("spectrum")) as fh:
        fh.write(spec.to_json(indent=2) + "\n")

    if "bounds" in cfg.checks:
        rows = verification_rows(spec, cfg.m_max)
        for row in rows:
            if row["status"] != "pass":
                failed = True
                print(f"bound check failed at m={row['m']}: slack_sum={fmt(row['slack_sum'])} "
                      f"slack_eig={fmt(row['slack_eig'])}", file=sys.stderr)
        with _open_out(cfg.outputs.get("report")) as fh:
            write_verification_csv(rows, fh)

    if "oracle" in cfg.checks:
        dev = oracle_deviation(spec, cfg)
        worst = int(np.argmax(dev))
        log.info("oracle max relative deviation %.3e at index %d", dev[worst], worst)
        if dev[worst] > ORACLE_RTOL:
            failed = True
            print(f"oracle check failed at index {worst}: relative deviation {dev[worst]:.3e}",
                  file=sys.stderr)

    if "fourier" in cfg.checks:
        field_ = fourier_field(spec, cfg.fourier_m)
        reports = [master_inequality_check(field_, m) for m in cfg.fourier_m]
        for rep in reports:
            if not rep.passed:
                failed = True
                print(f"fourier check failed at m={rep.m}: min margin {fmt(rep.min_margin)}",
                      file=sys.stderr)
        with _open_out(cfg.outputs.get("fourier")) as fh:
            write_report_csv(reports, fh)
    return EXIT_FAIL if failed else EXIT_OK


def _inline_config(args) -> ExperimentConfig:
    if args.domain is None:
        raise ConfigError("give --config or --domain/--extents")
    d = {"domain": {"kind": args.domain, "extents": args.extents or []},
         "operator": args.operator, "tau": args.tau, "count": args.count}
    if args.m is not None:
        d["m_max"] = args.m
    return ExperimentConfig.from_dict(d)


def _cmd_compute(args) -> int:
    cfg = load_config(args.config) if args.config else _inline_config(args)
    spec = spectrum_for(cfg)
    with _open_out(args.out or cfg.outputs.get("spectrum")) as fh:
        fh.write(spec.to_json(indent=2) + "\n")
    return EXIT_OK


def _cmd_bounds(args) -> int:
    if args.config:
        cfg = load_config(args.config)
        n, vol, tau, m_max = cfg.domain.dimension, cfg.domain.volume(), cfg.tau, cfg.m_max
    else:
        if args.n is None or args.volume is None or args.m is None:
            raise ConfigError("bounds needs --config or --n, --volume and --m")
        n, vol, tau, m_max = args.n, args.volume, args.tau, args.m
    if n < 1 or not vol > 0 or not tau >= 0 or m_max < 0:
        raise ConfigError("need n >= 1, volume > 0, tau >= 0, m >= 0")
    rows = bd.bounds_table(n, vol, tau, m_max)
    with _open_out(args.out) as fh:
        bd.write_bounds_csv(rows, fh, long=args.long)
    return EXIT_OK


def _cmd_verify(args) -> int:
    if not args.config:
        raise ConfigError("verify needs --config")
    return run(args.config)


def _cmd_fourier(args) -> int:
    cfg = load_config(args.config) if args.config else _inline_config(args)
    if cfg.operator is not Operator.PLATE:
        raise ConfigError("fourier-check needs a plate spectrum")
    ms = cfg.fourier_m if args.config else tuple(range(0, cfg.m_max + 1))
    if any(m + 1 > cfg.count for m in ms):
        raise ConfigError("count must exceed every checked m")
    field_ = fourier_field(spectrum_for(cfg), ms)
    reports = [master_inequality_check(field_, m) for m in ms]
    with _open_out(args.out or cfg.outputs.get("fourier")) as fh:
        write_report_csv(reports, fh)
    bad = [r.m for r in reports if not r.passed]
    for m in bad:
        print(f"fourier check failed at m={m}", file=sys.stderr)
    return EXIT_FAIL if bad else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="freeplate", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="experiment JSON config")
        sp.add_argument("--out", help="output path (default: standard output)")
        sp.add_argument("--tau", type=float, default=0.0)
        sp.add_argument("--m", type=int, help="largest m")

    for name, fn in (("compute", _cmd_compute), ("verify", _cmd_verify), ("fourier-check", _cmd_fourier)):
        sp = sub.add_parser(name)
        common(sp)
        sp.add_argument("--domain", choices=[k.value for k in Kind])
        sp.add_argument("--extents", type=float, nargs="+")
        sp.add_argument("--operator", choices=[o.value for o in Operator], default="plate")
        sp.add_argument("--count", type=int, default=6)
        sp.set_defaults(func=fn)

    sp = sub.add_parser("bounds")
    common(sp)
    sp.add_argument("--n", type=int)
    sp.add_argument("--volume", type=float)
    sp.add_argument("--long", action="store_true", help="one row per (m, bound kind)")
    sp.set_defaults(func=_cmd_bounds)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
