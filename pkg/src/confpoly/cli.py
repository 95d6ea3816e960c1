"""Command-line entry point: ``confpoly {curve,boundary,verify,sample}``.

Configuration precedence is flags > ``--config`` JSON file > ``CONFPOLY_*``
environment variables > built-in defaults. ``CONFPOLY_MAX_SAMPLES`` caps any
sample budget, which lets CI shrink runs without touching commands.

Exit codes: 0 pass, 1 usage error, 2 verification failure, 3 sampler
exhaustion.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import crofton, measures, verify
from .moduli import ConfinedRegionSpec, SamplerExhausted, sample_confined, sample_loose

EXIT_OK, EXIT_USAGE, EXIT_FAIL, EXIT_EXHAUSTED = 0, 1, 2, 3
ENV_PREFIX = "CONFPOLY_"
COMMANDS = ("curve", "boundary", "verify", "sample")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str = "curve"
    n: int = 4
    r: float = 1.2
    r_min: float = 1.0
    r_max: float = 2.0
    steps: int = 21
    samples: int = 10_000
    seed: int = 7
    grid_size: int = 1024
    method: str = "quadrature"
    suite: str = "all"
    measures: str = "auto"
    region: str = "confined"
    h: float = 1e-3
    tol: float = crofton.DEFAULT_TOL
    out: str = "-"
    format: str = "csv"

    def validate(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.format not in ("csv", "json"):
            raise UsageError("--format must be csv or json")
        if self.samples < 1:
            raise UsageError("--samples must be positive")
        if self.grid_size < 16:
            raise UsageError("--grid-size must be at least 16")
        if self.command == "curve":
            if not (1.0 <= self.r_min <= self.r_max <= 2.0):
                raise UsageError("need 1 <= --r-min <= --r-max <= 2")
            if self.steps < 1 or (self.steps == 1 and self.r_min != self.r_max):
                raise UsageError("--steps must be >= 1 (exactly 1 only when r-min == r-max)")
            if self.method not in ("quadrature", "monte_carlo"):
                raise UsageError("--method must be quadrature or monte_carlo")
        if self.command == "boundary":
            if self.measures not in ("auto", "mu", "nu"):
                raise UsageError("--measures must be auto, mu or nu")
        if self.command == "verify" and self.suite not in verify.SUITES:
            raise UsageError(f"unknown suite {self.suite!r}; choose from {', '.join(verify.SUITES)}")
        if self.command == "sample":
            if self.n < 4:
                raise UsageError("--n must be at least 4")
            if self.region not in ("confined", "loose"):
                raise UsageError("--region must be confined or loose")
            if self.region == "confined":
                try:
                    ConfinedRegionSpec(self.n, self.r)
                except ValueError as exc:
                    raise UsageError(str(exc)) from None
            elif self.n % 2 or not (self.n / 2 - 0.5 < self.r <= self.n / 2):
                raise UsageError("loose sampling needs even n and n/2 - 1/2 < r <= n/2")


def _coerce(name: str, raw):
    kind = {f.name: f.type for f in fields(RunConfig)}[name]
    try:
        return {"int": int, "float": float}.get(kind, str)(raw)
    except ValueError:
        raise UsageError(f"bad value for {name}: {raw!r}") from None


def _env_overrides() -> dict:
    out = {}
    for f in fields(RunConfig):
        key = ENV_PREFIX + f.name.upper()
        if key in os.environ and f.name != "command":
            out[f.name] = _coerce(f.name, os.environ[key])
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="confpoly", description="Confined equilateral polygon curvature toolkit")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON file with RunConfig fields")
        s.add_argument("--n", type=int)
        s.add_argument("--r", type=float)
        s.add_argument("--r-min", dest="r_min", type=float)
        s.add_argument("--r-max", dest="r_max", type=float)
        s.add_argument("--steps", type=int)
        s.add_argument("--samples", type=int)
        s.add_argument("--seed", type=int)
        s.add_argument("--grid-size", dest="grid_size", type=int)
        s.add_argument("--method")
        s.add_argument("--suite")
        s.add_argument("--measures")
        s.add_argument("--region")
        s.add_argument("--h", type=float)
        s.add_argument("--tol", type=float)
        s.add_argument("--out")
        s.add_argument("--format")
    return p


def resolve_config(argv) -> RunConfig:
    args = build_parser().parse_args(argv)
    values = asdict(RunConfig())
    values.update(_env_overrides())
    if args.config:
        try:
            with open(args.config) as fh:
                from_file = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config file: {exc}") from None
        unknown = set(from_file) - set(values)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        values.update({k: _coerce(k, v) for k, v in from_file.items() if k != "command"})
    values.update({k: v for k, v in vars(args).items() if v is not None and k in values})
    values["command"] = args.command
    cap = os.environ.get(ENV_PREFIX + "MAX_SAMPLES")
    if cap:
        values["samples"] = min(values["samples"], int(cap))
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if x is None or (isinstance(x, float) and not np.isfinite(x)):
        return "nan" if x is not None else ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _config_comment(cfg: RunConfig) -> str:
    return "# config: " + json.dumps(asdict(cfg), sort_keys=True)


def _csv_text(cfg: RunConfig, header, rows) -> str:
    buf = io.StringIO()
    buf.write(_config_comment(cfg) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()


def _emit(cfg: RunConfig, text: str):
    if cfg.out == "-":
        sys.stdout.write(text)
        return
    try:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {cfg.out}: {exc}") from None


def _table(cfg, header, rows, extra=None) -> str:
    if cfg.format == "json":
        doc = {"config": asdict(cfg),
               "rows": [dict(zip(header, [fmt(x) for x in row])) for row in rows]}
        doc.update(extra or {})
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    return _csv_text(cfg, header, rows)


# ------------------------------------------------------------------ commands


def cmd_curve(cfg: RunConfig) -> int:
    r_grid = np.round(np.linspace(cfg.r_min, cfg.r_max, cfg.steps), 12)
    if cfg.method == "quadrature":
        curve, verdict = crofton.monotonicity_scan(r_grid, h=cfg.h, tol=cfg.tol)
        kbar = curve.kappa_bar
        passed = verdict.passed
    else:
        curve, _ = crofton.monotonicity_scan(r_grid, h=cfg.h, tol=cfg.tol)
        kbar = [crofton.kappa_bar(r, "monte_carlo", cfg.samples, cfg.seed) for r in r_grid]
        passed = all(
            b.value - a.value <= crofton.MONOTONE_TOL + 3 * np.hypot(a.std_error, b.std_error)
            for a, b in zip(kbar, kbar[1:])
        )
    header = ["r", "kappa_bar", "method", "std_error", "area", "kappa_B", "crofton_residual"]
    rows = [[r, k.value, k.method.value, k.error, a, kb, res]
            for r, k, a, kb, res in zip(curve.r_values, kbar, curve.area, curve.kappa_B,
                                        curve.crofton_residual)]
    verdict_text = "PASS" if passed else "FAIL"
    if cfg.format == "json":
        text = _table(cfg, header, rows, {"verdict": verdict_text})
    else:
        text = _csv_text(cfg, header, rows + [["verdict", verdict_text, "", "", "", "", ""]])
    _emit(cfg, text)
    return EXIT_OK if passed else EXIT_FAIL


def cmd_boundary(cfg: RunConfig) -> int:
    r = cfg.r
    which = cfg.measures
    if which == "auto":
        which = "mu" if r < measures.SQRT2 else "nu"
    try:
        if which == "mu":
            b_ell, b_th = measures.mu_B_grid(r, cfg.grid_size)
            i_ell, i_th = measures.mu_I_grid(r, cfg.grid_size, b_ell.normalized_mass)
            header = ["arc", "param", "mu_B", "mu_I"]
            rows = [["ell", x, b, i] for x, b, i in zip(b_ell.params, b_ell.density, i_ell.density)]
            rows += [["theta", x, b, i] for x, b, i in zip(b_th.params, b_th.density, i_th.density)]
            summary = {"alpha": b_ell.normalized_mass}
            tail = [["alpha", b_ell.normalized_mass, "", ""]]
        else:
            nb, ni = measures.nu_grids(r, cfg.grid_size)
            header = ["arc", "param", "nu_B", "nu_I"]
            rows = [["ell_swap", x, b, i] for x, b, i in zip(nb.params, nb.density, ni.density)]
            summary = {"arc_end": float(nb.params[-1])}
            tail = [["arc_end", float(nb.params[-1]), "", ""]]
    except measures.RegimeError as exc:
        raise UsageError(str(exc)) from None
    if cfg.format == "json":
        text = _table(cfg, header, rows, summary)
    else:
        text = _csv_text(cfg, header, rows + tail)
    _emit(cfg, text)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    checks = verify.run_suite(cfg.suite, seed=cfg.seed, samples=cfg.samples)
    ok = all(c.passed for c in checks)
    doc = {"suite": cfg.suite, "seed": cfg.seed, "config": asdict(cfg), "passed": ok,
           "checks": [c.to_dict() for c in checks]}
    _emit(cfg, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    for c in checks:
        print(c.line(), file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_sample(cfg: RunConfig) -> int:
    try:
        if cfg.region == "confined":
            batch = sample_confined(ConfinedRegionSpec(cfg.n, cfg.r), cfg.samples, cfg.seed)
        else:
            batch = sample_loose(cfg.n, cfg.r, cfg.samples, cfg.seed)
    except SamplerExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EXHAUSTED
    k = cfg.n - 3
    header = (["index"] + [f"ell_{j}" for j in range(3, 3 + k)]
              + [f"theta_{j}" for j in range(3, 3 + k)] + ["curvature", "diameter", "accepted"])
    rows = [[i, *batch.ells[i], *batch.thetas[i], batch.curvature[i], batch.diameter[i], 1]
            for i in range(len(batch))]
    _emit(cfg, _table(cfg, header, rows, {"acceptance_rate": batch.acceptance_rate}))
    return EXIT_OK


HANDLERS = {"curve": cmd_curve, "boundary": cmd_boundary, "verify": cmd_verify, "sample": cmd_sample}


def main(argv=None) -> int:
    try:
        cfg = resolve_config(sys.argv[1:] if argv is None else argv)
        return HANDLERS[cfg.command](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
