"""Command line front end: ``ginprod <command> [options]``.

Commands: poly, recurrence, kernel, hard-edge, sample, verify.  Results go
to ``--out`` (default stdout) as CSV (header ``x,y,value,err,repr``) or
versioned JSON.  Exit status: 0 success, 1 verification or numerical
failure, 2 configuration error; errors are reported as JSON on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from typing import Optional

import numpy as np

from . import biorth, kernel, sampler
from .errors import GinprodError, ParameterError
from .specfun import ParamSet

SCHEMA = 1
COMMANDS = ("poly", "recurrence", "kernel", "hard-edge", "sample", "verify")
REPRESENTATIONS = ("sum", "u-integral", "contour", "all")
EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(ParameterError):
    code = "config.invalid"


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class GridSpec:
    lo: float = 1.0
    hi: float = 1.0
    count: int = 1
    scale: str = "lin"

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        parts = [p.strip() for p in str(text).split(",")]
        if len(parts) not in (3, 4):
            raise ConfigError(f"grid must be min,max,count[,lin|log], got {text!r}", "config.grid.format")
        try:
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise ConfigError(f"grid must be min,max,count[,lin|log], got {text!r}", "config.grid.format")
        return cls(lo, hi, count, parts[3] if len(parts) == 4 else "lin")

    def validate(self):
        if self.scale not in ("lin", "log"):
            raise ConfigError(f"grid scale must be lin or log, got {self.scale!r}", "config.grid.scale")
        if self.count < 1:
            raise ConfigError("grid count must be at least 1", "config.grid.count")
        if not (self.lo > 0 and self.hi >= self.lo):
            raise ConfigError("grid needs 0 < min <= max", "config.grid.range")
        if self.count == 1 and self.lo != self.hi:
            raise ConfigError("a one-point grid needs min == max", "config.grid.count")

    def points(self) -> list[float]:
        self.validate()
        if self.count == 1:
            return [self.lo]
        if self.scale == "log":
            return [float(v) for v in np.geomspace(self.lo, self.hi, self.count)]
        return [float(v) for v in np.linspace(self.lo, self.hi, self.count)]

    def __str__(self):
        return f"{self.lo!r},{self.hi!r},{self.count},{self.scale}"


def _parse_nu(text) -> list:
    if isinstance(text, (list, tuple)):
        items = list(text)
    else:
        items = [p.strip() for p in str(text).split(",") if p.strip()]
    out = []
    for item in items:
        if isinstance(item, (int, float)) and not isinstance(item, bool):
            out.append(item)
            continue
        try:
            val = Fraction(str(item))
        except (ValueError, ZeroDivisionError):
            raise ParameterError(f"cannot parse nu entry {item!r}", "param.nu.type")
        out.append(int(val) if val.denominator == 1 else val)
    return out


def _nu_json(nu) -> list:
    return [v if isinstance(v, (int, float)) else str(v) for v in nu]


@dataclass
class JobConfig:
    command: str
    M: int = 1
    nu: list = field(default_factory=list)
    n: int = 1
    grid: GridSpec = field(default_factory=GridSpec)
    diagonal: bool = False
    tol: float = 1e-12
    seed: int = 0
    trials: Optional[int] = None
    dims: Optional[list] = None
    out: Optional[str] = None
    format: str = "csv"
    representation: str = "sum"
    cauchy_check: bool = False
    quick: bool = False
    perturb_a0: float = 0.0

    def params(self) -> ParamSet:
        return ParamSet(self.M, self.nu or [0] * self.M)

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}", "config.command")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json", "config.format")
        if self.representation not in REPRESENTATIONS:
            raise ConfigError(f"representation must be one of {REPRESENTATIONS}", "config.repr")
        if not isinstance(self.M, int) or self.M < 1:
            raise ParameterError("M must be a positive integer", "param.M.range")
        self.params()
        if not isinstance(self.n, int) or self.n < 0:
            raise ParameterError("n must be a nonnegative integer", "param.n.range")
        if self.command in ("kernel",) and self.n < 1:
            raise ParameterError("the kernel needs n >= 1", "param.n.range")
        if not self.tol > 0:
            raise ParameterError("tol must be positive", "param.tol.range")
        if not 0 <= self.seed < 2 ** 64:
            raise ParameterError("seed must be an unsigned 64-bit integer", "param.seed.range")
        if self.trials is not None:
            if self.command != "sample":
                raise ConfigError("--trials only applies to the sample command", "config.trials.unused")
            if self.trials < 1:
                raise ParameterError("trials must be positive", "param.trials.range")
        if self.dims is not None and self.command != "sample":
            raise ConfigError("--dims only applies to the sample command", "config.dims.unused")
        if self.cauchy_check:
            if self.command != "hard-edge":
                raise ConfigError("--cauchy-check only applies to hard-edge", "config.cauchy.unused")
            if self.M != 2:
                raise ConfigError("--cauchy-check needs M = 2", "config.cauchy.M")
        if self.command in ("poly", "kernel", "hard-edge"):
            self.grid.validate()
        return self

    def to_json(self) -> dict:
        d = asdict(self)
        d["nu"] = _nu_json(self.nu)
        d["grid"] = str(self.grid)
        d["schema"] = SCHEMA
        return d

    @classmethod
    def from_json(cls, data: dict) -> "JobConfig":
        data = dict(data)
        data.pop("schema", None)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}", "config.keys")
        if "grid" in data and not isinstance(data["grid"], GridSpec):
            data["grid"] = GridSpec.parse(data["grid"])
        if "nu" in data:
            data["nu"] = _parse_nu(data["nu"])
        return cls(**data)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ginprod", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON job file; command-line flags override it")
    p.add_argument("--M", type=int)
    p.add_argument("--nu", help="comma-separated nu_1..nu_M (integers, decimals or p/q)")
    p.add_argument("--n", type=int)
    p.add_argument("--grid", help="min,max,count[,lin|log]")
    p.add_argument("--diagonal", action="store_true", default=None, help="only x = y grid points")
    p.add_argument("--tol", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--dims", help="sample: comma-separated N_0..N_M (overrides --n/--nu)")
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--repr", dest="representation", choices=REPRESENTATIONS)
    p.add_argument("--cauchy-check", action="store_true", default=None)
    p.add_argument("--quick", action="store_true", default=None)
    p.add_argument("--perturb-a0", type=float, help=argparse.SUPPRESS)
    p.add_argument("--dump-config", action="store_true", help="print the job as JSON and exit")
    return p


def config_from_args(args: argparse.Namespace) -> JobConfig:
    base = {}
    if args.config:
        try:
            with open(args.config) as fh:
                base = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}", "config.file")
        if base.get("command", args.command) != args.command:
            raise ConfigError("config file is for a different command", "config.command")
    base["command"] = args.command
    cfg = JobConfig.from_json(base)
    overrides = {}
    for name in ("M", "n", "tol", "seed", "trials", "out", "format", "representation",
                 "diagonal", "cauchy_check", "quick", "perturb_a0"):
        val = getattr(args, name)
        if val is not None:
            overrides[name] = val
    if args.nu is not None:
        overrides["nu"] = _parse_nu(args.nu)
    if args.grid is not None:
        overrides["grid"] = GridSpec.parse(args.grid)
    if args.dims is not None:
        try:
            overrides["dims"] = [int(v) for v in args.dims.split(",")]
        except ValueError:
            raise ConfigError(f"cannot parse dims {args.dims!r}", "config.dims.format")
    for k, v in overrides.items():
        setattr(cfg, k, v)
    if cfg.nu and "M" not in overrides and "M" not in base:
        cfg.M = len(cfg.nu)
    if cfg.nu and len(cfg.nu) != cfg.M:
        raise ParameterError(f"expected {cfg.M} nu values, got {len(cfg.nu)}", "param.nu.length")
    return cfg.validate()


# ---------------------------------------------------------------------------
# output


def fmt(v) -> str:
    """Shortest round-trip text for floats; exact text for rationals."""
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None or v == "":
        return ""
    return repr(float(v))


def _json_num(v):
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else fmt(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    return v


def _write(cfg: JobConfig, text: str):
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_text(rows: list, extra: tuple = ()) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("x", "y", "value", "err", "repr") + tuple(extra))
    for r in rows:
        w.writerow([fmt(r.get(k)) if k != "repr" else r[k] for k in ("x", "y", "value", "err", "repr")]
                   + [fmt(r.get(k)) for k in extra])
    return buf.getvalue()


def _json_text(cfg: JobConfig, payload: dict) -> str:
    doc = {"schema": SCHEMA, "command": cfg.command, "config": cfg.to_json()}
    doc.update(payload)
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def _pairs(cfg: JobConfig):
    pts = cfg.grid.points()
    if cfg.diagonal:
        return [(x, x) for x in pts]
    return [(x, y) for x in pts for y in pts]


# ---------------------------------------------------------------------------
# commands


def cmd_poly(cfg: JobConfig) -> int:
    params = cfg.params()
    poly = biorth.p_coeffs(params, cfg.n)
    ys = cfg.grid.points()
    q = biorth.q_eval(params, cfg.n, np.array(ys), tol=min(cfg.tol, 1e-13))
    qvals = np.atleast_1d(q.value)
    if cfg.format == "json":
        payload = {
            "n": cfg.n,
            "coefficients": [_json_num(c) if poly.exact else fmt(c) for c in poly.coeffs],
            "q": [{"y": y, "value": float(v), "err": q.err_estimate} for y, v in zip(ys, qvals)],
        }
        _write(cfg, _json_text(cfg, payload))
        return EXIT_OK
    rows = [{"x": l, "y": "", "value": c if poly.exact else float(c), "err": 0, "repr": "coeff"}
            for l, c in enumerate(poly.coeffs)]
    rows += [{"x": "", "y": y, "value": float(v), "err": q.err_estimate, "repr": "Q_n"}
             for y, v in zip(ys, qvals)]
    _write(cfg, _csv_text(rows))
    return EXIT_OK


def cmd_recurrence(cfg: JobConfig) -> int:
    params = cfg.params()
    rows = []
    ok = True
    for n in range(cfg.n + 1):
        for k in range(params.M + 1):
            a = biorth.a_coeff(params, k, n)
            b = biorth.b_coeff(params, k, n)
            rows.append({"x": k, "y": n, "value": a, "err": 0, "repr": "a"})
            rows.append({"x": k, "y": n, "value": b, "err": 0, "repr": "b"})
        res = biorth.recurrence_residual(params, n)
        ok &= all(c == 0 for c in res)
    if cfg.format == "json":
        payload = {
            "a": [{"k": r["x"], "n": r["y"], "value": _json_num(r["value"])} for r in rows if r["repr"] == "a"],
            "b": [{"k": r["x"], "n": r["y"], "value": _json_num(r["value"])} for r in rows if r["repr"] == "b"],
            "residual_zero": ok,
        }
        _write(cfg, _json_text(cfg, payload))
    else:
        _write(cfg, _csv_text(rows))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_kernel(cfg: JobConfig) -> int:
    kcfg = kernel.KernelConfig(cfg.params(), cfg.n, cfg.tol)
    reps = ("sum", "u-integral", "contour") if cfg.representation == "all" else (cfg.representation,)
    rows = []
    for x, y in _pairs(cfg):
        for rep in reps:
            if rep == "sum":
                val, err = kernel.kn_sum(kcfg, x, y), 0.0
            elif rep == "u-integral":
                r = kernel.kn_u_integral(kcfg, x, y)
                val, err = r.value, r.err_estimate
            else:
                r = kernel.kn_contour(kcfg, x, y)
                val, err = r.value, r.err_estimate
            rows.append({"x": x, "y": y, "value": float(val), "err": float(err), "repr": rep})
    if cfg.format == "json":
        _write(cfg, _json_text(cfg, {"rows": rows}))
    else:
        _write(cfg, _csv_text(rows))
    return EXIT_OK


def cmd_hard_edge(cfg: JobConfig) -> int:
    params = cfg.params()
    hcfg = kernel.HardEdgeConfig(params, cfg.tol)
    extra = ()
    if params.M == 1:
        extra = ("bessel",)
    if cfg.cauchy_check:
        extra = ("cauchy_rel_dev",)
    rows = []
    ok = True
    for x, y in _pairs(cfg):
        r = kernel.hard_edge_u(hcfg, x, y)
        row = {"x": x, "y": y, "value": float(r.value), "err": r.err_estimate, "repr": "u-integral"}
        if params.M == 1:
            row["bessel"] = kernel.bessel_hard_edge(float(params.nu[0]), x, y)
        if cfg.cauchy_check:
            a = float(params.nu[1])
            b = float(params.nu[0]) - a
            rep = kernel.cauchy_identity_check(a, b, x, y)
            row["cauchy_rel_dev"] = rep.rel_deviation
            ok &= rep.passed
        rows.append(row)
    if cfg.format == "json":
        _write(cfg, _json_text(cfg, {"rows": rows}))
    else:
        _write(cfg, _csv_text(rows, extra))
    return EXIT_OK if ok else EXIT_FAIL


def _sample_spec(cfg: JobConfig) -> sampler.MatrixChainSpec:
    if cfg.dims is not None:
        return sampler.MatrixChainSpec(tuple(cfg.dims))
    params = cfg.params()
    if not params.integer_nu:
        raise ParameterError("the sampler needs nonnegative integer nu", "sampler.integer-nu")
    if cfg.n < 1:
        raise ParameterError("the sampler needs n >= 1", "param.n.range")
    return sampler.MatrixChainSpec(tuple([cfg.n] + [cfg.n + int(v) for v in params.nu]))


def cmd_sample(cfg: JobConfig) -> int:
    spec = _sample_spec(cfg)
    trials = cfg.trials or 1000
    batch = sampler.run_batch(spec, cfg.seed, trials)
    report = sampler.empirical_vs_exact_moments(batch, [0, 1, 2])
    if cfg.format == "json":
        payload = {
            "seed": cfg.seed,
            "trials": trials,
            "spec": {"dims": list(spec.dims), "M": spec.M, "nu": list(spec.nu)},
            "moments": report.rows,
            "passed": report.passed,
        }
        _write(cfg, _json_text(cfg, payload))
    else:
        rows = []
        for r in report.rows:
            rows.append({"x": r["p"], "y": "", "value": r["empirical"], "err": r["stderr"], "repr": "empirical"})
            rows.append({"x": r["p"], "y": "", "value": r["exact"], "err": 0, "repr": "exact"})
        _write(cfg, _csv_text(rows))
    return EXIT_OK if report.passed else EXIT_FAIL


def _verify_checks(cfg: JobConfig):
    """Yield (name, passed, residual) for the exact and numeric suites."""
    offset = (lambda k, n: cfg.perturb_a0 if k == 0 else 0) if cfg.perturb_a0 else None
    sweep = [(1, [0]), (1, [2]), (2, [0, 0]), (2, [0, 1]), (2, [1, 2]), (3, [0, 1, 2]), (3, [2, 2, 0])]
    for M, nu in sweep:
        p = ParamSet(M, nu)
        tag = f"M={M},nu={nu}"
        worst = max(abs(biorth.biorth_pairing(p, j, k) - (j == k)) for j in range(11) for k in range(11))
        yield f"biorthogonality[{tag}]", worst == 0, float(worst)
        bad = [n for n in range(11) if biorth.recurrence_residual(p, n, a_offset=offset) != [0]]
        yield f"recurrence[{tag}]", not bad, float(len(bad))
        worst = max(abs(biorth.a_coeff(p, k, n) - biorth.b_coeff(p, k, n - k))
                    for n in range(11) for k in range(min(M, n) + 1))
        yield f"duality[{tag}]", worst == 0, float(worst)
        bad = [n for n in range(1, 11) if biorth.dual_recurrence_residual(p, n) != [0]]
        yield f"dual-recurrence[{tag}]", not bad, float(len(bad))
        lead = [biorth.a_leading_order(p, k) for k in range(M + 1)]
        ok = all(d == (k + 1) * M and c == math.comb(M + 1, k + 1)
                 for k, (d, c) in enumerate(lead))
        yield f"leading-order[{tag}]", ok, 0.0 if ok else 1.0
        bad = [n for n in range(11) if not biorth.mop_orthogonality_check(p, n).passed]
        yield f"mop-orthogonality[{tag}]", not bad, float(len(bad))
    if cfg.quick:
        return
    for M, nu in [(1, [1]), (2, [0, 1]), (3, [0, 1, 2])]:
        p = ParamSet(M, nu)
        for n in (1, 5, 10):
            kc = kernel.KernelConfig(p, n)
            for x, y in ((0.5, 2.0), (2.0, 0.5), (1.0, 1.0)):
                ref = kernel.kn_sum(kc, x, y)
                d1 = abs(kernel.kn_u_integral(kc, x, y).value - ref) / (1 + abs(ref))
                d2 = abs(kernel.kn_contour(kc, x, y).value - ref) / (1 + abs(ref))
                yield f"kernel-u[M={M},nu={nu},n={n},x={x},y={y}]", d1 <= 1e-8, d1
                yield f"kernel-contour[M={M},nu={nu},n={n},x={x},y={y}]", d2 <= 1e-6, d2
        h = kernel.HardEdgeConfig(p)
        for x, y in ((0.5, 2.0), (1.0, 5.0)):
            u = kernel.hard_edge_u(h, x, y).value
            c = kernel.hard_edge_contour(h, x, y).value
            i = kernel.hard_edge_integrable(h, x, y).value
            dev = max(abs(c - u), abs(i - u)) / abs(u)
            yield f"hard-edge[M={M},nu={nu},x={x},y={y}]", dev <= 1e-7, dev


def cmd_verify(cfg: JobConfig) -> int:
    checks = [{"name": name, "status": "pass" if ok else "fail", "residual": float(res)}
              for name, ok, res in _verify_checks(cfg)]
    passed = all(c["status"] == "pass" for c in checks)
    payload = {"passed": passed, "checks": checks}
    if cfg.format == "json":
        _write(cfg, _json_text(cfg, payload))
    else:
        rows = [{"x": "", "y": "", "value": c["residual"], "err": 0, "repr": c["name"] + ":" + c["status"]}
                for c in checks]
        _write(cfg, _csv_text(rows))
    return EXIT_OK if passed else EXIT_FAIL


HANDLERS = {
    "poly": cmd_poly,
    "recurrence": cmd_recurrence,
    "kernel": cmd_kernel,
    "hard-edge": cmd_hard_edge,
    "sample": cmd_sample,
    "verify": cmd_verify,
}


def _report_error(exc: Exception, code: str):
    sys.stderr.write(json.dumps({"error": {"code": code, "message": str(exc)}}) + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = config_from_args(args)
        if args.dump_config:
            sys.stdout.write(json.dumps(cfg.to_json(), indent=2) + "\n")
            return EXIT_OK
        if cfg.command == "sample":
            _sample_spec(cfg)
    except (ParameterError, GinprodError) as exc:
        _report_error(exc, getattr(exc, "code", "config.invalid"))
        return EXIT_CONFIG
    try:
        return HANDLERS[cfg.command](cfg)
    except ParameterError as exc:
        _report_error(exc, exc.code)
        return EXIT_CONFIG
    except (GinprodError, ArithmeticError) as exc:
        _report_error(exc, getattr(exc, "code", "numeric.failure"))
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
