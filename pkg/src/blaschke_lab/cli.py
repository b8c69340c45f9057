"""Command-line entry point: ``blaschke-lab <command> ...``.

Exit codes: 0 success, 1 resource cap, 2 invalid input, 3 invalid
certificate or violated bound, 4 search or fit failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .approx import (
    ApproxCertificate,
    ApproxRequest,
    TargetFunction,
    run_pipeline,
    universal_partial_sums_demo,
    validate_certificate,
)
from .asymptotics import NormSweep, dyadic_ks, fit_decay_exponent, norm_sweep, predicted_exponent, vdc_bound
from .blaschke import BlaschkeProduct, phase_census
from .coefficients import DEFAULT_MAX_SIZE, coeffs_of_power, sup_coeff
from .errors import BlaschkeLabError, CertificateInvalidError, ValidationError
from .orlicz import orlicz_from_config

log = logging.getLogger("blaschke_lab")

VISIBLE_COMMANDS = ("coeffs", "sweep", "rate", "bound", "approx", "universal")


@dataclass(frozen=True)
class RunConfig:
    tol: float = 1e-10
    rel_tol: float = 1e-10
    tol_xi: float = 1e-10
    tol_mult: float = 1e-6
    max_size: int = DEFAULT_MAX_SIZE
    deg_cap: int | None = None
    n_cap: int | None = None
    fmt: str | None = None
    output: str | None = None
    seed: int = 0

    def __post_init__(self):
        for name in ("tol", "rel_tol", "tol_xi", "tol_mult"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"--{name.replace('_', '-')} must be positive")
        for name in ("max_size", "deg_cap", "n_cap"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ValidationError(f"--{name.replace('_', '-')} must be a positive integer")

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        return cls(
            tol=args.tol,
            rel_tol=args.rel_tol,
            tol_xi=args.tol_xi,
            tol_mult=args.tol_mult,
            max_size=args.max_size,
            deg_cap=args.deg_cap,
            n_cap=args.n_cap,
            fmt=args.format,
            output=args.output,
            seed=args.seed,
        )


# ---------------------------------------------------------------------------
# Parsing helpers
# ---------------------------------------------------------------------------


def parse_zeros(text: str) -> BlaschkeProduct:
    """``0,0.5,0.3+0.2j`` -> BlaschkeProduct."""
    zs = []
    for tok in text.split(","):
        tok = tok.strip().replace(" ", "")
        if not tok:
            continue
        try:
            zs.append(complex(tok))
        except ValueError:
            raise ValidationError(f"cannot read zero {tok!r}") from None
    return BlaschkeProduct.from_zeros(zs)


def parse_ks(text: str) -> list[int]:
    """``16:8192:dyadic``, ``lo:hi:step`` or a comma list."""
    parts = text.split(":")
    try:
        if len(parts) == 3 and parts[2] == "dyadic":
            ks = dyadic_ks(int(parts[0]), int(parts[1]))
        elif len(parts) == 3:
            ks = list(range(int(parts[0]), int(parts[1]) + 1, int(parts[2])))
        else:
            ks = [int(k) for k in text.split(",") if k.strip()]
    except ValueError:
        raise ValidationError(f"cannot read k range {text!r}") from None
    if not ks or min(ks) < 1:
        raise ValidationError(f"k range {text!r} is empty or has non-positive entries")
    return ks


def parse_floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValidationError(f"cannot read number list {text!r}") from None


def _read_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise ValidationError(f"cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path} is not valid JSON: {e}") from None


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.output:
        Path(cfg.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _zeros_label(B: BlaschkeProduct) -> str:
    return ",".join(repr(z.real) if z.imag == 0 else repr(z) for z in B.zeros)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_coeffs(args, cfg: RunConfig) -> int:
    B = parse_zeros(args.zeros)
    s = coeffs_of_power(B, args.k, cfg.tol, cfg.max_size)
    if (cfg.fmt or "csv") == "json":
        _emit(cfg, _dump({"zeros": B.to_json(), "k": args.k, "tol": cfg.tol, **s.to_json()}))
    else:
        header = {"zeros": _zeros_label(B), "k": args.k, "tol": cfg.tol,
                  "parseval_defect": s.aliasing_bound, "grid": len(s)}
        _emit(cfg, s.to_csv(header))
    return 0


def cmd_sweep(args, cfg: RunConfig) -> int:
    B = parse_zeros(args.zeros)
    kind = args.orlicz
    sweep = norm_sweep(B, kind, parse_ks(args.ks), cfg.tol, cfg.rel_tol, cfg.max_size)
    if (cfg.fmt or "csv") == "json":
        _emit(cfg, _dump({"zeros": B.to_json(), "norm": sweep.norm_kind, "ks": list(sweep.ks),
                          "values": list(sweep.values), "aliasing_bounds": list(sweep.aliasing_bounds)}))
    else:
        _emit(cfg, f"# zeros: {_zeros_label(B)}\n# norm: {sweep.norm_kind}\n" + sweep.to_csv())
    return 0


def _read_sweep(path: str) -> tuple[NormSweep, dict]:
    try:
        text = Path(path).read_text(encoding="utf-8") if path != "-" else sys.stdin.read()
    except OSError as e:
        raise ValidationError(f"cannot read {path}: {e.strerror}") from None
    meta = {}
    for line in text.splitlines():
        if line.startswith("#") and ":" in line:
            key, _, val = line[1:].partition(":")
            meta[key.strip()] = val.strip()
    try:
        return NormSweep.from_csv(text, meta.get("norm", "unknown")), meta
    except (ValueError, IndexError) as e:
        raise ValidationError(f"{path} is not a sweep CSV: {e}") from None


def cmd_rate(args, cfg: RunConfig) -> int:
    sweep, meta = _read_sweep(args.sweep)
    slope, stderr = fit_decay_exponent(sweep, args.kmin)
    report = {"norm": sweep.norm_kind, "k_min": args.kmin, "slope": slope, "stderr": stderr,
              "points": sum(k >= args.kmin for k in sweep.ks)}
    if "zeros" in meta and sweep.norm_kind == "sup":
        report["predicted_exponent"] = predicted_exponent(
            parse_zeros(meta["zeros"]), tol_xi=cfg.tol_xi, tol_mult=cfg.tol_mult
        )
    if (cfg.fmt or "json") == "csv":
        _emit(cfg, "key,value\n" + "".join(f"{k},{v}\n" for k, v in report.items()))
    else:
        _emit(cfg, _dump(report))
    return 0


def cmd_bound(args, cfg: RunConfig) -> int:
    B = parse_zeros(args.zeros)
    grid = parse_floats(args.eps_grid) if args.eps_grid else None
    census = phase_census(B, tol_xi=cfg.tol_xi, tol_mult=cfg.tol_mult)
    vb = vdc_bound(B, args.k, grid, census=census)
    emp = sup_coeff(coeffs_of_power(B, args.k, cfg.tol, cfg.max_size))
    dominated = emp <= vb.best + 1e-9
    _emit(cfg, _dump({**vb.to_json(), "empirical_sup": emp, "dominated": dominated}))
    if not dominated:
        log.error("empirical sup %.6e exceeds the bound %.6e", emp, vb.best)
        return CertificateInvalidError.exit_code
    return 0


def _request_from(obj: dict, cfg: RunConfig) -> ApproxRequest:
    obj = dict(obj)
    if cfg.deg_cap is not None:
        obj["deg_cap"] = cfg.deg_cap
    if cfg.n_cap is not None:
        obj["n_cap"] = cfg.n_cap
    obj.setdefault("seed", cfg.seed)
    try:
        return ApproxRequest.from_json(obj)
    except (KeyError, TypeError) as e:
        raise ValidationError(f"malformed request: {e}") from None


def cmd_approx(args, cfg: RunConfig) -> int:
    req = _request_from(_read_json(args.request), cfg)
    cert = run_pipeline(req)
    out = cert.to_json()
    out["request"] = req.to_json()
    _emit(cfg, _dump(out))
    return 0


def cmd_universal(args, cfg: RunConfig) -> int:
    obj = _read_json(args.request)
    try:
        demo = universal_partial_sums_demo(
            [TargetFunction.from_config(t) for t in obj["targets"]],
            obj["eps_schedule"],
            orlicz_from_config(obj["orlicz"]),
            BlaschkeProduct.from_zeros(obj["blaschke"]["zeros"]) if "blaschke" in obj else None,
            cfg.deg_cap or obj.get("deg_cap", 512),
            cfg.n_cap or obj.get("n_cap", 4096),
            obj.get("seed", cfg.seed),
        )
    except (KeyError, TypeError) as e:
        raise ValidationError(f"malformed universal request: {e}") from None
    _emit(cfg, _dump({**demo.to_json(), "request": obj}))
    return 0


def cmd_validate(args, cfg: RunConfig) -> int:
    obj = _read_json(args.certificate)
    if "request" not in obj:
        raise ValidationError("certificate carries no request; cannot rebuild the target")
    try:
        cert = ApproxCertificate.from_json(obj)
    except (KeyError, TypeError) as e:
        raise ValidationError(f"malformed certificate: {e}") from None
    target = TargetFunction.from_config(obj["request"]["target"])
    phi = orlicz_from_config(obj["request"]["orlicz"])
    seed = args.validator_seed if args.validator_seed is not None else cert.seed
    rep = validate_certificate(cert, target, phi, args.points, seed)
    _emit(cfg, _dump({**rep.__dict__, "ok": rep.ok}))
    return 0 if rep.ok else CertificateInvalidError.exit_code


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("run configuration")
    g.add_argument("--tol", type=float, default=1e-10, help="coefficient aliasing tolerance")
    g.add_argument("--rel-tol", type=float, default=1e-10, help="Luxemburg bisection tolerance")
    g.add_argument("--tol-xi", type=float, default=1e-10, help="phase census root tolerance")
    g.add_argument("--tol-mult", type=float, default=1e-6, help="phase census multiplicity threshold")
    g.add_argument("--max-size", type=int, default=DEFAULT_MAX_SIZE, help="FFT grid cap")
    g.add_argument("--deg-cap", type=int, default=None)
    g.add_argument("--n-cap", type=int, default=None)
    g.add_argument("--format", choices=("csv", "json"), default=None)
    g.add_argument("-o", "--output", default=None, help="output path (default: stdout)")
    g.add_argument("--seed", type=int, default=0, help="validator seed")
    g.add_argument("-v", "--verbose", action="count", default=0)

    p = argparse.ArgumentParser(prog="blaschke-lab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, metavar="{" + ",".join(VISIBLE_COMMANDS) + "}")

    c = sub.add_parser("coeffs", parents=[common], help="Taylor coefficients of B^k")
    c.add_argument("--zeros", required=True)
    c.add_argument("--k", type=int, required=True)
    c.set_defaults(func=cmd_coeffs)

    c = sub.add_parser("sweep", parents=[common], help="norms of B^k over a range of k")
    c.add_argument("--zeros", required=True)
    c.add_argument("--orlicz", default="sup", help="sup, l1, l2, power:P or quadlog:A")
    c.add_argument("--ks", default="16:8192:dyadic")
    c.set_defaults(func=cmd_sweep)

    c = sub.add_parser("rate", parents=[common], help="log-log slope of a sweep CSV")
    c.add_argument("--sweep", default="-", help="sweep CSV path ('-' for stdin)")
    c.add_argument("--kmin", type=int, default=1)
    c.set_defaults(func=cmd_rate)

    c = sub.add_parser("bound", parents=[common], help="van der Corput coefficient bound")
    c.add_argument("--zeros", required=True)
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--eps-grid", default=None, help="comma-separated eps values")
    c.set_defaults(func=cmd_bound)

    c = sub.add_parser("approx", parents=[common], help="run the approximation pipeline")
    c.add_argument("--request", required=True)
    c.set_defaults(func=cmd_approx)

    c = sub.add_parser("universal", parents=[common], help="chained partial-sum demo")
    c.add_argument("--request", required=True)
    c.set_defaults(func=cmd_universal)

    c = sub.add_parser("validate", parents=[common])
    c.add_argument("--certificate", required=True)
    c.add_argument("--points", type=int, default=100_000)
    c.add_argument("--validator-seed", type=int, default=None)
    c.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        with np.errstate(all="ignore"):
            return args.func(args, RunConfig.from_args(args))
    except BlaschkeLabError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
