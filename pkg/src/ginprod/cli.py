"""Experiment driver: scatter / exponents / convergence / verify.

Output is data (CSV with a fixed header, or a single JSON document), a
deterministic function of (seed, config). CSV runs write a .meta.json
sidecar with the config echo and the theory block; JSON runs embed the
same information in the document. Exit codes: 0 ok, 1 usage, 2
verification failure, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import engine, permanent, specfun, theory
from .ensemble import DimensionProfile, DysonIndex, as_dyson
from .errors import GinprodError
from .product import ProductSpec

_FMT = "%.17g"


class GinprodUsage(Exception):
    """Config is syntactically fine but semantically unusable."""


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    beta: int = 2
    n: int = 1
    nu: Union[int, tuple[int, ...]] = 0
    t: int = 1
    reps: int = 1
    seed: int = 0
    precision: Union[int, str] = "auto"
    out: Optional[str] = None
    format: str = "csv"

    def profile(self) -> DimensionProfile:
        nus = (self.nu,) * self.t if isinstance(self.nu, int) else tuple(self.nu)
        return DimensionProfile(self.n, nus)

    def echo(self) -> dict:
        nu = self.nu if isinstance(self.nu, int) else list(self.nu)
        return {
            "subcommand": self.subcommand,
            "beta": int(self.beta),
            "dim": self.n,
            "nu": nu,
            "time": self.t,
            "reps": self.reps,
            "seed": self.seed,
            "precision": self.precision,
            "format": self.format,
        }


def _parse_nu(text: str):
    parts = text.split(",")
    if len(parts) == 1:
        return int(parts[0])
    return tuple(int(p) for p in parts)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ginprod",
        description="Products of independent Ginibre matrices: finite-time "
        "Lyapunov/stability exponents, eigenvalue scatter data, and "
        "closed-form verification suites.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--beta", type=int, choices=(1, 2, 4), default=2)
    common.add_argument("--dim", type=int, default=1, help="smallest dimension N")
    common.add_argument(
        "--nu",
        type=_parse_nu,
        default=0,
        help="rectangularity offsets: one int (constant) or t comma-separated",
    )
    common.add_argument("--time", type=int, default=1, help="number of factors t")
    common.add_argument("--reps", type=int, default=1)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument(
        "--precision", default="auto", help="working bits for the eigenvalue route"
    )
    common.add_argument("--out", default=None, help="output path (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    sub.add_parser(
        "scatter",
        parents=[common],
        help="per-realization rescaled eigenvalues (|z|^{1/t}, theta)",
    )
    sub.add_parser(
        "exponents",
        parents=[common],
        help="per-realization exponents lambda_n, gamma_n and phases",
    )
    sub.add_parser(
        "convergence",
        parents=[common],
        help="single-realization exponent history at every step",
    )
    sub.add_parser(
        "verify",
        parents=[common],
        help="closed-form identity suites (Meijer G, permanents, coefficients)",
    )
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    precision = args.precision
    if precision != "auto":
        precision = int(precision)
    return RunConfig(
        subcommand=args.subcommand,
        beta=args.beta,
        n=args.dim,
        nu=args.nu,
        t=args.time,
        reps=args.reps,
        seed=args.seed,
        precision=precision,
        out=args.out,
        format=args.format,
    )


# ---------------------------------------------------------------------------
# Output plumbing
# ---------------------------------------------------------------------------


def _format_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return _FMT % float(v)


def _write_text(path: Optional[str], text: str):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _emit(config: RunConfig, header: list[str], rows: list[tuple], meta: dict):
    """Write rows per config.format; CSV gets a .meta.json sidecar."""
    doc_meta = {"config": config.echo(), **meta}
    if config.format == "json":
        rows_obj = [dict(zip(header, r)) for r in rows]
        doc = {**doc_meta, "columns": header, "rows": rows_obj}
        _write_text(config.out, json.dumps(doc, sort_keys=True, indent=1) + "\n")
        return
    lines = [",".join(header)]
    lines.extend(",".join(_format_cell(v) for v in r) for r in rows)
    _write_text(config.out, "\n".join(lines) + "\n")
    if config.out is not None:
        with open(config.out + ".meta.json", "w") as fh:
            json.dump(doc_meta, fh, sort_keys=True, indent=1)
            fh.write("\n")


def _spec(config: RunConfig) -> ProductSpec:
    return ProductSpec(
        beta=config.beta,
        profile=config.profile(),
        reps=config.reps,
        seed=config.seed,
        precision_bits=config.precision,
    )


def _workers() -> int:
    return max(1, int(os.environ.get("GINPROD_WORKERS", "1")))


def _theory_block(beta, profile) -> dict:
    pred = theory.predict(beta, profile)
    return {
        "mu": list(pred.mu),
        "sigma": [math.sqrt(v) for v in pred.sigma2],
        "ring_radii": [math.exp(m) for m in pred.mu],
    }


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_scatter(config: RunConfig) -> int:
    profile = config.profile()
    if profile.nus[-1] != 0:
        raise GinprodUsage("scatter needs a square product (nu must end at 0)")
    header = ["rep", "n", "modulus_rescaled", "theta"]
    meta = {"theory": _theory_block(config.beta, profile)}
    if config.reps == 0:
        _emit(config, header, [], meta)
        return 0
    result = engine.run_reps(_spec(config), want_eigen=True, workers=_workers())
    rows = []
    for rep, s in enumerate(result.samples):
        # ascending rank: row n pairs with the theory mu_n
        for n, (lam, th) in enumerate(zip(s.lam[::-1], s.theta[::-1]), start=1):
            rows.append((rep, n, math.exp(lam), th))
    meta["precision_bits"] = result.bits
    meta["retried_reps"] = list(result.retried)
    _emit(config, header, rows, meta)
    return 0


def cmd_exponents(config: RunConfig) -> int:
    profile = config.profile()
    header = ["rep", "n", "lambda", "gamma", "theta"]
    meta = {"theory": _theory_block(config.beta, profile)}
    if config.reps == 0:
        _emit(config, header, [], meta)
        return 0
    result = engine.run_reps(_spec(config), workers=_workers())
    rows = []
    for rep, s in enumerate(result.samples):
        gam = s.gamma[::-1]
        lam = s.lam[::-1] if s.lam is not None else (None,) * len(gam)
        th = s.theta[::-1] if s.theta is not None else (None,) * len(gam)
        for n in range(len(gam)):
            rows.append((rep, n + 1, lam[n], gam[n], th[n]))
    meta["precision_bits"] = result.bits
    meta["retried_reps"] = list(result.retried)
    _emit(config, header, rows, meta)
    return 0


def cmd_convergence(config: RunConfig) -> int:
    profile = config.profile()
    # reps=1 semantics: the trace follows the seed's rep-0 realization
    spec = ProductSpec(
        beta=config.beta, profile=profile, reps=1,
        seed=config.seed, precision_bits=config.precision,
    )
    trace = engine.convergence_trace(spec)
    header = ["step", "n", "lambda", "gamma"]
    rows = []
    for pt in trace:
        gam = pt.gamma[::-1]
        lam = pt.lam[::-1] if pt.lam is not None else (None,) * len(gam)
        for n in range(len(gam)):
            rows.append((pt.step, n + 1, lam[n], gam[n]))
    band = []
    for pt in trace:
        pred = theory.predict(config.beta, profile, t=pt.step)
        band.append(
            {
                "step": pt.step,
                "mu": list(pred.mu),
                "sigma": [math.sqrt(v) for v in pred.sigma2],
            }
        )
    meta = {"theory": _theory_block(config.beta, profile), "band": band}
    _emit(config, header, rows, meta)
    return 0


def _verify_checks(config: RunConfig):
    rng = np.random.default_rng(config.seed)
    checks = []

    def record(name: str, passed: bool, detail: str):
        checks.append({"name": name, "passed": bool(passed), "detail": detail})

    # Meijer G moment identity against gamma products
    for b in ((0.0,), (0.0, 0.0), (0.5, 1.0, 2.0)):
        params = specfun.MeijerParams(b)
        for s in (0.5, 1.0, 2.0):
            lhs, rhs = specfun.check_moment_identity(params, s)
            err = abs(lhs - rhs) / max(1.0, abs(rhs))
            record(
                f"meijer-moment b={b} s={s}", err <= 1e-8, f"lhs={lhs!r} rhs={rhs!r}"
            )
    # closed form at t=1: G(-;0;z) = exp(-z)
    for z in (0.25, 1.0, 4.0):
        got = specfun.meijer_g(specfun.MeijerParams((0.0,)), z)
        err = abs(got - math.exp(-z))
        record(f"meijer-exp z={z}", err <= 1e-10, f"got={got!r}")
    # power absorption: G(-; b+s; z) = z^s G(-; b; z)
    for b, s, z in (((0.0, 1.0), 0.5, 0.7), ((0.5, 0.5), 1.0, 2.0)):
        lhs = specfun.meijer_g(specfun.MeijerParams(tuple(x + s for x in b)), z)
        rhs = z**s * specfun.meijer_g(specfun.MeijerParams(b), z)
        err = abs(lhs - rhs) / max(1e-300, abs(rhs))
        record(f"meijer-shift b={b} s={s} z={z}", err <= 1e-8, f"lhs={lhs!r} rhs={rhs!r}")
    # marginal densities integrate to one
    for beta in (1, 2, 4):
        f = theory.finite_t_marginal(beta, DimensionProfile.square(2, 3), 1)
        total = f.integral()
        record(f"marginal-mass beta={beta}", abs(total - 1.0) <= 1e-6, f"mass={total!r}")
    # permanents: Ryser against the naive expansion
    ok, worst = True, 0.0
    for n in range(1, 8):
        m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        a, b = permanent.permanent_ryser(m), permanent.permanent_naive(m)
        err = abs(a - b) / max(1.0, abs(b))
        worst = max(worst, err)
        ok = ok and err <= 1e-10
    record("permanent-ryser-vs-naive n<=7", ok, f"worst rel err {worst:.3e}")
    # decoupling coefficients: D_kk = 1 exactly, off-diagonal below 1
    ok = True
    for t in (1, 5, 20):
        prof = DimensionProfile.square(4, t)
        for k in range(1, 5):
            ok = ok and theory.decoupling_coefficient(2, prof, k, k) == 1.0
    record("decoupling-diagonal-exact", ok, "D_kk over k<=4, t in {1,5,20}")
    d12 = theory.decoupling_coefficient(2, DimensionProfile.square(2, 6), 1, 2)
    record("decoupling-offdiag-decay", d12 < 1.0, f"D_12(t=6)={d12!r}")
    # Vandermonde interaction vs the determinant it squares
    ok, worst = True, 0.0
    for n in range(2, 7):
        z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v = np.vander(z, increasing=True)
        want = 2.0 * math.log(abs(np.linalg.det(v)))
        got = permanent.vandermonde_interaction(2, z)
        err = abs(got - want) / max(1.0, abs(want))
        worst = max(worst, err)
        ok = ok and err <= 1e-10
    record("vandermonde-det-identity n<=6", ok, f"worst rel err {worst:.3e}")
    return checks


def cmd_verify(config: RunConfig) -> int:
    checks = _verify_checks(config)
    passed = all(c["passed"] for c in checks)
    doc = {"config": config.echo(), "passed": passed, "checks": checks}
    _write_text(config.out, json.dumps(doc, sort_keys=True, indent=1) + "\n")
    return 0 if passed else 2


_COMMANDS = {
    "scatter": cmd_scatter,
    "exponents": cmd_exponents,
    "convergence": cmd_convergence,
    "verify": cmd_verify,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse uses 2 for usage errors; 1 is the usage exit here
        return 0 if e.code == 0 else 1
    try:
        config = _config_from_args(args)
        profile = config.profile()
        as_dyson(config.beta)
        if config.reps < 0:
            raise GinprodUsage(f"reps must be >= 0, got {config.reps}")
        if config.subcommand != "verify" and profile.t != config.t:
            raise GinprodUsage("nu list length must equal --time")
    except (GinprodUsage, GinprodError, ValueError) as e:
        print(f"ginprod: {e}", file=sys.stderr)
        return 1
    try:
        return _COMMANDS[config.subcommand](config)
    except GinprodUsage as e:
        print(f"ginprod: {e}", file=sys.stderr)
        return 1
    except GinprodError as e:
        print(f"ginprod: numerical failure: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
