"""``psumlab <norm|summing|tensor|exp> <target> [--key value ...]``"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import experiments as ex
from .operators import LinearMap, op_norm
from .report import ExperimentReport, dumps, table_csv, table_svg
from .spaces import GridFunction, Vector, grid_lp_norm, grid_norm, lorentz21_norm, lp_norm, vector_norm
from .summing import check_pietsch, gamma2_norm, pi2, pi_pq_lower_search
from .tensor import Tensor2, eps_norm, proj_result, z_norm_bounds

EXPERIMENTS = dict(ex.EXPERIMENTS)

DEFAULTS = {"seed": 0, "budget": 10000, "grid": 4096, "jobs": None, "format": "json",
            "lambda_mode": "paper_weights", "shift_mode": "uniform_shifts", "s": 2.0, "q": None,
            "N": None, "n": None, "p": None, "out": None, "plot": None, "input": None}

NORM_KINDS = ("lorentz21", "lp", "grid_lp", "vector", "op")
SUMMING_KINDS = ("pi2", "pi_pq", "gamma2")
TENSOR_KINDS = ("eps", "proj", "z")


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="psumlab", description=__doc__.strip("`"))
    ap.add_argument("command", choices=("norm", "summing", "tensor", "exp"))
    ap.add_argument("target")
    ap.add_argument("--N", type=int)
    ap.add_argument("--n", type=int)
    ap.add_argument("--p", type=_exponent)
    ap.add_argument("--q", type=_exponent)
    ap.add_argument("--s", type=float)
    ap.add_argument("--grid", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--budget", type=int)
    ap.add_argument("--jobs", type=int)
    ap.add_argument("--out")
    ap.add_argument("--plot")
    ap.add_argument("--config")
    ap.add_argument("--format", choices=("json", "csv"))
    ap.add_argument("--input", help="JSON file with the object to measure ('-' for stdin)")
    ap.add_argument("--lambda-mode", dest="lambda_mode", choices=("ones", "paper_weights"))
    ap.add_argument("--shift-mode", dest="shift_mode", choices=("paper_shifts", "uniform_shifts"))
    return ap


def _exponent(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "infinity"):
        return math.inf
    if "/" in t:
        a, b = t.split("/")
        return float(a) / float(b)
    return float(t)


def read_config(path: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, val = (s.strip() for s in line.split("=", 1))
            key = key.lstrip("-").replace("-", "_")
            if key not in DEFAULTS:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = val
    return out


_CASTS = {"N": int, "n": int, "grid": int, "seed": int, "budget": int, "jobs": int,
          "p": _exponent, "q": _exponent, "s": float}


def resolve(args: argparse.Namespace) -> tuple[dict, set]:
    """Merge defaults < config file < explicit flags; also report which keys were set."""
    cfg = dict(DEFAULTS)
    given = set()
    if args.config:
        for k, v in read_config(args.config).items():
            try:
                cfg[k] = _CASTS.get(k, str)(v)
            except ValueError as e:
                raise UsageError(f"bad value for {k}: {v!r}") from e
            given.add(k)
    for k in DEFAULTS:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
            given.add(k)
    if cfg["jobs"] is None:
        cfg["jobs"] = os.cpu_count() or 1
    return cfg, given


# ------------------------------------------------------------------ experiments


def run_experiment(target: str, cfg: dict, given: set) -> ExperimentReport:
    if target not in EXPERIMENTS:
        raise UsageError(f"unknown experiment {target!r}; choose from {sorted(EXPERIMENTS)}")
    fn = EXPERIMENTS[target]
    jobs = cfg["jobs"]
    if fn is ex.run_thm8:
        return fn(N=cfg["N"] or 8, budget=cfg["budget"], seed=cfg["seed"], jobs=jobs)
    if fn is ex.run_thm10:
        kw = {"m": cfg["grid"], "lambda_mode": cfg["lambda_mode"], "seed": cfg["seed"], "s": cfg["s"]}
        if cfg["p"] is not None:
            kw["p"] = cfg["p"]
        if cfg["N"] is not None:
            kw["N"] = cfg["N"]
        return fn(ex.Thm10Config(**kw), jobs=jobs)
    if fn is ex.run_thm11:
        c = ex.Thm11Config.from_grid(cfg["N"] or 3, cfg["grid"], seed=cfg["seed"],
                                     budget=min(cfg["budget"], 200))
        return fn(c, jobs=jobs)
    if fn is ex.run_thm12:
        n = cfg["n"] or 16
        m = cfg["grid"] if "grid" in given else None
        return fn(ex.Thm12Config(n=n, m=m, shift_mode=cfg["shift_mode"], seed=cfg["seed"]), jobs=jobs)
    # anything else registered by a caller takes the merged config
    return fn(cfg)


# ------------------------------------------------------------------ single computations


def _load_input(path):
    if path is None:
        raise UsageError("this command needs --input (a JSON file, or '-' for stdin)")
    text = sys.stdin.read() if path == "-" else open(path).read()
    return json.loads(text)


def _samples(obj):
    if isinstance(obj, dict):
        return GridFunction.from_dict(obj).samples if "samples" in obj else Vector.from_dict(obj).coords
    return np.asarray(obj, dtype=float)


def run_norm(target, cfg) -> dict:
    obj = _load_input(cfg["input"])
    if target == "lorentz21":
        return {"norm": "lorentz21", "value": lorentz21_norm(_samples(obj))}
    if target == "lp":
        p = cfg["p"] if cfg["p"] is not None else 2.0
        return {"norm": "lp", "p": p, "value": lp_norm(_samples(obj), p)}
    if target == "grid_lp":
        p = cfg["p"] if cfg["p"] is not None else 2.0
        return {"norm": "grid_lp", "p": p, "value": grid_lp_norm(_samples(obj), p)}
    if target == "vector":
        if not isinstance(obj, dict):
            raise UsageError("norm vector needs a serialized Vector or GridFunction")
        value = grid_norm(GridFunction.from_dict(obj)) if "samples" in obj else vector_norm(Vector.from_dict(obj))
        return {"norm": "vector", "value": value}
    if target == "op":
        res = op_norm(LinearMap.from_dict(obj), seed=cfg["seed"])
        return {"norm": "operator", **res.to_dict()}
    raise AssertionError(target)


def run_summing(target, cfg) -> tuple[dict, list]:
    T = LinearMap.from_dict(_load_input(cfg["input"]))
    failed = []
    if target == "pi2":
        est = pi2(T, seed=cfg["seed"])
        if est.upper_certificate is not None and not check_pietsch(T, est.upper_certificate, rtol=1e-6):
            failed.append("pietsch_certificate")
        return est.to_dict(), failed
    if target == "pi_pq":
        p = cfg["p"] if cfg["p"] is not None else 2.0
        q = cfg["q"] if cfg["q"] is not None else p
        return pi_pq_lower_search(T, p, q, cfg["budget"], cfg["seed"]).to_dict(), failed
    if target == "gamma2":
        return gamma2_norm(T, budget=min(cfg["budget"], 1000), seed=cfg["seed"]).to_dict(), failed
    raise AssertionError(target)


def run_tensor(target, cfg) -> dict:
    u = Tensor2.from_dict(_load_input(cfg["input"]))
    if target == "eps":
        return {"norm": "injective", "value": eps_norm(u)}
    if target == "proj":
        r = proj_result(u)
        return {"norm": "projective", "value": r.value, "exact": r.exact}
    if target == "z":
        return z_norm_bounds(u, min(cfg["budget"], 1000), cfg["seed"]).to_dict()
    raise AssertionError(target)


# ------------------------------------------------------------------ entry point


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:  # argparse reports usage errors with status 2
        return int(e.code or 0)
    try:
        cfg, given = resolve(args)
        failed: list = []
        if args.command == "exp":
            rep = run_experiment(args.target, cfg, given)
            if cfg["format"] == "csv":
                if not rep.table:
                    raise UsageError(f"experiment {args.target} has no table")
                text = table_csv(rep.table)
            else:
                text = rep.to_json() + "\n"
            if cfg["plot"] and rep.table:
                with open(cfg["plot"], "w") as fh:
                    fh.write(table_svg(rep.table))
            failed = rep.failed_checks
        else:
            if cfg["format"] == "csv":
                raise UsageError("csv output is only available for experiment tables")
            kinds = {"norm": NORM_KINDS, "summing": SUMMING_KINDS, "tensor": TENSOR_KINDS}[args.command]
            if args.target not in kinds:
                raise UsageError(f"unknown {args.command} target {args.target!r}; choose from {list(kinds)}")
            if args.command == "norm":
                payload = run_norm(args.target, cfg)
            elif args.command == "summing":
                payload, failed = run_summing(args.target, cfg)
            else:
                payload = run_tensor(args.target, cfg)
            text = dumps(payload) + "\n"
        _emit(text, cfg["out"])
    except UsageError as e:
        ap.print_usage(sys.stderr)
        print(f"psumlab: error: {e}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, TypeError, OSError) as e:
        print(f"psumlab: error: {e}", file=sys.stderr)
        return 2
    if failed:
        for name in failed:
            print(f"psumlab: check failed: {name}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
