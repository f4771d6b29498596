"""Command-line front end.

Usage examples::

    weakamp amplify --theta 1e-6 --delta 1e-3
    weakamp sweep --vary delta --start 1e-1 --stop 1e-4 --points 4 --log --theta 1e-6
    weakamp simulate --theta 1e-5 --delta 1e-3 --n-input 100000000 --reps 100 --seed 7
    weakamp noise --n-min 1 --n-max 1e6 --points 13 --t1 1 --t2 1
    weakamp baseline --theta 1e-3 --chi -0.885 --format json

Every output echoes the full configuration. CSV files start with one
``# meta: {...}`` line, then a header row; JSON is a single object with
``meta`` and ``records``. Errors go to stderr prefixed ``weakamp: error:``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Optional

import numpy as np

from . import __version__
from .detection import RNG_SPEC, noise_budget_sweep, simulate_repetitions
from .errors import WeakAmpError
from .optics import BeamSplitterParams
from .protocol import (
    PostSelection,
    PreSelection,
    ProtocolConfig,
    run_ligo_pipeline,
    wva_pointer_expectations,
)

PROG = "weakamp"
_S2 = 1 / math.sqrt(2)


class _PartialFailure(Exception):
    """Output was produced but part of the computation failed."""


def _clean(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    return v


def _fmt_csv(v) -> str:
    v = _clean(v)
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def render(meta: dict, records: list[dict], fmt: str) -> str:
    if fmt == "json":
        doc = {"meta": meta, "records": [{k: _clean(v) for k, v in r.items()} for r in records]}
        return json.dumps(doc, indent=2, allow_nan=False) + "\n"
    columns: list[str] = []
    for r in records:
        columns.extend(k for k in r if k not in columns)
    buf = io.StringIO()
    buf.write("# meta: " + json.dumps(meta, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in records:
        w.writerow([_fmt_csv(r.get(c)) for c in columns])
    return buf.getvalue()


# --- argument handling ---------------------------------------------------

def _pre(args) -> PreSelection:
    if (args.r1 is None) != (args.t1 is None):
        raise WeakAmpError("--r1 and --t1 must be given together")
    if args.r1 is None:
        return PreSelection.balanced()
    return PreSelection(args.r1, args.t1)


def _post(args) -> Optional[PostSelection]:
    if (args.r2 is None) != (args.t2 is None):
        raise WeakAmpError("--r2 and --t2 must be given together")
    given = [x is not None for x in (args.delta, args.chi, args.r2)]
    if sum(given) > 1:
        raise WeakAmpError("choose exactly one of --delta, --chi, --r2/--t2")
    if args.delta is not None:
        return PostSelection.from_delta(args.delta)
    if args.chi is not None:
        return PostSelection.from_chi(args.chi)
    if args.r2 is not None:
        return PostSelection(args.r2, args.t2)
    return None


def _config(args, require_post=True) -> ProtocolConfig:
    pre, post = _pre(args), _post(args)
    if post is None:
        if require_post:
            raise WeakAmpError("post-selection missing: give --delta, --chi or --r2/--t2")
        post = PostSelection(1.0, 0.0)
    return ProtocolConfig(pre, post, args.theta, args.phi_c)


def _amplify_record(cfg: ProtocolConfig, explicit_bs: bool) -> dict:
    if explicit_bs:
        res = run_ligo_pipeline(cfg.bs1, cfg.bs2, cfg.theta, cfg.phi_c)
    else:
        res = cfg.run()
    rec = res.record()
    rec["chi"] = cfg.post.chi
    return rec


def cmd_amplify(args) -> list[dict]:
    cfg = _config(args)
    return [_amplify_record(cfg, args.r2 is not None)]


def _grid(args) -> np.ndarray:
    if args.points < 1:
        raise WeakAmpError("--points must be >= 1")
    if args.points > 1 and args.start == args.stop:
        raise WeakAmpError("empty sweep range")
    if args.log:
        if args.start <= 0 or args.stop <= 0:
            raise WeakAmpError("--log sweeps need positive endpoints")
        return np.geomspace(args.start, args.stop, args.points)
    return np.linspace(args.start, args.stop, args.points)


def cmd_sweep(args) -> list[dict]:
    if args.vary in ("delta", "chi") and any(
        x is not None for x in (args.delta, args.chi, args.r2)
    ):
        raise WeakAmpError(f"--vary {args.vary} replaces the post-selection flags")
    grid = _grid(args)
    pre = _pre(args)
    records = []
    if args.vary == "theta":
        base = _config(args)
        for v in grid:
            records.append(_amplify_record(base.with_theta(float(v)), args.r2 is not None))
        return records
    make = PostSelection.from_delta if args.vary == "delta" else PostSelection.from_chi
    # validate the whole grid before computing anything
    posts = [make(float(v)) for v in grid]
    for post in posts:
        records.append(_amplify_record(ProtocolConfig(pre, post, args.theta, args.phi_c), False))
    return records


def cmd_simulate(args) -> list[dict]:
    cfg = _config(args)
    if args.n_input <= 0:
        raise WeakAmpError("--n-input must be positive")
    if args.reps < 1:
        raise WeakAmpError("--reps must be >= 1")
    cfg.phase_map()
    reps = simulate_repetitions(cfg, args.n_input, args.seed, args.reps)
    records = []
    for r in reps:
        est = r.estimate
        records.append({
            "kind": "repetition",
            "seed": args.seed,
            "stream_id": r.stream_id,
            "n_input": r.counts.n_input,
            "n_post": r.counts.n_post,
            "n_R": r.counts.n_R,
            "n_L": r.counts.n_L,
            "estimate_valid": est is not None,
            "phi_hat": est.phi_hat if est else None,
            "theta_hat": est.theta_hat if est else None,
            "stderr_phi": est.stderr_phi if est else None,
            "stderr_theta": est.stderr_theta if est else None,
        })
    valid = [r.estimate for r in reps if r.estimate is not None]
    phi = np.array([e.phi_hat for e in valid])
    theta = np.array([e.theta_hat for e in valid])
    n = len(valid)
    ddof = 1 if n > 1 else 0
    records.append({
        "kind": "summary",
        "seed": args.seed,
        "estimate_valid": n > 0,
        "n_valid": n,
        "n_null": len(reps) - n,
        "mean_n_post": float(np.mean([r.counts.n_post for r in reps])),
        "mean_phi_hat": float(phi.mean()) if n else None,
        "std_phi_hat": float(phi.std(ddof=ddof)) if n else None,
        "mean_theta_hat": float(theta.mean()) if n else None,
        "std_theta_hat": float(theta.std(ddof=ddof)) if n else None,
        "sem_theta_hat": float(theta.std(ddof=ddof) / math.sqrt(n)) if n else None,
        "theta_true": cfg.theta,
    })
    return records


def cmd_noise(args) -> list[dict]:
    t1 = _S2 if args.t1 is None else args.t1
    t2 = _S2 if args.t2 is None else args.t2
    rows, cross = noise_budget_sweep(args.n_min, args.n_max, args.points, t1, t2)
    records = [
        {"kind": "budget", "n_photons": b.n_photons, "h_rn": b.h_rn, "h_sn": b.h_sn,
         "total": b.total}
        for b in rows
    ]
    records.append({"kind": "crossover", "n_photons": cross.n_photons, "h_rn": cross.h_rn,
                    "h_sn": cross.h_sn, "total": cross.total})
    return records


def cmd_baseline(args) -> list[dict]:
    cfg = _config(args)
    w = wva_pointer_expectations(cfg.theta, cfg.pre, cfg.post)
    first_ok = w.weak_value is not None
    rec = {
        "theta": cfg.theta,
        "weak_value_re": w.weak_value.real if first_ok else None,
        "weak_value_im": w.weak_value.imag if first_ok else None,
        "sigma_plus_first_order": w.sigma_plus_first_order,
        "sigma_R_first_order": w.sigma_R_first_order,
        "sigma_plus_exact": w.sigma_plus,
        "sigma_R_exact": w.sigma_R,
        "diff_sigma_plus": w.sigma_plus - w.sigma_plus_first_order if first_ok else None,
        "diff_sigma_R": w.sigma_R - w.sigma_R_first_order if first_ok else None,
    }
    if not first_ok:
        raise _PartialFailure(
            [rec], "DivergentWeakValueError: pre- and post-selection orthogonal; "
            "first-order branch undefined"
        )
    return [rec]


COMMANDS = {
    "amplify": cmd_amplify,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "noise": cmd_noise,
    "baseline": cmd_baseline,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default=None, help="output path (default: stdout)")

    proto = argparse.ArgumentParser(add_help=False)
    proto.add_argument("--theta", type=float, default=0.0, help="signal phase [rad]")
    proto.add_argument("--r1", type=float, help="BS1 reflection amplitude (alpha)")
    proto.add_argument("--t1", type=float, help="BS1 transmission amplitude (beta)")
    proto.add_argument("--delta", type=float, help="effective offset 1 + cot(chi)")
    proto.add_argument("--chi", type=float, help="post-selection angle [rad]")
    proto.add_argument("--r2", type=float, help="BS2 reflection amplitude (gamma)")
    proto.add_argument("--t2", type=float, help="BS2 transmission amplitude (eta)")
    proto.add_argument("--phi-c", type=float, default=0.0, help="down-arm compensation [rad]")

    ap = argparse.ArgumentParser(prog=PROG, description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"{PROG} {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("amplify", parents=[common, proto], help="one amplification record")

    sp = sub.add_parser("sweep", parents=[common, proto], help="sweep theta, delta or chi")
    sp.add_argument("--vary", choices=("theta", "delta", "chi"), required=True)
    sp.add_argument("--start", type=float, required=True)
    sp.add_argument("--stop", type=float, required=True)
    sp.add_argument("--points", type=int, required=True)
    sp.add_argument("--log", action="store_true", help="log-spaced grid")

    sm = sub.add_parser("simulate", parents=[common, proto], help="Monte Carlo photon counting")
    sm.add_argument("--n-input", type=int, required=True)
    sm.add_argument("--seed", type=int, default=0)
    sm.add_argument("--reps", type=int, default=1)

    nz = sub.add_parser("noise", parents=[common], help="radiation-pressure / shot-noise sweep")
    nz.add_argument("--n-min", type=float, required=True)
    nz.add_argument("--n-max", type=float, required=True)
    nz.add_argument("--points", type=int, default=50)
    nz.add_argument("--t1", type=float)
    nz.add_argument("--t2", type=float)

    sub.add_parser("baseline", parents=[common, proto], help="weak-value baseline")
    return ap


def _meta(args) -> dict:
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("format", "out")}
    meta = {"tool": PROG, "version": __version__, "command": args.command, "config": config,
            "seed": getattr(args, "seed", None)}
    if args.command == "simulate":
        meta["rng"] = RNG_SPEC
    return meta


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        records = COMMANDS[args.command](args)
    except _PartialFailure as exc:
        records, msg = exc.args
        _emit(render(_meta(args), records, args.format), args.out)
        print(f"{PROG}: error: {msg}", file=sys.stderr)
        return 1
    except WeakAmpError as exc:
        print(f"{PROG}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    _emit(render(_meta(args), records, args.format), args.out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
