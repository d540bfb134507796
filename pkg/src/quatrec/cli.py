"""Command-line front end: recovery runs, masks, metrics, parameter sweeps.

A run is fully described by a manifest (input, mask source, method, solver
settings, output paths).  Manifests load from a flat key = value config file
with command-line flags taking precedence, and every CSV row written embeds
the flattened manifest so results stay self-describing and replayable.

Exit codes: 0 success, 2 usage/config error, 3 runtime/numerical error.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import imaging
from .qdct import TransformAxis, default_axis
from .solver import CompletionProblem, RecoveryResult, SolverConfig, lrqr_sr, qtnn_baseline

USAGE_ERROR = 2
RUNTIME_ERROR = 3

SOLVER_KEYS = ("lambda", "beta1", "beta_max", "rho", "r", "eps_inner",
               "eps_outer", "max_inner", "max_outer", "axis", "seed")
MANIFEST_KEYS = ("input", "mask", "sr", "mask_seed", "method", "out",
                 "log_csv") + SOLVER_KEYS


class UsageError(Exception):
    """Bad flags, unreadable input, inconsistent or invalid configuration."""


def _apply_thread_cap() -> None:
    cap = os.environ.get("QC_THREADS")
    if not cap:
        return
    try:
        limit = max(1, int(cap))
    except ValueError:
        raise UsageError(f"QC_THREADS must be an integer, got {cap!r}")
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(limits=limit)
    except ImportError:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS"):
            os.environ[var] = str(limit)


@dataclass
class RunManifest:
    """Everything needed to reproduce one recovery run."""

    input: str
    method: str = "lrqr-sr"
    mask: str = ""
    sr: float = 0.3
    mask_seed: int = 0
    out: str = ""
    log_csv: str = ""
    solver: SolverConfig = field(default_factory=SolverConfig)

    def flat(self) -> dict:
        ax = self.solver.axis
        return {
            "input": self.input,
            "mask": self.mask,
            "sr": self.sr,
            "mask_seed": self.mask_seed,
            "method": self.method,
            "out": self.out,
            "log_csv": self.log_csv,
            "lambda": self.solver.lam,
            "beta1": self.solver.beta1,
            "beta_max": self.solver.beta_max,
            "rho": self.solver.rho,
            "r": self.solver.r,
            "eps_inner": self.solver.eps_inner,
            "eps_outer": self.solver.eps_outer,
            "max_inner": self.solver.max_inner,
            "max_outer": self.solver.max_outer,
            "axis": f"{ax.x},{ax.y},{ax.z}",
            "seed": self.solver.seed,
        }


def read_config_file(path) -> dict:
    """Flat `key = value` pairs, # comments allowed; keys must be known."""
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in MANIFEST_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = val
    return values


def _parse_axis(text: str) -> TransformAxis:
    try:
        x, y, z = (float(tok) for tok in text.split(","))
        return TransformAxis(x, y, z)
    except ValueError as exc:
        raise UsageError(f"bad axis {text!r}: {exc}")


def build_manifest(args) -> RunManifest:
    """Defaults, then config file values, then explicit flags."""
    values: dict = {}
    if args.config:
        values.update(read_config_file(args.config))

    flag_map = {
        "input": args.input, "mask": args.mask, "sr": args.sr,
        "mask_seed": args.seed, "method": args.method, "out": args.out,
        "log_csv": args.log_csv, "lambda": getattr(args, "lam"),
        "beta1": args.beta1, "rho": args.rho, "r": args.rank,
        "max_inner": args.max_inner, "max_outer": args.max_outer,
        "axis": args.axis, "seed": args.solver_seed,
    }
    for key, val in flag_map.items():
        if val is not None:
            values[key] = val

    if not values.get("input"):
        raise UsageError("an input image is required (--input or config)")
    method = str(values.get("method", "lrqr-sr"))
    if method not in ("lrqr-sr", "qtnn"):
        raise UsageError(f"unknown method {method!r}")

    try:
        solver = SolverConfig(
            lam=float(values.get("lambda", 0.07)),
            beta1=float(values.get("beta1", 1e-4)),
            beta_max=float(values.get("beta_max", 1e10)),
            rho=float(values.get("rho", 1.01)),
            r=int(values.get("r", 30)),
            eps_inner=float(values.get("eps_inner", 1e-4)),
            eps_outer=float(values.get("eps_outer", 1e-2)),
            max_inner=int(values.get("max_inner", 500)),
            max_outer=int(values.get("max_outer", 10)),
            axis=(_parse_axis(values["axis"]) if isinstance(values.get("axis"), str)
                  else values.get("axis", default_axis())),
            seed=int(values.get("seed", 0)),
        )
    except ValueError as exc:
        raise UsageError(f"invalid solver configuration: {exc}")

    sr = float(values.get("sr", 0.3))
    if not 0.0 < sr <= 1.0:
        raise UsageError("sampling rate must lie in (0, 1]")
    return RunManifest(
        input=str(values["input"]), method=method,
        mask=str(values.get("mask", "")), sr=sr,
        mask_seed=int(values.get("mask_seed", 0)),
        out=str(values.get("out", "")), log_csv=str(values.get("log_csv", "")),
        solver=solver,
    )


def _load_problem(manifest: RunManifest):
    try:
        img = imaging.load_image(manifest.input)
    except OSError as exc:
        raise UsageError(f"cannot read input image {manifest.input}: {exc}")
    rows, cols = img.shape[:2]
    if manifest.mask:
        try:
            mask = imaging.load_mask(manifest.mask)
        except OSError as exc:
            raise UsageError(f"cannot read mask {manifest.mask}: {exc}")
        if mask.shape != (rows, cols):
            raise UsageError(f"mask is {mask.shape}, image is {(rows, cols)}")
    else:
        mask = imaging.random_mask(rows, cols, manifest.sr, manifest.mask_seed)
    if manifest.solver.r >= min(rows, cols):
        raise UsageError(f"truncation r={manifest.solver.r} must be below "
                         f"min(M,N)={min(rows, cols)}")
    problem = CompletionProblem(imaging.rgb_to_quaternion(img), mask.mask)
    return img, problem


def _solve(manifest: RunManifest, problem: CompletionProblem,
           log_rows: list | None) -> RecoveryResult:
    runner = lrqr_sr if manifest.method == "lrqr-sr" else qtnn_baseline
    callback = None
    if log_rows is not None:
        flat = manifest.flat()

        def callback(rec):
            log_rows.append({**flat, "outer": rec.outer, "inner": rec.inner,
                             "beta": rec.beta, "res_xh": rec.res_xh,
                             "res_dt": rec.res_dt, "res_dx": rec.res_dx,
                             "objective": rec.objective})

    return runner(problem, manifest.solver, callback)


def _write_csv(path, rows: list[dict]) -> None:
    if not rows:
        return
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)


def cmd_complete(args) -> int:
    manifest = build_manifest(args)
    img, problem = _load_problem(manifest)
    log_rows: list | None = [] if manifest.log_csv else None

    start = time.perf_counter()
    result = _solve(manifest, problem, log_rows)
    wall = time.perf_counter() - start

    recovered = imaging.quaternion_to_rgb(result.x_opt)
    if manifest.out:
        imaging.save_image(recovered, manifest.out)
    p = imaging.psnr(recovered, img)
    s = imaging.ssim(recovered, img)
    print(f"psnr={p:.4f} ssim={s:.4f} outer={result.outer_iters} "
          f"inner={result.total_inner_iters} converged={result.converged} "
          f"wall={wall:.1f}s")
    if log_rows is not None:
        _write_csv(manifest.log_csv, log_rows)
    if args.metrics_csv:
        _write_csv(args.metrics_csv, [{**manifest.flat(), "psnr": p, "ssim": s,
                                       "outer_iters": result.outer_iters,
                                       "total_inner_iters": result.total_inner_iters,
                                       "converged": result.converged}])
    return 0


def cmd_mask(args) -> int:
    if not args.out:
        raise UsageError("mask generation needs --out")
    if args.image:
        img = imaging.load_image(args.image)
        mask = imaging.text_mask(img, args.threshold)
    else:
        if args.like:
            rows, cols = imaging.load_image(args.like).shape[:2]
        elif args.size:
            rows, cols = args.size
        else:
            raise UsageError("need --size M N, --like IMAGE, or --image MASKIMAGE")
        if args.sr is None:
            raise UsageError("random masks need --sr")
        mask = imaging.random_mask(rows, cols, args.sr, args.seed or 0)
    imaging.save_mask(mask, args.out)
    print(f"wrote {args.out}: {mask.shape[0]}x{mask.shape[1]} "
          f"rate={mask.sampling_rate:.4f}")
    return 0


def cmd_metrics(args) -> int:
    try:
        img = imaging.load_image(args.image)
        ref = imaging.load_image(args.reference)
    except OSError as exc:
        raise UsageError(f"cannot read image: {exc}")
    if img.shape != ref.shape:
        raise UsageError(f"dimension mismatch: {img.shape} vs {ref.shape}")
    p = imaging.psnr(img, ref)
    s = imaging.ssim(img, ref)
    print(f"psnr={p:.4f} ssim={s:.4f}")
    if args.out:
        _write_csv(args.out, [{"image": str(args.image),
                               "reference": str(args.reference),
                               "psnr": p, "ssim": s}])
    return 0


def _sweep_point(payload) -> dict:
    """One isolated sweep solve; exceptions become an error column."""
    manifest_args, param, value = payload
    manifest = RunManifest(**{**manifest_args,
                              "solver": SolverConfig(**manifest_args["solver"])})
    manifest = _override_param(manifest, param, value)
    row = {**manifest.flat(), "param": param, "value": value,
           "psnr": "", "ssim": "", "error": ""}
    try:
        img, problem = _load_problem(manifest)
        result = _solve(manifest, problem, None)
        recovered = imaging.quaternion_to_rgb(result.x_opt)
        row["psnr"] = imaging.psnr(recovered, img)
        row["ssim"] = imaging.ssim(recovered, img)
    except Exception as exc:  # the sweep must survive failed points
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _override_param(manifest: RunManifest, param: str, value: float) -> RunManifest:
    if param == "lambda":
        solver = replace(manifest.solver, lam=float(value))
    elif param == "beta1":
        solver = replace(manifest.solver, beta1=float(value))
    elif param == "r":
        solver = replace(manifest.solver, r=int(value))
    else:
        raise UsageError(f"sweep parameter must be lambda, beta1, or r, got {param!r}")
    return replace(manifest, solver=solver)


def _manifest_as_args(manifest: RunManifest) -> dict:
    d = manifest.__dict__.copy()
    d["solver"] = manifest.solver.__dict__.copy()
    return d


def cmd_sweep(args) -> int:
    manifest = build_manifest(args)
    if not args.out:
        raise UsageError("sweep needs --out CSV")
    try:
        values = [float(tok) for tok in args.values.split(",") if tok.strip()]
    except ValueError as exc:
        raise UsageError(f"bad --values: {exc}")
    if not values:
        raise UsageError("sweep grid is empty")
    _override_param(manifest, args.param, values[0])  # validate param name

    payloads = [(_manifest_as_args(manifest), args.param, v) for v in values]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_point, payloads))  # grid order
    else:
        rows = [_sweep_point(p) for p in payloads]
    _write_csv(args.out, rows)
    for row in rows:
        tag = row["error"] or f"psnr={row['psnr']:.4f} ssim={row['ssim']:.4f}"
        print(f"{args.param}={row['value']}: {tag}")
    if args.gnuplot:
        _write_gnuplot(args.gnuplot, args.out, args.param)
    return 0


def _write_gnuplot(path, csv_path, param: str) -> None:
    ncols = len(MANIFEST_KEYS)
    script = (
        "set datafile separator ','\n"
        f"set xlabel '{param}'\n"
        "set ylabel 'PSNR (dB)'\n"
        "set key off\n"
        f"set logscale x\n"
        f"plot '{csv_path}' using {ncols + 2}:{ncols + 3} "
        "skip 1 with linespoints\n"
    )
    Path(path).write_text(script)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quatrec",
        description="Color image completion by low-rank quaternion recovery",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_flags(p):
        p.add_argument("--input", help="image to complete (also ground truth for metrics)")
        p.add_argument("--mask", help="mask file (image or text grid)")
        p.add_argument("--sr", type=float, help="random mask sampling rate")
        p.add_argument("--seed", type=int, help="random mask seed")
        p.add_argument("--method", choices=["lrqr-sr", "qtnn"])
        p.add_argument("--lambda", dest="lam", type=float,
                       help="sparsity weight")
        p.add_argument("--beta1", type=float, help="initial penalty")
        p.add_argument("--rho", type=float, help="penalty growth factor")
        p.add_argument("--rank", type=int, help="truncation count r")
        p.add_argument("--max-inner", type=int)
        p.add_argument("--max-outer", type=int)
        p.add_argument("--axis", help="transform axis as x,y,z")
        p.add_argument("--solver-seed", type=int,
                       help="multiplier initialization seed")
        p.add_argument("--out", help="output image path")
        p.add_argument("--log-csv", help="per-iteration CSV path")
        p.add_argument("--config", help="flat key = value config file")

    p_complete = sub.add_parser("complete", help="recover one image")
    add_run_flags(p_complete)
    p_complete.add_argument("--metrics-csv", help="one-row metrics CSV path")
    p_complete.set_defaults(func=cmd_complete)

    p_mask = sub.add_parser("mask", help="generate an observation mask")
    p_mask.add_argument("--sr", type=float, help="sampling rate")
    p_mask.add_argument("--seed", type=int, default=0)
    p_mask.add_argument("--size", type=int, nargs=2, metavar=("M", "N"))
    p_mask.add_argument("--like", help="take dimensions from this image")
    p_mask.add_argument("--image", help="build a text mask from this image")
    p_mask.add_argument("--threshold", type=float, default=128.0)
    p_mask.add_argument("--out", required=True)
    p_mask.set_defaults(func=cmd_mask)

    p_metrics = sub.add_parser("metrics", help="PSNR/SSIM between two images")
    p_metrics.add_argument("image")
    p_metrics.add_argument("reference")
    p_metrics.add_argument("--out", help="CSV output path")
    p_metrics.set_defaults(func=cmd_metrics)

    p_sweep = sub.add_parser("sweep", help="grid sweep over one parameter")
    add_run_flags(p_sweep)
    p_sweep.add_argument("--param", required=True,
                         choices=["lambda", "beta1", "r"])
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated grid values")
    p_sweep.add_argument("--jobs", type=int, default=1,
                         help="parallel sweep processes")
    p_sweep.add_argument("--gnuplot", help="also write a gnuplot script")
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        _apply_thread_cap()
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except Exception as exc:  # numerical/runtime failures
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
