"""Command-line front end.

One binary, five subcommands: depth, boxplot, consistency, synth, bench.
Exit codes: 0 success, 1 data error (unreadable/invalid inputs), 2 usage
error (bad flags or configuration). Diagnostics go to stderr; every output
is fully determined by inputs, flags, and seeds.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from importlib import metadata
from pathlib import Path

from . import bench as bench_mod
from . import io as io_mod
from .boxplot import build_boxplot, emit_slice_images
from .consistency import rank_scatter, stability_test
from .depth import CV_WARN_THRESHOLD, METHOD_NAMES, depth_by_method
from .errors import FuzzdepthError, ValidationError
from .grid import BinaryMask, binarize_ensemble
from .reduction import resolve_workers
from .synth import (
    gen_contour_ensemble_2d,
    gen_disk_ensemble,
    gen_ellipsoid_ensemble,
)


class UsageError(Exception):
    """Bad flag values or configuration; maps to exit code 2."""


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"{text} is not a positive integer")
    return value


def _float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a comma-separated float list")


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a comma-separated int list")


def _str_list(text: str) -> list[str]:
    return [part for part in text.split(",") if part != ""]


def _load_ensemble(manifest: str, method: str, threshold: float | None):
    ensemble = io_mod.read_manifest(manifest)
    if threshold is not None:
        if not 0.0 < threshold <= 1.0:
            raise UsageError(f"threshold {threshold} outside (0, 1]")
        return binarize_ensemble(ensemble, threshold)
    if method == "eid" and not io_mod.manifest_guarantees_binary(manifest):
        raise UsageError(
            "eid needs binary input; this manifest has float volumes, "
            "pass --threshold to binarize them"
        )
    return ensemble


def _run_depth_with_warnings(ensemble, method: str, workers: int):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result = depth_by_method(ensemble, method, workers)
    for item in caught:
        print(f"warning: {item.message}", file=sys.stderr)
    return result


def cmd_depth(args: argparse.Namespace) -> int:
    workers = resolve_workers(args.workers)
    ensemble = _load_ensemble(args.manifest, args.method, args.threshold)
    result = _run_depth_with_warnings(ensemble, args.method, workers)
    io_mod.write_depth_csv(result, args.out, workers=workers)
    print(
        f"wrote {args.out}: n={len(result)} method={result.method} "
        f"cv_mass={result.cv_mass:.6g}"
    )
    return 0


def cmd_boxplot(args: argparse.Namespace) -> int:
    percentiles = args.percentiles
    if sorted(percentiles) != percentiles or any(
        not 0.0 < p <= 1.0 for p in percentiles
    ):
        raise UsageError(
            f"percentiles must be ascending and inside (0, 1], got {percentiles}"
        )
    if not 0.0 < args.threshold <= 1.0:
        raise UsageError(f"threshold {args.threshold} outside (0, 1]")
    ensemble = io_mod.read_manifest(args.manifest)
    if args.outliers >= len(ensemble):
        raise UsageError(
            f"--outliers {args.outliers} must be below the member count "
            f"{len(ensemble)}"
        )
    result = io_mod.read_depth_csv(args.depths)
    artifact = build_boxplot(
        ensemble, result, percentiles, args.threshold, args.outliers
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    slice_files: list[str] = []
    if args.slice is not None:
        if len(args.slice) != 2:
            raise UsageError("--slice needs AXIS,INDEX")
        slice_files = emit_slice_images(
            artifact, ensemble, args.slice[0], args.slice[1], out_dir
        )
    json_path = io_mod.write_boxplot_artifact(artifact, out_dir, slice_files)
    print(f"wrote {json_path}: median={artifact.median_id}")
    return 0


def cmd_consistency(args: argparse.Namespace) -> int:
    if args.stability:
        if args.manifest is None or args.method is None:
            raise UsageError("--stability needs --manifest and --method")
        workers = resolve_workers(args.workers)
        ensemble = _load_ensemble(args.manifest, args.method, args.threshold)
        report = stability_test(ensemble, args.method, args.remove, workers)
        text = json.dumps(report, indent=2) + "\n"
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
            print(f"wrote {args.out}: pearson={report['pearson']:.6g}")
        else:
            sys.stdout.write(text)
        return 0
    if len(args.depth_csvs) != 2:
        raise UsageError("need exactly two depth CSV files (or --stability)")
    if args.out is None:
        raise UsageError("--out is required for the scatter comparison")
    a = io_mod.read_depth_csv(args.depth_csvs[0])
    b = io_mod.read_depth_csv(args.depth_csvs[1])
    scatter = rank_scatter(a, b)
    io_mod.write_scatter_csv(scatter, args.out)
    print(
        f"wrote {args.out}: pearson={scatter.pearson:.6g} "
        f"kendall={scatter.kendall:.6g}"
    )
    return 0


def _write_ensemble_dir(
    ensemble, out_dir: Path, config: dict, binary: bool = False
) -> None:
    members_dir = out_dir / "members"
    members_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, member_id in enumerate(ensemble.ids):
        rel = f"members/{member_id}.npy"
        member = ensemble.member(i)
        if binary:
            # persist as uint8 so readers see the binary guarantee
            member = BinaryMask(member.grid, member.values)
        io_mod.write_volume(member, out_dir / rel)
        entries.append({"id": member_id, "path": rel})
    io_mod.write_manifest(out_dir / "manifest.json", ensemble.grid.dims, entries)
    (out_dir / "synth_config.json").write_text(
        json.dumps(config, indent=2) + "\n", encoding="utf-8"
    )


def cmd_synth(args: argparse.Namespace) -> int:
    try:
        if args.shape == "ellipsoids":
            config = {
                "shape": "ellipsoids",
                "res": args.res,
                "base": args.base,
                "outliers": args.outliers,
                "seed": args.seed,
            }
            ensemble = gen_ellipsoid_ensemble(
                args.res, args.base, args.outliers, args.seed
            )
        elif args.shape == "disks":
            config = {
                "shape": "disks",
                "res": args.res,
                "n": args.n,
                "seed": args.seed,
            }
            ensemble = gen_disk_ensemble(args.res, args.n, args.seed)
        else:
            config = {
                "shape": "contours2d",
                "res": args.res,
                "n": args.n,
                "seed": args.seed,
            }
            ensemble = gen_contour_ensemble_2d(args.n, args.res, args.seed)
    except ValidationError as exc:
        # Generator rejections are configuration problems, not data problems.
        raise UsageError(str(exc))
    out_dir = Path(args.out_dir)
    _write_ensemble_dir(
        ensemble, out_dir, config, binary=args.shape == "contours2d"
    )
    print(f"wrote {out_dir}: {len(ensemble)} members on {ensemble.grid.dims}")
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    for method in args.methods:
        if method not in METHOD_NAMES:
            raise UsageError(
                f"unknown method {method!r}; expected one of {METHOD_NAMES}"
            )
    workers = resolve_workers(args.workers)
    try:
        rows = bench_mod.run_bench(
            args.mode,
            args.methods,
            args.sizes,
            res=args.res,
            n=args.n,
            seed=args.seed,
            repeats=args.repeats,
            workers=workers,
        )
    except ValidationError as exc:
        raise UsageError(str(exc))
    bench_mod.write_bench_csv(rows, args.out)
    print(f"wrote {args.out}: {len(rows)} rows")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fuzzdepth",
        description=(
            "Statistical depth, contour boxplots, and benchmarks for "
            "ensembles of binary and probabilistic contours"
        ),
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"fuzzdepth {metadata.version('fuzzdepth')}",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_depth = sub.add_parser("depth", help="compute member depths for an ensemble")
    p_depth.add_argument("--manifest", required=True)
    p_depth.add_argument("--method", required=True, choices=METHOD_NAMES)
    p_depth.add_argument("--threshold", type=float, default=None)
    p_depth.add_argument("--workers", type=_positive_int, default=None)
    p_depth.add_argument("--out", required=True)
    p_depth.set_defaults(func=cmd_depth)

    p_box = sub.add_parser("boxplot", help="build contour-boxplot artifacts")
    p_box.add_argument("--manifest", required=True)
    p_box.add_argument("--depths", required=True)
    p_box.add_argument("--percentiles", type=_float_list, default=[0.5, 1.0])
    p_box.add_argument("--threshold", type=float, default=0.5)
    p_box.add_argument("--outliers", type=int, default=0)
    p_box.add_argument("--slice", type=_int_list, default=None, metavar="AXIS,INDEX")
    p_box.add_argument("--out-dir", required=True)
    p_box.set_defaults(func=cmd_boxplot)

    p_cons = sub.add_parser(
        "consistency", help="rank agreement between runs, or stability after removal"
    )
    p_cons.add_argument("depth_csvs", nargs="*")
    p_cons.add_argument("--out", default=None)
    p_cons.add_argument("--stability", action="store_true")
    p_cons.add_argument("--manifest", default=None)
    p_cons.add_argument("--method", default=None, choices=METHOD_NAMES)
    p_cons.add_argument("--remove", type=int, default=0)
    p_cons.add_argument("--threshold", type=float, default=None)
    p_cons.add_argument("--workers", type=_positive_int, default=None)
    p_cons.set_defaults(func=cmd_consistency)

    p_synth = sub.add_parser("synth", help="generate synthetic ensembles")
    synth_sub = p_synth.add_subparsers(dest="shape", required=True)
    p_ell = synth_sub.add_parser("ellipsoids")
    p_ell.add_argument("--res", type=int, default=50)
    p_ell.add_argument("--base", type=int, default=200)
    p_ell.add_argument("--outliers", type=int, default=10)
    p_disk = synth_sub.add_parser("disks")
    p_disk.add_argument("--res", type=int, default=64)
    p_disk.add_argument("--n", type=int, default=200)
    p_cont = synth_sub.add_parser("contours2d")
    p_cont.add_argument("--res", type=int, default=256)
    p_cont.add_argument("--n", type=int, default=200)
    for sp in (p_ell, p_disk, p_cont):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out-dir", required=True)
        sp.set_defaults(func=cmd_synth)

    p_bench = sub.add_parser("bench", help="scaling benchmarks")
    p_bench.add_argument("--mode", required=True, choices=bench_mod.BENCH_MODES)
    p_bench.add_argument("--methods", type=_str_list, required=True)
    p_bench.add_argument("--sizes", type=_int_list, required=True)
    p_bench.add_argument("--res", type=int, default=50)
    p_bench.add_argument("--n", type=int, default=200)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--repeats", type=_positive_int, default=3)
    p_bench.add_argument("--workers", type=_positive_int, default=None)
    p_bench.add_argument("--out", required=True)
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FuzzdepthError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
