"""Persistence: volume files, ensemble manifests, and result tables.

Volumes travel as .npy (version 1.0 header, C-order, little-endian,
f32/f64/u8/bool, 1 to 4 dimensions) or as raw little-endian binary next to
a JSON sidecar ``<file>.json`` holding {"dims": [...], "dtype": ...,
"order": "C"}. Ensembles are described by a JSON manifest listing the grid
and one volume per member; manifests load lazily so large ensembles stream
through depth computations. Depth results serialize to CSV with a JSON
sidecar for run metadata.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Sequence

import numpy as np

from .boxplot import BoxplotArtifact
from .depth import DepthResult
from .errors import ManifestError, ValidationError, VolumeFormatError
from .fuzzify import (
    ScalarField,
    default_width,
    fuzzy_isocontour,
    hard_isocontour,
    normalize_density,
)
from .grid import BinaryMask, Ensemble, GridSpec, ProbMask

_VOLUME_DTYPES = {
    "float32": np.dtype(np.float32),
    "float64": np.dtype(np.float64),
    "uint8": np.dtype(np.uint8),
    "bool": np.dtype(np.bool_),
}


def _check_array(arr: np.ndarray, path) -> np.ndarray:
    if arr.dtype.byteorder == ">":
        raise VolumeFormatError(f"{path}: big-endian data is not supported")
    if arr.dtype.newbyteorder("=") not in _VOLUME_DTYPES.values():
        raise VolumeFormatError(
            f"{path}: unsupported element type {arr.dtype.name}; "
            f"expected one of {sorted(_VOLUME_DTYPES)}"
        )
    if not 1 <= arr.ndim <= 4:
        raise VolumeFormatError(
            f"{path}: {arr.ndim} dimensions outside the supported 1..4 range"
        )
    return np.ascontiguousarray(arr)


def _load_array(path: Path) -> np.ndarray:
    if path.suffix == ".npy":
        try:
            arr = np.load(path, allow_pickle=False)
        except (ValueError, EOFError, OSError) as exc:
            if isinstance(exc, FileNotFoundError):
                raise
            raise VolumeFormatError(f"{path}: corrupt or unreadable container: {exc}")
        return _check_array(arr, path)
    sidecar = Path(str(path) + ".json")
    if not sidecar.exists():
        raise VolumeFormatError(
            f"{path}: not a .npy file and no JSON sidecar {sidecar.name} found"
        )
    dims, dtype = _read_sidecar(sidecar)
    data = np.fromfile(path, dtype=dtype)
    expected = int(np.prod(dims))
    if data.size != expected:
        raise VolumeFormatError(
            f"{path}: has {data.size} elements, sidecar dims {dims} "
            f"require {expected}"
        )
    return _check_array(data.reshape(dims), path)


def _read_sidecar(sidecar: Path) -> tuple[tuple[int, ...], np.dtype]:
    try:
        meta = json.loads(sidecar.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise VolumeFormatError(f"{sidecar}: invalid JSON sidecar: {exc}")
    try:
        dims = tuple(int(d) for d in meta["dims"])
        dtype_name = meta["dtype"]
    except (KeyError, TypeError, ValueError) as exc:
        raise VolumeFormatError(f"{sidecar}: sidecar needs dims and dtype: {exc}")
    if meta.get("order", "C") != "C":
        raise VolumeFormatError(f"{sidecar}: only C element order is supported")
    if dtype_name not in _VOLUME_DTYPES:
        raise VolumeFormatError(f"{sidecar}: unsupported dtype {dtype_name!r}")
    dtype = _VOLUME_DTYPES[dtype_name]
    if dtype.kind == "f":
        dtype = dtype.newbyteorder("<")
    return dims, dtype


def volume_header(path) -> tuple[tuple[int, ...], str]:
    """(shape, dtype name) read from the container header, payload untouched."""
    path = Path(path)
    if path.suffix == ".npy":
        try:
            with open(path, "rb") as fh:
                version = np.lib.format.read_magic(fh)
                if version == (1, 0):
                    shape, fortran, dtype = np.lib.format.read_array_header_1_0(fh)
                elif version == (2, 0):
                    shape, fortran, dtype = np.lib.format.read_array_header_2_0(fh)
                else:
                    raise VolumeFormatError(
                        f"{path}: unsupported npy version {version}"
                    )
        except (ValueError, EOFError) as exc:
            raise VolumeFormatError(f"{path}: corrupt npy header: {exc}")
        if fortran:
            raise VolumeFormatError(f"{path}: Fortran element order is not supported")
        return shape, dtype.newbyteorder("=").name
    sidecar = Path(str(path) + ".json")
    if not sidecar.exists():
        raise VolumeFormatError(
            f"{path}: not a .npy file and no JSON sidecar {sidecar.name} found"
        )
    dims, dtype = _read_sidecar(sidecar)
    return dims, dtype.newbyteorder("=").name


def read_volume(path, kind: str = "auto") -> ScalarField | ProbMask | BinaryMask:
    """Load a volume as a field or mask.

    kind "auto": floats load as ScalarField, u8/bool as BinaryMask.
    kind "field": always a ScalarField (integers are cast).
    kind "mask": floats load as a ProbMask (validated into [0, 1]),
    u8/bool as BinaryMask.
    """
    path = Path(path)
    arr = _load_array(path)
    grid = GridSpec(arr.shape if arr.ndim > 1 else (arr.shape[0],))
    is_float = arr.dtype.kind == "f"
    if kind == "field":
        return ScalarField(grid, arr if is_float else arr.astype(np.float64))
    if kind == "mask":
        if is_float:
            try:
                return ProbMask(grid, arr)
            except ValidationError as exc:
                raise ValidationError(f"{path}: {exc}")
        return BinaryMask(grid, arr)
    if kind == "auto":
        return ScalarField(grid, arr) if is_float else BinaryMask(grid, arr)
    raise ValidationError(f"unknown volume kind {kind!r}")


def write_volume(obj, path, fmt: str | None = None) -> None:
    """Persist a mask or field; fmt "npy" (default for .npy paths) or "raw".

    BinaryMask payloads are written as uint8 0/1; other objects keep their
    storage dtype. Round-trips are byte-exact.
    """
    path = Path(path)
    if isinstance(obj, BinaryMask):
        arr = obj.bits.astype(np.uint8).reshape(obj.grid.dims)
    elif isinstance(obj, (ProbMask, ScalarField)):
        arr = obj.values.reshape(obj.grid.dims)
    elif isinstance(obj, np.ndarray):
        arr = obj
    else:
        raise ValidationError(f"cannot persist object of type {type(obj).__name__}")
    if fmt is None:
        fmt = "npy" if path.suffix == ".npy" else "raw"
    if fmt == "npy":
        with open(path, "wb") as fh:
            np.lib.format.write_array(fh, arr, version=(1, 0))
    elif fmt == "raw":
        out = arr
        if out.dtype.kind == "f":
            out = out.astype(out.dtype.newbyteorder("<"), copy=False)
        out.tofile(path)
        sidecar = {
            "dims": list(arr.shape),
            "dtype": arr.dtype.newbyteorder("=").name,
            "order": "C",
        }
        Path(str(path) + ".json").write_text(
            json.dumps(sidecar, indent=2) + "\n", encoding="utf-8"
        )
    else:
        raise ValidationError(f"unknown volume format {fmt!r}")


_FUZZIFY_MODES = ("isovalue", "sublevel", "minmax", "scale-by-max")


def _member_loader(path: Path, role: str, fuzzify_cfg: dict | None):
    """Closure materializing one manifest member as a ProbMask."""

    def load() -> ProbMask:
        if role == "mask":
            vol = read_volume(path, kind="mask")
            return vol.to_prob() if isinstance(vol, BinaryMask) else vol
        field = read_volume(path, kind="field")
        mode = fuzzify_cfg["mode"]
        if mode == "isovalue":
            width = fuzzify_cfg.get("width")
            if width is None:
                width = default_width(field)
            return fuzzy_isocontour(field, float(fuzzify_cfg["q"]), float(width))
        if mode == "sublevel":
            return hard_isocontour(field, float(fuzzify_cfg["q"])).to_prob()
        return normalize_density(field, mode)

    return load


def read_manifest(path) -> Ensemble:
    """Lazy ensemble from a JSON manifest.

    Schema: {"grid": {"dims": [...], "weights_path"?: str},
    "members": [{"id": str, "path": str, "role"?: "mask"|"field",
    "fuzzify"?: {...}}]}. Member paths resolve relative to the manifest.
    Shapes are validated from container headers up front; payloads load on
    demand in listing order.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ManifestError(f"manifest {path} does not exist")
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: invalid JSON: {exc}")
    base = path.parent
    try:
        dims = tuple(int(d) for d in doc["grid"]["dims"])
        members = doc["members"]
    except (KeyError, TypeError) as exc:
        raise ManifestError(f"{path}: manifest needs grid.dims and members: {exc}")
    if not members:
        raise ManifestError(f"{path}: manifest lists no members")
    weights = None
    weights_path = doc["grid"].get("weights_path")
    if weights_path is not None:
        warr = _load_array(base / weights_path)
        weights = warr.reshape(-1).astype(np.float64)
    grid = GridSpec(dims, weights)

    ids = []
    loaders = []
    for entry in members:
        try:
            member_id = str(entry["id"])
            member_path = base / entry["path"]
        except (KeyError, TypeError) as exc:
            raise ManifestError(f"{path}: member entry needs id and path: {exc}")
        role = entry.get("role", "mask")
        fuzzify_cfg = entry.get("fuzzify")
        if role not in ("mask", "field"):
            raise ManifestError(f"member {member_id!r}: unknown role {role!r}")
        if role == "field":
            if not fuzzify_cfg or fuzzify_cfg.get("mode") not in _FUZZIFY_MODES:
                raise ManifestError(
                    f"member {member_id!r}: field role needs fuzzify.mode "
                    f"in {_FUZZIFY_MODES}"
                )
            if fuzzify_cfg["mode"] in ("isovalue", "sublevel") and "q" not in fuzzify_cfg:
                raise ManifestError(
                    f"member {member_id!r}: fuzzify mode "
                    f"{fuzzify_cfg['mode']!r} needs q"
                )
        elif fuzzify_cfg:
            raise ManifestError(
                f"member {member_id!r}: fuzzify only applies to role \"field\""
            )
        try:
            shape, _ = volume_header(member_path)
        except FileNotFoundError:
            raise ManifestError(f"member {member_id!r}: file {member_path} not found")
        except VolumeFormatError as exc:
            raise ManifestError(f"member {member_id!r}: {exc}")
        if tuple(shape) not in (dims, (grid.cell_count,)):
            raise ManifestError(
                f"member {member_id!r}: shape {tuple(shape)} does not match "
                f"grid dims {dims}"
            )
        ids.append(member_id)
        loaders.append(_member_loader(member_path, role, fuzzify_cfg))
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise ManifestError(f"{path}: duplicate member ids {dupes}")
    return Ensemble(grid, loaders, ids)


def manifest_guarantees_binary(path) -> bool:
    """True when every member must load as a 0/1 mask, judged from headers.

    Integer-typed mask volumes and sublevel-set fuzzify modes are binary by
    construction; float mask volumes and band/density modes are not.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
        members = doc["members"]
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ManifestError(f"{path}: unreadable manifest: {exc}")
    base = path.parent
    for entry in members:
        role = entry.get("role", "mask")
        if role == "field":
            if entry.get("fuzzify", {}).get("mode") != "sublevel":
                return False
            continue
        try:
            _, dtype_name = volume_header(base / entry["path"])
        except (KeyError, TypeError, FileNotFoundError, VolumeFormatError):
            return False
        if dtype_name not in ("uint8", "bool"):
            return False
    return True


def write_manifest(
    path,
    dims: Sequence[int],
    entries: Sequence[dict],
    weights_path: str | None = None,
) -> None:
    """Write an ensemble manifest; entries are member dicts (id, path, ...)."""
    doc: dict = {"grid": {"dims": [int(d) for d in dims]}}
    if weights_path is not None:
        doc["grid"]["weights_path"] = weights_path
    doc["members"] = list(entries)
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def _fmt(x: float) -> str:
    """Shortest decimal string that round-trips the float64 exactly."""
    return repr(float(x))


def write_depth_csv(result: DepthResult, path, workers: int | None = None) -> None:
    """Depth table as CSV plus a <path>.json sidecar with run metadata."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "in_in", "in_out", "depth", "rank", "method"])
        for i, member_id in enumerate(result.ids):
            writer.writerow(
                [
                    member_id,
                    _fmt(result.in_in[i]),
                    _fmt(result.in_out[i]),
                    _fmt(result.depth[i]),
                    int(result.rank[i]),
                    result.method,
                ]
            )
    sidecar = {
        "method": result.method,
        "cv_mass": result.cv_mass,
        "elapsed_seconds": result.elapsed_seconds,
        "n": len(result.ids),
    }
    if workers is not None:
        sidecar["workers"] = workers
    Path(str(path) + ".json").write_text(
        json.dumps(sidecar, indent=2) + "\n", encoding="utf-8"
    )


def read_depth_csv(path) -> DepthResult:
    """Rebuild a DepthResult from its CSV (metadata sidecar optional)."""
    path = Path(path)
    ids = []
    in_in = []
    in_out = []
    depth = []
    rank = []
    methods = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            try:
                ids.append(row["id"])
                in_in.append(float(row["in_in"]))
                in_out.append(float(row["in_out"]))
                depth.append(float(row["depth"]))
                rank.append(int(row["rank"]))
                methods.add(row["method"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ValidationError(f"{path}: malformed depth CSV row: {exc}")
    if not ids:
        raise ValidationError(f"{path}: depth CSV has no rows")
    meta = {}
    sidecar = Path(str(path) + ".json")
    if sidecar.exists():
        meta = json.loads(sidecar.read_text(encoding="utf-8"))
    return DepthResult(
        ids=tuple(ids),
        in_in=np.array(in_in, dtype=np.float64),
        in_out=np.array(in_out, dtype=np.float64),
        depth=np.array(depth, dtype=np.float64),
        rank=np.array(rank, dtype=np.int64),
        method=methods.pop() if len(methods) == 1 else "mixed",
        cv_mass=float(meta.get("cv_mass", 0.0)),
        elapsed_seconds=float(meta.get("elapsed_seconds", 0.0)),
    )


def write_scatter_csv(scatter, path) -> None:
    """Rank comparison table; the leading comment line carries the stats."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# pearson={_fmt(scatter.pearson)} kendall={_fmt(scatter.kendall)}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "rank_a", "rank_b", "abs_delta"])
        for member_id, rank_a, rank_b, delta in scatter.rows:
            writer.writerow([member_id, rank_a, rank_b, delta])


def write_boxplot_artifact(
    artifact: BoxplotArtifact, out_dir, slice_files: Sequence[str] | None = None
) -> Path:
    """Persist band envelopes as u8 .npy volumes plus a boxplot.json index."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    bands_meta = []
    for b, band in enumerate(artifact.bands):
        pct = int(round(band.percentile * 100))
        union_name = f"band_{b:02d}_p{pct:03d}_union.npy"
        inter_name = f"band_{b:02d}_p{pct:03d}_intersection.npy"
        write_volume(band.union, out_dir / union_name)
        write_volume(band.intersection, out_dir / inter_name)
        bands_meta.append(
            {
                "percentile": band.percentile,
                "union": union_name,
                "intersection": inter_name,
                "member_ids": list(band.member_ids),
            }
        )
    doc = {
        "median_id": artifact.median_id,
        "threshold": artifact.threshold,
        "outlier_ids": list(artifact.outlier_ids),
        "bands": bands_meta,
        "slices": [Path(p).name for p in slice_files or []],
    }
    json_path = out_dir / "boxplot.json"
    json_path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return json_path


__all__ = [
    "read_volume",
    "write_volume",
    "volume_header",
    "read_manifest",
    "write_manifest",
    "write_depth_csv",
    "read_depth_csv",
    "write_scatter_csv",
    "write_boxplot_artifact",
]
