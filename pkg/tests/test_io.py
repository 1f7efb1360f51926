from __future__ import annotations

import json

import numpy as np
import pytest

from fuzzdepth import (
    BinaryMask,
    GridSpec,
    ManifestError,
    ProbMask,
    ScalarField,
    ValidationError,
    VolumeFormatError,
    build_boxplot,
    depth_pid,
    rank_scatter,
    read_depth_csv,
    read_manifest,
    read_volume,
    volume_header,
    write_depth_csv,
    write_manifest,
    write_volume,
)
from fuzzdepth.io import manifest_guarantees_binary, write_boxplot_artifact, write_scatter_csv


class TestVolumeRoundtrip:
    def test_prob_mask_npy_f32(self, tmp_path):
        g = GridSpec((3, 4))
        m = ProbMask(g, np.linspace(0, 1, 12, dtype=np.float32))
        p = tmp_path / "m.npy"
        write_volume(m, p)
        assert volume_header(p) == ((3, 4), "float32")
        back = read_volume(p, kind="mask")
        assert isinstance(back, ProbMask)
        assert back.values.dtype == np.float32
        np.testing.assert_array_equal(back.values, m.values)

    def test_prob_mask_keeps_f64(self, tmp_path):
        g = GridSpec((5,))
        m = ProbMask(g, np.linspace(0, 1, 5, dtype=np.float64))
        p = tmp_path / "m.npy"
        write_volume(m, p)
        back = read_volume(p, kind="mask")
        assert back.values.dtype == np.float64
        np.testing.assert_array_equal(back.values, m.values)

    def test_binary_mask_as_u8(self, tmp_path):
        g = GridSpec((2, 3))
        m = BinaryMask(g, np.array([[1, 0, 1], [0, 1, 0]], dtype=bool))
        p = tmp_path / "b.npy"
        write_volume(m, p)
        assert volume_header(p) == ((2, 3), "uint8")
        back = read_volume(p)  # auto: integer payload loads as BinaryMask
        assert isinstance(back, BinaryMask)
        np.testing.assert_array_equal(back.bits, m.bits)

    def test_field_auto_and_cast(self, tmp_path):
        g = GridSpec((4,))
        f = ScalarField(g, np.array([-3.0, 0.0, 2.5, 9.0]))
        p = tmp_path / "f.npy"
        write_volume(f, p)
        auto = read_volume(p)
        assert isinstance(auto, ScalarField)
        forced = read_volume(tmp_path / "f.npy", kind="field")
        np.testing.assert_array_equal(forced.values, f.values)

    def test_raw_format_with_sidecar(self, tmp_path):
        g = GridSpec((2, 2))
        m = ProbMask(g, np.array([0.0, 0.25, 0.5, 1.0], dtype=np.float32))
        p = tmp_path / "m.raw"
        write_volume(m, p)
        sidecar = json.loads((tmp_path / "m.raw.json").read_text())
        assert sidecar == {"dims": [2, 2], "dtype": "float32", "order": "C"}
        assert volume_header(p) == ((2, 2), "float32")
        back = read_volume(p, kind="mask")
        np.testing.assert_array_equal(back.values, m.values)

    def test_mask_kind_validates_range(self, tmp_path):
        p = tmp_path / "bad.npy"
        np.save(p, np.array([0.5, 3.0], dtype=np.float32))
        with pytest.raises(ValidationError):
            read_volume(p, kind="mask")
        read_volume(p, kind="field")  # same payload is a fine field

    def test_rejects_garbage_and_missing(self, tmp_path):
        p = tmp_path / "junk.npy"
        p.write_bytes(b"this is not numpy data at all........")
        with pytest.raises(VolumeFormatError):
            read_volume(p)
        with pytest.raises(FileNotFoundError):
            read_volume(tmp_path / "absent.npy")

    def test_rejects_unsupported_dtype(self, tmp_path):
        p = tmp_path / "c.npy"
        np.save(p, np.zeros(4, dtype=np.complex128))
        with pytest.raises(VolumeFormatError):
            read_volume(p)


class TestManifest:
    def _write_members(self, tmp_path, arrays, fmt="npy"):
        entries = []
        for i, arr in enumerate(arrays):
            name = f"m{i}.npy"
            write_volume(arr, tmp_path / name)
            entries.append({"id": f"m{i}", "path": name})
        return entries

    def test_roundtrip_lazy(self, tmp_path, nested_trio):
        entries = self._write_members(tmp_path, list(nested_trio))
        write_manifest(tmp_path / "manifest.json", (4,), entries)
        e = read_manifest(tmp_path / "manifest.json")
        assert e.is_lazy()
        assert list(e.ids) == ["m0", "m1", "m2"]
        for got, want in zip(e, nested_trio):
            np.testing.assert_array_equal(got.values, want.values)

    def test_weights_path(self, tmp_path, nested_trio):
        entries = self._write_members(tmp_path, list(nested_trio))
        write_volume(np.array([1.0, 2.0, 3.0, 4.0]), tmp_path / "w.npy")
        write_manifest(tmp_path / "manifest.json", (4,), entries, weights_path="w.npy")
        e = read_manifest(tmp_path / "manifest.json")
        np.testing.assert_array_equal(e.grid.weights, [1.0, 2.0, 3.0, 4.0])

    def test_field_roles(self, tmp_path):
        field = ScalarField(GridSpec((8,)), np.arange(8, dtype=np.float64))
        write_volume(field, tmp_path / "f.npy")
        write_manifest(
            tmp_path / "manifest.json",
            (8,),
            [
                {
                    "id": "band",
                    "path": "f.npy",
                    "role": "field",
                    "fuzzify": {"mode": "isovalue", "q": 3.0, "width": 2.0},
                },
                {
                    "id": "below",
                    "path": "f.npy",
                    "role": "field",
                    "fuzzify": {"mode": "sublevel", "q": 4.0},
                },
                {
                    "id": "dens",
                    "path": "f.npy",
                    "role": "field",
                    "fuzzify": {"mode": "scale-by-max"},
                },
            ],
        )
        e = read_manifest(tmp_path / "manifest.json")
        np.testing.assert_allclose(
            e.member(0).values, np.maximum(0, 1 - np.abs(np.arange(8) - 3) / 2)
        )
        np.testing.assert_array_equal(
            e.member(1).values, (np.arange(8) < 4).astype(np.float32)
        )
        np.testing.assert_allclose(e.member(2).values64(), np.arange(8) / 7, atol=1e-7)

    def test_shape_mismatch_names_offender(self, tmp_path):
        g = GridSpec((4,))
        write_volume(ProbMask(g, np.zeros(4, dtype=np.float32)), tmp_path / "ok.npy")
        write_volume(
            ProbMask(GridSpec((5,)), np.zeros(5, dtype=np.float32)),
            tmp_path / "bad.npy",
        )
        write_manifest(
            tmp_path / "manifest.json",
            (4,),
            [{"id": "ok", "path": "ok.npy"}, {"id": "odd", "path": "bad.npy"}],
        )
        with pytest.raises(ManifestError, match="odd"):
            read_manifest(tmp_path / "manifest.json")

    def test_error_cases(self, tmp_path):
        with pytest.raises(ManifestError):
            read_manifest(tmp_path / "nope.json")
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(ManifestError):
            read_manifest(bad)
        write_manifest(tmp_path / "empty.json", (4,), [])
        with pytest.raises(ManifestError):
            read_manifest(tmp_path / "empty.json")

    def test_duplicate_ids_rejected(self, tmp_path, nested_trio):
        entries = self._write_members(tmp_path, [nested_trio.member(0)] * 2)
        for entry in entries:
            entry["id"] = "same"
        write_manifest(tmp_path / "manifest.json", (4,), entries)
        with pytest.raises(ManifestError, match="duplicate"):
            read_manifest(tmp_path / "manifest.json")

    def test_fuzzify_on_mask_rejected(self, tmp_path, nested_trio):
        entries = self._write_members(tmp_path, [nested_trio.member(0)])
        entries[0]["fuzzify"] = {"mode": "isovalue", "q": 0.5}
        write_manifest(tmp_path / "manifest.json", (4,), entries)
        with pytest.raises(ManifestError):
            read_manifest(tmp_path / "manifest.json")

    def test_binary_guarantee(self, tmp_path, nested_trio):
        g = nested_trio.grid
        bits = BinaryMask(g, np.array([1, 0, 0, 1], dtype=bool))
        write_volume(bits, tmp_path / "b.npy")
        write_volume(nested_trio.member(0), tmp_path / "f.npy")
        write_manifest(
            tmp_path / "bin.json", (4,), [{"id": "b", "path": "b.npy"}]
        )
        write_manifest(
            tmp_path / "fuzzy.json", (4,), [{"id": "f", "path": "f.npy"}]
        )
        assert manifest_guarantees_binary(tmp_path / "bin.json")
        assert not manifest_guarantees_binary(tmp_path / "fuzzy.json")


class TestDepthCsv:
    def test_roundtrip_is_exact(self, tmp_path, nested_trio):
        r = depth_pid(nested_trio)
        p = tmp_path / "depth.csv"
        write_depth_csv(r, p, workers=2)
        back = read_depth_csv(p)
        assert back.ids == r.ids
        # repr() emits shortest-roundtrip decimals, so equality is bitwise
        np.testing.assert_array_equal(back.in_in, r.in_in)
        np.testing.assert_array_equal(back.in_out, r.in_out)
        np.testing.assert_array_equal(back.depth, r.depth)
        np.testing.assert_array_equal(back.rank, r.rank)
        assert back.method == "pid"
        assert back.cv_mass == r.cv_mass

    def test_header_and_sidecar(self, tmp_path, nested_trio):
        r = depth_pid(nested_trio)
        p = tmp_path / "depth.csv"
        write_depth_csv(r, p, workers=3)
        lines = p.read_text().splitlines()
        assert lines[0] == "id,in_in,in_out,depth,rank,method"
        assert len(lines) == 4
        assert "elapsed" not in p.read_text()
        meta = json.loads((tmp_path / "depth.csv.json").read_text())
        assert meta["method"] == "pid"
        assert meta["n"] == 3
        assert meta["workers"] == 3
        assert "elapsed_seconds" in meta

    def test_rejects_empty_and_malformed(self, tmp_path):
        p = tmp_path / "x.csv"
        p.write_text("id,in_in,in_out,depth,rank,method\n")
        with pytest.raises(ValidationError):
            read_depth_csv(p)
        p.write_text("id,in_in,in_out,depth,rank,method\na,0.5,oops,0.5,0,pid\n")
        with pytest.raises(ValidationError):
            read_depth_csv(p)


def test_scatter_csv(tmp_path, nested_trio):
    sc = rank_scatter(depth_pid(nested_trio), depth_pid(nested_trio))
    p = tmp_path / "scatter.csv"
    write_scatter_csv(sc, p)
    lines = p.read_text().splitlines()
    assert lines[0] == "# pearson=1.0 kendall=1.0"
    assert lines[1] == "id,rank_a,rank_b,abs_delta"
    assert len(lines) == 5


def test_boxplot_artifact_dir(tmp_path, nested_trio):
    r = depth_pid(nested_trio)
    art = build_boxplot(nested_trio, r, [0.5, 1.0], outlier_count=1)
    json_path = write_boxplot_artifact(art, tmp_path / "out")
    doc = json.loads(json_path.read_text())
    assert doc["median_id"] == "c1"
    assert doc["outlier_ids"] == ["c2"]
    assert doc["threshold"] == 0.5
    assert [b["percentile"] for b in doc["bands"]] == [0.5, 1.0]
    union = read_volume(tmp_path / "out" / doc["bands"][0]["union"])
    np.testing.assert_array_equal(union.bits, [1, 1, 1, 0])
    inter = read_volume(tmp_path / "out" / doc["bands"][1]["intersection"])
    np.testing.assert_array_equal(inter.bits, [0, 1, 0, 0])
