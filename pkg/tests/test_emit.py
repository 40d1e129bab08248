"""CSV/SVG emission, parsing, metadata sidecars, content hashing."""

import dataclasses
import json

import numpy as np
import numpy.testing as npt
import pytest

from scmlink import emit, harness, presets


def _tiny_curve():
    cfg = dataclasses.replace(presets.preset("awgn-bpsk"), snr_db=(0.0, 3.0), num_blocks=200)
    return harness.run_ber_sweep(cfg)


def _empty_curve():
    return harness.BerCurve(
        name="empty",
        snr_db=np.array([], dtype=np.float64),
        bit_errors=np.array([], dtype=np.int64),
        total_bits=np.array([], dtype=np.int64),
    )


class TestCsv:
    def test_header(self):
        assert emit.CSV_HEADER == "snr_db,bit_errors,total_bits,ber"
        assert emit.AOA_CSV_HEADER == (
            "user,aoa_estimate_deg,configured_aoa_deg,distance_m,direction_deg"
        )

    def test_empty_curve_header_only(self, tmp_path):
        path = str(tmp_path / "empty.csv")
        emit.emit(_empty_curve(), path)
        with open(path, encoding="utf-8") as fh:
            assert fh.read() == emit.CSV_HEADER + "\n"

    def test_roundtrip(self, tmp_path):
        curve = _tiny_curve()
        path = str(tmp_path / "curve.csv")
        emit.emit(curve, path)
        back = emit.parse_csv(path)
        assert back.name == "curve"
        npt.assert_array_equal(back.snr_db, curve.snr_db)
        npt.assert_array_equal(back.bit_errors, curve.bit_errors)
        npt.assert_array_equal(back.total_bits, curve.total_bits)
        npt.assert_allclose(back.ber, curve.ber, rtol=0, atol=0)

    def test_byte_identical_across_runs(self, tmp_path):
        a = str(tmp_path / "a.csv")
        b = str(tmp_path / "b.csv")
        emit.emit(_tiny_curve(), a)
        emit.emit(_tiny_curve(), b)
        with open(a, "rb") as fa, open(b, "rb") as fb:
            assert fa.read() == fb.read()

    def test_unknown_format_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="format"):
            emit.emit(_tiny_curve(), str(tmp_path / "x.bin"), format="parquet")

    def test_unwritable_path_surfaces_os_error(self, tmp_path):
        with pytest.raises(OSError):
            emit.emit(_tiny_curve(), str(tmp_path / "no" / "such" / "dir.csv"))


class TestContentHash:
    def test_git_blob_sha1_known_value(self):
        assert (
            emit.git_blob_sha1(b"hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a"
        )

    def test_metadata_hash_matches_body(self):
        curve = _tiny_curve()
        meta = emit.curve_metadata(curve)
        assert meta["content_sha1"] == emit.git_blob_sha1(
            emit.csv_body(curve).encode("utf-8")
        )


class TestMetadataSidecar:
    def test_fields(self, tmp_path):
        curve = _tiny_curve()
        path = str(tmp_path / "curve.csv")
        emit.emit(curve, path)
        with open(path + ".meta.json", encoding="utf-8") as fh:
            meta = json.load(fh)
        assert meta["name"] == curve.name
        assert meta["seed"] == 42
        assert meta["snr_definition"] == emit.SNR_DEFINITION
        assert meta["warnings"] == []
        assert meta["config"]["channel_kind"] == "awgn"
        assert meta["config"]["num_blocks"] == 200
        assert len(meta["content_sha1"]) == 40

    def test_warnings_recorded(self, tmp_path):
        base = presets.preset("fig4.4-2path")
        spec = dataclasses.replace(
            base.rayleigh, tap_delays_s=(0.0, 4.0e-6), tap_powers=(0.5, 0.5)
        )
        cfg = dataclasses.replace(base, rayleigh=spec, snr_db=(10.0,), num_blocks=4)
        curve = harness.run_ber_sweep(cfg)
        path = str(tmp_path / "warned.csv")
        emit.emit(curve, path)
        with open(path + ".meta.json", encoding="utf-8") as fh:
            meta = json.load(fh)
        assert len(meta["warnings"]) == 1
        assert "guard interval" in meta["warnings"][0]


class TestSvg:
    def test_svg_output(self, tmp_path):
        pytest.importorskip("matplotlib")
        path = str(tmp_path / "curve.svg")
        emit.emit(_tiny_curve(), path, format="svg")
        with open(path, encoding="utf-8") as fh:
            head = fh.read(512)
        assert "<svg" in head


class TestAoaRows:
    def _report(self, estimated):
        return harness.AoaReport(
            name="toy",
            estimated_deg=np.asarray(estimated, dtype=np.float64),
            link_angles_deg=np.array([-40.0, 20.0, 40.0]),
            distances_m=np.array([349.2884, 422.5138, 422.8360]),
            directions_deg=np.array([109.7538, 147.0231, -96.5180]),
            path_loss_db=np.array([1.0, 2.0, 3.0]),
            spectrum_grid_deg=np.linspace(-90.0, 90.0, 5),
            spectrum=np.ones(5),
            tensor_dims=(8, 2, 3, 3, 10),
            elapsed_s=0.0,
        )

    def test_nearest_assignment(self):
        rows = emit.aoa_rows(self._report([19.3, -41.0, 40.6]))
        assert [r[0] for r in rows] == [1, 2, 3]
        assert rows[0][1] == pytest.approx(-41.0)
        assert rows[1][1] == pytest.approx(19.3)
        assert rows[2][1] == pytest.approx(40.6)
        assert rows[0][3] == pytest.approx(349.2884)
        assert rows[2][4] == pytest.approx(-96.5180)

    def test_missing_estimate_becomes_nan(self):
        rows = emit.aoa_rows(self._report([19.3, -41.0]))
        assert np.isnan(rows[2][1])
        assert rows[2][2] == pytest.approx(40.0)

    def test_emit_aoa_file(self, tmp_path):
        path = str(tmp_path / "aoa.csv")
        emit.emit_aoa(self._report([19.3, -41.0, 40.6]), path)
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        assert lines[0] == emit.AOA_CSV_HEADER
        assert len(lines) == 4
        assert lines[1].startswith("1,")
