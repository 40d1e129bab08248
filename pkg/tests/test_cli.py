"""CLI surface: subcommands, config files, flag precedence, exit codes."""

import json
import shutil
import subprocess

import pytest

from scmlink import cli, presets


def _run(argv, capsys):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestListPresets:
    def test_catalog_complete(self, capsys):
        code, out, _ = _run(["list-presets"], capsys)
        assert code == 0
        for name in presets.PRESET_NAMES:
            assert name in out
        for line in out.splitlines():
            name = line.split()[0]
            expected = "aoa scene" if name in presets.AOA_PRESET_NAMES else "ber sweep"
            assert expected in line


class TestSimulate:
    def test_writes_csv_meta_and_plot(self, tmp_path, capsys):
        pytest.importorskip("matplotlib")
        out = str(tmp_path / "curve.csv")
        plot = str(tmp_path / "curve.svg")
        code, stdout, _ = _run(
            [
                "simulate", "--preset", "awgn-bpsk", "--snr", "0:1",
                "--blocks", "8", "--out", out, "--plot", plot,
            ],
            capsys,
        )
        assert code == 0
        assert stdout == ""  # --out suppresses the stdout dump
        with open(out, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        assert lines[0] == "snr_db,bit_errors,total_bits,ber"
        assert len(lines) == 3
        with open(out + ".meta.json", encoding="utf-8") as fh:
            meta = json.load(fh)
        assert meta["config"]["num_blocks"] == 8
        assert meta["config"]["snr_db"] == [0.0, 1.0]
        with open(plot, encoding="utf-8") as fh:
            assert "<svg" in fh.read(512)

    def test_stdout_csv_without_out(self, capsys):
        code, stdout, _ = _run(
            ["simulate", "--preset", "awgn-bpsk", "--snr", "2:2", "--blocks", "4"],
            capsys,
        )
        assert code == 0
        assert stdout.splitlines()[0] == "snr_db,bit_errors,total_bits,ber"
        assert stdout.splitlines()[1].startswith("2.0,")

    def test_unknown_preset_lists_catalog(self, capsys):
        code, _, err = _run(["simulate", "--preset", "nope"], capsys)
        assert code == 2
        assert "unknown preset 'nope'" in err
        assert "fig4.4-2path" in err

    def test_scene_preset_rejected(self, capsys):
        code, _, err = _run(["simulate", "--preset", "scm-case1"], capsys)
        assert code == 2
        assert "direction-finding scene" in err

    def test_neither_preset_nor_config(self, capsys):
        code, _, err = _run(["simulate"], capsys)
        assert code == 2
        assert "--preset and/or --config" in err

    def test_unwritable_out_path(self, tmp_path, capsys):
        out = str(tmp_path / "missing_dir" / "curve.csv")
        code, _, err = _run(
            ["simulate", "--preset", "awgn-bpsk", "--snr", "0:0", "--blocks", "4",
             "--out", out],
            capsys,
        )
        assert code == 3
        assert "io error" in err


class TestConfigFile:
    def _write(self, tmp_path, text):
        path = tmp_path / "exp.cfg"
        path.write_text(text, encoding="utf-8")
        return str(path)

    def test_full_custom_chain(self, tmp_path, capsys):
        cfg = self._write(
            tmp_path,
            "name=custom-2path\n"
            "channel_kind=rayleigh\n"
            "num_rx_antennas=2\n"
            "modulation.family=psk\n"
            "modulation.order=2\n"
            "rayleigh.tap_delays_s=0,1.6e-6\n"
            "rayleigh.tap_powers=0.5,0.5\n"
            "rayleigh.doppler_hz=100\n"
            "snr_db=5,7\n"
            "num_blocks=8\n"
            "coding=none\n",
        )
        out = str(tmp_path / "custom.csv")
        code, _, _ = _run(["simulate", "--config", cfg, "--out", out], capsys)
        assert code == 0
        with open(out + ".meta.json", encoding="utf-8") as fh:
            meta = json.load(fh)
        assert meta["name"] == "custom-2path"
        assert meta["config"]["coding"] is None
        assert meta["config"]["rayleigh"]["doppler_hz"] == 100.0

    def test_flag_beats_file(self, tmp_path, capsys):
        cfg = self._write(tmp_path, "snr_db=5,7\nnum_blocks=40\n")
        out = str(tmp_path / "o.csv")
        code, _, _ = _run(
            ["simulate", "--preset", "awgn-bpsk", "--config", cfg,
             "--snr", "1:2", "--blocks", "8", "--out", out],
            capsys,
        )
        assert code == 0
        with open(out + ".meta.json", encoding="utf-8") as fh:
            meta = json.load(fh)
        assert meta["config"]["snr_db"] == [1.0, 2.0]
        assert meta["config"]["num_blocks"] == 8

    def test_unknown_key(self, tmp_path, capsys):
        cfg = self._write(tmp_path, "snr_dbx=1\n")
        code, _, err = _run(["simulate", "--preset", "awgn-bpsk", "--config", cfg], capsys)
        assert code == 2
        assert "unknown config key 'snr_dbx'" in err

    def test_bad_value(self, tmp_path, capsys):
        cfg = self._write(tmp_path, "num_blocks=many\n")
        code, _, err = _run(["simulate", "--preset", "awgn-bpsk", "--config", cfg], capsys)
        assert code == 2
        assert "expected an integer" in err

    def test_dotted_scalar_conflict(self, tmp_path, capsys):
        cfg = self._write(tmp_path, "modulation.family=psk\nmodulation=qam\n")
        code, _, err = _run(["simulate", "--preset", "awgn-bpsk", "--config", cfg], capsys)
        assert code == 2
        assert "conflicts" in err

    def test_channel_swap_needs_subfields(self, tmp_path, capsys):
        # awgn-bpsk has no RayleighSpec; swapping the kind alone must fail
        # through ExperimentConfig validation.
        cfg = self._write(tmp_path, "channel_kind=rayleigh\n")
        code, _, err = _run(["simulate", "--preset", "awgn-bpsk", "--config", cfg], capsys)
        assert code == 2
        assert "requires a RayleighSpec" in err


class TestSnrGrid:
    def test_inclusive_default_step(self):
        assert cli._parse_snr("0:3") == (0.0, 1.0, 2.0, 3.0)

    def test_explicit_step(self):
        assert cli._parse_snr("5:14:3") == (5.0, 8.0, 11.0, 14.0)

    def test_empty_range_rejected(self, capsys):
        code, _, err = _run(
            ["simulate", "--preset", "awgn-bpsk", "--snr", "5:1"], capsys
        )
        assert code == 2
        assert "range is empty" in err


class TestAoaCommand:
    def test_case1_table(self, tmp_path, capsys):
        out = str(tmp_path / "angles.csv")
        code, stdout, _ = _run(["aoa", "--preset", "scm-case1", "--out", out], capsys)
        assert code == 0
        assert "scm-case1" in stdout
        assert "tensor dims [8, 2, 1, 1, 10]" in stdout
        with open(out, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        assert lines[0] == "user,aoa_estimate_deg,configured_aoa_deg,distance_m,direction_deg"
        assert len(lines) == 2
        assert lines[1].startswith("1,")

    def test_chain_preset_rejected(self, capsys):
        code, _, err = _run(["aoa", "--preset", "fig4.4-2path"], capsys)
        assert code == 2
        assert "BER sweep" in err

    def test_missing_preset(self, capsys):
        code, _, err = _run(["aoa"], capsys)
        assert code == 2
        assert "scm-case1" in err


class TestConsoleScript:
    def test_entry_point_runs(self):
        exe = shutil.which("scmlink")
        assert exe is not None, "console script not installed"
        proc = subprocess.run(
            [exe, "list-presets"], capture_output=True, text=True, timeout=120
        )
        assert proc.returncode == 0
        assert "awgn-bpsk" in proc.stdout
