import json
import os
import subprocess
import sys

import numpy as np
import pytest

from envspec.cli import main
from envspec.core import read_record


def run(*argv):
    return main([str(a) for a in argv])


def synth_direct(f_rot=33.33, teeth=3, gains=None, fs=5000.0, duration=2.0, f_res=1500.0, zeta=0.05):
    # straight evaluation of the ring-down sum, one strike at a time, no truncation
    gains = np.ones(teeth) if gains is None else np.asarray(gains, float)
    t = np.arange(int(round(duration * fs))) / fs
    w = 2 * np.pi * f_res
    wd = w * np.sqrt(1 - zeta ** 2)
    x = np.zeros_like(t)
    j = 0
    while j / (teeth * f_rot) < duration:
        ti = j / (teeth * f_rot)
        tau = t - ti
        on = tau >= 0
        x[on] += gains[j % teeth] * np.exp(-zeta * w * tau[on]) * np.sin(wd * tau[on])
        j += 1
    return x


@pytest.fixture
def sym_record(tmp_path):
    path = tmp_path / "sym.csv"
    assert run("synth", "-o", path) == 0
    return path


@pytest.fixture
def asym_record(tmp_path):
    path = tmp_path / "asym.csv"
    assert run("synth", "--teeth", 3, "--f-rot", 33.33, "--gains", "1,1,0.5", "-o", path) == 0
    return path


class TestSynth:
    def test_example_invocation(self, asym_record):
        rec = read_record(asym_record)
        assert rec.cutter.teeth == 3 and rec.n_samples == 10000

    def test_gain_mismatch(self, tmp_path, capsys):
        assert run("synth", "--teeth", 3, "--gains", "1,1", "-o", tmp_path / "x.csv") == 2
        err = capsys.readouterr().err
        assert "tooth_gains" in err and "teeth" in err
        assert not (tmp_path / "x.csv").exists()

    def test_default_matches_direct_evaluation(self, sym_record):
        rec = read_record(sym_record)
        assert rec.sample_rate_hz == 5000.0 and rec.n_samples == 10000
        assert [(c.name, c.unit) for c in rec.channels] == [("fx", "N"), ("ax", "m/s^2")]
        assert rec.cutter.teeth == 3 and rec.cutter.diameter_mm == 25.0
        assert rec.block_size == 20000 and rec.buffer_size == 32768
        assert np.allclose(np.diff(rec.tacho.pulse_times_s), 1 / 33.33)
        assert np.max(np.abs(rec.channel("fx").samples - synth_direct())) < 1e-10

    def test_seeded_noise_repeatable(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run("synth", "--snr-db", 20, "--seed", 5, "-o", a) == 0
        assert run("synth", "--snr-db", 20, "--seed", 5, "-o", b) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_config_file(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"teeth": 2, "f_rot_hz": 40.0, "duration_s": 1.0}))
        out = tmp_path / "r.bin"
        assert run("synth", "--config", cfg, "--seed", 1, "-o", out) == 0
        rec = read_record(out)
        assert rec.cutter.teeth == 2 and rec.n_samples == 5000


class TestAnalyze:
    def test_symmetric_exit_0(self, sym_record, tmp_path):
        out = tmp_path / "o"
        assert run("analyze", sym_record, "--band", "700:2500", "--teeth", 3, "-o", out, "--no-timestamp") == 0
        rep = json.loads((out / "report.json").read_text())
        assert rep["verdict"] == "clean" and rep["exit_code"] == 0
        for ch in rep["channels"].values():
            assert ch["diagnostics"]["asymmetry_flag"] is False
            for name in ch["artifacts"]:
                assert (out / name).exists()

    def test_half_gain_exit_3(self, asym_record, tmp_path):
        out = tmp_path / "o"
        code = run("analyze", asym_record, "--band", "700:2500", "--teeth", 3, "-o", out, "--no-timestamp")
        rep = json.loads((out / "report.json").read_text())
        orders = {r["order"]: r["amplitude"] for r in rep["channels"]["fx"]["orders"]}
        assert orders[2] >= 0.3 * orders[3]
        assert code == 3

    def test_band_above_nyquist(self, sym_record, tmp_path, capsys):
        assert run("analyze", sym_record, "--band", "700:3000", "--teeth", 3, "-o", tmp_path) == 2
        assert "Nyquist" in capsys.readouterr().err

    def test_report_byte_stable(self, sym_record, tmp_path):
        docs = []
        for k in range(2):
            out = tmp_path / f"o{k}"
            assert run("analyze", sym_record, "-o", out, "--no-timestamp") == 0
            docs.append((out / "report.json").read_bytes())
        assert docs[0] == docs[1]
        assert json.loads(docs[0])["timestamp"] is None

    def test_timestamp_present_by_default(self, sym_record, tmp_path):
        run("analyze", sym_record, "-o", tmp_path)
        assert json.loads((tmp_path / "report.json").read_text())["timestamp"]

    def test_strict_inconclusive(self, tmp_path):
        rec = tmp_path / "noisy.csv"
        assert run("synth", "--noise-rms", 50, "--seed", 1, "-o", rec) == 0
        assert run("analyze", rec, "-o", tmp_path / "a", "--threshold", 0.5) == 0
        assert run("analyze", rec, "-o", tmp_path / "b", "--strict") == 4
        rep = json.loads((tmp_path / "b" / "report.json").read_text())
        assert rep["verdict"] == "inconclusive"

    def test_missing_file(self, tmp_path):
        assert run("analyze", tmp_path / "nope.csv", "-o", tmp_path) == 1

    def test_corrupt_file(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("1,2,3\n")
        assert run("analyze", bad, "-o", tmp_path) == 1

    def test_unknown_channel(self, sym_record, tmp_path):
        assert run("analyze", sym_record, "--channels", "fz", "-o", tmp_path) == 2

    def test_f_rot_and_rpm_exclusive(self, sym_record, tmp_path):
        assert run("analyze", sym_record, "--f-rot", 30, "--rpm", 1800, "-o", tmp_path) == 2

    def test_block_mode(self, tmp_path):
        rec = tmp_path / "long.csv"
        assert run("synth", "--duration", 4.5, "-o", rec) == 0
        out = tmp_path / "o"
        assert run("analyze", rec, "--block-mode", "--block", 10000, "-o", out, "--no-timestamp") == 0
        rep = json.loads((out / "report.json").read_text())
        blocks = rep["channels"]["fx"]["blocks"]
        assert [b["start_s"] for b in blocks] == [0.0, 2.0]
        assert all(b["order_domain"] == "time" for b in blocks)
        assert (out / "fx_b001_orders.csv").exists()

    def test_without_tacho_uses_flags(self, tmp_path):
        from envspec.core import write_record
        src = read_record(self._synth(tmp_path))
        stripped = type(src)(forces=src.forces, accelerations=src.accelerations, cutter=src.cutter)
        path = tmp_path / "notacho.csv"
        write_record(stripped, path)
        out = tmp_path / "o"
        assert run("analyze", path, "--rpm", 1999.8, "-o", out, "--no-timestamp") == 0
        rep = json.loads((out / "report.json").read_text())
        assert rep["f_rot_source"] == "flag" and rep["f_rot_hz"] == pytest.approx(33.33)
        assert rep["channels"]["fx"]["order_domain"] == "time"

    @staticmethod
    def _synth(tmp_path):
        p = tmp_path / "s.csv"
        run("synth", "-o", p)
        return p


class TestOtherCommands:
    def test_waterfall_one_block(self, tmp_path):
        rec = tmp_path / "r.csv"
        assert run("synth", "--duration", 32768 / 5000, "-o", rec) == 0
        out = tmp_path / "o"
        assert run("waterfall", rec, "--block", 20000, "--channels", "fx", "-o", out) == 0
        rows = (out / "fx_waterfall.csv").read_text().splitlines()
        assert rows[0] == "time_s,frequency_hz,amplitude"
        assert {r.split(",")[0] for r in rows[1:]} == {"0"}
        assert len(rows) - 1 == 10001

    def test_spectrum(self, sym_record, tmp_path, capsys):
        assert run("spectrum", sym_record, "--window", "hann", "--channels", "fx", "-o", tmp_path) == 0
        data = np.loadtxt(tmp_path / "fx_spectrum.csv", delimiter=",", skiprows=1)
        f = data[np.argmax(data[:, 1]), 0]
        assert 1300 < f < 1700
        assert "peak" in capsys.readouterr().out

    def test_envelope_peak_at_tooth_pass(self, sym_record, tmp_path):
        assert run("envelope", sym_record, "--channels", "fx", "-o", tmp_path, "--gnuplot") == 0
        data = np.loadtxt(tmp_path / "fx_envelope_spectrum.csv", delimiter=",", skiprows=1)
        sel = data[:, 0] > 5
        f = data[sel][np.argmax(data[sel, 1]), 0]
        assert abs(f - 3 * 33.33) <= 0.5
        assert (tmp_path / "fx_plots.gp").exists()


def test_no_color_env(sym_record, tmp_path):
    env = dict(os.environ, ENVSPEC_NO_COLOR="1")
    res = subprocess.run([sys.executable, "-m", "envspec", "analyze", str(sym_record), "-o", str(tmp_path)],
                         env=env, capture_output=True, text=True)
    assert res.returncode == 0 and "\x1b[" not in res.stderr


def test_version():
    assert run("--version") == 0


def test_no_command():
    assert run() == 2
