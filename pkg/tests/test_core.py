import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from envspec.core import (
    AcquisitionRecord,
    CutConditions,
    CutterSpec,
    InvariantError,
    RecordFormatError,
    SampledSignal,
    TachoTrace,
    block_starts,
    read_record,
    slice_blocks,
    write_record,
)
from envspec.synth import SynthConfig, synth_milling


def _record(rng, n=50, with_meta=True):
    fs = 5000.0
    forces = tuple(SampledSignal(nm, "N", fs, rng.normal(size=n) * 100) for nm in ("fx", "fy", "fz"))
    accels = tuple(SampledSignal(nm, "m/s^2", fs, rng.normal(size=n)) for nm in ("ax", "ay", "az"))
    if not with_meta:
        return AcquisitionRecord(forces=forces, accelerations=accels)
    return AcquisitionRecord(
        forces=forces,
        accelerations=accels,
        tacho=TachoTrace(np.cumsum(rng.uniform(0.001, 0.003, 5)), 2),
        cutter=CutterSpec(3, 25.0),
        conditions=CutConditions(157.0, 0.1, 0.5),
        block_size=20,
        buffer_size=40,
    )


class TestTypes:
    def test_signal_rejects_bad_rate(self):
        with pytest.raises(InvariantError, match="sample_rate_hz > 0"):
            SampledSignal("x", "N", 0.0, [1.0])

    def test_signal_rejects_nan(self):
        with pytest.raises(InvariantError, match="finite"):
            SampledSignal("x", "N", 10.0, [1.0, np.nan])

    def test_signal_rejects_empty(self):
        with pytest.raises(InvariantError, match="length >= 1"):
            SampledSignal("x", "N", 10.0, [])

    def test_signal_is_read_only(self):
        s = SampledSignal("x", "N", 10.0, [1.0, 2.0])
        with pytest.raises(ValueError):
            s.samples[0] = 5.0

    def test_tacho_strictly_increasing(self):
        with pytest.raises(InvariantError, match="strictly increasing"):
            TachoTrace([0.0, 0.1, 0.1])
        with pytest.raises(InvariantError, match="pulses_per_rev"):
            TachoTrace([0.0, 0.1], 0)

    @pytest.mark.parametrize("kw", [{"teeth": 0}, {"diameter_mm": -1.0}])
    def test_cutter_invariants(self, kw):
        with pytest.raises(InvariantError):
            CutterSpec(**kw)

    def test_conditions_invariants(self):
        with pytest.raises(InvariantError, match="depth_of_cut_mm > 0"):
            CutConditions(157.0, 0.1, 0.0)

    def test_record_length_mismatch(self):
        a = SampledSignal("fx", "N", 10.0, np.ones(5))
        b = SampledSignal("fy", "N", 10.0, np.ones(6))
        with pytest.raises(InvariantError, match="share length"):
            AcquisitionRecord(forces=(a, b))

    def test_record_rate_mismatch(self):
        a = SampledSignal("fx", "N", 10.0, np.ones(5))
        b = SampledSignal("fy", "N", 11.0, np.ones(5))
        with pytest.raises(InvariantError, match="sample_rate_hz"):
            AcquisitionRecord(forces=(a, b))

    def test_record_block_le_buffer(self):
        a = SampledSignal("fx", "N", 10.0, np.ones(5))
        with pytest.raises(InvariantError, match="block_size <= buffer_size"):
            AcquisitionRecord(forces=(a,), block_size=10, buffer_size=5)

    def test_record_needs_a_channel(self):
        with pytest.raises(InvariantError, match="at least one channel"):
            AcquisitionRecord()

    def test_duration(self):
        r = AcquisitionRecord(forces=(SampledSignal("fx", "N", 5000.0, np.zeros(5000)),))
        assert r.duration_s == 1.0


class TestSliceBlocks:
    def test_single_block(self):
        s = SampledSignal("x", "N", 5000.0, np.zeros(20000))
        assert len(slice_blocks(s, 20000)) == 1

    def test_default_buffer_and_block(self):
        # 32,768-sample buffer, 20,000-sample block: one block, remainder dropped
        s = SampledSignal("x", "N", 5000.0, np.arange(32768.0))
        blocks = slice_blocks(s, 20000, 0.0)
        assert len(blocks) == 1
        assert np.array_equal(blocks[0].samples, np.arange(20000.0))

    def test_half_overlap_by_hand(self):
        # length 10, block 4, step 2: starts 0,2,4,6 (8 would overrun)
        s = SampledSignal("x", "N", 1.0, np.arange(10.0))
        blocks = slice_blocks(s, 4, 0.5)
        assert [b.samples[0] for b in blocks] == [0, 2, 4, 6]

    def test_block_too_long(self):
        s = SampledSignal("x", "N", 1.0, np.arange(10.0))
        with pytest.raises(ValueError, match="exceeds"):
            slice_blocks(s, 11)

    @given(
        length=st.integers(1, 500),
        block=st.integers(1, 500),
        overlap=st.floats(0.0, 0.99),
    )
    def test_block_properties(self, length, block, overlap):
        if block > length:
            return
        starts = block_starts(length, block, overlap)
        step = max(1, int(np.floor(block * (1 - overlap) + 0.5)))
        assert len(starts) == (length - block) // step + 1
        assert np.all(np.diff(starts) == step)
        assert starts[-1] + block <= length


class TestRecordIO:
    @pytest.mark.parametrize("fmt,suffix", [("csv", ".csv"), ("raw-binary", ".bin")])
    def test_round_trip_exact(self, tmp_path, rng, fmt, suffix):
        rec = _record(rng)
        path = tmp_path / f"rec{suffix}"
        write_record(rec, path, fmt)
        back = read_record(path, fmt)
        assert back == rec

    def test_csv_digits(self, tmp_path):
        v = 0.1 + 0.2
        rec = AcquisitionRecord(forces=(SampledSignal("fx", "N", 3.0, [v, 1 / 3]),))
        write_record(rec, tmp_path / "r.csv")
        assert read_record(tmp_path / "r.csv").channel("fx").samples[0] == v

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=1, max_size=40))
    def test_csv_round_trip_any_float(self, tmp_path_factory, values):
        path = tmp_path_factory.mktemp("rt") / "r.csv"
        rec = AcquisitionRecord(accelerations=(SampledSignal("ax", "g", 100.0, values),))
        write_record(rec, path)
        assert read_record(path) == rec

    def test_read_csv_by_hand(self, tmp_path):
        meta = {"sample_rate_hz": 5000, "channels": [{"name": n, "unit": "N", "kind": "force"} for n in ("fx", "fy", "fz")]}
        rows = "\n".join("1,2,3" for _ in range(5000))
        path = tmp_path / "hand.csv"
        path.write_text("# envspec-meta: " + json.dumps(meta) + "\n" + rows + "\n")
        rec = read_record(path)
        assert len(rec.forces) == 3 and rec.duration_s == 1.0

    def test_nan_in_csv(self, tmp_path):
        meta = {"sample_rate_hz": 10, "channels": [{"name": "fx", "unit": "N"}]}
        path = tmp_path / "nan.csv"
        path.write_text("# envspec-meta: " + json.dumps(meta) + "\n1.0\nNaN\n")
        with pytest.raises(InvariantError, match="finite"):
            read_record(path)

    def test_missing_header(self, tmp_path):
        path = tmp_path / "bare.csv"
        path.write_text("1,2\n3,4\n")
        with pytest.raises(RecordFormatError, match="header"):
            read_record(path)

    def test_ragged_rows(self, tmp_path):
        meta = {"sample_rate_hz": 10, "channels": [{"name": "fx"}, {"name": "fy"}]}
        path = tmp_path / "ragged.csv"
        path.write_text("# envspec-meta: " + json.dumps(meta) + "\n1,2\n3\n")
        with pytest.raises(InvariantError, match="share length"):
            read_record(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            read_record(tmp_path / "nope.csv")

    def test_raw_bad_magic(self, tmp_path, rng):
        path = tmp_path / "r.bin"
        write_record(_record(rng), path)
        blob = bytearray(path.read_bytes())
        blob[:4] = b"XXXX"
        path.write_bytes(bytes(blob))
        with pytest.raises(RecordFormatError, match="magic"):
            read_record(path)

    def test_raw_layout(self, tmp_path):
        rec = AcquisitionRecord(
            forces=(SampledSignal("fx", "N", 10.0, [1.0, 2.0]),),
            accelerations=(SampledSignal("ax", "g", 10.0, [3.0, 4.0]),),
        )
        path = tmp_path / "r.bin"
        write_record(rec, path)
        blob = path.read_bytes()
        assert blob[:4] == b"ENVS" and blob[4:6] == b"\x01\x00"
        assert np.array_equal(np.frombuffer(blob[6:], "<f8"), [1.0, 3.0, 2.0, 4.0])
        assert (tmp_path / "r.bin.meta.json").exists()

    def test_sidecar_has_tacho(self, tmp_path, rng):
        rec = _record(rng)
        write_record(rec, tmp_path / "r.bin")
        meta = json.loads((tmp_path / "r.bin.meta.json").read_text())
        assert meta["tacho"]["pulse_times_s"] == rec.tacho.pulse_times_s.tolist()

    def test_synth_round_trip(self, tmp_path):
        rec = synth_milling(SynthConfig(noise_rms=0.1, seed=3, duration_s=0.5))
        for name in ("s.csv", "s.bin"):
            write_record(rec, tmp_path / name)
            assert read_record(tmp_path / name) == rec

    def test_empty_channel_rejected_before_write(self):
        with pytest.raises(InvariantError, match="length >= 1"):
            AcquisitionRecord(forces=(SampledSignal("fx", "N", 10.0, []),))
