"""
Reading and writing records
===========================

Records travel as CSV (one metadata header line plus one column per channel)
or as a little-endian float64 binary with a JSON sidecar.  Both round-trip
bit-exactly.
"""

import tempfile
from pathlib import Path

import numpy as np

from envspec import SynthConfig, read_record, synth_milling, write_record
from envspec.core import block_starts, slice_blocks

rec = synth_milling(SynthConfig(noise_rms=0.05, seed=3))
tmp = Path(tempfile.mkdtemp())

for name in ("run.csv", "run.bin"):
    path = tmp / name
    write_record(rec, path)
    back = read_record(path)
    same = all(np.array_equal(a.samples, b.samples) for a, b in zip(rec.channels, back.channels))
    print(f"{name}: {path.stat().st_size} bytes, channels {[c.name for c in back.channels]}, exact {same}")

print((tmp / "run.csv").read_text().splitlines()[0][:100], "...")
print("sidecar:", sorted(p.name for p in tmp.iterdir()))

###############################################################################
# Blocks for on-line style processing
blocks = slice_blocks(rec.channel("fx"), 4000, overlap=0.5)
starts = block_starts(rec.n_samples, 4000, 0.5) / rec.sample_rate_hz
print(f"{len(blocks)} blocks of 4000 samples starting at {starts.tolist()} s")
