"""
Amplitude spectra and waterfalls
================================

A tone's amplitude reads directly off the single-sided spectrum, and a
waterfall shows how that spectrum changes from block to block.
"""

import numpy as np

from envspec import SampledSignal, amplitude_spectrum, waterfall

fs = 5000.0
t = np.arange(32768) / fs

# a 1 N tone at 400 Hz that jumps to 900 Hz halfway through
x = np.where(t < t[-1] / 2, np.cos(2 * np.pi * 400 * t), np.cos(2 * np.pi * 900 * t))
sig = SampledSignal("fx", "N", fs, x)

###############################################################################
# Whole record, Hann window.  The two halves each show up at about half amplitude.
spec = amplitude_spectrum(sig, "hann")
for lo, hi in [(300, 500), (800, 1000)]:
    f, a = spec.peak(lo, hi)
    print(f"peak in [{lo}, {hi}] Hz: {a:.3f} N at {f:.2f} Hz")

###############################################################################
# Blocks of 4096 samples with 50% overlap.  Each slice sees a single tone,
# apart from the one straddling the switch.
wf = waterfall(sig, 4096, overlap=0.5)
for t0, s in wf.slices:
    f, a = s.peak()
    print(f"t = {t0:6.3f} s  dominant {f:7.2f} Hz  ({a:.3f} N)")

# the record's default 20000-sample block fits once into 32768 samples
print("slices at block 20000:", len(waterfall(sig, 20000).slices))
