"""
Envelope demodulation
=====================

A 1500 Hz carrier modulated at 100 Hz.  Band-passing around the carrier and
taking the magnitude of the analytic signal recovers the modulation, which
then stands out as a single line in the envelope spectrum.
"""

import numpy as np

from envspec import BandSpec, SampledSignal, analytic_signal, envelope

fs = 5000.0
n = 20000
t = np.arange(n) / fs
rng = np.random.default_rng(1)

am = (1 + 0.5 * np.cos(2 * np.pi * 100 * t)) * np.cos(2 * np.pi * 1500 * t)
# low-frequency rumble that the band-pass should throw away
rumble = 2.0 * np.cos(2 * np.pi * 35 * t)
x = SampledSignal("ax", "m/s^2", fs, am + rumble + 0.05 * rng.standard_normal(n))

###############################################################################
# The analytic signal of a pure cosine has a sine as its imaginary part.
z = analytic_signal(np.cos(2 * np.pi * 800 * t))
print("max |imag - sin|:", np.max(np.abs(z.imag - np.sin(2 * np.pi * 800 * t))))

###############################################################################
# Envelope through the default 700-2500 Hz band.
res = envelope(x, BandSpec(700, 2500, 50))
spec = res.envelope_spectrum
f, a = spec.peak(fmin=5)
print(f"envelope spectrum peak: {a:.3f} at {f:.1f} Hz (modulation depth 0.5 at 100 Hz)")
print(f"35 Hz rumble in envelope: {spec.peak(30, 40)[1]:.4f}")

# a band that misses the carrier leaves almost nothing
quiet = envelope(x, BandSpec(2000, 2400, 50)).envelope_spectrum
print(f"off-carrier band, 100 Hz line: {quiet.peak(95, 105)[1]:.4f}")
