"""Resonance-band envelope analysis.

The chain is: forward DFT, zero-phase band mask, inverse DFT (the filtered
waveform), analytic signal by one-sided spectrum construction, modulus (the
envelope), and finally the amplitude spectrum of the mean-removed envelope.
All filtering happens in the frequency domain, so impact timing is preserved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SampledSignal, atomic_write_text
from .spectral import (
    Spectrum,
    amplitude_spectrum,
    dft_forward,
    dft_inverse,
    spectrum_to_csv,
)

__all__ = [
    "BandSpec",
    "EnvelopeResult",
    "DEFAULT_BAND",
    "band_mask",
    "band_pass",
    "analytic_signal",
    "envelope",
    "envelope_to_csv",
    "waveform_to_csv",
]


@dataclass(frozen=True)
class BandSpec:
    """Pass band ``[low_hz, high_hz]`` with raised-cosine edges ``taper_hz`` wide.

    The taper sits inside the band: the mask reaches 1 at ``low_hz + taper_hz``
    and ``high_hz - taper_hz``.
    """

    low_hz: float
    high_hz: float
    taper_hz: float = 50.0

    def __post_init__(self):
        lo, hi, tp = float(self.low_hz), float(self.high_hz), float(self.taper_hz)
        if not lo >= 0:
            raise ValueError(f"band low edge must be >= 0 Hz, got {lo}")
        if not hi > lo:
            raise ValueError(f"band high edge {hi} Hz must exceed low edge {lo} Hz")
        if not 0 <= tp <= (hi - lo) / 2:
            raise ValueError(f"taper {tp} Hz must lie in [0, {(hi - lo) / 2}] Hz for band {lo}-{hi} Hz")
        object.__setattr__(self, "low_hz", lo)
        object.__setattr__(self, "high_hz", hi)
        object.__setattr__(self, "taper_hz", tp)

    def check(self, sample_rate_hz: float) -> None:
        """Raise ``ValueError`` if the band does not fit below Nyquist."""
        nyq = sample_rate_hz / 2
        if self.high_hz > nyq:
            raise ValueError(
                f"band {self.low_hz:g}-{self.high_hz:g} Hz exceeds Nyquist {nyq:g} Hz "
                f"at fs = {sample_rate_hz:g} Hz"
            )

    @classmethod
    def parse(cls, text: str) -> "BandSpec":
        """Parse ``LOW:HIGH[:TAPER]``."""
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise ValueError(f"band must be LOW:HIGH[:TAPER], got {text!r}")
        vals = [float(p) for p in parts]
        return cls(*vals)

    def __str__(self) -> str:
        return f"{self.low_hz:g}:{self.high_hz:g}:{self.taper_hz:g}"


# resonance band of tool and workpiece used for the milling measurements
DEFAULT_BAND = BandSpec(700.0, 2500.0, 50.0)


@dataclass(frozen=True)
class EnvelopeResult:
    filtered: SampledSignal
    envelope: SampledSignal
    envelope_spectrum: Spectrum


def band_mask(frequencies_hz: np.ndarray, band: BandSpec) -> np.ndarray:
    """Mask value for each (absolute) frequency."""
    f = np.abs(np.asarray(frequencies_hz, dtype=float))
    lo, hi, tp = band.low_hz, band.high_hz, band.taper_hz
    mask = ((f >= lo) & (f <= hi)).astype(float)
    if tp > 0:
        rise = (f >= lo) & (f < lo + tp)
        mask[rise] = 0.5 - 0.5 * np.cos(np.pi * (f[rise] - lo) / tp)
        fall = (f > hi - tp) & (f <= hi)
        mask[fall] = 0.5 - 0.5 * np.cos(np.pi * (hi - f[fall]) / tp)
    return mask


def band_pass(signal: SampledSignal, band: BandSpec) -> SampledSignal:
    """Zero-phase band-pass by masking the DFT of the whole signal."""
    band.check(signal.sample_rate_hz)
    spec = dft_forward(signal)
    freqs = np.fft.fftfreq(len(signal), 1.0 / signal.sample_rate_hz)
    masked = Spectrum(spec.df_hz, spec.values * band_mask(freqs, band), spec.kind,
                      spec.source_len, spec.name, spec.unit)
    return dft_inverse(masked)


def analytic_signal(signal) -> np.ndarray:
    """Analytic signal ``x + i H[x]`` via the one-sided spectrum.

    Bins with positive frequency are doubled, negative ones zeroed; DC (and
    Nyquist for even length) are kept as-is.  Accepts a
    :class:`~envspec.core.SampledSignal` or a plain array.
    """
    x = signal.samples if isinstance(signal, SampledSignal) else np.asarray(signal, dtype=float)
    n = x.size
    if n < 2:
        raise ValueError("analytic_signal needs at least 2 samples")
    h = np.zeros(n)
    h[0] = 1.0
    if n % 2 == 0:
        h[n // 2] = 1.0
        h[1:n // 2] = 2.0
    else:
        h[1:(n + 1) // 2] = 2.0
    return np.fft.ifft(np.fft.fft(x) * h)


def envelope(signal: SampledSignal, band: BandSpec = DEFAULT_BAND) -> EnvelopeResult:
    filtered = band_pass(signal, band)
    env = np.abs(analytic_signal(filtered))
    env_sig = filtered.replace(samples=env, name=f"{signal.name} envelope")
    spectrum = amplitude_spectrum(env_sig.replace(samples=env - env.mean()), "rectangular")
    return EnvelopeResult(filtered=filtered, envelope=env_sig, envelope_spectrum=spectrum)


def waveform_to_csv(signal: SampledSignal, path) -> None:
    """Two columns ``time_s,value``."""
    t = signal.times()
    lines = ["time_s,value"]
    lines.extend("%.17g,%.17g" % (ti, v) for ti, v in zip(t, signal.samples))
    atomic_write_text(path, "\n".join(lines) + "\n")


def envelope_to_csv(result: EnvelopeResult, basename) -> list:
    """Write ``<basename>_filtered.csv``, ``_envelope.csv`` and ``_envelope_spectrum.csv``.

    Returns the three paths written.
    """
    base = str(basename)
    paths = [f"{base}_filtered.csv", f"{base}_envelope.csv", f"{base}_envelope_spectrum.csv"]
    waveform_to_csv(result.filtered, paths[0])
    waveform_to_csv(result.envelope, paths[1])
    spectrum_to_csv(result.envelope_spectrum, paths[2])
    return paths
