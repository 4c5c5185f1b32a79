"""Discrete Fourier analysis: transform pair, amplitude spectra and waterfalls.

Normalization is un-normalized forward, ``1/N`` inverse::

    X[k] = sum_n x[n] exp(-2j pi k n / N)
    x[n] = (1/N) sum_k X[k] exp(+2j pi k n / N)

Any transform length is accepted and exactly ``N`` bins are returned for a
length-``N`` input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SampledSignal, atomic_write_text, block_starts

__all__ = [
    "Spectrum",
    "Waterfall",
    "dft_forward",
    "dft_inverse",
    "window_coefficients",
    "amplitude_spectrum",
    "waterfall",
    "spectrum_to_csv",
    "waterfall_to_csv",
    "COMPLEX_TWO_SIDED",
    "AMPLITUDE_ONE_SIDED",
]

COMPLEX_TWO_SIDED = "complex-two-sided"
AMPLITUDE_ONE_SIDED = "amplitude-one-sided"
WINDOWS = ("rectangular", "hann")

# imaginary part allowed after the inverse transform, relative to signal RMS
IMAG_RESIDUE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Frequency-domain view of a signal.

    ``frequencies_hz[k] == k * df_hz`` for every bin.  A complex two-sided
    spectrum holds ``source_len`` bins (negative frequencies folded into the
    upper half, as the DFT returns them).  A one-sided amplitude spectrum
    covers ``[0, fs/2]`` with non-negative real values.
    """

    df_hz: float
    values: np.ndarray
    kind: str
    source_len: int
    name: str = ""
    unit: str = ""

    def __post_init__(self):
        if self.kind not in (COMPLEX_TWO_SIDED, AMPLITUDE_ONE_SIDED):
            raise ValueError(f"unknown spectrum kind {self.kind!r}")
        if not self.df_hz > 0:
            raise ValueError(f"df_hz must be positive, got {self.df_hz}")
        vals = np.array(self.values, dtype=complex if self.kind == COMPLEX_TWO_SIDED else float)
        if self.kind == AMPLITUDE_ONE_SIDED:
            if vals.size != self.source_len // 2 + 1:
                raise ValueError("one-sided spectrum must hold source_len // 2 + 1 bins")
            if np.any(vals < 0):
                raise ValueError("amplitudes must be non-negative")
        elif vals.size != self.source_len:
            raise ValueError("two-sided spectrum must hold source_len bins")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "df_hz", float(self.df_hz))

    def __len__(self) -> int:
        return self.values.size

    @property
    def frequencies_hz(self) -> np.ndarray:
        return np.arange(self.values.size) * self.df_hz

    @property
    def sample_rate_hz(self) -> float:
        return self.df_hz * self.source_len

    @property
    def amplitudes(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def bins(self) -> list:
        """``(frequency_hz, value)`` pairs."""
        return list(zip(self.frequencies_hz.tolist(), self.values.tolist()))

    def scaled(self, factor: float) -> "Spectrum":
        return Spectrum(self.df_hz, self.values * factor, self.kind, self.source_len, self.name, self.unit)

    def peak(self, fmin: float = 0.0, fmax: float = np.inf) -> tuple:
        """Frequency and amplitude of the largest bin in ``[fmin, fmax]``."""
        f = self.frequencies_hz
        sel = np.flatnonzero((f >= fmin) & (f <= fmax))
        if sel.size == 0:
            raise ValueError(f"no bins in [{fmin}, {fmax}] Hz")
        i = sel[np.argmax(self.amplitudes[sel])]
        return float(f[i]), float(self.amplitudes[i])


@dataclass(frozen=True)
class Waterfall:
    slices: tuple
    block_size: int
    overlap: float

    def __post_init__(self):
        if self.slices:
            df = self.slices[0][1].df_hz
            n = len(self.slices[0][1])
            for _, s in self.slices:
                if s.df_hz != df or len(s) != n:
                    raise ValueError("all waterfall slices must share df_hz and bin count")

    @property
    def start_times_s(self) -> np.ndarray:
        return np.array([t for t, _ in self.slices])

    def matrix(self) -> np.ndarray:
        """Amplitudes as a ``(n_slices, n_bins)`` array."""
        return np.vstack([s.values for _, s in self.slices])


def dft_forward(signal: SampledSignal) -> Spectrum:
    n = len(signal)
    # mirror the real-input half so X[N-k] == conj(X[k]) holds exactly
    half = np.fft.rfft(signal.samples)
    full = np.concatenate([half, np.conj(half[1:n - n // 2][::-1])])
    return Spectrum(
        df_hz=signal.sample_rate_hz / n,
        values=full,
        kind=COMPLEX_TWO_SIDED,
        source_len=n,
        name=signal.name,
        unit=signal.unit,
    )


def dft_inverse(spectrum: Spectrum) -> SampledSignal:
    """Inverse transform back to a real signal.

    Raises ``ValueError`` if the spectrum is not complex two-sided or if the
    result keeps an imaginary part above ``1e-9`` of its RMS, i.e. the
    spectrum is not conjugate-symmetric.
    """
    if spectrum.kind != COMPLEX_TWO_SIDED:
        raise ValueError("dft_inverse needs a complex-two-sided spectrum")
    x = np.fft.ifft(spectrum.values)
    real_rms = np.sqrt(np.mean(x.real ** 2))
    imag_rms = np.sqrt(np.mean(x.imag ** 2))
    if imag_rms > IMAG_RESIDUE_TOL * real_rms:
        raise ValueError(
            f"inverse transform has imaginary residue {imag_rms:.3g} RMS against "
            f"{real_rms:.3g} RMS real part; spectrum is not conjugate-symmetric"
        )
    return SampledSignal(spectrum.name, spectrum.unit, spectrum.sample_rate_hz, x.real)


def window_coefficients(kind: str, n: int) -> np.ndarray:
    """Window samples.  ``hann`` is the periodic (DFT-even) form, coherent gain 0.5."""
    if kind == "rectangular":
        return np.ones(n)
    if kind == "hann":
        return 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(n) / n)
    raise ValueError(f"unknown window {kind!r}; expected one of {WINDOWS}")


def amplitude_spectrum(signal: SampledSignal, window: str = "hann") -> Spectrum:
    """Single-sided amplitude spectrum, scaled so an in-bin sine reads its amplitude.

    The windowed DFT magnitude is divided by ``N`` times the window's
    coherent gain, and every bin except DC and (for even ``N``) Nyquist is
    doubled.
    """
    n = len(signal)
    if n < 2:
        raise ValueError("amplitude_spectrum needs at least 2 samples")
    w = window_coefficients(window, n)
    amp = np.abs(np.fft.rfft(signal.samples * w)) / (n * w.mean())
    if n % 2 == 0:
        amp[1:-1] *= 2.0
    else:
        amp[1:] *= 2.0
    return Spectrum(
        df_hz=signal.sample_rate_hz / n,
        values=amp,
        kind=AMPLITUDE_ONE_SIDED,
        source_len=n,
        name=signal.name,
        unit=signal.unit,
    )


def waterfall(signal: SampledSignal, block_size: int, overlap: float = 0.0, window: str = "hann") -> Waterfall:
    """Block-wise amplitude spectra; trailing partial blocks are dropped."""
    starts = block_starts(len(signal), block_size, overlap)
    fs = signal.sample_rate_hz
    slices = tuple(
        (float(s / fs), amplitude_spectrum(signal.replace(samples=signal.samples[s:s + block_size]), window))
        for s in starts
    )
    return Waterfall(slices=slices, block_size=int(block_size), overlap=float(overlap))


def _fmt(v: float) -> str:
    return "%.17g" % v


def spectrum_to_csv(spectrum: Spectrum, path) -> None:
    """Two columns ``frequency_hz,amplitude`` with a header row."""
    lines = ["frequency_hz,amplitude"]
    lines.extend(f"{_fmt(f)},{_fmt(a)}" for f, a in zip(spectrum.frequencies_hz, spectrum.amplitudes))
    atomic_write_text(path, "\n".join(lines) + "\n")


def waterfall_to_csv(wf: Waterfall, path) -> None:
    """Long form ``time_s,frequency_hz,amplitude``."""
    lines = ["time_s,frequency_hz,amplitude"]
    for t, s in wf.slices:
        ts = _fmt(t)
        lines.extend(f"{ts},{_fmt(f)},{_fmt(a)}" for f, a in zip(s.frequencies_hz, s.amplitudes))
    atomic_write_text(path, "\n".join(lines) + "\n")
