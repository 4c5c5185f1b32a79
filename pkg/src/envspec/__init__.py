"""Envelope-spectrum monitoring of milling force and vibration signals.

Band-pass the resonance band, take the Hilbert envelope, and read the
envelope spectrum at multiples of the spindle rotation frequency.  For an
``N``-tooth cutter the order-``N`` line is the tooth-passing component; lines
at orders ``1..N-1`` grow when teeth cut unevenly (wear, runout, chipped edge).

>>> import envspec
>>> rec = envspec.synth_milling(envspec.SynthConfig(tooth_gains=(1, 1, 0.5)))
>>> f_rot, source = envspec.resolve_f_rot(rec)
>>> res = envspec.analyze_channel(rec.channel("fx"), teeth=3, f_rot_hz=f_rot, tacho=rec.tacho)
>>> round(res.orders.exact_freqs_hz[2] / f_rot)
3
"""

__version__ = "0.1.0"

from .core import (
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
from .envelope import DEFAULT_BAND, BandSpec, EnvelopeResult, analytic_signal, band_pass, envelope
from .pipeline import ChannelAnalysis, analyze_channel, resolve_f_rot
from .rotation import (
    OrderSpectrum,
    SpeedProfile,
    ToothDiagnostics,
    angular_resample,
    order_spectrum,
    speed_from_tacho,
    spindle_speed_from_cutting,
    tooth_diagnostics,
)
from .spectral import Spectrum, Waterfall, amplitude_spectrum, dft_forward, dft_inverse, waterfall
from .synth import SynthConfig, noise_rms_for_snr, synth_milling

__all__ = [
    "AcquisitionRecord", "CutConditions", "CutterSpec", "InvariantError", "RecordFormatError",
    "SampledSignal", "TachoTrace", "block_starts", "read_record", "slice_blocks", "write_record",
    "DEFAULT_BAND", "BandSpec", "EnvelopeResult", "analytic_signal", "band_pass", "envelope",
    "ChannelAnalysis", "analyze_channel", "resolve_f_rot",
    "OrderSpectrum", "SpeedProfile", "ToothDiagnostics", "angular_resample", "order_spectrum",
    "speed_from_tacho", "spindle_speed_from_cutting", "tooth_diagnostics",
    "Spectrum", "Waterfall", "amplitude_spectrum", "dft_forward", "dft_inverse", "waterfall",
    "SynthConfig", "noise_rms_for_snr", "synth_milling",
]
