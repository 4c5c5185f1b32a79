"""Spindle speed, angle-synchronous resampling and tooth-order diagnostics.

Orders are referenced to the spindle rotation frequency: for an ``N``-tooth
cutter, order ``N`` is the tooth-passing frequency and orders ``1..N-1``
reveal uneven engagement between teeth.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.interpolate import CubicSpline

from .core import CutConditions, CutterSpec, SampledSignal, TachoTrace, atomic_write_text
from .spectral import AMPLITUDE_ONE_SIDED, Spectrum

__all__ = [
    "SpeedProfile",
    "SpindleKinematics",
    "OrderSpectrum",
    "ToothDiagnostics",
    "ANGLE_DOMAIN_TAG",
    "speed_from_tacho",
    "spindle_speed_from_cutting",
    "trim_to_tacho",
    "angular_resample",
    "default_search_halfwidth",
    "order_spectrum",
    "tooth_diagnostics",
    "diagnostics_to_json",
    "DEFAULT_THRESHOLD",
    "NOISE_GUARD_FACTOR",
]

DEFAULT_THRESHOLD = 0.5
# tooth-order line must exceed this multiple of the non-harmonic median
NOISE_GUARD_FACTOR = 10.0
ANGLE_DOMAIN_TAG = "[angle domain, sample_rate_hz = samples/rev]"


@dataclass(frozen=True, eq=False)
class SpeedProfile:
    """Per-interval spindle speed; ``times_s`` are interval midpoints."""

    times_s: np.ndarray
    rpm: np.ndarray
    mean_rpm: float

    @property
    def mean_f_rot_hz(self) -> float:
        return self.mean_rpm / 60.0


class SpindleKinematics(NamedTuple):
    rpm: float
    f_rot_hz: float
    tooth_passing_hz: float


@dataclass(frozen=True, eq=False)
class OrderSpectrum:
    """Spectrum amplitudes picked at integer multiples of ``f_rot_hz``.

    Row ``k`` holds the largest amplitude inside ``k*f_rot +/- search_halfwidth_hz``
    and the frequency where it was found.  ``noise_floor`` is the median
    amplitude of the bins lying outside every harmonic window.
    """

    f_rot_hz: float
    orders: np.ndarray
    amplitudes: np.ndarray
    exact_freqs_hz: np.ndarray
    search_halfwidth_hz: float
    noise_floor: float = 0.0

    def amplitude(self, order: int) -> float:
        idx = np.flatnonzero(self.orders == order)
        if idx.size == 0:
            raise KeyError(f"order {order} not in spectrum (orders {self.orders.tolist()})")
        return float(self.amplitudes[idx[0]])

    @property
    def rows(self) -> list:
        return [
            (int(k), float(a), float(f))
            for k, a, f in zip(self.orders, self.amplitudes, self.exact_freqs_hz)
        ]


@dataclass(frozen=True)
class ToothDiagnostics:
    teeth: int
    tooth_order_amplitude: float
    sub_order_amplitudes: tuple
    asymmetry_ratio: float
    asymmetry_flag: bool
    threshold: float
    inconclusive: bool = False
    noise_floor: float = 0.0

    @property
    def status(self) -> str:
        if self.inconclusive:
            return "inconclusive"
        return "asymmetry" if self.asymmetry_flag else "clean"

    def as_dict(self) -> dict:
        return {
            "teeth": self.teeth,
            "tooth_order_amplitude": self.tooth_order_amplitude,
            "sub_order_amplitudes": list(self.sub_order_amplitudes),
            "asymmetry_ratio": self.asymmetry_ratio,
            "threshold": self.threshold,
            "asymmetry_flag": self.asymmetry_flag,
            "inconclusive": self.inconclusive,
            "noise_floor": self.noise_floor,
            "status": self.status,
        }


def speed_from_tacho(tacho: TachoTrace) -> SpeedProfile:
    t = tacho.pulse_times_s
    if t.size < 2:
        raise ValueError("speed_from_tacho needs at least 2 tacho pulses")
    dt = np.diff(t)
    if np.any(dt <= 0):
        raise ValueError("tacho pulse times must be strictly increasing")
    rpm = 60.0 / (tacho.pulses_per_rev * dt)
    return SpeedProfile(times_s=0.5 * (t[1:] + t[:-1]), rpm=rpm, mean_rpm=float(rpm.mean()))


def spindle_speed_from_cutting(conditions: CutConditions, cutter: CutterSpec) -> SpindleKinematics:
    """Spindle speed from cutting speed and cutter diameter, ``n = 1000 v / (pi d)``."""
    rpm = 1000.0 * conditions.cutting_speed_m_per_min / (math.pi * cutter.diameter_mm)
    f_rot = rpm / 60.0
    return SpindleKinematics(rpm=rpm, f_rot_hz=f_rot, tooth_passing_hz=cutter.teeth * f_rot)


def trim_to_tacho(signal: SampledSignal, tacho: TachoTrace) -> tuple:
    """Cut ``signal`` down to the span covered by tacho pulses.

    Returns the trimmed signal and the tacho re-referenced to its first
    sample, ready for :func:`angular_resample`.
    """
    fs = signal.sample_rate_hz
    t = tacho.pulse_times_s
    if t.size < 2:
        raise ValueError("need at least 2 tacho pulses")
    i0 = max(0, int(math.ceil(t[0] * fs - 1e-9)))
    i1 = min(len(signal) - 1, int(math.floor(t[-1] * fs + 1e-9)))
    if i1 - i0 < 1:
        raise ValueError("tacho pulses do not overlap the signal")
    trimmed = signal.replace(samples=signal.samples[i0:i1 + 1])
    return trimmed, TachoTrace(t - i0 / fs, tacho.pulses_per_rev)


def angular_resample(signal: SampledSignal, tacho: TachoTrace, samples_per_rev: int) -> SampledSignal:
    """Resample ``signal`` at uniform shaft-angle steps of ``1/samples_per_rev`` rev.

    The shaft angle is taken as linear in time between tacho pulses and the
    signal is interpolated with a cubic spline.  Sample ``j`` of the output
    sits at angle ``angle(0) + j/samples_per_rev`` revolutions.  The returned
    signal's ``sample_rate_hz`` holds samples per revolution, so its
    spectrum's frequency axis reads in orders; the unit label carries
    :data:`ANGLE_DOMAIN_TAG`.

    Raises ``ValueError`` if the pulses do not span the whole signal.
    """
    spr = int(samples_per_rev)
    if spr < 2:
        raise ValueError(f"samples_per_rev must be >= 2, got {samples_per_rev}")
    pulses = tacho.pulse_times_s
    if pulses.size < 2:
        raise ValueError("angular_resample needs at least 2 tacho pulses")
    t = signal.times()
    if pulses[0] > t[0] or pulses[-1] < t[-1]:
        raise ValueError(
            f"tacho pulses [{pulses[0]:.6g}, {pulses[-1]:.6g}] s do not cover the signal "
            f"span [{t[0]:.6g}, {t[-1]:.6g}] s"
        )
    revs = np.arange(pulses.size) / tacho.pulses_per_rev
    a0, a1 = np.interp([t[0], t[-1]], pulses, revs)
    n_out = int(math.floor((a1 - a0) * spr + 1e-9)) + 1
    angles = a0 + np.arange(n_out) / spr
    t_out = np.interp(angles, revs, pulses)
    values = CubicSpline(t, signal.samples)(t_out)
    return SampledSignal(signal.name, f"{signal.unit} {ANGLE_DOMAIN_TAG}".strip(), float(spr), values)


def default_search_halfwidth(df_hz: float, f_rot_hz: float) -> float:
    return max(2.0 * df_hz, 0.02 * f_rot_hz)


def order_spectrum(
    spectrum: Spectrum,
    f_rot_hz: float,
    max_order: int,
    search_halfwidth_hz: float | None = None,
) -> OrderSpectrum:
    """Pick the amplitude of orders ``1..max_order`` from a one-sided spectrum.

    When no bin falls inside a search window (half-width below half a bin),
    the bin nearest to the exact order frequency is used.
    """
    if spectrum.kind != AMPLITUDE_ONE_SIDED:
        raise ValueError("order_spectrum needs an amplitude-one-sided spectrum")
    if not f_rot_hz > 0:
        raise ValueError(f"f_rot_hz must be positive, got {f_rot_hz}")
    if max_order < 1:
        raise ValueError(f"max_order must be >= 1, got {max_order}")
    freqs = spectrum.frequencies_hz
    amps = spectrum.amplitudes
    if max_order * f_rot_hz > freqs[-1]:
        raise ValueError(
            f"order {max_order} at {max_order * f_rot_hz:.6g} Hz lies beyond the spectrum "
            f"(highest bin {freqs[-1]:.6g} Hz)"
        )
    hw = default_search_halfwidth(spectrum.df_hz, f_rot_hz) if search_halfwidth_hz is None else float(search_halfwidth_hz)
    if not hw > 0:
        raise ValueError(f"search half-width must be positive, got {hw}")

    orders = np.arange(1, max_order + 1)
    out_amp = np.empty(max_order)
    out_freq = np.empty(max_order)
    for i, k in enumerate(orders):
        target = k * f_rot_hz
        sel = np.flatnonzero((freqs >= target - hw) & (freqs <= target + hw))
        if sel.size == 0:
            j = int(np.argmin(np.abs(freqs - target)))
        else:
            j = int(sel[np.argmax(amps[sel])])
        out_amp[i] = amps[j]
        out_freq[i] = freqs[j]

    # noise floor over the searched range, harmonic windows and DC excluded
    top = min(freqs[-1], (max_order + 0.5) * f_rot_hz)
    region = (freqs > 0) & (freqs <= top)
    nearest_k = np.rint(freqs / f_rot_hz)
    in_window = (nearest_k >= 1) & (np.abs(freqs - nearest_k * f_rot_hz) <= hw)
    background = amps[region & ~in_window]
    floor = float(np.median(background)) if background.size else 0.0

    return OrderSpectrum(
        f_rot_hz=float(f_rot_hz),
        orders=orders,
        amplitudes=out_amp,
        exact_freqs_hz=out_freq,
        search_halfwidth_hz=hw,
        noise_floor=floor,
    )


def tooth_diagnostics(
    orders: OrderSpectrum, cutter: CutterSpec, threshold: float = DEFAULT_THRESHOLD
) -> ToothDiagnostics:
    """Asymmetry ratio: largest of orders ``1..N-1`` over order ``N``.

    The result is inconclusive (and never flagged) when the order-``N`` line
    is below ``NOISE_GUARD_FACTOR`` times the spectrum's non-harmonic median.
    """
    if not threshold > 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    n = cutter.teeth
    present = set(orders.orders.tolist())
    missing = [k for k in range(1, n + 1) if k not in present]
    if missing:
        raise ValueError(f"order spectrum lacks orders {missing} needed for a {n}-tooth cutter")
    tooth_amp = orders.amplitude(n)
    subs = tuple(orders.amplitude(k) for k in range(1, n))
    inconclusive = tooth_amp <= 0 or tooth_amp < NOISE_GUARD_FACTOR * orders.noise_floor
    ratio = (max(subs) / tooth_amp if subs else 0.0) if tooth_amp > 0 else 0.0
    return ToothDiagnostics(
        teeth=n,
        tooth_order_amplitude=tooth_amp,
        sub_order_amplitudes=subs,
        asymmetry_ratio=float(ratio),
        asymmetry_flag=bool(ratio >= threshold and not inconclusive),
        threshold=float(threshold),
        inconclusive=bool(inconclusive),
        noise_floor=orders.noise_floor,
    )


def diagnostics_to_json(
    diag: ToothDiagnostics, orders: OrderSpectrum, path=None, f_rot_source: str = "flag"
) -> str:
    """JSON report of one channel's order table and verdict; written to ``path`` if given."""
    doc = {
        "schema": 1,
        "f_rot_hz": orders.f_rot_hz,
        "f_rot_source": f_rot_source,
        "search_halfwidth_hz": orders.search_halfwidth_hz,
        "orders": [{"order": k, "amplitude": a, "exact_freq_hz": f} for k, a, f in orders.rows],
        **diag.as_dict(),
    }
    text = json.dumps(doc, indent=2) + "\n"
    if path is not None:
        atomic_write_text(path, text)
    return text
