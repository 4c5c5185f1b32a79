"""End-to-end envelope diagnosis of one channel."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import AcquisitionRecord, CutConditions, CutterSpec, SampledSignal, TachoTrace
from .envelope import DEFAULT_BAND, BandSpec, EnvelopeResult, envelope
from .rotation import (
    DEFAULT_THRESHOLD,
    OrderSpectrum,
    ToothDiagnostics,
    angular_resample,
    order_spectrum,
    speed_from_tacho,
    spindle_speed_from_cutting,
    tooth_diagnostics,
    trim_to_tacho,
)
from .spectral import Spectrum, amplitude_spectrum

__all__ = ["ChannelAnalysis", "resolve_f_rot", "synchronous_envelope_spectrum", "analyze_channel"]


@dataclass(frozen=True)
class ChannelAnalysis:
    channel: str
    spectrum: Spectrum
    envelope: EnvelopeResult
    orders: OrderSpectrum
    diagnostics: ToothDiagnostics
    order_domain: str
    order_source: Spectrum


def resolve_f_rot(
    record: AcquisitionRecord | None = None,
    *,
    f_rot_hz: float | None = None,
    rpm: float | None = None,
    cutting_speed_m_per_min: float | None = None,
    diameter_mm: float | None = None,
) -> tuple:
    """Pick the rotation frequency and say where it came from.

    Precedence: the record's tacho mean speed, then cutting kinematics (the
    record's conditions and cutter, or the cutting-speed/diameter
    arguments), then an explicit ``f_rot_hz`` or ``rpm``.  Returns
    ``(f_rot_hz, source)`` with source one of ``tacho``, ``kinematics``,
    ``flag``.
    """
    if record is not None and record.tacho is not None and len(record.tacho) >= 2:
        return speed_from_tacho(record.tacho).mean_f_rot_hz, "tacho"
    conditions = record.conditions if record is not None else None
    cutter = record.cutter if record is not None else None
    if cutting_speed_m_per_min is not None:
        conditions = CutConditions(cutting_speed_m_per_min=cutting_speed_m_per_min)
    if diameter_mm is not None:
        cutter = CutterSpec(teeth=cutter.teeth if cutter else 1, diameter_mm=diameter_mm)
    if conditions is not None and cutter is not None:
        return spindle_speed_from_cutting(conditions, cutter).f_rot_hz, "kinematics"
    if f_rot_hz is not None:
        if not f_rot_hz > 0:
            raise ValueError(f"f_rot must be positive, got {f_rot_hz}")
        return float(f_rot_hz), "flag"
    if rpm is not None:
        if not rpm > 0:
            raise ValueError(f"rpm must be positive, got {rpm}")
        return float(rpm) / 60.0, "flag"
    raise ValueError("cannot determine rotation frequency: no tacho, no cutting kinematics, no --f-rot/--rpm")


def synchronous_envelope_spectrum(
    env: SampledSignal, tacho: TachoTrace, samples_per_rev: int
) -> Spectrum:
    """Envelope spectrum over orders: trim to the tacho span, resample by angle, mean-remove."""
    trimmed, tacho0 = trim_to_tacho(env, tacho)
    ang = angular_resample(trimmed, tacho0, samples_per_rev)
    return amplitude_spectrum(ang.replace(samples=ang.samples - ang.samples.mean()), "rectangular")


def _orders_to_hz(orders: OrderSpectrum, f_rot_hz: float) -> OrderSpectrum:
    return OrderSpectrum(
        f_rot_hz=f_rot_hz,
        orders=orders.orders,
        amplitudes=orders.amplitudes,
        exact_freqs_hz=orders.exact_freqs_hz * f_rot_hz,
        search_halfwidth_hz=orders.search_halfwidth_hz * f_rot_hz,
        noise_floor=orders.noise_floor,
    )


def analyze_channel(
    signal: SampledSignal,
    teeth: int,
    f_rot_hz: float,
    band: BandSpec = DEFAULT_BAND,
    tacho: TachoTrace | None = None,
    threshold: float = DEFAULT_THRESHOLD,
    max_order: int | None = None,
    search_halfwidth_hz: float | None = None,
    samples_per_rev: int | None = None,
    display_window: str = "hann",
) -> ChannelAnalysis:
    """Spectrum, envelope, order table and tooth verdict for one channel.

    With a tacho the envelope is resampled to uniform shaft angle before the
    order table is read (synchronous analysis); otherwise orders are read from
    the time-domain envelope spectrum at multiples of ``f_rot_hz``.
    """
    cutter = CutterSpec(teeth=teeth)
    max_order = 2 * teeth if max_order is None else int(max_order)
    spec = amplitude_spectrum(signal, display_window)
    env = envelope(signal, band)
    if tacho is not None:
        spr = samples_per_rev
        if spr is None:
            spr = max(2 * max_order, int(math.ceil(signal.sample_rate_hz / f_rot_hz)))
        source = synchronous_envelope_spectrum(env.envelope, tacho, spr)
        hw = None if search_halfwidth_hz is None else search_halfwidth_hz / f_rot_hz
        orders = _orders_to_hz(order_spectrum(source, 1.0, max_order, hw), f_rot_hz)
        domain = "angle"
    else:
        source = env.envelope_spectrum
        orders = order_spectrum(source, f_rot_hz, max_order, search_halfwidth_hz)
        domain = "time"
    diag = tooth_diagnostics(orders, cutter, threshold)
    return ChannelAnalysis(
        channel=signal.name,
        spectrum=spec,
        envelope=env,
        orders=orders,
        diagnostics=diag,
        order_domain=domain,
        order_source=source,
    )

