"""Synthetic milling signals with known tooth-order content.

Every tooth strike is modelled as a step-excited, lightly damped single
degree of freedom ring-down at the structural resonance.  Teeth strike at
shaft angles ``2*pi*j/N``; the shaft speed may ramp linearly over the record.
Per-tooth gains make the cutter asymmetric in a controlled way.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import AcquisitionRecord, CutterSpec, InvariantError, SampledSignal, TachoTrace

__all__ = [
    "SynthConfig",
    "synth_milling",
    "impact_times",
    "tacho_times",
    "clean_waveform",
    "noise_rms_for_snr",
]

# ring-downs are cut once their decay envelope drops below this fraction
_DECAY_CUTOFF = 1e-17


@dataclass(frozen=True)
class SynthConfig:
    """Generator parameters.  Defaults follow the 3-tooth, 25 mm cutter at 157 m/min."""

    f_rot_hz: float = 33.33
    teeth: int = 3
    tooth_gains: tuple = field(default=None)
    resonance_hz: float = 1500.0
    damping_ratio: float = 0.05
    impact_energy: float = 1.0
    noise_rms: float = 0.0
    duration_s: float = 2.0
    sample_rate_hz: float = 5000.0
    speed_ramp_fraction: float = 0.0
    seed: int = 0

    def __post_init__(self):
        gains = self.tooth_gains
        if gains is None:
            gains = (1.0,) * int(self.teeth)
        gains = tuple(float(g) for g in gains)
        object.__setattr__(self, "tooth_gains", gains)

        def fail(inv, detail=""):
            raise InvariantError("SynthConfig", inv, detail)

        if isinstance(self.teeth, bool) or int(self.teeth) != self.teeth or self.teeth < 1:
            fail("teeth >= 1", f"got {self.teeth!r}")
        if len(gains) != self.teeth:
            fail("teeth == length(tooth_gains)", f"{self.teeth} teeth but {len(gains)} gains")
        if any(not (math.isfinite(g) and g >= 0) for g in gains):
            fail("tooth_gains >= 0", f"got {gains}")
        for name in ("f_rot_hz", "resonance_hz", "impact_energy", "duration_s", "sample_rate_hz"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                fail(f"{name} > 0", f"got {v!r}")
        if not 0 < self.damping_ratio < 1:
            fail("0 < damping_ratio < 1", f"got {self.damping_ratio!r}")
        if not (math.isfinite(self.noise_rms) and self.noise_rms >= 0):
            fail("noise_rms >= 0", f"got {self.noise_rms!r}")
        if not (math.isfinite(self.speed_ramp_fraction) and self.speed_ramp_fraction >= 0):
            fail("speed_ramp_fraction >= 0", f"got {self.speed_ramp_fraction!r}")
        if not self.resonance_hz < self.sample_rate_hz / 2:
            fail("resonance_hz < sample_rate_hz/2", f"{self.resonance_hz} Hz at fs {self.sample_rate_hz} Hz")
        top = self.teeth * self.f_rot_hz * (1 + self.speed_ramp_fraction)
        if not top < self.resonance_hz:
            fail("N*f_rot*(1+ramp) < resonance_hz", f"{top:g} Hz vs {self.resonance_hz:g} Hz")

    @property
    def n_samples(self) -> int:
        return int(round(self.duration_s * self.sample_rate_hz))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["tooth_gains"] = list(self.tooth_gains)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SynthConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown synth config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "SynthConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _times_at_revolutions(cfg: SynthConfig, revs: np.ndarray) -> np.ndarray:
    # shaft angle in revolutions: f0 * (t + ramp * t^2 / (2 T)); solved for t
    f0 = cfg.f_rot_hz
    a = f0 * cfg.speed_ramp_fraction / (2.0 * cfg.duration_s)
    return 2.0 * revs / (f0 + np.sqrt(f0 * f0 + 4.0 * a * revs))


def _revs_at(cfg: SynthConfig, t: float) -> float:
    return cfg.f_rot_hz * (t + cfg.speed_ramp_fraction * t * t / (2.0 * cfg.duration_s))


def impact_times(cfg: SynthConfig) -> tuple:
    """Strike times in ``[0, duration)`` and the index of the tooth striking."""
    n_imp = int(math.floor(_revs_at(cfg, cfg.duration_s) * cfg.teeth)) + 1
    j = np.arange(n_imp)
    t = _times_at_revolutions(cfg, j / cfg.teeth)
    keep = t < cfg.duration_s
    return t[keep], (j % cfg.teeth)[keep]


def tacho_times(cfg: SynthConfig) -> np.ndarray:
    """Once-per-revolution pulses at shaft angle 0 that fall inside the record."""
    last = (cfg.n_samples - 1) / cfg.sample_rate_hz
    n_rev = int(math.floor(_revs_at(cfg, last))) + 1
    t = _times_at_revolutions(cfg, np.arange(n_rev, dtype=float))
    return t[t <= last]


def clean_waveform(cfg: SynthConfig) -> np.ndarray:
    """Noise-free sum of ring-downs."""
    fs = cfg.sample_rate_hz
    n = cfg.n_samples
    omega = 2 * math.pi * cfg.resonance_hz
    decay = cfg.damping_ratio * omega
    omega_d = omega * math.sqrt(1 - cfg.damping_ratio ** 2)
    span = int(math.ceil(-math.log(_DECAY_CUTOFF) / decay * fs)) + 1

    x = np.zeros(n)
    gains = np.asarray(cfg.tooth_gains) * cfg.impact_energy
    for ti, tooth in zip(*impact_times(cfg)):
        g = gains[tooth]
        if g == 0:
            continue
        i0 = int(math.ceil(ti * fs - 1e-9))
        i0 = max(i0, 0)
        i1 = min(n, i0 + span)
        if i0 >= n:
            continue
        tau = np.arange(i0, i1) / fs - ti
        tau = np.maximum(tau, 0.0)
        x[i0:i1] += g * np.exp(-decay * tau) * np.sin(omega_d * tau)
    return x


def noise_rms_for_snr(cfg: SynthConfig, snr_db: float) -> float:
    """Noise level giving ``snr_db`` against the clean waveform's RMS."""
    clean = clean_waveform(cfg)
    return float(np.sqrt(np.mean(clean ** 2)) / 10 ** (snr_db / 20.0))


def synth_milling(cfg: SynthConfig | None = None) -> AcquisitionRecord:
    """Generate a record with one force channel ``fx`` and one acceleration ``ax``.

    Both channels carry the same waveform (only the unit labels differ).
    Output is bit-identical for identical configs, seed included.
    """
    cfg = SynthConfig() if cfg is None else cfg
    x = clean_waveform(cfg)
    if cfg.noise_rms > 0:
        rng = np.random.default_rng(cfg.seed)
        x = x + rng.normal(0.0, cfg.noise_rms, x.size)
    fs = cfg.sample_rate_hz
    return AcquisitionRecord(
        forces=(SampledSignal("fx", "N", fs, x),),
        accelerations=(SampledSignal("ax", "m/s^2", fs, x),),
        tacho=TachoTrace(tacho_times(cfg), 1),
        cutter=CutterSpec(teeth=cfg.teeth, diameter_mm=25.0),
    )
