"""Signal and acquisition-record types, block slicing and record file I/O.

Two on-disk formats are supported:

``csv``
    UTF-8 text.  A single ``# envspec-meta: {json}`` header line carries the
    sample rate, channel names/units, cutter, cutting conditions and tacho
    pulses.  Data rows follow, one sample per row and one column per channel,
    written with 17 significant digits so that float64 values round-trip.

``raw-binary``
    The bytes ``ENVS``, a little-endian ``u16`` format version, then the
    channel-interleaved little-endian float64 samples.  Metadata lives in a
    sidecar JSON file named ``<file>.meta.json``.
"""

from __future__ import annotations

import json
import math
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

__all__ = [
    "InvariantError",
    "RecordFormatError",
    "SampledSignal",
    "TachoTrace",
    "CutterSpec",
    "CutConditions",
    "AcquisitionRecord",
    "block_starts",
    "slice_blocks",
    "read_record",
    "write_record",
    "atomic_write_text",
    "atomic_write_bytes",
    "FORCE_NAMES",
    "ACCEL_NAMES",
]

FORCE_NAMES = ("fx", "fy", "fz")
ACCEL_NAMES = ("ax", "ay", "az")

CSV_META_PREFIX = "# envspec-meta: "
RAW_MAGIC = b"ENVS"
RAW_VERSION = 1
FORMATS = ("csv", "raw-binary")


class InvariantError(ValueError):
    """A value violates one of its type invariants."""

    def __init__(self, type_name: str, invariant: str, detail: str = ""):
        self.type_name = type_name
        self.invariant = invariant
        msg = f"{type_name}: invariant '{invariant}' violated"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class RecordFormatError(ValueError):
    """A record file or its metadata is malformed."""


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SampledSignal:
    """Uniformly sampled real-valued channel.

    ``samples`` is stored as a read-only float64 array.
    """

    name: str
    unit: str
    sample_rate_hz: float
    samples: np.ndarray

    def __post_init__(self):
        fs = float(self.sample_rate_hz)
        if not (math.isfinite(fs) and fs > 0):
            raise InvariantError("SampledSignal", "sample_rate_hz > 0", f"got {self.sample_rate_hz!r}")
        arr = np.asarray(self.samples)
        if np.iscomplexobj(arr):
            raise InvariantError("SampledSignal", "samples are real", f"channel {self.name!r}")
        arr = _frozen_array(arr).ravel()
        if arr.size < 1:
            raise InvariantError("SampledSignal", "length >= 1", f"channel {self.name!r} is empty")
        if not np.all(np.isfinite(arr)):
            bad = int(np.flatnonzero(~np.isfinite(arr))[0])
            raise InvariantError(
                "SampledSignal", "every sample is finite", f"channel {self.name!r}, sample {bad}"
            )
        object.__setattr__(self, "sample_rate_hz", fs)
        object.__setattr__(self, "samples", arr)

    def __len__(self) -> int:
        return self.samples.size

    def __eq__(self, other):
        if not isinstance(other, SampledSignal):
            return NotImplemented
        return (
            self.name == other.name
            and self.unit == other.unit
            and self.sample_rate_hz == other.sample_rate_hz
            and np.array_equal(self.samples, other.samples)
        )

    __hash__ = None

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz

    def times(self) -> np.ndarray:
        return np.arange(self.samples.size) / self.sample_rate_hz

    def replace(self, samples=None, **changes) -> "SampledSignal":
        """Copy with some fields changed."""
        return SampledSignal(
            name=changes.get("name", self.name),
            unit=changes.get("unit", self.unit),
            sample_rate_hz=changes.get("sample_rate_hz", self.sample_rate_hz),
            samples=self.samples if samples is None else samples,
        )


@dataclass(frozen=True, eq=False)
class TachoTrace:
    """Tachometer pulse times (seconds) and the number of pulses per revolution."""

    pulse_times_s: np.ndarray
    pulses_per_rev: int = 1

    def __post_init__(self):
        t = _frozen_array(self.pulse_times_s).ravel()
        if not np.all(np.isfinite(t)):
            raise InvariantError("TachoTrace", "pulse times are finite")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise InvariantError("TachoTrace", "pulse_times_s strictly increasing")
        ppr = self.pulses_per_rev
        if isinstance(ppr, bool) or int(ppr) != ppr or ppr < 1:
            raise InvariantError("TachoTrace", "pulses_per_rev >= 1", f"got {ppr!r}")
        object.__setattr__(self, "pulse_times_s", t)
        object.__setattr__(self, "pulses_per_rev", int(ppr))

    def __len__(self) -> int:
        return self.pulse_times_s.size

    def __eq__(self, other):
        if not isinstance(other, TachoTrace):
            return NotImplemented
        return self.pulses_per_rev == other.pulses_per_rev and np.array_equal(
            self.pulse_times_s, other.pulse_times_s
        )

    __hash__ = None


@dataclass(frozen=True)
class CutterSpec:
    teeth: int = 3
    diameter_mm: float = 25.0

    def __post_init__(self):
        if isinstance(self.teeth, bool) or int(self.teeth) != self.teeth or self.teeth < 1:
            raise InvariantError("CutterSpec", "teeth >= 1", f"got {self.teeth!r}")
        if not (math.isfinite(self.diameter_mm) and self.diameter_mm > 0):
            raise InvariantError("CutterSpec", "diameter_mm > 0", f"got {self.diameter_mm!r}")
        object.__setattr__(self, "teeth", int(self.teeth))
        object.__setattr__(self, "diameter_mm", float(self.diameter_mm))


@dataclass(frozen=True)
class CutConditions:
    cutting_speed_m_per_min: float = 157.0
    feed_mm_per_tooth: float = 0.1
    depth_of_cut_mm: float = 1.0

    def __post_init__(self):
        for name in ("cutting_speed_m_per_min", "feed_mm_per_tooth", "depth_of_cut_mm"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise InvariantError("CutConditions", f"{name} > 0", f"got {v!r}")
            object.__setattr__(self, name, float(v))


@dataclass(frozen=True, eq=False)
class AcquisitionRecord:
    """One experiment: force and acceleration channels plus optional metadata.

    All channels must share the sample rate and length.  At least one channel
    is required; forces and accelerations hold at most three channels each.
    """

    forces: tuple = ()
    accelerations: tuple = ()
    tacho: TachoTrace | None = None
    cutter: CutterSpec | None = None
    conditions: CutConditions | None = None
    block_size: int = 20000
    buffer_size: int = 32768

    def __post_init__(self):
        forces = tuple(self.forces)
        accels = tuple(self.accelerations)
        object.__setattr__(self, "forces", forces)
        object.__setattr__(self, "accelerations", accels)
        if len(forces) > 3:
            raise InvariantError("AcquisitionRecord", "at most 3 force channels")
        if len(accels) > 3:
            raise InvariantError("AcquisitionRecord", "at most 3 acceleration channels")
        chans = forces + accels
        if not chans:
            raise InvariantError("AcquisitionRecord", "at least one channel")
        for c in chans:
            if not isinstance(c, SampledSignal):
                raise TypeError(f"channels must be SampledSignal, got {type(c).__name__}")
        names = [c.name for c in chans]
        if len(set(names)) != len(names):
            raise InvariantError("AcquisitionRecord", "channel names unique", f"{names}")
        fs, n = chans[0].sample_rate_hz, len(chans[0])
        for c in chans[1:]:
            if c.sample_rate_hz != fs:
                raise InvariantError(
                    "AcquisitionRecord", "all channels share sample_rate_hz",
                    f"{c.name!r} has {c.sample_rate_hz} Hz, expected {fs} Hz",
                )
            if len(c) != n:
                raise InvariantError(
                    "AcquisitionRecord", "all channels share length",
                    f"{c.name!r} has {len(c)} samples, expected {n}",
                )
        for name in ("block_size", "buffer_size"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 1:
                raise InvariantError("AcquisitionRecord", f"{name} >= 1", f"got {v!r}")
            object.__setattr__(self, name, int(v))
        if self.block_size > self.buffer_size:
            raise InvariantError(
                "AcquisitionRecord", "block_size <= buffer_size",
                f"{self.block_size} > {self.buffer_size}",
            )

    @property
    def channels(self) -> tuple:
        return self.forces + self.accelerations

    @property
    def sample_rate_hz(self) -> float:
        return self.channels[0].sample_rate_hz

    @property
    def n_samples(self) -> int:
        return len(self.channels[0])

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sample_rate_hz

    def channel(self, name: str) -> SampledSignal:
        for c in self.channels:
            if c.name.lower() == name.lower():
                return c
        raise KeyError(f"no channel named {name!r}; available: {[c.name for c in self.channels]}")

    def __eq__(self, other):
        if not isinstance(other, AcquisitionRecord):
            return NotImplemented
        return (
            self.forces == other.forces
            and self.accelerations == other.accelerations
            and self.tacho == other.tacho
            and self.cutter == other.cutter
            and self.conditions == other.conditions
            and self.block_size == other.block_size
            and self.buffer_size == other.buffer_size
        )

    __hash__ = None


# ---------------------------------------------------------------------------
# Block slicing


def _block_step(block_size: int, overlap: float) -> int:
    if not 0.0 <= overlap < 1.0:
        raise ValueError(f"overlap must lie in [0, 1), got {overlap}")
    # round half up, not banker's rounding
    return max(1, int(math.floor(block_size * (1.0 - overlap) + 0.5)))


def block_starts(length: int, block_size: int, overlap: float = 0.0) -> np.ndarray:
    """Start indices of the full blocks :func:`slice_blocks` would return."""
    if block_size < 1:
        raise ValueError(f"block_size must be >= 1, got {block_size}")
    if block_size > length:
        raise ValueError(f"block_size {block_size} exceeds signal length {length}")
    step = _block_step(block_size, overlap)
    count = (length - block_size) // step + 1
    return np.arange(count) * step


def slice_blocks(signal: SampledSignal, block_size: int, overlap: float = 0.0) -> list:
    """Cut ``signal`` into full blocks of ``block_size`` samples.

    Consecutive blocks start ``round(block_size * (1 - overlap))`` samples
    apart.  A trailing partial block is dropped rather than zero-padded.
    """
    starts = block_starts(len(signal), block_size, overlap)
    return [signal.replace(samples=signal.samples[s:s + block_size]) for s in starts]


# ---------------------------------------------------------------------------
# Record I/O


def atomic_write_bytes(path, data: bytes) -> None:
    """Write ``data`` to a temp file next to ``path`` and rename it into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def _record_meta(record: AcquisitionRecord) -> dict:
    meta = {
        "version": RAW_VERSION,
        "sample_rate_hz": record.sample_rate_hz,
        "n_samples": record.n_samples,
        "channels": [
            {"name": c.name, "unit": c.unit, "kind": kind}
            for kind, group in (("force", record.forces), ("acceleration", record.accelerations))
            for c in group
        ],
        "block_size": record.block_size,
        "buffer_size": record.buffer_size,
        "cutter": None,
        "conditions": None,
        "tacho": None,
    }
    if record.cutter is not None:
        meta["cutter"] = {"teeth": record.cutter.teeth, "diameter_mm": record.cutter.diameter_mm}
    if record.conditions is not None:
        c = record.conditions
        meta["conditions"] = {
            "cutting_speed_m_per_min": c.cutting_speed_m_per_min,
            "feed_mm_per_tooth": c.feed_mm_per_tooth,
            "depth_of_cut_mm": c.depth_of_cut_mm,
        }
    if record.tacho is not None:
        meta["tacho"] = {
            "pulses_per_rev": record.tacho.pulses_per_rev,
            "pulse_times_s": [float(t) for t in record.tacho.pulse_times_s],
        }
    return meta


def _record_from_meta(meta: dict, data: np.ndarray) -> AcquisitionRecord:
    """Build a record from parsed metadata and an (n_samples, n_channels) array."""
    try:
        fs = meta["sample_rate_hz"]
        chans = meta["channels"]
        forces, accels = [], []
        if data.ndim != 2 or data.shape[1] != len(chans):
            raise RecordFormatError(f"header declares {len(chans)} channels, data has {data.shape}")
        for i, ch in enumerate(chans):
            sig = SampledSignal(ch["name"], ch.get("unit", ""), fs, data[:, i])
            kind = ch.get("kind", "force")
            if kind == "force":
                forces.append(sig)
            elif kind == "acceleration":
                accels.append(sig)
            else:
                raise RecordFormatError(f"unknown channel kind {kind!r}")
        tacho = None
        if meta.get("tacho"):
            tacho = TachoTrace(meta["tacho"]["pulse_times_s"], meta["tacho"].get("pulses_per_rev", 1))
        cutter = CutterSpec(**meta["cutter"]) if meta.get("cutter") else None
        conditions = CutConditions(**meta["conditions"]) if meta.get("conditions") else None
        return AcquisitionRecord(
            forces=tuple(forces),
            accelerations=tuple(accels),
            tacho=tacho,
            cutter=cutter,
            conditions=conditions,
            block_size=meta.get("block_size", 20000),
            buffer_size=meta.get("buffer_size", 32768),
        )
    except (KeyError, TypeError) as exc:
        raise RecordFormatError(f"malformed header: {exc!r}") from exc


def _resolve_format(path: Path, fmt: str | None) -> str:
    if fmt is None:
        return "csv" if path.suffix.lower() == ".csv" else "raw-binary"
    fmt = {"raw": "raw-binary", "bin": "raw-binary"}.get(fmt, fmt)
    if fmt not in FORMATS:
        raise ValueError(f"unknown record format {fmt!r}; expected one of {FORMATS}")
    return fmt


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


def write_record(record: AcquisitionRecord, path, format: str | None = None) -> None:
    """Write ``record`` to ``path`` as ``csv`` or ``raw-binary``.

    The format is inferred from the suffix when not given (``.csv`` means
    CSV, anything else raw binary).  Files are written atomically.
    """
    path = Path(path)
    fmt = _resolve_format(path, format)
    meta = _record_meta(record)
    data = np.column_stack([c.samples for c in record.channels])
    if fmt == "csv":
        lines = [CSV_META_PREFIX + json.dumps(meta, separators=(",", ":"))]
        lines.extend(",".join("%.17g" % v for v in row) for row in data)
        atomic_write_text(path, "\n".join(lines) + "\n")
    else:
        payload = RAW_MAGIC + struct.pack("<H", RAW_VERSION) + data.astype("<f8").tobytes()
        atomic_write_bytes(path, payload)
        atomic_write_text(sidecar_path(path), json.dumps(meta, indent=1) + "\n")


def _parse_csv(path: Path) -> tuple:
    meta = None
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if line.startswith(CSV_META_PREFIX.rstrip()):
                    try:
                        meta = json.loads(line[len(CSV_META_PREFIX.rstrip()):])
                    except json.JSONDecodeError as exc:
                        raise RecordFormatError(f"{path}:{lineno}: bad header JSON: {exc}") from exc
                continue
            try:
                rows.append([float(v) for v in line.split(",")])
            except ValueError as exc:
                raise RecordFormatError(f"{path}:{lineno}: {exc}") from exc
    if meta is None:
        raise RecordFormatError(f"{path}: missing '{CSV_META_PREFIX.strip()}' header line")
    n_ch = len(meta.get("channels", []))
    if n_ch == 0:
        raise RecordFormatError(f"{path}: header lists no channels")
    for i, r in enumerate(rows):
        if len(r) != n_ch:
            raise InvariantError(
                "AcquisitionRecord", "all channels share length",
                f"row {i} has {len(r)} values, header declares {n_ch} channels",
            )
    data = np.array(rows, dtype=float).reshape(len(rows), n_ch)
    return meta, data


def _parse_raw(path: Path) -> tuple:
    side = sidecar_path(path)
    try:
        meta = json.loads(side.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise RecordFormatError(f"{side}: bad sidecar JSON: {exc}") from exc
    blob = path.read_bytes()
    if blob[:4] != RAW_MAGIC:
        raise RecordFormatError(f"{path}: bad magic {blob[:4]!r}")
    (version,) = struct.unpack("<H", blob[4:6])
    if version != RAW_VERSION:
        raise RecordFormatError(f"{path}: unsupported version {version}")
    values = np.frombuffer(blob[6:], dtype="<f8") if (len(blob) - 6) % 8 == 0 else None
    if values is None:
        raise RecordFormatError(f"{path}: payload is not a whole number of float64 values")
    n_ch = len(meta.get("channels", []))
    if n_ch == 0:
        raise RecordFormatError(f"{side}: sidecar lists no channels")
    if values.size % n_ch:
        raise InvariantError(
            "AcquisitionRecord", "all channels share length",
            f"{values.size} values do not split into {n_ch} channels",
        )
    data = values.astype(float).reshape(-1, n_ch)
    declared = meta.get("n_samples")
    if declared is not None and declared != data.shape[0]:
        raise InvariantError(
            "AcquisitionRecord", "all channels share length",
            f"sidecar declares {declared} samples, file holds {data.shape[0]}",
        )
    return meta, data


def read_record(path, format: str | None = None) -> AcquisitionRecord:
    """Read a record written by :func:`write_record` (or by hand in the same layout).

    Raises
    ------
    OSError
        The file (or its sidecar) cannot be read.
    RecordFormatError
        Missing or malformed header/sidecar, bad magic bytes.
    InvariantError
        Channel length mismatch, non-finite sample, or any other type
        invariant broken by the file contents.
    """
    path = Path(path)
    fmt = _resolve_format(path, format)
    meta, data = _parse_csv(path) if fmt == "csv" else _parse_raw(path)
    return _record_from_meta(meta, data)


def iter_channels(record: AcquisitionRecord, names: Iterable[str] | None = None) -> list:
    """Selected channels in record order; ``None`` selects all."""
    if names is None:
        return list(record.channels)
    return [record.channel(n) for n in names]

