"""Command-line front end.

Subcommands::

    envspec synth     write a synthetic milling record
    envspec analyze   full envelope diagnosis with a JSON report
    envspec spectrum  amplitude spectrum CSV per channel
    envspec waterfall block-wise spectra CSV per channel
    envspec envelope  filtered/envelope/envelope-spectrum CSVs per channel

Exit codes: 0 success (no asymmetry), 1 I/O or file-format failure, 2 bad
arguments, 3 asymmetry flagged on some channel, 4 inconclusive under
``--strict``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .core import AcquisitionRecord, InvariantError, RecordFormatError, read_record, slice_blocks, write_record
from .core import atomic_write_text
from .envelope import DEFAULT_BAND, BandSpec, envelope, envelope_to_csv
from .pipeline import ChannelAnalysis, analyze_channel, resolve_f_rot
from .rotation import DEFAULT_THRESHOLD
from .spectral import amplitude_spectrum, spectrum_to_csv, waterfall, waterfall_to_csv
from .synth import SynthConfig, noise_rms_for_snr, synth_milling

log = logging.getLogger("envspec")

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_ASYMMETRY, EXIT_INCONCLUSIVE = 0, 1, 2, 3, 4
REPORT_SCHEMA = 1


class UsageError(Exception):
    """Bad or inconsistent command-line arguments (exit 2)."""


def _use_color() -> bool:
    return not os.environ.get("ENVSPEC_NO_COLOR") and sys.stderr.isatty()


def _say(msg: str, color: str | None = None) -> None:
    codes = {"red": "31", "yellow": "33", "green": "32"}
    if color and _use_color():
        msg = f"\033[{codes[color]}m{msg}\033[0m"
    print(msg, file=sys.stderr)


# ---------------------------------------------------------------------------
# argument parsing


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _band(text: str) -> BandSpec:
    try:
        return BandSpec.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _fraction(text: str) -> float:
    v = float(text)
    if not 0 <= v < 1:
        raise argparse.ArgumentTypeError(f"overlap must lie in [0, 1), got {v}")
    return v


def _add_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("record", help="record file (.csv or raw binary with .meta.json sidecar)")
    p.add_argument("--format", choices=("csv", "raw-binary"), help="record format (default: from suffix)")
    p.add_argument("--channels", help="comma-separated channel names, e.g. fx,fy,fz,ax,ay,az (default: all)")
    p.add_argument("-o", "--out", default=".", help="output directory (default: current)")
    p.add_argument("--no-timestamp", action="store_true", help="omit the wall-clock timestamp from reports")
    p.add_argument("--gnuplot", action="store_true", help="also write a gnuplot script per channel")


def _add_band(p: argparse.ArgumentParser) -> None:
    p.add_argument("--band", type=_band, default=DEFAULT_BAND,
                   help="resonance band LOW:HIGH[:TAPER] in Hz (default: %(default)s)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="envspec", description="Envelope diagnostics for milling signals.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic milling record")
    p.add_argument("--config", help="JSON file with SynthConfig fields; flags override it")
    p.add_argument("--teeth", type=int)
    p.add_argument("--f-rot", type=float, dest="f_rot_hz", help="rotation frequency in Hz")
    p.add_argument("--gains", type=_floats, dest="tooth_gains", help="per-tooth gains, e.g. 1,1,0.5")
    p.add_argument("--resonance", type=float, dest="resonance_hz")
    p.add_argument("--damping", type=float, dest="damping_ratio")
    p.add_argument("--impact-energy", type=float, dest="impact_energy")
    p.add_argument("--noise-rms", type=float, dest="noise_rms")
    p.add_argument("--snr-db", type=float, help="set noise_rms from a signal-to-noise ratio instead")
    p.add_argument("--duration", type=float, dest="duration_s")
    p.add_argument("--fs", type=float, dest="sample_rate_hz")
    p.add_argument("--ramp", type=float, dest="speed_ramp_fraction", help="linear speed increase over the record")
    p.add_argument("--seed", type=int)
    p.add_argument("-o", "--out", default="synth.csv", help="output record path (default: %(default)s)")
    p.add_argument("--format", choices=("csv", "raw-binary"))

    p = sub.add_parser("analyze", help="full envelope diagnosis")
    _add_input(p)
    _add_band(p)
    p.add_argument("--teeth", type=int, help="cutter teeth (default: from record)")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--f-rot", type=float, dest="f_rot_hz")
    g.add_argument("--rpm", type=float)
    p.add_argument("--cutting-speed", type=float, help="cutting speed in m/min")
    p.add_argument("--diameter", type=float, help="cutter diameter in mm")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.add_argument("--max-order", type=int)
    p.add_argument("--block-mode", action="store_true", help="analyze consecutive blocks separately")
    p.add_argument("--block", type=int, help="block size in samples (default: record block size)")
    p.add_argument("--no-synchronous", action="store_true",
                   help="read orders from the time-domain envelope spectrum even when a tacho is present")
    p.add_argument("--strict", action="store_true", help="exit 4 when a verdict is inconclusive")
    p.add_argument("--seed", type=int, help="accepted for symmetry with synth; analysis is deterministic")

    p = sub.add_parser("spectrum", help="amplitude spectrum CSV per channel")
    _add_input(p)
    p.add_argument("--window", choices=("hann", "rectangular"), default="hann")

    p = sub.add_parser("waterfall", help="block-wise spectra CSV per channel")
    _add_input(p)
    p.add_argument("--window", choices=("hann", "rectangular"), default="hann")
    p.add_argument("--block", type=int, help="block size in samples (default: record block size)")
    p.add_argument("--overlap", type=_fraction, default=0.0)

    p = sub.add_parser("envelope", help="band-pass envelope CSVs per channel")
    _add_input(p)
    _add_band(p)
    return parser


# ---------------------------------------------------------------------------
# helpers


def _load(args) -> AcquisitionRecord:
    return read_record(args.record, args.format)


def _select(record: AcquisitionRecord, args) -> list:
    if not args.channels:
        return list(record.channels)
    try:
        return [record.channel(n.strip()) for n in args.channels.split(",") if n.strip()]
    except KeyError as exc:
        raise UsageError(exc.args[0])


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _check_band(band: BandSpec, fs: float) -> None:
    try:
        band.check(fs)
    except ValueError as exc:
        raise UsageError(str(exc))


def _gnuplot(out: Path, stem: str, files: dict) -> str:
    lines = ["set datafile separator ','", "set key autotitle columnhead", "set grid"]
    for title, name in files.items():
        lines += [f"set title '{stem} {title}'", f"plot '{name}' using 1:2 with lines", "pause -1"]
    name = f"{stem}_plots.gp"
    atomic_write_text(out / name, "\n".join(lines) + "\n")
    return name


def _timestamp(args):
    return None if args.no_timestamp else datetime.now(timezone.utc).isoformat(timespec="seconds")


def _input_meta(record: AcquisitionRecord, args) -> dict:
    meta = {
        "path": os.path.basename(args.record),
        "sample_rate_hz": record.sample_rate_hz,
        "n_samples": record.n_samples,
        "duration_s": record.duration_s,
        "channels": [{"name": c.name, "unit": c.unit} for c in record.channels],
        "tacho_pulses": len(record.tacho) if record.tacho is not None else 0,
        "cutter": None,
        "conditions": None,
    }
    if record.cutter is not None:
        meta["cutter"] = {"teeth": record.cutter.teeth, "diameter_mm": record.cutter.diameter_mm}
    if record.conditions is not None:
        meta["conditions"] = vars(record.conditions).copy()
    return meta


# ---------------------------------------------------------------------------
# commands


def cmd_synth(args) -> int:
    fields = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            fields.update(json.load(fh))
    for key in ("teeth", "f_rot_hz", "tooth_gains", "resonance_hz", "damping_ratio", "impact_energy",
                "noise_rms", "duration_s", "sample_rate_hz", "speed_ramp_fraction", "seed"):
        val = getattr(args, key)
        if val is not None:
            fields[key] = val
    if "tooth_gains" in fields and "teeth" not in fields:
        fields["teeth"] = len(fields["tooth_gains"])
    try:
        cfg = SynthConfig.from_dict(fields)
        if args.snr_db is not None:
            cfg = SynthConfig.from_dict({**cfg.to_dict(), "noise_rms": noise_rms_for_snr(cfg, args.snr_db)})
    except (InvariantError, ValueError, TypeError) as exc:
        raise UsageError(f"invalid synth configuration: {exc}")
    record = synth_milling(cfg)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    write_record(record, args.out, args.format)
    _say(f"wrote {args.out}: {record.n_samples} samples @ {record.sample_rate_hz:g} Hz, "
         f"{cfg.teeth} teeth, gains {list(cfg.tooth_gains)}")
    return EXIT_OK


def _analysis_doc(a: ChannelAnalysis, files: list, start_s: float | None = None) -> dict:
    doc = {}
    if start_s is not None:
        doc["start_s"] = start_s
    doc.update({
        "order_domain": a.order_domain,
        "orders": [{"order": k, "amplitude": amp, "exact_freq_hz": f} for k, amp, f in a.orders.rows],
        "search_halfwidth_hz": a.orders.search_halfwidth_hz,
        "diagnostics": a.diagnostics.as_dict(),
        "artifacts": files,
    })
    return doc


def _write_analysis(out: Path, stem: str, a: ChannelAnalysis, gnuplot: bool) -> list:
    files = {
        "spectrum": f"{stem}_spectrum.csv",
        "filtered": f"{stem}_filtered.csv",
        "envelope": f"{stem}_envelope.csv",
        "envelope spectrum": f"{stem}_envelope_spectrum.csv",
        "orders": f"{stem}_orders.csv",
    }
    spectrum_to_csv(a.spectrum, out / files["spectrum"])
    envelope_to_csv(a.envelope, out / stem)
    rows = ["order,amplitude,exact_freq_hz"] + ["%d,%.17g,%.17g" % r for r in a.orders.rows]
    atomic_write_text(out / files["orders"], "\n".join(rows) + "\n")
    names = list(files.values())
    if gnuplot:
        names.append(_gnuplot(out, stem, files))
    return names


def cmd_analyze(args) -> int:
    record = _load(args)
    channels = _select(record, args)
    _check_band(args.band, record.sample_rate_hz)
    teeth = args.teeth if args.teeth is not None else (record.cutter.teeth if record.cutter else None)
    if teeth is None or teeth < 1:
        raise UsageError("number of teeth unknown: pass --teeth N")
    if not args.threshold > 0:
        raise UsageError(f"--threshold must be positive, got {args.threshold}")
    try:
        f_rot, source = resolve_f_rot(
            record, f_rot_hz=args.f_rot_hz, rpm=args.rpm,
            cutting_speed_m_per_min=args.cutting_speed, diameter_mm=args.diameter,
        )
    except ValueError as exc:
        raise UsageError(str(exc))
    if source != "flag" and (args.f_rot_hz is not None or args.rpm is not None):
        _say(f"note: rotation frequency taken from {source}; --f-rot/--rpm ignored", "yellow")
    out = _out_dir(args)
    tacho = None if args.no_synchronous or args.block_mode else record.tacho
    opts = dict(teeth=teeth, f_rot_hz=f_rot, band=args.band, threshold=args.threshold, max_order=args.max_order)

    def run(sig):
        try:
            if not args.block_mode:
                a = analyze_channel(sig, tacho=tacho, **opts)
                return sig.name, [(None, a, _write_analysis(out, sig.name, a, args.gnuplot))]
            block = args.block or record.block_size
            blocks = []
            fs = sig.sample_rate_hz
            for i, blk in enumerate(slice_blocks(sig, min(block, len(sig)))):
                a = analyze_channel(blk, **opts)
                stem = f"{sig.name}_b{i:03d}"
                blocks.append((i * len(blk) / fs, a, _write_analysis(out, stem, a, args.gnuplot)))
            return sig.name, blocks
        except ValueError as exc:
            raise UsageError(f"channel {sig.name}: {exc}")

    with ThreadPoolExecutor(max_workers=min(6, len(channels))) as pool:
        results = list(pool.map(run, channels))

    chan_docs = {}
    statuses = []
    for name, items in results:
        if args.block_mode:
            chan_docs[name] = {"blocks": [_analysis_doc(a, files, start) for start, a, files in items]}
        else:
            _, a, files = items[0]
            chan_docs[name] = _analysis_doc(a, files)
        for _, a, _ in items:
            statuses.append(a.diagnostics.status)
            d = a.diagnostics
            color = {"asymmetry": "red", "inconclusive": "yellow"}.get(d.status, "green")
            _say(f"{name}: ratio {d.asymmetry_ratio:.3f} (threshold {d.threshold:g}) -> {d.status}", color)

    if "asymmetry" in statuses:
        verdict, code = "asymmetry", EXIT_ASYMMETRY
    elif "inconclusive" in statuses:
        verdict, code = "inconclusive", EXIT_INCONCLUSIVE if args.strict else EXIT_OK
    else:
        verdict, code = "clean", EXIT_OK

    report = {
        "schema": REPORT_SCHEMA,
        "tool": "envspec",
        "version": __version__,
        "timestamp": _timestamp(args),
        "input": _input_meta(record, args),
        "band": {"low_hz": args.band.low_hz, "high_hz": args.band.high_hz, "taper_hz": args.band.taper_hz},
        "teeth": teeth,
        "f_rot_hz": f_rot,
        "f_rot_source": source,
        "threshold": args.threshold,
        "block_mode": bool(args.block_mode),
        "channels": chan_docs,
        "verdict": verdict,
        "exit_code": code,
    }
    atomic_write_text(out / "report.json", json.dumps(report, indent=2) + "\n")
    return code


def cmd_spectrum(args) -> int:
    record = _load(args)
    out = _out_dir(args)
    for sig in _select(record, args):
        spec = amplitude_spectrum(sig, args.window)
        name = f"{sig.name}_spectrum.csv"
        spectrum_to_csv(spec, out / name)
        f, a = spec.peak(fmin=spec.df_hz)
        print(f"{sig.name}: peak {a:.6g} {sig.unit} at {f:.6g} Hz -> {out / name}")
        if args.gnuplot:
            _gnuplot(out, sig.name, {"spectrum": name})
    return EXIT_OK


def cmd_waterfall(args) -> int:
    record = _load(args)
    out = _out_dir(args)
    block = args.block or record.block_size
    for sig in _select(record, args):
        try:
            wf = waterfall(sig, block, args.overlap, args.window)
        except ValueError as exc:
            raise UsageError(f"channel {sig.name}: {exc}")
        name = f"{sig.name}_waterfall.csv"
        waterfall_to_csv(wf, out / name)
        print(f"{sig.name}: {len(wf.slices)} slice(s) of {block} samples -> {out / name}")
    return EXIT_OK


def cmd_envelope(args) -> int:
    record = _load(args)
    _check_band(args.band, record.sample_rate_hz)
    out = _out_dir(args)
    for sig in _select(record, args):
        res = envelope(sig, args.band)
        paths = envelope_to_csv(res, out / sig.name)
        spec = res.envelope_spectrum
        f, a = spec.peak(fmin=spec.df_hz)
        print(f"{sig.name}: envelope spectrum peak {a:.6g} at {f:.6g} Hz -> {paths[2]}")
        if args.gnuplot:
            _gnuplot(out, sig.name, {"filtered": Path(paths[0]).name, "envelope": Path(paths[1]).name,
                                     "envelope spectrum": Path(paths[2]).name})
    return EXIT_OK


COMMANDS = {
    "synth": cmd_synth,
    "analyze": cmd_analyze,
    "spectrum": cmd_spectrum,
    "waterfall": cmd_waterfall,
    "envelope": cmd_envelope,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        _say(f"envspec {args.command}: error: {exc}", "red")
        return EXIT_USAGE
    except (OSError, RecordFormatError, InvariantError) as exc:
        _say(f"envspec {args.command}: I/O error: {exc}", "red")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
