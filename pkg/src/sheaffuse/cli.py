"""Command-line interface.

Exit codes: 0 success, 1 input error, 2 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .consistency import DEFAULT_CUTOFF_STD
from .emissions import HOURS, VehicleCounts, concentration, emitted_mass, load_emission_factors
from .estimators import LagEstimator
from .experiment import InvariantError, check_report, run_experiment, snapshot_from_row, snapshot_filtration
from .readings import export_readings, format_readings, hourly_means, ingest_readings, records_from_timeline
from .sheaf import SPREAD_CONVENTIONS
from .simulation import DEFAULT_SENSORS, SignalSpec, ground_truth, sample_streams
from .topology import load_topology

EXIT_OK, EXIT_INPUT, EXIT_INVARIANT = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _emit(obj, path: str | None) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _write_table(path, cols, data) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in data:
            w.writerow([int(row[0])] + [repr(float(x)) for x in row[1:]])


def _schema(topology, readings_path):
    # vertex arities come from the topology; extra streams (a reference) are learned
    data = ingest_readings(readings_path)
    for v in topology.vertices:
        if v in data.dims and data.dims[v] != topology.sheaf.stalk_dim(v):
            raise ValueError(f"stream {v!r} has {data.dims[v]} value(s) but the topology expects "
                             f"{topology.sheaf.stalk_dim(v)}")
    return data


def cmd_simulate(args) -> int:
    noise = dict(_pair(s) for s in args.noise)
    unknown = set(noise) - {s.id for s in DEFAULT_SENSORS}
    if unknown:
        raise ValueError(f"--noise names unknown sensors {sorted(unknown)}")
    specs = [replace(s, noise_pct=noise.get(s.id, s.noise_pct)) for s in DEFAULT_SENSORS]
    signal = SignalSpec(args.amplitude, args.offset, args.duration)
    tl = sample_streams(specs, signal, args.seed, integer_counts=args.integer_counts)
    records = records_from_timeline(tl)
    if args.out:
        export_readings(args.out, records)
    else:
        sys.stdout.write(format_readings(records))
    return EXIT_OK


def _pair(text: str) -> tuple[str, float]:
    key, sep, val = text.partition("=")
    if not sep:
        raise ValueError(f"expected ID=VALUE, got {text!r}")
    return key, float(val)


def cmd_fuse(args) -> int:
    topology = load_topology(args.topology)
    data = _schema(topology, args.readings)
    sensors = list(topology.vertices) + ([args.reference] if args.reference else [])
    timeline = data.to_timeline(sensors)
    kw = dict(snapshot_times=args.snapshot, ma_window_s=args.ma_window, spread=args.spread,
              cutoff_std=None if args.no_cutoff else args.cutoff_std)
    if args.reference:
        report = run_experiment(timeline, topology, reference=args.reference, **kw)
    else:
        signal = SignalSpec(args.amplitude, args.offset, max(int(timeline.events[-1][0]) + 1, 1))
        report = run_experiment(timeline, topology, truth=lambda t: ground_truth(t, signal), **kw)
    summary = report.summary()
    check_report(summary)
    if args.series_out:
        _write_table(args.series_out, *report.series_table())
    _emit(summary, args.report_out)
    return EXIT_OK


def cmd_filtration(args) -> int:
    topology = load_topology(args.topology)
    if args.assignment:
        text = Path(args.assignment).read_text(encoding="utf-8") if Path(args.assignment).is_file() else args.assignment
        assignment = json.loads(text)
        row = topology.sheaf.flatten(assignment)
        snap = snapshot_from_row(topology.sheaf, row, args.time or 0, args.spread, args.cutoff_std)
    else:
        if args.readings is None or args.time is None:
            raise ValueError("give --assignment, or a readings file together with --time")
        data = _schema(topology, args.readings)
        snap = snapshot_filtration(data.to_timeline(topology.vertices), topology, args.time, args.spread,
                                   args.cutoff_std)
    _emit(snap.to_dict(), args.out)
    return EXIT_OK


def cmd_convert(args) -> int:
    ef = load_emission_factors(args.ef)
    counts = VehicleCounts.from_pair(args.counts, ef, args.vkt_km)
    mass = emitted_mass(counts, ef)
    total = sum(mass.values())
    _emit({"vkt_km": args.vkt_km, "mass_g": mass, "total_mass_g": total,
           "concentration_ug_m3": concentration(total, args.vkt_km)}, args.out)
    return EXIT_OK


def _read_daily(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or not {"hour", "p_v", "p_s"} <= set(rows[0]):
        raise ValueError("daily file needs a header with hour,p_v,p_s")
    hours = [int(r["hour"]) for r in rows]
    if sorted(hours) != list(range(HOURS)):
        raise ValueError(f"daily file must list hours 0..{HOURS - 1} exactly once")
    order = np.argsort(hours)
    pv = np.array([float(rows[i]["p_v"]) for i in order])
    ps = np.array([float(rows[i]["p_s"]) for i in order])
    return pv, ps


def cmd_lag(args) -> int:
    if args.daily:
        p_v, p_s = _read_daily(args.daily)
    else:
        if not (args.readings and args.vehicle and args.sensor):
            raise ValueError("give --daily, or --readings with --vehicle and --sensor")
        data = ingest_readings(args.readings)
        for sid in (args.vehicle, args.sensor):
            if sid not in data.dims:
                raise ValueError(f"sensor {sid!r} not found in the readings")
        ef = load_emission_factors(args.ef)
        t_v, counts = data.stream(args.vehicle)
        pm_v = counts @ ef.as_array() * args.vkt_km if counts.shape[1] == len(ef.entries) else counts[:, 0]
        t_s, vals = data.stream(args.sensor)
        p_v = np.asarray(hourly_means(t_v, pm_v, args.day))
        p_s = np.asarray(hourly_means(t_s, vals, args.day))
    est = LagEstimator(args.max_lag, args.boundary).fit(p_v, p_s)
    _emit({"lag_hours": est.lag_, "degenerate": est.degenerate_,
           "correlations": [None if np.isnan(c) else float(c) for c in est.correlations_],
           "base": est.base_.hours.tolist()}, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sheaffuse", description="Sheaf-based fusion of camera and dust-sensor PM2.5 readings.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def fusion_opts(sp):
        sp.add_argument("--topology", help="topology JSON (default: bundled two-camera network)")
        sp.add_argument("--spread", choices=SPREAD_CONVENTIONS, default="reference")
        sp.add_argument("--cutoff-std", type=float, default=DEFAULT_CUTOFF_STD)

    s = sub.add_parser("simulate", help="write a seeded readings CSV")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--duration", type=int, default=SignalSpec().duration_s)
    s.add_argument("--amplitude", type=float, default=SignalSpec().amplitude)
    s.add_argument("--offset", type=float, default=SignalSpec().offset)
    s.add_argument("--noise", action="append", default=[], metavar="ID=PCT")
    s.add_argument("--integer-counts", action="store_true")
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser("fuse", help="naive versus sheaf fusion over a readings file")
    f.add_argument("readings")
    fusion_opts(f)
    f.add_argument("--no-cutoff", action="store_true", help="average every face")
    g = f.add_mutually_exclusive_group(required=True)
    g.add_argument("--reference", help="stream id used as ground truth")
    g.add_argument("--truth-signal", action="store_true", help="score against the simulated sine signal")
    f.add_argument("--amplitude", type=float, default=SignalSpec().amplitude)
    f.add_argument("--offset", type=float, default=SignalSpec().offset)
    f.add_argument("--snapshot", type=int, action="append", default=[], metavar="T")
    f.add_argument("--ma-window", type=float, default=3600.0)
    f.add_argument("--series-out")
    f.add_argument("--report-out")
    f.set_defaults(func=cmd_fuse)

    fl = sub.add_parser("filtration", help="filtration snapshot at one time or for one assignment")
    fl.add_argument("readings", nargs="?")
    fl.add_argument("--time", type=int)
    fl.add_argument("--assignment", help="JSON object or file mapping vertex ids to readings")
    fusion_opts(fl)
    fl.add_argument("--out")
    fl.set_defaults(func=cmd_filtration)

    c = sub.add_parser("convert", help="vehicle counts to PM2.5 mass and concentration")
    c.add_argument("counts", type=float, nargs="+")
    c.add_argument("--vkt-km", type=float, default=1.0)
    c.add_argument("--ef", help="emission-factor JSON")
    c.add_argument("--out")
    c.set_defaults(func=cmd_convert)

    lg = sub.add_parser("lag", help="daily lag between vehicle and sensor PM2.5")
    lg.add_argument("--daily", help="CSV with hour,p_v,p_s")
    lg.add_argument("--readings")
    lg.add_argument("--vehicle")
    lg.add_argument("--sensor")
    lg.add_argument("--day", type=int, default=0)
    lg.add_argument("--ef")
    lg.add_argument("--vkt-km", type=float, default=1.0)
    lg.add_argument("--max-lag", type=int, default=12)
    lg.add_argument("--boundary", choices=("circular", "truncated"), default="circular")
    lg.add_argument("--out")
    lg.set_defaults(func=cmd_lag)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors exit 1, --help exits 0
        return int(exc.code or 0)
    try:
        return args.func(args)
    except InvariantError as exc:
        print(f"sheaffuse: invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ValueError, KeyError, OSError) as exc:
        print(f"sheaffuse: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
