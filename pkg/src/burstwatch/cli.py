"""burstwatch command line: synth, detect, evaluate, tune.

Exit status is 0 on success, 1 for usage errors and 2 for data errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from datetime import date
from pathlib import Path

from . import __version__
from .alertfeed import render_feed
from .detectors import MODELS, PAPER_THRESHOLDS, DetectorConfig, DetectorError
from .evaluation import EvaluationError, render_table, write_silver_csv
from .pipeline import (
    DataError,
    ManifestError,
    RunManifest,
    build_streams,
    evaluate_fused,
    evaluate_staged,
    load_events,
    load_silver,
    metrics_document,
    read_alarm_rows,
    resolve_range,
    run_detect,
    _parse_langs,
)
from .synth import SynthSpec, frames_ndjson_with_hours, generate
from .tuning import DEFAULT_LAMBDAS, DEFAULT_THRESHOLDS, TuneGrid, TuningError, best_point, evaluate_grid

log = logging.getLogger("burstwatch")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _model_spec(text: str) -> DetectorConfig:
    model, _, thresh = text.partition("=")
    try:
        if thresh:
            return DetectorConfig(model=model, threshold=float(thresh))
        return DetectorConfig.paper_default(model)
    except (KeyError, ValueError) as exc:
        raise argparse.ArgumentTypeError(f"bad model spec {text!r}: {exc}") from None


def _stratum(text: str) -> tuple[str, str]:
    name, sep, langs = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected NAME=lang,lang or NAME=all, got {text!r}")
    return name, langs


def _add_run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--manifest", type=Path, help="JSON run manifest; flags override its fields")
    p.add_argument("--events", type=Path, help="event frames file")
    p.add_argument("--events-format", choices=("ndjson", "csv"))
    p.add_argument("--silver", type=Path, help="silver-standard report CSV")
    p.add_argument("--start", type=date.fromisoformat, help="first day (ISO date)")
    p.add_argument("--end", type=date.fromisoformat, help="last day (ISO date)")
    p.add_argument("--out-dir", type=Path)
    p.add_argument("--model", dest="models", action="append", type=_model_spec,
                   metavar="MODEL[=THRESHOLD]",
                   help=f"detector to run (repeatable); default thresholds {PAPER_THRESHOLDS}")
    p.add_argument("--config", dest="config_files", action="append", type=Path,
                   help="detector config JSON file (repeatable)")
    p.add_argument("--stratum", dest="strata", action="append", type=_stratum,
                   metavar="NAME=LANGS", help="language stratum, e.g. en=en or all=all (repeatable)")
    p.add_argument("--no-purge", action="store_true", help="keep singleton days")
    p.add_argument("--jobs", type=int)
    p.add_argument("--skip-bad-lines", action="store_true",
                   help="warn about malformed event lines instead of failing")


def _manifest(args) -> RunManifest:
    m = RunManifest.load(args.manifest) if args.manifest else RunManifest()
    for attr in ("events", "events_format", "silver", "start", "end", "jobs"):
        value = getattr(args, attr, None)
        if value is not None:
            setattr(m, attr, value)
    if args.out_dir is not None:
        m.output_dir = args.out_dir
    configs = list(args.models or [])
    for path in args.config_files or []:
        try:
            configs.append(DetectorConfig.from_dict(json.loads(path.read_text())))
        except FileNotFoundError:
            raise DataError(f"{path}: no such file") from None
        except (json.JSONDecodeError, TypeError, KeyError) as exc:
            raise ManifestError(f"{path}: bad detector config ({exc})") from None
    if configs:
        m.detectors = configs
    if args.strata:
        m.strata = {name: _parse_langs(langs) for name, langs in args.strata}
    if args.no_purge:
        m.purge_singletons = False
    m.__post_init__()
    return m


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def cmd_detect(args) -> int:
    m = _manifest(args)
    frames = load_events(m, args.skip_bad_lines)
    reports = load_silver(m)
    out = run_detect(m, frames, reports)
    for w in out.warnings:
        log.warning(w)
    _write(m.output_dir / "alarms.ndjson",
           "".join(json.dumps(r, sort_keys=True) + "\n" for r in out.alarm_rows))
    for stratum, records in out.alerts.items():
        _write(m.output_dir / f"alerts_{stratum}.ndjson", render_feed(records, "ndjson"))
        _write(m.output_dir / f"alerts_{stratum}.atom", render_feed(records, "atom"))
    n_alarms = sum(r["alarm"] for r in out.alarm_rows)
    print(f"wrote {len(out.alarm_rows)} day records ({n_alarms} alarms) to {m.output_dir}")
    return EXIT_OK


def _write_metrics(m: RunManifest, results, warnings) -> None:
    for w in warnings:
        log.warning(w)
    _write(m.output_dir / "metrics.json", metrics_document(results, warnings))
    tables = [
        render_table(list(rows.items()), title=f"[{stratum}]")
        for stratum, rows in results.items()
    ]
    text = "\n".join(tables)
    _write(m.output_dir / "metrics.txt", text)
    sys.stdout.write(text)


def cmd_evaluate(args) -> int:
    m = _manifest(args)
    if args.alarms is not None:
        m.alarms = args.alarms
    reports = load_silver(m)
    if m.alarms is not None:
        try:
            with open(m.alarms, encoding="utf-8") as fh:
                groups = read_alarm_rows(fh, str(m.alarms))
        except FileNotFoundError:
            raise DataError(f"{m.alarms}: no such file") from None
        results, warnings = evaluate_staged(groups, reports)
    else:
        frames = load_events(m, args.skip_bad_lines)
        results, warnings = evaluate_fused(m, frames, reports)
    _write_metrics(m, results, warnings)
    return EXIT_OK


def cmd_tune(args) -> int:
    m = _manifest(args)
    if args.thresholds is not None and not args.thresholds:
        raise UsageError("threshold grid is empty")
    if args.lambdas is not None and not args.lambdas:
        raise UsageError("lambda grid is empty")
    base = m.detectors[0]
    if args.tune_model:
        base = next((c for c in m.detectors if c.model == args.tune_model.upper()), None) \
            or DetectorConfig.paper_default(args.tune_model)
    lambdas = args.lambdas
    if lambdas is None and base.model == "EWMA" and args.thresholds is None:
        lambdas = list(DEFAULT_LAMBDAS)
    grid = TuneGrid(base.model, tuple(args.thresholds or DEFAULT_THRESHOLDS),
                    tuple(lambdas) if lambdas else None)

    stratum = args.tune_stratum or next(iter(m.strata))
    if stratum not in m.strata:
        raise UsageError(f"unknown stratum {stratum!r}; have {sorted(m.strata)}")
    frames = load_events(m, args.skip_bad_lines)
    reports = load_silver(m)
    day_range = resolve_range(m, frames)
    if day_range is None:
        raise DataError("no events to tune on")
    warnings: list[str] = []
    streams = build_streams(frames, reports, day_range, m.strata[stratum], m.topics,
                            m.purge_singletons, warnings)
    for w in sorted(set(warnings)):
        log.warning(w)
    held_out = [(s.series, s.reports) for s in streams]
    points = evaluate_grid(held_out, grid, replace(base, name=None))
    chosen = best_point(points).config

    out = args.out or (m.output_dir / f"tuned_{chosen.model}.json")
    _write(out, json.dumps(chosen.to_dict(), indent=2, sort_keys=True) + "\n")
    report = {
        "model": grid.model,
        "stratum": stratum,
        "chosen": chosen.to_dict(),
        "grid": [p.to_dict() for p in points],
    }
    _write(out.with_name(out.stem + "_report.json"), json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(f"{chosen.model}: threshold {chosen.threshold:g}"
          + (f", lambda {chosen.lam:g}" if chosen.model == "EWMA" else "") + f" -> {out}")
    return EXIT_OK


def cmd_synth(args) -> int:
    try:
        spec = SynthSpec(
            seed=args.seed,
            start=args.start,
            days=args.days,
            streams=args.streams,
            background=args.background,
            magnitude=args.magnitude,
            outbreak_day=args.outbreak_day,
            duration=args.duration,
            report_lag=args.report_lag,
            weekend_outage=args.weekend_outage,
            languages=tuple(sorted(_parse_langs(args.languages))),
            coverage=args.coverage,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    frames, reports = generate(spec)
    out = args.out_dir
    _write(out / "events.ndjson", frames_ndjson_with_hours(frames, spec.seed))
    _write(out / "silver.csv", write_silver_csv(reports))
    strata = {"all": "all"}
    if "en" in spec.languages and len(spec.languages) > 1:
        strata = {"en": ["en"], "all": "all"}
    manifest = {
        "events": "events.ndjson",
        "silver": "silver.csv",
        "start": spec.day_range.start.isoformat(),
        "end": spec.day_range.end.isoformat(),
        "strata": strata,
        "detectors": [DetectorConfig.paper_default(m).to_dict() for m in MODELS],
        "output_dir": "out",
    }
    _write(out / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"wrote {len(frames)} events and {len(reports)} silver reports to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="burstwatch", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("detect", help="run detectors and write alarms and alert feeds")
    _add_run_args(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("evaluate", help="score alarms against silver reports")
    _add_run_args(p)
    p.add_argument("--alarms", type=Path, help="alarms.ndjson from a previous detect run")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("tune", help="pick a threshold by held-out F1")
    _add_run_args(p)
    p.add_argument("--tune-model", help="model to tune (default: first configured detector)")
    p.add_argument("--thresholds", type=_floats, help="comma-separated threshold grid")
    p.add_argument("--lambdas", type=_floats, help="comma-separated EWMA lambda grid")
    p.add_argument("--tune-stratum", help="language stratum to tune on (default: first)")
    p.add_argument("--out", type=Path, help="where to write the chosen config")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("synth", help="generate a seeded synthetic event stream")
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--start", type=date.fromisoformat, default=date(2010, 1, 1))
    p.add_argument("--days", type=int, default=129)
    p.add_argument("--streams", type=int, default=1)
    p.add_argument("--background", type=float, default=1.0, help="mean daily events per language")
    p.add_argument("--magnitude", type=float, default=10.0, help="extra events per burst day")
    p.add_argument("--outbreak-day", type=int, help="burst onset index (default: random per stream)")
    p.add_argument("--duration", type=int, default=5)
    p.add_argument("--report-lag", type=int, default=3, help="silver report day after onset")
    p.add_argument("--weekend-outage", action="store_true")
    p.add_argument("--languages", default="en")
    p.add_argument("--coverage", type=float, default=1.0,
                   help="probability each language covers a stream's burst")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    try:
        return args.func(args)
    except (UsageError, ManifestError, DetectorError) as exc:
        print(f"burstwatch: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, EvaluationError, TuningError, OSError) as exc:
        print(f"burstwatch: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
