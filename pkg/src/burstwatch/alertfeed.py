"""Alert records for downstream feeds, rendered as NDJSON or Atom XML."""
from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import date
from typing import Iterable, Mapping, Sequence
from xml.etree import ElementTree as ET

from .detectors import AlarmSeries, DetectorConfig, baseline_stats
from .events import CountSeries

ATOM_NS = "http://www.w3.org/2005/Atom"


@dataclass(frozen=True)
class AlertRecord:
    day: date
    disease: str
    country: str
    model: str
    statistic: float
    threshold: float
    baseline_mu: float
    baseline_sigma: float
    day_count: int
    contributing_languages: tuple[str, ...]
    province: str | None = None
    focus_species: str | None = None
    source_refs: tuple[str, ...] = ()

    def sort_key(self):
        return (self.day, self.disease, self.country, self.model)

    def to_dict(self) -> dict:
        return {
            "day": self.day.isoformat(),
            "disease": self.disease,
            "country": self.country,
            "province": self.province,
            "model": self.model,
            "statistic": self.statistic,
            "threshold": self.threshold,
            "baseline_mu": self.baseline_mu,
            "baseline_sigma": self.baseline_sigma,
            "day_count": self.day_count,
            "contributing_languages": list(self.contributing_languages),
            "focus_species": self.focus_species,
            "source_refs": list(self.source_refs),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "AlertRecord":
        return cls(
            day=date.fromisoformat(d["day"]),
            disease=d["disease"],
            country=d["country"],
            province=d.get("province"),
            model=d["model"],
            statistic=float(d["statistic"]),
            threshold=float(d["threshold"]),
            baseline_mu=float(d["baseline_mu"]),
            baseline_sigma=float(d["baseline_sigma"]),
            day_count=int(d["day_count"]),
            contributing_languages=tuple(d.get("contributing_languages", ())),
            focus_species=d.get("focus_species"),
            source_refs=tuple(d.get("source_refs", ())),
        )


def emit_alerts(
    alarms: AlarmSeries,
    series: CountSeries,
    cfg: DetectorConfig,
    per_language: Mapping[str, CountSeries] | None = None,
) -> list[AlertRecord]:
    """One record per alarm day.

    ``per_language`` holds the un-aggregated per-language series; languages
    with a nonzero count on the alarm day are listed as contributors.  Without
    it, every language of ``series`` is listed.
    """
    records = []
    for i, rec in enumerate(alarms.records()):
        if not rec.alarm:
            continue
        base = baseline_stats(series, i, cfg)
        if per_language is not None:
            langs = sorted(lang for lang, s in per_language.items() if s.counts[i] > 0)
        else:
            langs = sorted(series.languages)
        records.append(
            AlertRecord(
                day=rec.day,
                disease=series.topic.disease,
                country=series.topic.country,
                model=alarms.model,
                statistic=rec.statistic,
                threshold=alarms.threshold,
                baseline_mu=base.mu,
                baseline_sigma=base.sigma,
                day_count=series.counts[i],
                contributing_languages=tuple(langs),
            )
        )
    return records


def render_feed(records: Iterable[AlertRecord], format: str = "ndjson") -> str:
    records = sorted(records, key=AlertRecord.sort_key)
    if format == "ndjson":
        return "".join(json.dumps(r.to_dict(), sort_keys=True) + "\n" for r in records)
    if format == "atom":
        return _render_atom(records)
    raise ValueError(f"unsupported feed format {format!r}")


def parse_feed(text: str) -> list[AlertRecord]:
    """Inverse of ``render_feed(..., "ndjson")``."""
    return [AlertRecord.from_dict(json.loads(line)) for line in text.splitlines() if line.strip()]


def _render_atom(records: Sequence[AlertRecord]) -> str:
    ET.register_namespace("", ATOM_NS)
    q = lambda tag: f"{{{ATOM_NS}}}{tag}"  # noqa: E731
    feed = ET.Element(q("feed"))
    ET.SubElement(feed, q("title")).text = "burstwatch alerts"
    ET.SubElement(feed, q("id")).text = "urn:burstwatch:alerts"
    updated = max((r.day for r in records), default=None)
    ET.SubElement(feed, q("updated")).text = (
        f"{updated.isoformat()}T00:00:00Z" if updated else "1970-01-01T00:00:00Z"
    )
    for r in records:
        entry = ET.SubElement(feed, q("entry"))
        where = f"{r.province}, {r.country}" if r.province else r.country
        ET.SubElement(entry, q("title")).text = (
            f"{r.model} alert: {r.disease} in {where.upper()} (S={r.statistic:.3f})"
        )
        ET.SubElement(entry, q("id")).text = (
            f"urn:burstwatch:{r.day.isoformat()}:{r.disease}:{r.country}:{r.model}"
        )
        ET.SubElement(entry, q("updated")).text = f"{r.day.isoformat()}T00:00:00Z"
        ET.SubElement(entry, q("summary")).text = (
            f"count {r.day_count}; baseline mean {r.baseline_mu:.3f}, "
            f"sd {r.baseline_sigma:.3f}; threshold {r.threshold}; "
            f"languages {','.join(r.contributing_languages) or '-'}"
        )
        for ref in r.source_refs:
            ET.SubElement(entry, q("link"), href=ref)
    ET.indent(feed)
    return ET.tostring(feed, encoding="unicode", xml_declaration=True) + "\n"
