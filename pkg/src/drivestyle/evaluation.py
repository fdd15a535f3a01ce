"""Annotation aggregation into expected maneuver frames, and the TDE.

Each (video, agent, style) carries M annotator intervals [s_m, e_m] in
frame units. The per-frame counter c_t tallies how many annotators cover
frame t within [min S, max E]; normalizing the counts to a probability
mass function gives the expected maneuver frame E[T]. The time deviation
error compares E[T] against the model's maximum-likelihood frame,
converted to seconds by the video frame rate.

Style codes used in label files: OS (overspeeding), OT (overtaking),
SLC (sudden lane-change), W (weaving).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from .errors import TrajectoryParseError, ValidationError
from .styles import (
    STYLE_OVERSPEEDING,
    STYLE_OVERTAKE_LANE_CHANGE,
    STYLE_WEAVING,
    StyleReport,
)

STYLE_CODES = ("OS", "OT", "SLC", "W")

# label style code -> style entry of the report whose t_SLE answers it
_CODE_TO_STYLE = {
    "OS": STYLE_OVERSPEEDING,
    "OT": STYLE_OVERTAKE_LANE_CHANGE,
    "SLC": STYLE_OVERTAKE_LANE_CHANGE,
    "W": STYLE_WEAVING,
}


@dataclass
class AnnotationSet:
    """Annotator intervals grouped by (video_id, agent_id, style code)."""

    entries: dict[tuple[str, str, str], list[tuple[str, int, int]]] = field(
        default_factory=dict
    )
    frame_rate_hz: float = 1.0

    def add(
        self,
        video_id: str,
        agent_id: str,
        style: str,
        annotator_id: str,
        start_frame: int,
        end_frame: int,
    ) -> None:
        if style not in STYLE_CODES:
            raise ValidationError(
                f"unknown style code {style!r} (expected one of {STYLE_CODES})"
            )
        if end_frame < start_frame:
            raise ValidationError(
                f"annotation end {end_frame} precedes start {start_frame}"
            )
        key = (video_id, agent_id, style)
        self.entries.setdefault(key, []).append(
            (annotator_id, int(start_frame), int(end_frame))
        )

    def intervals(self, key: tuple[str, str, str]) -> list[tuple[int, int]]:
        return [(s, e) for _, s, e in self.entries[key]]


def parse_annotations(source, frame_rate_hz: float) -> AnnotationSet:
    """Parse ``video_id,agent_id,style,annotator_id,start_frame,end_frame`` CSV."""
    if isinstance(source, (str, os.PathLike)) and os.path.exists(os.fspath(source)):
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    elif hasattr(source, "read"):
        text = source.read()
    else:
        text = source
    out = AnnotationSet(frame_rate_hz=frame_rate_hz)
    header = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if header is None:
            header = parts
            expected = ["video_id", "agent_id", "style", "annotator_id",
                        "start_frame", "end_frame"]
            if parts != expected:
                raise TrajectoryParseError(
                    f"annotation header must be {','.join(expected)}", line_no
                )
            continue
        if len(parts) != 6:
            raise TrajectoryParseError(f"expected 6 fields, got {len(parts)}", line_no)
        try:
            start, end = int(parts[4]), int(parts[5])
        except ValueError as exc:
            raise TrajectoryParseError(f"non-integer frame: {exc}", line_no) from None
        try:
            out.add(parts[0], parts[1], parts[2], parts[3], start, end)
        except ValidationError as exc:
            raise TrajectoryParseError(str(exc), line_no) from None
    if header is None:
        raise ValidationError("empty annotation stream")
    return out


def serialize_annotations(annotations: AnnotationSet, dest=None) -> str:
    lines = ["video_id,agent_id,style,annotator_id,start_frame,end_frame"]
    for (video, agent, style) in sorted(annotations.entries):
        for annotator, s, e in annotations.entries[(video, agent, style)]:
            lines.append(f"{video},{agent},{style},{annotator},{s},{e}")
    text = "\n".join(lines) + "\n"
    if dest is not None:
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def annotations_from_labels(
    labels, frame_rate_hz: float, video_id: str = "sim", annotator_id: str = "gt"
) -> AnnotationSet:
    """Wrap simulator ground-truth labels as a single-annotator set.

    Accepts any objects carrying agent_id/style/start_frame/end_frame, so
    synthetic labels ride the same evaluation path as human annotations.
    """
    out = AnnotationSet(frame_rate_hz=frame_rate_hz)
    for label in labels:
        out.add(
            video_id,
            label.agent_id,
            label.style,
            annotator_id,
            label.start_frame,
            label.end_frame,
        )
    return out


@dataclass
class TemporalDistribution:
    """Annotator coverage counts over [s*, e*] and their expectation."""

    support: tuple[int, int]
    counts: dict[int, int]
    pmf: dict[int, float]
    expectation: float


def expected_frame(intervals: list[tuple[int, int]]) -> TemporalDistribution:
    """Aggregate M annotator intervals into the expected maneuver frame.

    c_t counts the annotators covering frame t in [min S, max E]; the
    expectation is taken under the normalized counts.
    """
    if not intervals:
        raise ValidationError("cannot aggregate an empty annotation set")
    for s, e in intervals:
        if e < s:
            raise ValidationError(f"annotation interval ({s}, {e}) is reversed")
    s_star = min(s for s, _ in intervals)
    e_star = max(e for _, e in intervals)
    counts = {
        t: sum(1 for s, e in intervals if s <= t <= e)
        for t in range(s_star, e_star + 1)
    }
    total = sum(counts.values())
    pmf = {t: c / total for t, c in counts.items()}
    expectation = sum(t * p for t, p in pmf.items())
    return TemporalDistribution(
        support=(s_star, e_star), counts=counts, pmf=pmf, expectation=expectation
    )


def tde(t_sle_frame: float, expected: float, frame_rate_hz: float) -> float:
    """Time deviation error |t_SLE - E[T]| / frame rate, in seconds."""
    if frame_rate_hz <= 0:
        raise ValidationError(f"frame_rate_hz must be positive, got {frame_rate_hz}")
    return abs((t_sle_frame - expected) / frame_rate_hz)


@dataclass
class TdeRow:
    style: str
    mean_tde_s: float | None
    maneuver_count: int
    missing_count: int


@dataclass
class TdeTable:
    rows: list[TdeRow]
    warnings: list[str] = field(default_factory=list)

    def to_csv(self, dest=None) -> str:
        lines = ["style,mean_tde_s,maneuver_count,missing_count"]
        for row in self.rows:
            mean = "" if row.mean_tde_s is None else repr(row.mean_tde_s)
            lines.append(
                f"{row.style},{mean},{row.maneuver_count},{row.missing_count}"
            )
        text = "\n".join(lines) + "\n"
        if dest is not None:
            with open(dest, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text

    def to_json(self, dest=None) -> str:
        payload = {
            "rows": [
                {
                    "style": r.style,
                    "mean_tde_s": r.mean_tde_s,
                    "maneuver_count": r.maneuver_count,
                    "missing_count": r.missing_count,
                }
                for r in self.rows
            ],
            "warnings": self.warnings,
        }
        text = json.dumps(payload, indent=2) + "\n"
        if dest is not None:
            with open(dest, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text

    def mean(self, style: str) -> float | None:
        for row in self.rows:
            if row.style == style:
                return row.mean_tde_s
        return None


def evaluate_run(
    reports: dict[str, StyleReport] | list[StyleReport],
    annotations: AnnotationSet,
) -> TdeTable:
    """Per-style mean TDE between model t_SLE and annotated E[T].

    Labels whose agent is missing from the reports, or whose style has no
    prediction (e.g. no weaving critical points), are excluded from the
    means and surface in the missing counts and warnings.
    """
    if isinstance(reports, list):
        reports = {r.agent_id: r for r in reports}
    f = annotations.frame_rate_hz
    errors: dict[str, list[float]] = {code: [] for code in STYLE_CODES}
    missing: dict[str, int] = {code: 0 for code in STYLE_CODES}
    labeled: set[str] = set()
    warnings: list[str] = []

    for key in sorted(annotations.entries):
        video, agent, code = key
        labeled.add(code)
        report = reports.get(agent)
        if report is None:
            missing[code] += 1
            warnings.append(f"{video}/{agent}/{code}: agent missing from reports")
            continue
        summary = report.styles[_CODE_TO_STYLE[code]]
        if summary.t_sle is None:
            missing[code] += 1
            warnings.append(f"{video}/{agent}/{code}: no prediction for style")
            continue
        expected = expected_frame(annotations.intervals(key)).expectation
        model_frame = summary.t_sle * f
        errors[code].append(tde(model_frame, expected, f))

    rows = []
    for code in STYLE_CODES:
        if code not in labeled:
            continue
        vals = errors[code]
        rows.append(
            TdeRow(
                style=code,
                mean_tde_s=sum(vals) / len(vals) if vals else None,
                maneuver_count=len(vals),
                missing_count=missing[code],
            )
        )
    return TdeTable(rows=rows, warnings=warnings)
