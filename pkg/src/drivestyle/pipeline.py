"""End-to-end analysis: table -> centralities -> fits -> style reports.

The centrality series are computed once over the whole run (the degree
chain is cumulative), then fitted over sliding windows. Windows are laid
out on the frame grid with 50% overlap by default and the final window
is clamped to the run's end; a window longer than the run degenerates to
a single window covering it. Agents and windows are independent after
the series pass, so this stage is embarrassingly parallel; the
implementation stays single-threaded for determinism.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .centrality import compute_series
from .errors import InsufficientDataError, ValidationError
from .graph import DEFAULT_CAPACITY, DEFAULT_MU
from .ingest import TrajectoryTable
from .regression import POLY_DEGREE, GridSearchAlpha, fit
from .styles import (
    DEFAULT_THRESHOLDS,
    StyleReport,
    StyleSummary,
    Thresholds,
    WeavingSummary,
    WindowAnalysis,
    classify,
    detect_weaving,
    sle_sie,
)

SCHEMA_VERSION = "1"

DEFAULT_WINDOW_S = 5.0
DEFAULT_EPSILON_S = 0.5


@dataclass
class AnalysisParams:
    """Tunable knobs of the analysis pipeline."""

    mu: float = DEFAULT_MU
    capacity: int = DEFAULT_CAPACITY
    window_s: float = DEFAULT_WINDOW_S
    stride_s: float | None = None  # None: half the window (50% overlap)
    epsilon_s: float = DEFAULT_EPSILON_S
    thresholds: Thresholds = field(default_factory=lambda: DEFAULT_THRESHOLDS)
    alpha_policy: object = None  # None: a fresh grid-search policy

    def __post_init__(self):
        if self.window_s <= 0:
            raise ValidationError(f"window_s must be positive, got {self.window_s}")
        if self.stride_s is not None and self.stride_s <= 0:
            raise ValidationError(f"stride_s must be positive, got {self.stride_s}")
        if self.epsilon_s <= 0:
            raise ValidationError(f"epsilon_s must be positive, got {self.epsilon_s}")

    def effective_stride(self) -> float:
        return self.stride_s if self.stride_s is not None else self.window_s / 2.0


def frame_windows(
    lo: int, hi: int, window_frames: int, stride_frames: int
) -> list[tuple[int, int]]:
    """Sliding frame-index windows [start, start + W] clamped to the run."""
    if hi < lo:
        raise ValidationError(f"empty frame range ({lo}, {hi})")
    windows: list[tuple[int, int]] = []
    start = lo
    while True:
        win = (start, min(start + window_frames, hi))
        if not windows or windows[-1] != win:
            windows.append(win)
        if win[1] >= hi:
            return windows
        start += stride_frames


@dataclass
class RunReport:
    """Analysis output for one trajectory table."""

    frame_rate_hz: float
    params: AnalysisParams
    agents: list[StyleReport]

    def agent(self, agent_id: str) -> StyleReport:
        for report in self.agents:
            if report.agent_id == agent_id:
                return report
        raise KeyError(agent_id)


def analyze_table(
    table: TrajectoryTable,
    params: AnalysisParams | None = None,
    series=None,
) -> RunReport:
    """Run the full style-estimation pipeline on a trajectory table.

    ``series`` may carry precomputed centralities (from compute_series
    with the same mu/capacity) to avoid a second pass.
    """
    params = params or AnalysisParams()
    f = table.frame_rate_hz
    policy = params.alpha_policy if params.alpha_policy is not None else GridSearchAlpha()

    if series is None:
        series = compute_series(table, params.mu, capacity=params.capacity)
    lo, hi = table.span()
    window_frames = max(POLY_DEGREE, int(round(params.window_s * f)))
    stride_frames = max(1, int(round(params.effective_stride() * f)))
    windows = frame_windows(lo, hi, window_frames, stride_frames)

    reports = []
    for agent_id in sorted(series):
        clo_series, deg_series = series[agent_id]
        analyses: list[WindowAnalysis] = []
        for w0, w1 in windows:
            deg_slice = deg_series.slice(w0, w1)
            clo_slice = clo_series.slice(w0, w1)
            if len(deg_slice.values) < POLY_DEGREE + 1:
                continue
            span = (deg_slice.values[0][0] / f, deg_slice.values[-1][0] / f)
            try:
                deg_poly = fit(deg_slice, policy, f)
                clo_poly = fit(clo_slice, policy, f)
            except InsufficientDataError:
                continue
            analyses.append(
                WindowAnalysis(
                    window=span,
                    degree_poly=deg_poly,
                    closeness_poly=clo_poly,
                    degree_sle=sle_sie(deg_poly, span, f),
                    closeness_sle=sle_sie(clo_poly, span, f),
                    weaving_points=detect_weaving(clo_poly, span, params.epsilon_s),
                )
            )
        reports.append(
            classify(agent_id, analyses, params.thresholds, params.epsilon_s)
        )
    return RunReport(frame_rate_hz=f, params=params, agents=reports)


# ---------------------------------------------------------------------------
# report serialization


def _curve(points):
    return [[t, v] for t, v in points]


def _style_summary_dict(s: StyleSummary) -> dict:
    return {
        "sle_max": s.sle_max,
        "t_sle": s.t_sle,
        "sie_max": s.sie_max,
        "detected": s.detected,
        "sle_curve": _curve(s.sle_curve),
        "sie_curve": _curve(s.sie_curve),
    }


def _poly_dict(poly) -> dict | None:
    if poly is None:
        return None
    return {
        "coefficients": list(poly.coefficients),
        "domain": list(poly.domain),
        "alpha": poly.alpha,
        "condition_number": poly.condition_number,
    }


def report_to_json(report: RunReport, dest=None) -> str:
    params = report.params
    payload = {
        "schema_version": SCHEMA_VERSION,
        "frame_rate_hz": report.frame_rate_hz,
        "params": {
            "mu": params.mu,
            "capacity": params.capacity,
            "window_s": params.window_s,
            "stride_s": params.effective_stride(),
            "epsilon_s": params.epsilon_s,
            "thresholds": {
                "tau_degree": params.thresholds.tau_degree,
                "tau_closeness": params.thresholds.tau_closeness,
                "weaving_min_sharpness": params.thresholds.weaving_min_sharpness,
            },
        },
        "agents": [
            {
                "agent_id": rep.agent_id,
                "window": list(rep.window),
                "global_label": rep.global_label,
                "styles": {
                    name: (
                        {
                            "count": s.count,
                            "t_sle": s.t_sle,
                            "sie_max": s.sie_max,
                            "detected": s.detected,
                            "critical_points": _curve(s.critical_points),
                        }
                        if isinstance(s, WeavingSummary)
                        else _style_summary_dict(s)
                    )
                    for name, s in rep.styles.items()
                },
                "windows": [
                    {
                        "window": list(w.window),
                        "degree": _poly_dict(w.degree_poly),
                        "closeness": _poly_dict(w.closeness_poly),
                        "weaving_points": _curve(w.weaving_points),
                    }
                    for w in rep.windows
                ],
            }
            for rep in report.agents
        ],
    }
    text = json.dumps(payload, indent=2) + "\n"
    if dest is not None:
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def report_from_json(source) -> RunReport:
    """Load the per-agent style summaries back from a report file.

    Reconstructs what evaluation needs (labels, maxima, t_SLE); the
    per-window fit details stay as raw dicts in ``StyleReport.windows``.
    """
    import os

    if isinstance(source, (str, os.PathLike)) and os.path.exists(os.fspath(source)):
        with open(source, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    else:
        payload = json.loads(source)
    if payload.get("schema_version") != SCHEMA_VERSION:
        raise ValidationError(
            f"unsupported report schema {payload.get('schema_version')!r}"
        )
    th = payload["params"]["thresholds"]
    params = AnalysisParams(
        mu=payload["params"]["mu"],
        capacity=payload["params"]["capacity"],
        window_s=payload["params"]["window_s"],
        stride_s=payload["params"]["stride_s"],
        epsilon_s=payload["params"]["epsilon_s"],
        thresholds=Thresholds(
            tau_degree=th["tau_degree"],
            tau_closeness=th["tau_closeness"],
            weaving_min_sharpness=th["weaving_min_sharpness"],
        ),
    )
    agents = []
    for entry in payload["agents"]:
        styles = {}
        for name, raw in entry["styles"].items():
            if "count" in raw:
                styles[name] = WeavingSummary(
                    count=raw["count"],
                    t_sle=raw["t_sle"],
                    sie_max=raw["sie_max"],
                    detected=raw["detected"],
                    critical_points=[tuple(p) for p in raw["critical_points"]],
                )
            else:
                styles[name] = StyleSummary(
                    sle_max=raw["sle_max"],
                    t_sle=raw["t_sle"],
                    sie_max=raw["sie_max"],
                    detected=raw["detected"],
                    sle_curve=[tuple(p) for p in raw["sle_curve"]],
                    sie_curve=[tuple(p) for p in raw["sie_curve"]],
                )
        agents.append(
            StyleReport(
                agent_id=entry["agent_id"],
                window=tuple(entry["window"]),
                styles=styles,
                global_label=entry["global_label"],
                windows=entry.get("windows", []),
            )
        )
    return RunReport(
        frame_rate_hz=payload["frame_rate_hz"], params=params, agents=agents
    )
