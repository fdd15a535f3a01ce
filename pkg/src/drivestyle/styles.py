"""Style likelihood/intensity estimation and behavior classification.

The likelihood of a style at time t is the absolute first derivative of
the relevant centrality polynomial, its intensity the absolute second
derivative. Overspeeding reads the degree polynomial, overtaking and
sudden lane-changes read the closeness polynomial (one merged style:
the maneuvers are modeled identically), weaving counts sharp critical
points of the closeness polynomial. An agent is conservative when no
aggressive style crosses its threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .regression import CentralityPolynomial, derivative

STYLE_OVERSPEEDING = "overspeeding"
STYLE_OVERTAKE_LANE_CHANGE = "overtaking_or_sudden_lane_change"
STYLE_WEAVING = "weaving"
STYLE_CONSERVATIVE = "conservative"

LABEL_AGGRESSIVE = "aggressive"
LABEL_CONSERVATIVE = "conservative"

_GRID_GUARD = 1e-9


@dataclass(frozen=True)
class Thresholds:
    """Classification cut-offs, calibrated on conservative-class traffic.

    ``tau_degree`` and ``tau_closeness`` bound the SLE maxima of benign
    driving; ``weaving_min_sharpness`` is the sharpness floor below which
    a closeness critical point is attributed to drift rather than a lane
    oscillation.
    """

    tau_degree: float
    tau_closeness: float
    weaving_min_sharpness: float = 0.0

    def __post_init__(self):
        if self.tau_degree <= 0 or self.tau_closeness <= 0:
            raise ValidationError("classification thresholds must be strictly positive")
        if self.weaving_min_sharpness < 0:
            raise ValidationError("weaving sharpness floor cannot be negative")


# 90th-percentile SLE maxima of conservative-class agents over the packaged
# calibration scenarios at the benchmark analysis settings (1 s windows,
# 0.5 s stride); regenerate with the `drivestyle calibrate` subcommand.
DEFAULT_THRESHOLDS = Thresholds(
    tau_degree=5.21,
    tau_closeness=0.122,
    weaving_min_sharpness=0.122,
)


@dataclass
class SleSummary:
    """Sampled SLE/SIE curves of one polynomial over one window."""

    sle_curve: list[tuple[float, float]]
    sie_curve: list[tuple[float, float]]
    sle_max: float
    t_sle: float
    sie_max: float


def window_times(window: tuple[float, float], frame_rate_hz: float) -> np.ndarray:
    """Frame-aligned sample times (k / rate) covering a closed window."""
    if frame_rate_hz <= 0:
        raise ValidationError(f"frame_rate_hz must be positive, got {frame_rate_hz}")
    w0, w1 = window
    if w1 < w0:
        raise ValidationError(f"empty window {window}")
    k0 = math.ceil(w0 * frame_rate_hz - _GRID_GUARD)
    k1 = math.floor(w1 * frame_rate_hz + _GRID_GUARD)
    if k1 < k0:
        raise ValidationError(f"window {window} holds no frame times")
    return np.arange(k0, k1 + 1) / frame_rate_hz


def sle_sie(
    poly: CentralityPolynomial,
    window: tuple[float, float],
    frame_rate_hz: float,
) -> SleSummary:
    """SLE(t) = |dzeta/dt|, SIE(t) = |d2zeta/dt2| at frame resolution.

    For a quadratic the SLE is affine in t, so the window maximum sits at
    an endpoint unless the curvature is zero; ties break toward the
    earliest sample.
    """
    times = window_times(window, frame_rate_hz)
    d1 = derivative(poly, 1)
    d2 = derivative(poly, 2)
    sle = np.abs(d1.evaluate(times))
    sie = np.abs(d2.evaluate(times))
    k = int(np.argmax(sle))  # first occurrence: earliest tie wins
    return SleSummary(
        sle_curve=list(zip(times.tolist(), sle.tolist())),
        sie_curve=list(zip(times.tolist(), sie.tolist())),
        sle_max=float(sle[k]),
        t_sle=float(times[k]),
        sie_max=float(sie.max()),
    )


def detect_weaving(
    poly_closeness: CentralityPolynomial,
    window: tuple[float, float],
    epsilon: float,
) -> list[tuple[float, float]]:
    """Critical points of the closeness polynomial with their sharpness.

    A candidate is a zero of the first derivative strictly inside the
    window. Its sharpness is the largest |dzeta/dt| over the epsilon-ball
    around it; candidates whose ball maximum equals the (zero) derivative
    at the point — constant polynomials — are discarded as flat.
    """
    if epsilon <= 0:
        raise ValidationError(f"epsilon must be positive, got {epsilon}")
    b0, b1, b2 = poly_closeness.coefficients
    if b2 == 0.0:
        # derivative is the constant b1: either no zeros, or flat everywhere
        return []
    t_c = -b1 / (2.0 * b2)
    w0, w1 = window
    if not (w0 < t_c < w1):
        return []
    sharpness = 2.0 * abs(b2) * epsilon  # max |b1 + 2 b2 t| over the ball
    if sharpness == abs(b1 + 2.0 * b2 * t_c):
        return []
    return [(t_c, sharpness)]


@dataclass
class WindowAnalysis:
    """Fits and estimates for one agent over one analysis window."""

    window: tuple[float, float]
    degree_poly: CentralityPolynomial | None = None
    closeness_poly: CentralityPolynomial | None = None
    degree_sle: SleSummary | None = None
    closeness_sle: SleSummary | None = None
    weaving_points: list[tuple[float, float]] = field(default_factory=list)


@dataclass
class StyleSummary:
    """Whole-run aggregate for one derivative-based style."""

    sle_max: float
    t_sle: float | None
    sie_max: float
    detected: bool
    sle_curve: list[tuple[float, float]] = field(default_factory=list)
    sie_curve: list[tuple[float, float]] = field(default_factory=list)


@dataclass
class WeavingSummary:
    """Whole-run aggregate for the critical-point style."""

    count: int
    t_sle: float | None
    sie_max: float
    detected: bool
    critical_points: list[tuple[float, float]] = field(default_factory=list)


@dataclass
class StyleReport:
    """Per-agent styles, weaving set, and the global behavior label."""

    agent_id: str
    window: tuple[float, float]
    styles: dict
    global_label: str
    windows: list[WindowAnalysis] = field(default_factory=list)


def merge_critical_points(
    points: list[tuple[float, float]], tolerance: float
) -> list[tuple[float, float]]:
    """Collapse near-duplicate critical points from overlapping windows.

    Points within ``tolerance`` seconds of the previous point join its
    cluster; each cluster is represented by its sharpest member.
    """
    if not points:
        return []
    ordered = sorted(points)
    clusters: list[list[tuple[float, float]]] = [[ordered[0]]]
    for p in ordered[1:]:
        if p[0] - clusters[-1][-1][0] <= tolerance:
            clusters[-1].append(p)
        else:
            clusters.append([p])
    return [max(c, key=lambda p: (p[1], -p[0])) for c in clusters]


def _envelope(curves: list[list[tuple[float, float]]]) -> list[tuple[float, float]]:
    """Pointwise max of overlapping window curves on the union time grid."""
    best: dict[float, float] = {}
    for curve in curves:
        for t, v in curve:
            key = round(t, 9)
            if key not in best or v > best[key]:
                best[key] = v
    return sorted(best.items())


def _aggregate_sle(summaries: list[SleSummary]) -> StyleSummary:
    if not summaries:
        return StyleSummary(sle_max=0.0, t_sle=None, sie_max=0.0, detected=False)
    best = max(summaries, key=lambda s: (s.sle_max, -s.t_sle))
    return StyleSummary(
        sle_max=best.sle_max,
        t_sle=best.t_sle,
        sie_max=max(s.sie_max for s in summaries),
        detected=False,
        sle_curve=_envelope([s.sle_curve for s in summaries]),
        sie_curve=_envelope([s.sie_curve for s in summaries]),
    )


def classify(
    agent_id: str,
    windows: list[WindowAnalysis],
    thresholds: Thresholds,
    epsilon: float,
) -> StyleReport:
    """Aggregate per-window estimates into the per-agent style report.

    The whole-run t_SLE of a derivative style is the t_SLE of the window
    attaining the largest SLE maximum (earliest on ties). Weaving points
    from overlapping windows are merged within ``epsilon`` and filtered
    by the sharpness floor; the weaving t_SLE is the center of the span
    the surviving critical points cover. The agent is aggressive iff any
    aggressive style crosses its threshold, conservative otherwise.
    """
    overspeed = _aggregate_sle([w.degree_sle for w in windows if w.degree_sle])
    overtake = _aggregate_sle([w.closeness_sle for w in windows if w.closeness_sle])

    merged = merge_critical_points(
        [p for w in windows for p in w.weaving_points], tolerance=epsilon
    )
    significant = [p for p in merged if p[1] > thresholds.weaving_min_sharpness]
    if significant:
        times = [p[0] for p in significant]
        weaving_t = 0.5 * (min(times) + max(times))  # center of the oscillation
    else:
        weaving_t = None
    weaving = WeavingSummary(
        count=len(significant),
        t_sle=weaving_t,
        sie_max=max((p[1] for p in significant), default=0.0),
        detected=len(significant) >= 1,
        critical_points=significant,
    )

    overspeed.detected = overspeed.sle_max > thresholds.tau_degree
    overtake.detected = overtake.sle_max > thresholds.tau_closeness

    conservative = StyleSummary(
        sle_max=max(overspeed.sle_max, overtake.sle_max),
        t_sle=None,
        sie_max=max(overspeed.sie_max, overtake.sie_max),
        detected=not (overspeed.detected or overtake.detected or weaving.detected),
        sle_curve=_envelope([overspeed.sle_curve, overtake.sle_curve]),
    )

    aggressive = overspeed.detected or overtake.detected or weaving.detected
    spans = [w.window for w in windows]
    run_window = (
        (min(s[0] for s in spans), max(s[1] for s in spans)) if spans else (0.0, 0.0)
    )
    return StyleReport(
        agent_id=agent_id,
        window=run_window,
        styles={
            STYLE_OVERSPEEDING: overspeed,
            STYLE_OVERTAKE_LANE_CHANGE: overtake,
            STYLE_WEAVING: weaving,
            STYLE_CONSERVATIVE: conservative,
        },
        global_label=LABEL_AGGRESSIVE if aggressive else LABEL_CONSERVATIVE,
        windows=windows,
    )
