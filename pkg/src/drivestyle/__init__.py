"""Driver-behavior classification from multi-agent vehicle trajectories.

Pipeline: trajectory ingest -> per-frame traffic-graphs -> closeness and
degree centrality series -> windowed quadratic fits -> style likelihood
and intensity estimates -> aggressive/conservative classification. A
bundled highway microsimulator generates labeled scenarios so the
time-deviation evaluation protocol runs end to end at desk scale.
"""

__version__ = "0.1.0"

from .centrality import CentralitySeries, closeness, compute_series, degree_step
from .errors import (
    ConditioningError,
    ContractViolationError,
    DriveStyleError,
    InsufficientDataError,
    TrajectoryParseError,
    ValidationError,
)
from .evaluation import (
    AnnotationSet,
    annotations_from_labels,
    evaluate_run,
    expected_frame,
    tde,
)
from .graph import CumulativeAdjacency, InstantGraph, build_instant_graph, update_cumulative
from .ingest import AgentFrame, TrajectoryTable, parse_trajectories, serialize_trajectories
from .pipeline import AnalysisParams, RunReport, analyze_table
from .regression import (
    CentralityPolynomial,
    FixedAlpha,
    GridSearchAlpha,
    condition_diagnostics,
    derivative,
    fit,
    fit_samples,
)
from .sim import (
    AGGRESSIVE_PARAMS,
    CONSERVATIVE_PARAMS,
    DriverParams,
    ManeuverLabel,
    ScenarioConfig,
    SimAgent,
    SpawnSpec,
    idm_acceleration,
    mobil_decision,
    run_scenario,
    step,
)
from .styles import (
    StyleReport,
    Thresholds,
    classify,
    detect_weaving,
    sle_sie,
)

__all__ = [name for name in dir() if not name.startswith("_")]
