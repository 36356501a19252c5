"""Trace-driven simulator for consolidating batch HPC jobs and elastic web
services on one shared cluster, with cooperative provisioning policies."""

from .autoscaler import (
    AutoscalerConfig,
    ScalerState,
    calibrate_capacity,
    derive_demand,
    initial_state,
    step,
    utilization,
)
from .cluster import ClusterState, TransitBatch
from .engine import DYNAMIC, STATIC, EventKind, SimConfig, run
from .metrics import JobOutcome, RunData, RunReport, compare, finalize, trace_identity
from .policies import (
    DecisionKind,
    PolicyDecision,
    ReclaimOrder,
    RunningJobView,
    kill_order,
    provision_on_idle,
    provision_on_ws_claim,
    st_release_plan,
    ws_adjust,
)
from .scheduler import JobQueue, schedule_pass
from .traces import (
    DemandSeries,
    JobRecord,
    RequestSeries,
    format_swf,
    load_demand_series,
    load_swf,
    parse_demand_series,
    parse_request_series,
    parse_swf,
    scale_requests,
    window_jobs,
    window_start_for_instant,
    write_demand_series,
)

__version__ = "0.1.0"

__all__ = [
    "AutoscalerConfig", "ScalerState", "calibrate_capacity", "derive_demand",
    "initial_state", "step", "utilization",
    "ClusterState", "TransitBatch",
    "DYNAMIC", "STATIC", "EventKind", "SimConfig", "run",
    "JobOutcome", "RunData", "RunReport", "compare", "finalize", "trace_identity",
    "DecisionKind", "PolicyDecision", "ReclaimOrder", "RunningJobView",
    "kill_order", "provision_on_idle", "provision_on_ws_claim",
    "st_release_plan", "ws_adjust",
    "JobQueue", "schedule_pass",
    "DemandSeries", "JobRecord", "RequestSeries", "format_swf",
    "load_demand_series", "load_swf", "parse_demand_series", "parse_request_series",
    "parse_swf", "scale_requests", "window_jobs", "window_start_for_instant",
    "write_demand_series",
    "__version__",
]
