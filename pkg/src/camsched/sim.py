"""Slot-by-slot simulation: assess quality, schedule, account, commit windows.

A trace carries, per slot, the chunk sizes and uplink bandwidths plus either
raw CAM pairs (assessed on the fly) or a precomputed quality matrix. The
synthetic generator builds CAM traces with per-algorithm brightness offsets
over a slowly drifting scene, so stronger algorithms earn larger filtered
differences and correlated accuracy feedback.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import camq, sched
from .camq import CamMap, QualityState
from .errors import TraceError, ValidationError
from .sched import GaConfig
from .sysmodel import Decision, SlotInput, SystemModel, check_feasibility, device_latency, device_utility

SCHEDULER_CHOICES = ("ga", "oracle", "capacity", "none")


@dataclass(frozen=True)
class SlotData:
    """One slot of trace input. Exactly one of `quality` and the CAM payload
    (`lowlight` plus `enhanced`) must be present."""

    datasize_bits: np.ndarray                              # (M,)
    bandwidth_bps: np.ndarray                              # (M, N)
    quality: np.ndarray | None = None                      # (M, K+1)
    lowlight: tuple[CamMap, ...] | None = None             # per device
    enhanced: tuple[tuple[CamMap, ...], ...] | None = None # per device, per k=1..K
    accuracy: np.ndarray | None = None                     # (M, K+1) in [0, 1]

    def __post_init__(self):
        has_q = self.quality is not None
        has_cams = self.lowlight is not None or self.enhanced is not None
        if has_q == has_cams:
            raise TraceError("slot needs exactly one of quality matrix or CAM payload")
        if has_cams and (self.lowlight is None or self.enhanced is None):
            raise TraceError("CAM payload needs both low-light and enhanced maps")
        for name in ("datasize_bits", "bandwidth_bps", "quality", "accuracy"):
            arr = getattr(self, name)
            if arr is not None:
                object.__setattr__(self, name, np.asarray(arr, dtype=np.float64))


@dataclass(frozen=True)
class Trace:
    num_devices: int
    num_servers: int
    num_algorithms: int
    slots: tuple[SlotData, ...]

    def __post_init__(self):
        object.__setattr__(self, "slots", tuple(self.slots))
        m, n, k = self.num_devices, self.num_servers, self.num_algorithms
        if m < 1 or n < 1 or k < 0:
            raise TraceError("trace needs at least one device and one server")
        for t, slot in enumerate(self.slots):
            if slot.datasize_bits.shape != (m,):
                raise TraceError(f"slot {t}: datasize must have shape ({m},)")
            if slot.bandwidth_bps.shape != (m, n):
                raise TraceError(f"slot {t}: bandwidth must have shape ({m}, {n})")
            if slot.quality is not None and slot.quality.shape != (m, k + 1):
                raise TraceError(f"slot {t}: quality must have shape ({m}, {k + 1})")
            if slot.lowlight is not None:
                if len(slot.lowlight) != m or len(slot.enhanced) != m:
                    raise TraceError(f"slot {t}: CAM payload must cover every device")
                if any(len(per_dev) != k for per_dev in slot.enhanced):
                    raise TraceError(f"slot {t}: need one enhanced CAM per algorithm")
            if slot.accuracy is not None:
                if slot.accuracy.shape != (m, k + 1):
                    raise TraceError(f"slot {t}: accuracy must have shape ({m}, {k + 1})")
                if ((slot.accuracy < 0) | (slot.accuracy > 1)).any():
                    raise TraceError(f"slot {t}: accuracy outside [0, 1]")

    @property
    def horizon(self) -> int:
        return len(self.slots)


@dataclass(frozen=True)
class SlotMetrics:
    slot: int
    decision: Decision
    rejected: frozenset[int]
    qualities: tuple[float, ...]
    latencies: tuple[float, ...]
    utilities: tuple[float, ...]
    total_utility: float
    feasible: bool
    scheduler_seconds: float


@dataclass(frozen=True)
class RunSummary:
    slots: int
    mean_total_utility: float | None
    mean_latency_s: float | None
    p50_latency_s: float | None
    p95_latency_s: float | None
    feasible_rate: float | None
    mean_scheduler_seconds: float | None


def _assess_quality(
    trace: Trace, slot: SlotData, state: QualityState, threshold: float
) -> np.ndarray:
    if slot.quality is not None:
        return slot.quality
    k = trace.num_algorithms
    q = np.zeros((trace.num_devices, k + 1))
    for m in range(trace.num_devices):
        for alg in range(1, k + 1):
            q[m, alg] = camq.enhancement_quality(
                state, m, alg, slot.enhanced[m][alg - 1], slot.lowlight[m], threshold
            )
    return q


def _commit_windows(
    trace: Trace,
    slot: SlotData,
    state: QualityState,
    decision: Decision | None,
    rejected: frozenset[int],
    threshold: float,
) -> None:
    # windows advance for every algorithm each slot, not just the chosen one;
    # accuracy feedback lands only for what actually ran (decision None means
    # a pure assessment replay where nothing ran)
    if slot.lowlight is not None:
        for m in range(trace.num_devices):
            for alg in range(1, trace.num_algorithms + 1):
                filtered = camq.filter_cam(slot.enhanced[m][alg - 1], threshold)
                camq.commit_slot(state, m, alg, filtered)
    if slot.accuracy is not None and decision is not None:
        for m in range(trace.num_devices):
            if m in rejected:
                continue
            camq.record_accuracy(state, m, float(slot.accuracy[m, decision.algorithms[m]]))


def run_slot(
    t: int,
    trace: Trace,
    state: QualityState,
    model: SystemModel,
    scheduler: str = "ga",
    ga_config: GaConfig | None = None,
    threshold: float = camq.DEFAULT_THRESHOLD,
    oracle_limit: int = sched.DEFAULT_ORACLE_LIMIT,
) -> SlotMetrics:
    """Advance the simulation by one slot and return its accounting.

    Assessment happens before scheduling, so the scheduler only ever sees this
    slot's quality matrix; window commits happen last.
    """
    if scheduler not in SCHEDULER_CHOICES:
        raise ValidationError(f"unknown scheduler {scheduler!r}")
    if not 0 <= t < trace.horizon:
        raise TraceError(f"slot {t} outside trace horizon {trace.horizon}")
    slot_data = trace.slots[t]
    quality = _assess_quality(trace, slot_data, state, threshold)
    slot = SlotInput(slot_data.datasize_bits, slot_data.bandwidth_bps, quality)

    rejected: frozenset[int] = frozenset()
    started = time.perf_counter()
    if scheduler == "ga":
        best, _history = sched.evolve(slot, model, ga_config)
        decision = best.decision
    elif scheduler == "oracle":
        result = sched.brute_force(slot, model, oracle_limit)
        if result.decision is None:
            # nothing feasible anywhere: fall back to shipping raw chunks
            decision = sched.baseline_no_enhancement(slot, model)
        else:
            decision = result.decision
    elif scheduler == "capacity":
        outcome = sched.baseline_capacity(slot, model)
        decision = outcome.decision
        rejected = outcome.rejected
    else:
        decision = sched.baseline_no_enhancement(slot, model)
    elapsed = time.perf_counter() - started

    weight = model.constants.latency_weight
    qualities = []
    latencies = []
    utilities = []
    for m in range(model.num_devices):
        if m in rejected:
            qualities.append(0.0)
            latencies.append(math.inf)
            utilities.append(-math.inf)
            continue
        q = float(quality[m, decision.algorithms[m]])
        lat = device_latency(decision, m, slot, model)
        qualities.append(q)
        latencies.append(lat)
        utilities.append(device_utility(q, lat, weight))
    total = sum(utilities)
    report = check_feasibility(decision, slot, model)
    feasible = report.feasible and not rejected

    _commit_windows(trace, slot_data, state, decision, rejected, threshold)
    return SlotMetrics(
        slot=t,
        decision=decision,
        rejected=rejected,
        qualities=tuple(qualities),
        latencies=tuple(latencies),
        utilities=tuple(utilities),
        total_utility=total,
        feasible=feasible,
        scheduler_seconds=elapsed,
    )


def summarize(metrics: Sequence[SlotMetrics]) -> RunSummary:
    """Aggregate run statistics; an empty run summarises to all-None."""
    if not metrics:
        return RunSummary(0, None, None, None, None, None, None)
    totals = [m.total_utility for m in metrics]
    # latency stats cover served devices only; a rejected device has no latency
    lats = np.array([
        lat for m in metrics for lat in m.latencies if math.isfinite(lat)
    ])
    no_lats = lats.size == 0
    return RunSummary(
        slots=len(metrics),
        mean_total_utility=float(np.mean(totals)),
        mean_latency_s=None if no_lats else float(np.mean(lats)),
        p50_latency_s=None if no_lats else float(np.percentile(lats, 50)),
        p95_latency_s=None if no_lats else float(np.percentile(lats, 95)),
        feasible_rate=float(np.mean([m.feasible for m in metrics])),
        mean_scheduler_seconds=float(np.mean([m.scheduler_seconds for m in metrics])),
    )


def run(
    trace: Trace,
    model: SystemModel,
    scheduler: str = "ga",
    ga_config: GaConfig | None = None,
    state: QualityState | None = None,
    threshold: float = camq.DEFAULT_THRESHOLD,
    oracle_limit: int = sched.DEFAULT_ORACLE_LIMIT,
) -> tuple[list[SlotMetrics], RunSummary]:
    """Run the whole trace through one scheduler with a fresh or given state."""
    if trace.num_devices != model.num_devices:
        raise ValidationError("trace and model disagree on device count")
    if trace.num_servers != model.num_servers:
        raise ValidationError("trace and model disagree on server count")
    if trace.num_algorithms != model.num_algorithms:
        raise ValidationError("trace and model disagree on algorithm count")
    if state is None:
        state = QualityState(trace.num_devices, trace.num_algorithms)
    metrics = [
        run_slot(t, trace, state, model, scheduler, ga_config, threshold, oracle_limit)
        for t in range(trace.horizon)
    ]
    return metrics, summarize(metrics)


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of the synthetic CAM trace generator.

    Each device films a smooth scene that drifts slot to slot; algorithm k
    lifts activations by offsets[k-1] plus small noise. Accuracy feedback
    rises with the offset, so better enhancement also means better analytics.
    """

    num_devices: int = 10
    num_servers: int = 4
    num_algorithms: int = 4
    horizon: int = 30
    cam_rows: int = 16
    cam_cols: int = 16
    smoothness: float = 0.25            # coarse-grid fraction; lower is smoother
    drift: float = 0.05                 # per-slot scene movement, coarse-grid sigma
    offsets: tuple[float, ...] = (0.30, 0.22, 0.14, 0.08)
    cam_noise: float = 0.02
    datasize_bits: tuple[float, float] = (15e6, 25e6)
    bandwidth_bps: tuple[float, float] = (20e6, 20e6)
    accuracy_floor: float = 0.6
    accuracy_gain: float = 0.8
    accuracy_noise: float = 0.05
    seed: int = 1

    def __post_init__(self):
        if min(self.num_devices, self.num_servers, self.num_algorithms) < 1:
            raise ValidationError("device, server and algorithm counts must be >= 1")
        if self.horizon < 0:
            raise ValidationError("horizon must be non-negative")
        if self.cam_rows < 1 or self.cam_cols < 1:
            raise ValidationError("CAM shape must be at least 1x1")
        if not 0.0 < self.smoothness <= 1.0:
            raise ValidationError("smoothness must lie in (0, 1]")
        if len(self.offsets) != self.num_algorithms:
            raise ValidationError("need one brightness offset per algorithm")
        for name in ("drift", "cam_noise", "accuracy_noise"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be non-negative")
        for name in ("datasize_bits", "bandwidth_bps"):
            lo, hi = getattr(self, name)
            if lo < 0 or hi < lo:
                raise ValidationError(f"{name} range must satisfy 0 <= lo <= hi")
        if not 0.0 <= self.accuracy_floor <= 1.0:
            raise ValidationError("accuracy floor must lie in [0, 1]")


def _upsample(coarse: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Bilinear resize of a coarse grid onto (rows, cols)."""
    cr, cc = coarse.shape
    if cr == rows and cc == cols:
        return coarse.copy()
    r = np.linspace(0.0, cr - 1.0, rows)
    c = np.linspace(0.0, cc - 1.0, cols)
    r0 = np.clip(np.floor(r).astype(int), 0, cr - 1)
    r1 = np.clip(r0 + 1, 0, cr - 1)
    c0 = np.clip(np.floor(c).astype(int), 0, cc - 1)
    c1 = np.clip(c0 + 1, 0, cc - 1)
    wr = (r - r0)[:, None]
    wc = (c - c0)[None, :]
    top = coarse[np.ix_(r0, c0)] * (1 - wc) + coarse[np.ix_(r0, c1)] * wc
    bottom = coarse[np.ix_(r1, c0)] * (1 - wc) + coarse[np.ix_(r1, c1)] * wc
    return top * (1 - wr) + bottom * wr


def generate_synthetic(spec: SynthSpec) -> Trace:
    """Deterministic CAM trace: same SynthSpec, same bytes."""
    rng = np.random.default_rng(spec.seed)
    m, k, horizon = spec.num_devices, spec.num_algorithms, spec.horizon
    rows, cols = spec.cam_rows, spec.cam_cols
    cr = max(1, round(rows * spec.smoothness))
    cc = max(1, round(cols * spec.smoothness))
    scenes = rng.uniform(0.15, 0.55, size=(m, cr, cc))

    slots = []
    for _t in range(horizon):
        scenes = np.clip(
            scenes + rng.normal(0.0, spec.drift, size=scenes.shape), 0.0, 0.8
        )
        lowlight = []
        enhanced = []
        accuracy = np.zeros((m, k + 1))
        for dev in range(m):
            low = np.clip(_upsample(scenes[dev], rows, cols), 0.0, None)
            lowlight.append(CamMap(low))
            per_alg = []
            for alg in range(1, k + 1):
                noise = rng.normal(0.0, spec.cam_noise, size=(rows, cols))
                per_alg.append(
                    CamMap(np.clip(low + spec.offsets[alg - 1] + noise, 0.0, None))
                )
            enhanced.append(tuple(per_alg))
            accuracy[dev, 0] = spec.accuracy_floor
            for alg in range(1, k + 1):
                acc = (
                    spec.accuracy_floor
                    + spec.accuracy_gain * spec.offsets[alg - 1]
                    + rng.normal(0.0, spec.accuracy_noise)
                )
                accuracy[dev, alg] = min(max(acc, 0.0), 1.0)
        datasize = rng.uniform(*spec.datasize_bits, size=m)
        bandwidth = rng.uniform(*spec.bandwidth_bps, size=(m, spec.num_servers))
        slots.append(
            SlotData(
                datasize_bits=datasize,
                bandwidth_bps=bandwidth,
                lowlight=tuple(lowlight),
                enhanced=tuple(enhanced),
                accuracy=accuracy,
            )
        )
    return Trace(m, spec.num_servers, k, tuple(slots))
