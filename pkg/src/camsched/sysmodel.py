"""End-to-edge system model: servers, algorithm profiles, latency and utility.

A slot decision assigns every device exactly one (server, algorithm) pair;
algorithm 0 ships the raw chunk. Latency is transmission plus enhancement plus
a fixed scheduling overhead, utility trades assessed quality against latency,
and feasibility checks per-server capacity pools and the per-device deadline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import UnknownDeviceError, ValidationError

KIND_GPU = "gpu"
KIND_CPU = "cpu"
GPU_POOL = 0  # row index into (N, 2) capacity/load matrices
CPU_POOL = 1

DEFAULT_OVERHEAD_S = 0.05  # fixed per-slot scheduling/queueing overhead
DEFAULT_LATENCY_WEIGHT = 0.5
DEFAULT_MAX_LATENCY_S = 4.0


@dataclass(frozen=True)
class EdgeServer:
    """One edge server with two independent capacity pools (either may be 0)."""

    gpu_capacity: float  # compute units per second, e.g. FLOPS
    cpu_capacity: float  # compute units per second, e.g. cycles/s

    def __post_init__(self):
        if self.gpu_capacity < 0 or self.cpu_capacity < 0:
            raise ValidationError("server capacities must be non-negative")
        if self.gpu_capacity == 0 and self.cpu_capacity == 0:
            raise ValidationError("server needs at least one nonzero capacity pool")


@dataclass(frozen=True)
class EnhancementProfile:
    """Per-server cost profile of one enhancement algorithm.

    demand_per_bit[n] is its compute demand on server n (units per input bit);
    service_rate[n] is the slice of server n reserved to run it, 0 meaning the
    server cannot run this algorithm at all.
    """

    algorithm_id: int                  # 1..K; 0 is the implicit no-enhancement choice
    kind: str                          # "gpu" or "cpu": which pool it draws from
    demand_per_bit: np.ndarray         # shape (N,)
    service_rate: np.ndarray           # shape (N,)

    def __post_init__(self):
        if self.algorithm_id < 1:
            raise ValidationError("algorithm ids start at 1")
        if self.kind not in (KIND_GPU, KIND_CPU):
            raise ValidationError(f"unknown algorithm kind {self.kind!r}")
        for name in ("demand_per_bit", "service_rate"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.ndim != 1:
                raise ValidationError(f"{name} must be a 1-D per-server array")
            if not np.isfinite(arr).all() or (arr < 0).any():
                raise ValidationError(f"{name} must be finite and non-negative")
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def pool(self) -> int:
        return GPU_POOL if self.kind == KIND_GPU else CPU_POOL

    def __eq__(self, other):
        # dataclass eq chokes on array fields; compare them elementwise
        if not isinstance(other, EnhancementProfile):
            return NotImplemented
        return (
            self.algorithm_id == other.algorithm_id
            and self.kind == other.kind
            and np.array_equal(self.demand_per_bit, other.demand_per_bit)
            and np.array_equal(self.service_rate, other.service_rate)
        )

    __hash__ = None


@dataclass(frozen=True)
class ModelConstants:
    num_devices: int
    overhead_latency_s: float = DEFAULT_OVERHEAD_S
    latency_weight: float = DEFAULT_LATENCY_WEIGHT    # utility lost per second
    max_latency_s: float = DEFAULT_MAX_LATENCY_S      # per-device deadline

    def __post_init__(self):
        if self.num_devices < 1:
            raise ValidationError("need at least one device")
        if self.overhead_latency_s < 0:
            raise ValidationError("overhead latency must be non-negative")
        if self.latency_weight < 0:
            raise ValidationError("latency weight must be non-negative")
        if self.max_latency_s <= 0:
            raise ValidationError("latency deadline must be positive")


@dataclass(frozen=True)
class SystemModel:
    """Immutable server roster, algorithm profiles and run constants."""

    servers: tuple[EdgeServer, ...]
    profiles: tuple[EnhancementProfile, ...]
    constants: ModelConstants

    def __post_init__(self):
        object.__setattr__(self, "servers", tuple(self.servers))
        object.__setattr__(self, "profiles", tuple(self.profiles))
        if not self.servers:
            raise ValidationError("need at least one server")
        for pos, prof in enumerate(self.profiles):
            if prof.algorithm_id != pos + 1:
                raise ValidationError(
                    f"profile at position {pos} must carry algorithm id {pos + 1}"
                )
            if len(prof.demand_per_bit) != len(self.servers):
                raise ValidationError(
                    f"algorithm {prof.algorithm_id}: per-server arrays must have "
                    f"length {len(self.servers)}"
                )

    @property
    def num_devices(self) -> int:
        return self.constants.num_devices

    @property
    def num_servers(self) -> int:
        return len(self.servers)

    @property
    def num_algorithms(self) -> int:
        return len(self.profiles)

    @cached_property
    def capacity_matrix(self) -> np.ndarray:
        """(N, 2) array of [gpu, cpu] capacities."""
        caps = np.array(
            [[s.gpu_capacity, s.cpu_capacity] for s in self.servers], dtype=np.float64
        )
        caps.setflags(write=False)
        return caps

    @cached_property
    def service_matrix(self) -> np.ndarray:
        """(N, K+1) service rates; column 0 (no enhancement) is all zero."""
        mat = np.zeros((self.num_servers, self.num_algorithms + 1))
        for prof in self.profiles:
            mat[:, prof.algorithm_id] = prof.service_rate
        mat.setflags(write=False)
        return mat

    @cached_property
    def demand_matrix(self) -> np.ndarray:
        """(N, K+1) compute demand per bit; column 0 is all zero."""
        mat = np.zeros((self.num_servers, self.num_algorithms + 1))
        for prof in self.profiles:
            mat[:, prof.algorithm_id] = prof.demand_per_bit
        mat.setflags(write=False)
        return mat

    @cached_property
    def pool_index(self) -> np.ndarray:
        """(K+1,) pool per algorithm; -1 for algorithm 0 which uses no pool."""
        idx = np.full(self.num_algorithms + 1, -1, dtype=np.int64)
        for prof in self.profiles:
            idx[prof.algorithm_id] = prof.pool
        idx.setflags(write=False)
        return idx


@dataclass(frozen=True)
class SlotInput:
    """Everything the scheduler sees for one slot."""

    datasize_bits: np.ndarray   # (M,) chunk size of each device
    bandwidth_bps: np.ndarray   # (M, N) end-to-server uplink rates
    quality: np.ndarray         # (M, K+1) assessed quality; column 0 is all zero

    def __post_init__(self):
        d = np.asarray(self.datasize_bits, dtype=np.float64)
        b = np.asarray(self.bandwidth_bps, dtype=np.float64)
        q = np.asarray(self.quality, dtype=np.float64)
        if d.ndim != 1 or d.shape[0] < 1:
            raise ValidationError("datasize must be a non-empty 1-D array")
        m = d.shape[0]
        if b.ndim != 2 or b.shape[0] != m:
            raise ValidationError("bandwidth must be (devices, servers)")
        if q.ndim != 2 or q.shape[0] != m or q.shape[1] < 1:
            raise ValidationError("quality must be (devices, algorithms + 1)")
        if not np.isfinite(d).all() or (d < 0).any():
            raise ValidationError("datasizes must be finite and non-negative")
        if not np.isfinite(b).all() or (b < 0).any():
            raise ValidationError("bandwidths must be finite and non-negative")
        if not np.isfinite(q).all():
            raise ValidationError("quality scores must be finite")
        if (q[:, 0] != 0.0).any():
            raise ValidationError("quality of the no-enhancement choice must be 0")
        for name, arr in (("datasize_bits", d), ("bandwidth_bps", b), ("quality", q)):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def num_devices(self) -> int:
        return self.datasize_bits.shape[0]

    @property
    def num_servers(self) -> int:
        return self.bandwidth_bps.shape[1]

    @property
    def num_algorithms(self) -> int:
        return self.quality.shape[1] - 1


@dataclass(frozen=True)
class Decision:
    """Per-device assignment: exactly one server index and one algorithm id each.

    The shape of the two tuples is the whole constraint story for assignment
    validity; range checks against a concrete model happen in the operations.
    """

    servers: tuple[int, ...]
    algorithms: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "servers", tuple(int(n) for n in self.servers))
        object.__setattr__(self, "algorithms", tuple(int(k) for k in self.algorithms))
        if len(self.servers) != len(self.algorithms):
            raise ValidationError("server and algorithm tuples must align")
        if not self.servers:
            raise ValidationError("decision must cover at least one device")

    @property
    def num_devices(self) -> int:
        return len(self.servers)

    def genes(self) -> tuple[tuple[int, int], ...]:
        return tuple(zip(self.servers, self.algorithms))

    def server_one_hot(self, num_servers: int) -> np.ndarray:
        """(M, N) 0/1 matrix with one 1 per row."""
        out = np.zeros((self.num_devices, num_servers), dtype=np.int64)
        out[np.arange(self.num_devices), list(self.servers)] = 1
        return out

    def algorithm_one_hot(self, num_algorithms: int) -> np.ndarray:
        """(M, K+1) 0/1 matrix with one 1 per row, column 0 = no enhancement."""
        out = np.zeros((self.num_devices, num_algorithms + 1), dtype=np.int64)
        out[np.arange(self.num_devices), list(self.algorithms)] = 1
        return out

    def validate_against(self, model: SystemModel) -> None:
        if self.num_devices != model.num_devices:
            raise ValidationError(
                f"decision covers {self.num_devices} devices, model has "
                f"{model.num_devices}"
            )
        for m, (n, k) in enumerate(self.genes()):
            if not 0 <= n < model.num_servers:
                raise ValidationError(f"device {m}: server {n} out of range")
            if not 0 <= k <= model.num_algorithms:
                raise ValidationError(f"device {m}: algorithm {k} out of range")


def transmission_latency(datasize_bits: float, bandwidth_bps: float) -> float:
    """Seconds to push the chunk upstream; +inf when there is data but no link."""
    if datasize_bits < 0 or not math.isfinite(datasize_bits):
        raise ValidationError("datasize must be finite and non-negative")
    if bandwidth_bps < 0 or not math.isfinite(bandwidth_bps):
        raise ValidationError("bandwidth must be finite and non-negative")
    if datasize_bits == 0.0:
        return 0.0
    if bandwidth_bps == 0.0:
        return math.inf
    return datasize_bits / bandwidth_bps


def enhancement_latency(
    profile: EnhancementProfile | None, server: int, datasize_bits: float
) -> float:
    """Seconds the server spends enhancing. None profile = algorithm 0 = exactly 0.

    A zero service rate means the server cannot run the algorithm, which
    surfaces as infinite latency rather than a hard error.
    """
    if datasize_bits < 0 or not math.isfinite(datasize_bits):
        raise ValidationError("datasize must be finite and non-negative")
    if profile is None:
        return 0.0
    if not 0 <= server < len(profile.service_rate):
        raise UnknownDeviceError(f"server {server} out of range for profile")
    rate = profile.service_rate[server]
    if rate == 0.0:
        return math.inf
    return profile.demand_per_bit[server] * datasize_bits / rate


def device_latency(
    decision: Decision, device: int, slot: SlotInput, model: SystemModel
) -> float:
    """Total slot latency of one device under the decision."""
    if not 0 <= device < decision.num_devices:
        raise UnknownDeviceError(f"device {device} outside decision")
    decision.validate_against(model)
    n = decision.servers[device]
    k = decision.algorithms[device]
    d = float(slot.datasize_bits[device])
    l_t = transmission_latency(d, float(slot.bandwidth_bps[device, n]))
    profile = None if k == 0 else model.profiles[k - 1]
    l_e = enhancement_latency(profile, n, d)
    # grouping (transmission + overhead) first keeps the k=0/k decomposition
    # exact: device_latency(k) == device_latency(k=0) + enhancement_latency(k)
    return (l_t + model.constants.overhead_latency_s) + l_e


def device_utility(quality: float, latency_s: float, latency_weight: float) -> float:
    """Quality minus weighted latency; an unreachable assignment is -inf outright."""
    if latency_s < 0:
        raise ValidationError("latency must be non-negative")
    if math.isinf(latency_s):
        return -math.inf
    return quality - latency_weight * latency_s


def server_loads(decision: Decision, model: SystemModel) -> np.ndarray:
    """(N, 2) reserved service per server pool under the decision."""
    decision.validate_against(model)
    loads = np.zeros((model.num_servers, 2))
    service = model.service_matrix
    pools = model.pool_index
    for n, k in decision.genes():
        if k == 0:
            continue
        loads[n, pools[k]] += service[n, k]
    return loads


@dataclass(frozen=True)
class FeasibilityReport:
    """Outcome of the capacity and deadline checks for one decision."""

    feasible: bool
    capacity_ok: bool
    latency_ok: bool
    overloads: np.ndarray        # (N, 2) max(0, load - capacity)
    latency_excess: np.ndarray   # (M,) max(0, latency - deadline)
    loads: np.ndarray            # (N, 2) raw reserved service
    latencies: np.ndarray        # (M,) per-device latency

    def __post_init__(self):
        for name in ("overloads", "latency_excess", "loads", "latencies"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def check_feasibility(
    decision: Decision, slot: SlotInput, model: SystemModel
) -> FeasibilityReport:
    """Exact capacity-pool and deadline verdicts, no tolerance applied."""
    decision.validate_against(model)
    loads = server_loads(decision, model)
    caps = model.capacity_matrix
    overloads = np.maximum(loads - caps, 0.0)
    latencies = np.array(
        [
            device_latency(decision, m, slot, model)
            for m in range(decision.num_devices)
        ]
    )
    excess = np.maximum(latencies - model.constants.max_latency_s, 0.0)
    capacity_ok = bool((loads <= caps).all())
    latency_ok = bool((latencies <= model.constants.max_latency_s).all())
    return FeasibilityReport(
        feasible=capacity_ok and latency_ok,
        capacity_ok=capacity_ok,
        latency_ok=latency_ok,
        overloads=overloads,
        latency_excess=excess,
        loads=loads,
        latencies=latencies,
    )


def latency_table(slot: SlotInput, model: SystemModel) -> np.ndarray:
    """(M, N, K+1) latency of every possible assignment for the slot.

    Shared precomputation for the schedulers: entry [m, n, k] is what
    device_latency would return for that gene.
    """
    _check_slot_dims(slot, model)
    d = slot.datasize_bits
    b = slot.bandwidth_bps
    with np.errstate(divide="ignore", invalid="ignore"):
        trans = np.where(
            d[:, None] == 0.0,
            0.0,
            np.where(b > 0.0, d[:, None] / np.where(b > 0.0, b, 1.0), np.inf),
        )
    service = model.service_matrix   # (N, K+1)
    demand = model.demand_matrix
    runnable = service > 0.0
    # (demand * d) / service in that exact order so entries are bit-identical
    # to the scalar enhancement_latency; inf marks servers that cannot run k
    work = demand[None, :, :] * d[:, None, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        enh = work / np.where(runnable, service, 1.0)[None, :, :]
    enh = np.where(runnable[None, :, :], enh, np.inf)
    enh[:, :, 0] = 0.0  # algorithm 0 never runs anything
    return (trans[:, :, None] + model.constants.overhead_latency_s) + enh


def utility_table(slot: SlotInput, model: SystemModel) -> np.ndarray:
    """(M, N, K+1) utility of every possible assignment; -inf mirrors infinite latency."""
    lat = latency_table(slot, model)
    q = slot.quality[:, None, :]
    weight = model.constants.latency_weight
    return np.where(np.isinf(lat), -np.inf, q - weight * lat)


def _check_slot_dims(slot: SlotInput, model: SystemModel) -> None:
    if slot.num_devices != model.num_devices:
        raise ValidationError(
            f"slot covers {slot.num_devices} devices, model has {model.num_devices}"
        )
    if slot.num_servers != model.num_servers:
        raise ValidationError(
            f"slot covers {slot.num_servers} servers, model has {model.num_servers}"
        )
    if slot.num_algorithms != model.num_algorithms:
        raise ValidationError(
            f"slot covers {slot.num_algorithms} algorithms, model has "
            f"{model.num_algorithms}"
        )
