"""Traffic classes, use-case presets, and uplink arrival generation.

Eight service classes tie a reliability target, an air-latency budget, a
burst size and an arrival model together; ``classify`` places an arbitrary
QoS tuple into the tightest matching class.  Use-case presets map
(use case, stream kind) pairs onto concrete tuples.  ``generate_arrivals``
produces per-user packet lists under the three arrival models,
deterministically per seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np

KIB = 1024  # burst sizes quoted in KB are 1024-byte units
GE_SLOT_S = 1e-3  # on/off chain transition granularity, fixed
DEFAULT_RATE_CAP_PPS = 5000.0  # default arrival rate never exceeds this
_TOL = 1e-12

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator]


class ArrivalModel(Enum):
    PERIODIC = "P"
    GILBERT_ELLIOT = "GE"
    EVENT_POISSON = "E"


class ChainState(Enum):
    ON = "On"
    OFF = "Off"


class Outcome(Enum):
    DELIVERED = "Delivered"
    DEADLINE_MISS = "DeadlineMiss"
    DECODE_FAIL = "DecodeFail"
    DETECT_FAIL = "DetectFail"
    OVERFLOW = "Overflow"


class NoMatchingClass(ValueError):
    """QoS tuple falls outside every service-class row."""


class UnknownPreset(KeyError):
    """No preset for the requested (use case, stream kind) pair."""


@dataclass(frozen=True)
class GilbertElliotState:
    """Two-state on/off Markov modulator, stepped once per 1 ms slot.

    Arrivals are Poisson at ``peak_rate_pps`` while On and silent while
    Off; the stationary mean rate is peak * p_off_on / (p_on_off + p_off_on).
    """

    state: ChainState = ChainState.OFF
    p_on_off: float = 0.5
    p_off_on: float = 0.5
    peak_rate_pps: float = 0.0  # 0 means "derive from the class mean rate"

    def __post_init__(self) -> None:
        if not (0.0 <= self.p_on_off <= 1.0 and 0.0 <= self.p_off_on <= 1.0):
            raise ValueError("transition probabilities must lie in [0, 1]")
        if self.peak_rate_pps < 0.0:
            raise ValueError("peak_rate_pps must be >= 0")

    @property
    def on_fraction(self) -> float:
        denom = self.p_on_off + self.p_off_on
        return self.p_off_on / denom if denom > 0.0 else 0.0

    @property
    def mean_rate_pps(self) -> float:
        return self.peak_rate_pps * self.on_fraction


@dataclass(frozen=True)
class TrafficClass:
    """One stream's QoS contract plus its arrival process parameters.

    ``class_id`` is the matching service-class row, or None when the tuple
    (typically a use-case preset) fits no row.  ``rate_pps`` is always the
    stationary mean rate, also for on/off traffic.
    """

    class_id: Optional[int]
    reliability: float
    air_latency_s: float
    burst_bytes: int
    arrival_model: ArrivalModel
    rate_pps: float
    ge: Optional[GilbertElliotState] = None

    def __post_init__(self) -> None:
        if not 0.0 < self.reliability < 1.0:
            raise ValueError("reliability must lie in (0, 1)")
        if self.air_latency_s <= 0.0:
            raise ValueError("air_latency_s must be > 0")
        if self.burst_bytes <= 0:
            raise ValueError("burst_bytes must be > 0")
        if self.rate_pps <= 0.0:
            raise ValueError("rate_pps must be > 0")
        if self.arrival_model is ArrivalModel.GILBERT_ELLIOT and self.ge is None:
            object.__setattr__(self, "ge", GilbertElliotState())

    @property
    def size_bits(self) -> int:
        return 8 * self.burst_bytes

    @property
    def eps_target(self) -> float:
        return 1.0 - self.reliability


@dataclass
class Packet:
    packet_id: int
    user_id: int
    class_id: Optional[int]
    size_bits: int
    arrival_time: float
    deadline: float
    delivery_time: Optional[float] = None
    outcome: Optional[Outcome] = None


# --- service-class table -------------------------------------------------
#
# Latency bounds in seconds; burst bounds in bytes; per-model rate ranges in
# packets/s.  lat_lo_open marks the one row whose lower latency bound is
# exclusive (">50 ms").

@dataclass(frozen=True)
class ClassRow:
    class_id: int
    rel_lo: float
    rel_hi: float
    lat_lo: float
    lat_hi: float
    lat_lo_open: bool
    burst_lo: int
    burst_hi: int
    rates: dict  # ArrivalModel -> (lo, hi) packets/s

    @property
    def latency_width(self) -> float:
        return self.lat_hi - self.lat_lo


_PGE_RATES = {
    ArrivalModel.PERIODIC: (10.0, 5000.0),
    ArrivalModel.GILBERT_ELLIOT: (100.0, 500.0),
    ArrivalModel.EVENT_POISSON: (100.0, 1000.0),
}

CLASS_TABLE: tuple[ClassRow, ...] = (
    ClassRow(1, 0.999, 0.9999999, 0.050, math.inf, True, 1 * KIB, 10 * KIB, dict(_PGE_RATES)),
    ClassRow(2, 0.999, 0.9999999, 0.010, 0.050, False, 1 * KIB, 20 * KIB, dict(_PGE_RATES)),
    ClassRow(3, 0.999, 0.99999, 0.002, 0.010, False, 1 * KIB, 30 * KIB,
             {ArrivalModel.PERIODIC: (10.0, 5000.0)}),
    ClassRow(4, 0.9999999, 0.9999999, 0.002, 0.002, False, 80, 80,
             {ArrivalModel.GILBERT_ELLIOT: (100.0, 50000.0)}),
    ClassRow(5, 0.99999, 0.99999, 0.001, 0.001, False, 800, 800,
             {ArrivalModel.GILBERT_ELLIOT: (10.0, 5000.0)}),
    ClassRow(6, 0.9999999, 0.9999999, 0.002, 0.002, False, 5 * KIB, 5 * KIB,
             {ArrivalModel.EVENT_POISSON: (100.0, 1000.0)}),
    ClassRow(7, 0.99999, 0.99999, 0.002, 0.002, False, 8 * KIB, 8 * KIB,
             {ArrivalModel.EVENT_POISSON: (100.0, 500.0)}),
    ClassRow(8, 0.99999, 0.99999, 0.0005, 0.0005, False, 5 * KIB, 5 * KIB,
             {ArrivalModel.EVENT_POISSON: (100.0, 500.0)}),
)

_ROW_BY_ID = {row.class_id: row for row in CLASS_TABLE}


def _in_range(x: float, lo: float, hi: float, lo_open: bool = False) -> bool:
    if lo_open:
        if x <= lo or math.isclose(x, lo, rel_tol=_TOL):
            return False
        return x < hi or math.isclose(x, hi, rel_tol=_TOL)
    lo_ok = x > lo or math.isclose(x, lo, rel_tol=_TOL)
    hi_ok = x < hi or math.isclose(x, hi, rel_tol=_TOL)
    return lo_ok and hi_ok


def _row_matches(row: ClassRow, reliability: float, latency_s: float,
                 burst_bytes: float, model: ArrivalModel) -> bool:
    if model not in row.rates:
        return False
    return (_in_range(reliability, row.rel_lo, row.rel_hi)
            and _in_range(latency_s, row.lat_lo, row.lat_hi, row.lat_lo_open)
            and _in_range(burst_bytes, row.burst_lo, row.burst_hi))


def classify(reliability: float, latency_s: float, burst_bytes: float,
             arrival_model: ArrivalModel) -> int:
    """Return the service-class id for a QoS tuple.

    When several rows contain the tuple, the row with the tightest latency
    range wins; remaining ties go to the higher reliability bound, then the
    larger burst bound.  Raises NoMatchingClass when nothing matches.
    """
    matches = [row for row in CLASS_TABLE
               if _row_matches(row, reliability, latency_s, burst_bytes, arrival_model)]
    if not matches:
        raise NoMatchingClass(
            f"no service class contains (R={reliability}, L={latency_s}s, "
            f"B={burst_bytes}B, {arrival_model.value})")
    matches.sort(key=lambda row: (row.latency_width, -row.rel_hi, -row.burst_hi))
    return matches[0].class_id


def from_class_id(class_id: int, *, arrival_model: Optional[ArrivalModel] = None,
                  rate_pps: Optional[float] = None, pick: str = "mid",
                  ge: Optional[GilbertElliotState] = None) -> TrafficClass:
    """Build the canonical TrafficClass for a service-class row.

    Defaults: first arrival model listed for the row; rate = geometric
    midpoint of the row's rate range, capped at DEFAULT_RATE_CAP_PPS.
    An explicit rate is clamped into the row's (uncapped) range.
    """
    row = _ROW_BY_ID.get(class_id)
    if row is None:
        raise NoMatchingClass(f"unknown class_id {class_id}")
    if arrival_model is None:
        arrival_model = next(iter(row.rates))
    if arrival_model not in row.rates:
        raise ValueError(f"class {class_id} does not use arrival model {arrival_model.value}")
    lo, hi = row.rates[arrival_model]
    if rate_pps is None:
        rate_pps = min(math.sqrt(lo * hi), DEFAULT_RATE_CAP_PPS)
    else:
        rate_pps = min(max(rate_pps, lo), hi)
    if row.lat_lo_open:
        latency = _pick(0.060, 0.100, pick)  # representative span for the open ">50 ms" row
    else:
        latency = _pick(row.lat_lo, row.lat_hi, pick)
    return TrafficClass(
        class_id=class_id,
        reliability=_pick(row.rel_lo, row.rel_hi, pick),
        air_latency_s=latency,
        burst_bytes=int(round(_pick(row.burst_lo, row.burst_hi, pick))),
        arrival_model=arrival_model,
        rate_pps=rate_pps,
        ge=ge,
    )


def _pick(lo: float, hi: float, pick: str) -> float:
    if pick == "lo":
        return lo
    if pick == "hi":
        return hi
    if pick == "mid":
        return 0.5 * (lo + hi)
    raise ValueError(f"pick must be lo|mid|hi, got {pick!r}")


# --- use-case presets ----------------------------------------------------

class UseCase(Enum):
    IMMERSIVE_VR = "immersive_vr"
    TELEOPERATION = "teleoperation"
    AUTOMOTIVE = "automotive"
    DRONES = "drones"
    HEALTHCARE = "healthcare"


class StreamKind(Enum):
    HAPTIC = "haptic"
    VIDEO = "video"
    AUDIO = "audio"
    AUDIO_3D = "audio_3d"
    SENSOR = "sensor"
    GPS = "gps"


_USE_ALIASES = {
    "ivr": UseCase.IMMERSIVE_VR,
    "vr": UseCase.IMMERSIVE_VR,
    "teleop": UseCase.TELEOPERATION,
    "iod": UseCase.DRONES,
    "hic": UseCase.HEALTHCARE,
}

_KIND_ALIASES = {
    "haptics": StreamKind.HAPTIC,
    "3d_audio": StreamKind.AUDIO_3D,
    "3d audio": StreamKind.AUDIO_3D,
}


@dataclass(frozen=True)
class _PresetOption:
    """One selectable row of a preset: a variant (haptic compression) or
    the single option of a non-haptic stream."""
    label: str
    reliability: float
    arrival_model: ArrivalModel
    rate_lo: float
    rate_hi: float
    modes: tuple  # ((mode_label, lat_lo_s, lat_hi_s), ...)
    burst_lo: int  # bytes, or per-DoF when per_dof
    burst_hi: int
    per_dof: bool = False
    dof_choices: tuple = ()


def _haptic(modes: tuple, dofs: tuple) -> tuple:
    # footnote variants: uncompressed periodic vs compressed bursty
    return (
        _PresetOption("uncompressed", 0.999, ArrivalModel.PERIODIC,
                      1000.0, 5000.0, modes, 2, 8, True, dofs),
        _PresetOption("compressed", 0.99999, ArrivalModel.GILBERT_ELLIOT,
                      100.0, 500.0, modes, 2, 8, True, dofs),
    )


def _single(reliability, model, rate_lo, rate_hi, modes, b_lo, b_hi) -> tuple:
    return (_PresetOption("default", reliability, model, rate_lo, rate_hi,
                          modes, b_lo, b_hi),)


_MS = 1e-3
_AUTOMOTIVE_MODES = (("life_critical", 0.5 * _MS, 2 * _MS),
                     ("dynamic", 10 * _MS, 10 * _MS),
                     ("static", 100 * _MS, 100 * _MS))

PRESET_TABLE: dict = {
    (UseCase.IMMERSIVE_VR, StreamKind.HAPTIC): _haptic(
        (("default", 0.5 * _MS, 2 * _MS),), (1, 10, 100, 1000)),
    (UseCase.IMMERSIVE_VR, StreamKind.VIDEO): _single(
        0.99999, ArrivalModel.PERIODIC, 100, 1000,
        (("default", 0.5 * _MS, 2 * _MS),), 1 * KIB, 30 * KIB),
    (UseCase.IMMERSIVE_VR, StreamKind.AUDIO_3D): _single(
        0.999, ArrivalModel.PERIODIC, 10, 1000,
        (("default", 0.5 * _MS, 2 * _MS),), 100, 100),
    (UseCase.TELEOPERATION, StreamKind.HAPTIC): _haptic(
        (("high_dynamic", 0.5 * _MS, 2 * _MS), ("dynamic", 10 * _MS, 10 * _MS),
         ("static", 100 * _MS, 100 * _MS)), (1, 10, 100, 1000)),
    (UseCase.TELEOPERATION, StreamKind.VIDEO): _single(
        0.99999, ArrivalModel.PERIODIC, 100, 1000,
        (("default", 5 * _MS, 5 * _MS),), 1 * KIB, 10 * KIB),
    (UseCase.TELEOPERATION, StreamKind.AUDIO): _single(
        0.999, ArrivalModel.PERIODIC, 10, 1000,
        (("default", 5 * _MS, 5 * _MS),), 50, 100),
    (UseCase.AUTOMOTIVE, StreamKind.HAPTIC): _haptic(
        _AUTOMOTIVE_MODES, (1, 10, 100)),
    (UseCase.AUTOMOTIVE, StreamKind.SENSOR): _single(
        0.99999, ArrivalModel.EVENT_POISSON, 100, 1000,
        _AUTOMOTIVE_MODES, 1 * KIB, 5 * KIB),
    (UseCase.AUTOMOTIVE, StreamKind.VIDEO): _single(
        0.999, ArrivalModel.PERIODIC, 100, 1000,
        _AUTOMOTIVE_MODES, 1 * KIB, 10 * KIB),
    (UseCase.AUTOMOTIVE, StreamKind.AUDIO): _single(
        0.999, ArrivalModel.PERIODIC, 10, 1000,
        _AUTOMOTIVE_MODES, 50, 100),
    (UseCase.DRONES, StreamKind.HAPTIC): _haptic(
        (("kinesthetic", 0.5 * _MS, 2 * _MS), ("tactile", 10 * _MS, 10 * _MS)),
        (1, 10, 100)),
    (UseCase.DRONES, StreamKind.GPS): _single(
        0.999, ArrivalModel.PERIODIC, 100, 1250,
        (("default", 10 * _MS, 10 * _MS),), 2 * KIB, 2 * KIB),
    (UseCase.DRONES, StreamKind.SENSOR): _single(
        0.99999, ArrivalModel.EVENT_POISSON, 100, 1000,
        (("default", 10 * _MS, 10 * _MS),), 1 * KIB, 5 * KIB),
    (UseCase.DRONES, StreamKind.VIDEO): _single(
        0.99999, ArrivalModel.PERIODIC, 100, 1000,
        (("default", 1 * _MS, 10 * _MS),), 1 * KIB, 20 * KIB),
    (UseCase.DRONES, StreamKind.AUDIO): _single(
        0.999, ArrivalModel.PERIODIC, 10, 1000,
        (("default", 1 * _MS, 10 * _MS),), 50, 100),
    (UseCase.HEALTHCARE, StreamKind.HAPTIC): _haptic(
        (("interaction", 1 * _MS, 2 * _MS), ("observation", 10 * _MS, 100 * _MS)),
        (1, 10, 100, 1000)),
    (UseCase.HEALTHCARE, StreamKind.VIDEO): _single(
        0.99999, ArrivalModel.PERIODIC, 100, 1000,
        (("default", 5 * _MS, 5 * _MS),), 1 * KIB, 30 * KIB),
    (UseCase.HEALTHCARE, StreamKind.AUDIO): _single(
        0.999, ArrivalModel.PERIODIC, 10, 1000,
        (("default", 5 * _MS, 5 * _MS),), 50, 100),
}


def _coerce_use(use_case) -> UseCase:
    if isinstance(use_case, UseCase):
        return use_case
    key = str(use_case).strip().lower()
    if key in _USE_ALIASES:
        return _USE_ALIASES[key]
    try:
        return UseCase(key)
    except ValueError:
        raise UnknownPreset(f"unknown use case {use_case!r}") from None


def _coerce_kind(kind) -> StreamKind:
    if isinstance(kind, StreamKind):
        return kind
    key = str(kind).strip().lower()
    if key in _KIND_ALIASES:
        return _KIND_ALIASES[key]
    try:
        return StreamKind(key)
    except ValueError:
        raise UnknownPreset(f"unknown stream kind {kind!r}") from None


def preset(use_case, kind, *, variant: Optional[str] = None,
           mode: Optional[str] = None, dofs: Optional[int] = None,
           pick: str = "mid") -> TrafficClass:
    """Resolve a use-case preset into a concrete TrafficClass.

    ``variant`` selects between haptic compression options; ``mode`` picks a
    latency option; ``dofs`` scales per-DoF haptic bursts (default 10).
    ``pick`` chooses lo/mid/hi within ranges; rates use the geometric
    midpoint.  class_id is None when the tuple matches no service class.
    """
    use, kd = _coerce_use(use_case), _coerce_kind(kind)
    options = PRESET_TABLE.get((use, kd))
    if options is None:
        raise UnknownPreset(f"no preset for ({use.value}, {kd.value})")
    if variant is None:
        opt = options[0]
    else:
        by_label = {o.label: o for o in options}
        if variant not in by_label:
            raise UnknownPreset(f"({use.value}, {kd.value}) has no variant {variant!r}; "
                                f"choose from {sorted(by_label)}")
        opt = by_label[variant]

    modes = {m[0]: m for m in opt.modes}
    if mode is None:
        mode_label, lat_lo, lat_hi = opt.modes[0]
    elif mode in modes:
        mode_label, lat_lo, lat_hi = modes[mode]
    else:
        raise UnknownPreset(f"({use.value}, {kd.value}) has no mode {mode!r}; "
                            f"choose from {sorted(modes)}")

    if opt.per_dof:
        n_dof = 10 if dofs is None else int(dofs)
        if n_dof not in opt.dof_choices:
            raise UnknownPreset(f"dofs must be one of {opt.dof_choices}, got {dofs}")
        burst = int(round(_pick(opt.burst_lo, opt.burst_hi, pick))) * n_dof
    elif dofs is not None:
        raise UnknownPreset(f"({use.value}, {kd.value}) takes no dofs parameter")
    else:
        burst = int(round(_pick(opt.burst_lo, opt.burst_hi, pick)))

    latency = _pick(lat_lo, lat_hi, pick)
    rate = math.sqrt(opt.rate_lo * opt.rate_hi) if pick == "mid" \
        else _pick(opt.rate_lo, opt.rate_hi, pick)
    try:
        cid: Optional[int] = classify(opt.reliability, latency, burst, opt.arrival_model)
    except NoMatchingClass:
        cid = None
    return TrafficClass(
        class_id=cid, reliability=opt.reliability, air_latency_s=latency,
        burst_bytes=burst, arrival_model=opt.arrival_model, rate_pps=rate)


# --- arrival generation ---------------------------------------------------

def _as_rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _periodic_times(rng, rate: float, horizon: float, aligned: bool) -> np.ndarray:
    period = 1.0 / rate
    phase = 0.0 if aligned else float(rng.uniform(0.0, period))
    if phase >= horizon:
        return np.empty(0)
    count = int(math.floor((horizon - phase) / period)) + 1
    times = phase + period * np.arange(count)
    return times[times < horizon]


def _poisson_times(rng, rate: float, horizon: float) -> np.ndarray:
    count = int(rng.poisson(rate * horizon))
    return np.sort(rng.uniform(0.0, horizon, size=count))


def _on_slots(rng, n_slots: int, p_on_off: float, p_off_on: float) -> np.ndarray:
    """Boolean per-slot On mask for the two-state chain, built by drawing
    alternating geometric sojourn lengths (initial state from the
    stationary law)."""
    denom = p_on_off + p_off_on
    on_frac = p_off_on / denom if denom > 0 else 0.0
    if on_frac <= 0.0:
        return np.zeros(n_slots, dtype=bool)
    if on_frac >= 1.0:
        return np.ones(n_slots, dtype=bool)
    start_on = bool(rng.random() < on_frac)

    mean_pair = 1.0 / p_on_off + 1.0 / p_off_on  # expected slots per on+off pair
    mask_parts = []
    covered = 0
    first = start_on
    while covered < n_slots:
        pairs = max(16, int((n_slots - covered) / mean_pair * 1.3))
        on_runs = rng.geometric(p_on_off, size=pairs)
        off_runs = rng.geometric(p_off_on, size=pairs)
        runs = np.empty(2 * pairs, dtype=np.int64)
        flags = np.empty(2 * pairs, dtype=bool)
        if first:
            runs[0::2], runs[1::2] = on_runs, off_runs
            flags[0::2], flags[1::2] = True, False
        else:
            runs[0::2], runs[1::2] = off_runs, on_runs
            flags[0::2], flags[1::2] = False, True
        mask_parts.append(np.repeat(flags, runs))
        covered += int(runs.sum())
        first = not flags[-1]  # continue with the opposite state
    return np.concatenate(mask_parts)[:n_slots]


def _gilbert_elliot_times(rng, cls: TrafficClass, horizon: float) -> np.ndarray:
    ge = cls.ge if cls.ge is not None else GilbertElliotState()
    peak = ge.peak_rate_pps
    if peak <= 0.0:
        if ge.on_fraction <= 0.0:
            return np.empty(0)  # never turns on
        peak = cls.rate_pps / ge.on_fraction
    n_slots = int(math.ceil(horizon / GE_SLOT_S))
    on = _on_slots(rng, n_slots, ge.p_on_off, ge.p_off_on)
    counts = rng.poisson(peak * GE_SLOT_S, size=n_slots)
    counts[~on] = 0
    total = int(counts.sum())
    if total == 0:
        return np.empty(0)
    slot_idx = np.repeat(np.arange(n_slots), counts)
    times = slot_idx * GE_SLOT_S + rng.uniform(0.0, GE_SLOT_S, size=total)
    times = np.sort(times)
    return times[times < horizon]


def arrival_times(cls: TrafficClass, horizon_s: float, seed: SeedLike,
                  aligned: bool = False) -> np.ndarray:
    """Sorted arrival instants in [0, horizon) for one user."""
    if horizon_s <= 0.0:
        raise ValueError("horizon must be > 0")
    rng = _as_rng(seed)
    if cls.arrival_model is ArrivalModel.PERIODIC:
        return _periodic_times(rng, cls.rate_pps, horizon_s, aligned)
    if cls.arrival_model is ArrivalModel.EVENT_POISSON:
        return _poisson_times(rng, cls.rate_pps, horizon_s)
    return _gilbert_elliot_times(rng, cls, horizon_s)


def generate_arrivals(cls: TrafficClass, user_id: int, horizon_s: float,
                      seed: SeedLike, aligned: bool = False) -> list:
    """Ordered packet list for one user over [0, horizon)."""
    times = arrival_times(cls, horizon_s, seed, aligned=aligned)
    bits = cls.size_bits
    lat = cls.air_latency_s
    return [Packet(packet_id=i, user_id=user_id, class_id=cls.class_id,
                   size_bits=bits, arrival_time=float(t), deadline=float(t) + lat)
            for i, t in enumerate(times)]
