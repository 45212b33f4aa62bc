"""Deterministic per-packet uplink simulation.

Every packet's journey is: mini-slot alignment (uniform over T_min),
the connection procedure's pre-data delay, one slot of transmission,
propagation, and decoder processing.  Failures are sampled against the
analytic budgets produced by the dimensioner: slot overflow is counted
exactly from concurrent activations, detection and decoding are
independent Bernoulli draws.  All randomness descends from the scenario
seed through named substreams, so runs are reproducible byte-for-byte
and protocol comparisons share their arrival realizations.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Optional, Sequence, Tuple

import numpy as np

from . import radio, rrc, rrm
from .rrc import Protocol, RrcEvent, RrcState
from .traffic import ArrivalModel, Outcome, TrafficClass, arrival_times

DECODER_BITS_PER_S = 50e9

SCHEME_GFMA = "GFMA"
SCHEME_FGMA = "FGMA"
SCHEME_FOUR_WAY = "FourWay"
SCHEME_SPS = "FGMA-SPS"
SCHEMES: Tuple[str, ...] = (SCHEME_GFMA, SCHEME_FGMA, SCHEME_FOUR_WAY, SCHEME_SPS)

_PROTOCOL_OF = {
    SCHEME_GFMA: Protocol.GFMA,
    SCHEME_FGMA: Protocol.FGMA,
    SCHEME_FOUR_WAY: Protocol.FOUR_WAY,
    SCHEME_SPS: Protocol.FGMA,
}

# outcome codes used in the packet arrays
OUTCOME_ORDER: Tuple[Outcome, ...] = (
    Outcome.DELIVERED, Outcome.DEADLINE_MISS, Outcome.DECODE_FAIL,
    Outcome.DETECT_FAIL, Outcome.OVERFLOW)
_DELIVERED, _MISS, _DECODE, _DETECT, _OVERFLOW = range(5)

# seed substream tags
_TAG_DEPLOY, _TAG_ARRIVAL, _TAG_ALIGN, _TAG_FAIL = 0xD3, 0xA5, 0xA1, 0xFA


class EventKind(IntEnum):
    """Tie-break order of simultaneous events (second sort key)."""
    PACKET_ARRIVAL = 0
    SLOT_BOUNDARY = 1
    TX_COMPLETE = 2
    DECODE_COMPLETE = 3
    GRANT_ISSUED = 4


@dataclass(frozen=True)
class Event:
    time_s: float
    kind: EventKind
    packet_id: int = -1
    subchannel_id: int = -1

    def sort_key(self) -> tuple:
        return (self.time_s, int(self.kind), self.packet_id)


@dataclass(frozen=True)
class FrameConfig:
    t_min_s: float = 2e-4
    cp_overhead: float = 0.25
    auto_numerology: bool = False
    partitions: Tuple[Tuple[str, float], ...] = ()  # filled by run()

    def __post_init__(self) -> None:
        if self.t_min_s <= 0.0:
            raise ValueError("t_min must be > 0")
        if not 0.0 <= self.cp_overhead < 1.0:
            raise ValueError("cp_overhead must lie in [0, 1)")


@dataclass(frozen=True)
class SubchannelReport:
    subchannel_id: int
    bs_id: int
    population: str
    class_id: Optional[int]
    scheme: str
    group_size: int
    provisioned: Optional[int]
    pilot_symbols: int
    preamble_symbols: int
    data_symbols: int
    bandwidth_hz: float
    duration_s: float
    eps_detect: float
    eps_overflow: float
    eps_decode: float
    eps_budget: float
    avg_bandwidth_hz: float  # time-averaged occupancy over the horizon
    n_packets: int
    n_failures: int


@dataclass
class RunMetrics:
    scheme_label: str
    horizon_s: float
    seed: int
    pop_names: Tuple[str, ...]
    pop_schemes: Tuple[str, ...]
    pop_class_ids: Tuple[Optional[int], ...]
    pop_size_bits: Tuple[int, ...]
    packet_id: np.ndarray
    user_id: np.ndarray
    pop_index: np.ndarray
    arrival_s: np.ndarray
    align_s: np.ndarray
    predata_s: np.ndarray
    tx_s: np.ndarray
    prop_s: np.ndarray
    decode_s: np.ndarray
    latency_s: np.ndarray
    outcome: np.ndarray  # int8 codes into OUTCOME_ORDER
    subchannels: Tuple[SubchannelReport, ...]
    frame: FrameConfig
    rrc_final: dict

    @property
    def n_packets(self) -> int:
        return int(self.packet_id.size)

    @property
    def delivered_mask(self) -> np.ndarray:
        return self.outcome == _DELIVERED

    @property
    def packet_bits(self) -> np.ndarray:
        sizes = np.asarray(self.pop_size_bits, dtype=np.int64)
        return sizes[self.pop_index] if self.n_packets else \
            np.empty(0, dtype=np.int64)

    @property
    def goodput_bps(self) -> float:
        bits = self.packet_bits
        return float(bits[self.delivered_mask].sum()) / self.horizon_s

    @property
    def avg_bandwidth_hz(self) -> float:
        return float(sum(rep.avg_bandwidth_hz for rep in self.subchannels))

    @property
    def spectral_efficiency(self) -> float:
        bw = self.avg_bandwidth_hz
        return self.goodput_bps / bw if bw > 0 else 0.0


def journey_components(scheme: str, t_min_s: float, slot_s: float,
                       propagation_s: float, size_bits: int,
                       align_s: float) -> dict:
    """Scalar per-packet latency decomposition (the vector pipeline in run()
    applies the same arithmetic)."""
    proto = _PROTOCOL_OF[scheme]
    timeline = rrc.protocol_timeline(proto, t_min_s, propagation_s)
    decode = max(t_min_s, size_bits / DECODER_BITS_PER_S)
    comps = {
        "align_s": align_s,
        "predata_s": timeline.pre_data_delay_s,
        "tx_s": slot_s,
        "prop_s": propagation_s,  # data leg
        "decode_s": decode,
    }
    comps["latency_s"] = align_s + timeline.pre_data_delay_s + slot_s \
        + propagation_s + decode
    return comps


def activation_check(user_ids: Sequence[int], packet_ids: Sequence[int],
                     provisioned: int) -> np.ndarray:
    """Overflow mask for one slot of one grant-free subchannel.

    The contention unit is the transmitter: distinct users beyond the
    provisioned count are evicted, latest-arriving (largest packet id)
    first, and every packet of an evicted transmitter overflows.  Extra
    packets of an admitted transmitter ride its slot grant and never count
    as additional activations.
    """
    if provisioned < 0:
        raise ValueError("provisioned count must be >= 0")
    users = np.asarray(user_ids, dtype=np.int64)
    pids = np.asarray(packet_ids, dtype=np.int64)
    if users.shape != pids.shape:
        raise ValueError("user and packet id arrays must align")
    n = pids.size
    if n == 0:
        return np.zeros(0, dtype=bool)
    sub = np.zeros(n, dtype=np.int64)
    over, _ = _resolve_contention(sub, sub, users, pids,
                                  np.array([provisioned], dtype=np.int64))
    return over


def _resolve_contention(sub: np.ndarray, slot: np.ndarray, user: np.ndarray,
                        pid: np.ndarray, provisioned_by_sub: np.ndarray
                        ) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized activation check across every (subchannel, slot) pair.

    Returns (overflow mask, per-packet serialization index): an admitted
    transmitter's j-th packet of the slot transmits j mini-slots late.
    """
    n = pid.size
    if n == 0:
        return np.zeros(0, dtype=bool), np.zeros(0, dtype=np.int64)
    order = np.lexsort((pid, user, slot, sub))
    s_sub, s_slot = sub[order], slot[order]
    s_user, s_pid = user[order], pid[order]

    new_ss = np.ones(n, dtype=bool)  # (subchannel, slot) run starts
    new_ss[1:] = (s_sub[1:] != s_sub[:-1]) | (s_slot[1:] != s_slot[:-1])
    new_tx = new_ss.copy()  # transmitter run starts within those
    new_tx[1:] |= s_user[1:] != s_user[:-1]

    tx_of_pkt = np.cumsum(new_tx) - 1  # global transmitter index
    pos = np.arange(n)
    tx_starts = pos[new_tx]
    serial = pos - tx_starts[tx_of_pkt]  # j-th packet of its transmitter

    # rank transmitters within each (sub, slot) by first packet id
    t_ss = (np.cumsum(new_ss) - 1)[new_tx]
    t_pid = s_pid[new_tx]
    t_sub = s_sub[new_tx]
    m = t_pid.size
    t_order = np.lexsort((t_pid, t_ss))
    t_new = np.ones(m, dtype=bool)
    t_new[1:] = t_ss[t_order][1:] != t_ss[t_order][:-1]
    t_starts = np.flatnonzero(t_new)
    t_rank_sorted = np.arange(m) - t_starts[np.cumsum(t_new) - 1]
    t_rank = np.empty(m, dtype=np.int64)
    t_rank[t_order] = t_rank_sorted
    t_evicted = t_rank >= provisioned_by_sub[t_sub]

    over_sorted = t_evicted[tx_of_pkt]
    over = np.empty(n, dtype=bool)
    serial_out = np.empty(n, dtype=np.int64)
    over[order] = over_sorted
    serial_out[order] = serial
    return over, serial_out


def run(scenario, seed: Optional[int] = None,
        scheme_override: Optional[str] = None) -> RunMetrics:
    """Simulate one replication of a validated scenario.

    scheme_override replaces every population's access scheme; protocol
    comparisons use it so every scheme sees the same arrival realization.
    """
    from .cli import validate_scenario  # deferred: cli builds on engine
    validate_scenario(scenario)
    if scheme_override is not None and scheme_override not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme_override!r}")

    seed = int(scenario.seed if seed is None else seed)
    frame: FrameConfig = scenario.frame
    t_min = frame.t_min_s
    slot_s = t_min  # minimum-length mini-slots throughout
    horizon = scenario.horizon_s
    pops = scenario.populations
    n_pops = len(pops)
    counts = [p.count for p in pops]
    total_users = int(sum(counts))

    deployment = radio.make_deployment(
        scenario.bs_count, total_users, scenario.area_m, scenario.antennas,
        scenario.max_power, np.random.SeedSequence([seed, _TAG_DEPLOY]),
        scenario.bs_height_m, scenario.ue_height_m)
    betas = deployment.serving_beta
    dists = deployment.serving_distance_m
    assoc = deployment.association
    power = rrm.power_control(betas, scenario.max_power, scenario.rho_target) \
        if total_users else rrm.PowerAllocation(np.empty(0), np.empty(0, bool),
                                                scenario.rho_target)
    rx = power.rho * betas if total_users else np.empty(0)

    # effective per-population scheme/class (SPS runs on aligned periodic
    # traffic at the same mean rate)
    pop_scheme, pop_cls, pop_cp = [], [], []
    for p in pops:
        sch = scheme_override if scheme_override is not None else p.scheme
        cls = p.cls
        if sch == SCHEME_SPS and cls.arrival_model is not ArrivalModel.PERIODIC:
            cls = dataclasses.replace(cls, arrival_model=ArrivalModel.PERIODIC,
                                      ge=None)
        if frame.auto_numerology:
            num = radio.select_numerology(p.delay_spread_s, p.coherence_time_s,
                                          cls.air_latency_s)
            pop_cp.append(num.cp_overhead)
        else:
            pop_cp.append(frame.cp_overhead)
        pop_scheme.append(sch)
        pop_cls.append(cls)

    offsets = np.concatenate(([0], np.cumsum(counts))).astype(int)
    user_pop = np.repeat(np.arange(n_pops), counts)

    # --- admission: RRC walks, grouping, dimensioning --------------------
    pools = [rrc.PreamblePool(scenario.preamble_pool_size)
             for _ in range(scenario.bs_count)]
    rrc_final: dict = {}
    sub_dims: list = []
    sub_meta: list = []  # (bs, pop_index, group user ids)
    w_user = np.zeros(total_users)
    eps_dec_user = np.zeros(total_users)
    eps_det_user = np.zeros(total_users)
    sub_user = np.full(total_users, -1, dtype=np.int64)
    predata_user = np.zeros(total_users)
    static_bw_bs = np.zeros(scenario.bs_count)
    sps_groups: list = []  # (group user ids, SpsSchedule, sub_id)
    group_of_user = np.full(total_users, -1, dtype=np.int64)

    for pi, (p, cls, sch) in enumerate(zip(pops, pop_cls, pop_scheme)):
        if p.count == 0:
            continue
        cp = pop_cp[pi]
        class_key = cls.class_id if cls.class_id is not None else -(pi + 1)
        proto = _PROTOCOL_OF[sch]
        pop_users = np.arange(offsets[pi], offsets[pi + 1])
        for b in range(scenario.bs_count):
            uids = pop_users[assoc[pop_users] == b]
            if uids.size == 0:
                continue
            if sch in (SCHEME_GFMA, SCHEME_SPS):
                groups = rrm.group_users(betas[uids], scenario.users_per_subchannel)
            else:
                groups = [np.array([i]) for i in range(uids.size)]

            for g in groups:
                gids = uids[g]
                sid = len(sub_dims)
                if sch == SCHEME_GFMA:
                    q = rrm.activation_probability(cls, slot_s)
                    dim = rrm.dimension_gfma(rx[gids], cls, q, scenario.antennas,
                                             slot_s, cp, scenario.w_grid_hz,
                                             scenario.eps_split)
                    eps_det_user[gids] = dim.eps_detect
                    eps_dec_user[gids] = np.asarray(dim.eps_decode_per_user) \
                        if dim.eps_decode_per_user else 1.0
                    static_bw_bs[b] += dim.bandwidth_hz
                elif sch == SCHEME_SPS:
                    period = 1.0 / cls.rate_pps
                    sched = rrm.semi_persistent_schedule(
                        rx[gids], cls, scenario.antennas, slot_s, cp, period,
                        horizon, scenario.w_grid_hz)
                    dim = sched.dimension
                    eps_dec_user[gids] = np.asarray(dim.eps_decode_per_user)
                    sps_groups.append((gids, sched, sid))
                else:
                    dim = rrm.dimension_fgma(rx[gids], cls, scenario.antennas,
                                             slot_s, cp, scenario.w_grid_hz)
                    eps_dec_user[gids] = np.asarray(dim.eps_decode_per_user)
                # the Subchannel type re-checks the symbol-budget invariants
                rrm.Subchannel(dim.bandwidth_hz, slot_s, dim.pilot_symbols,
                               dim.data_symbols, tuple(int(u) for u in gids),
                               dim.ma_kind, dim.preamble_symbols,
                               dim.provisioned_users)
                w_user[gids] = dim.bandwidth_hz
                sub_user[gids] = sid
                group_of_user[gids] = sid
                sub_dims.append(dim)
                sub_meta.append((b, pi, gids))

                for u in gids:
                    u = int(u)
                    if sch == SCHEME_FOUR_WAY:
                        # full handshake per packet; no retained state
                        rrc_final[u] = RrcState()
                        continue
                    record = pools[b].allocate(u, class_key)
                    state = rrc.transition(RrcState(), RrcEvent.SETUP_4WAY,
                                           preambles={record.preamble_id})
                    state = rrc.transition(state, RrcEvent.SUSPEND_TO_INACTIVE)
                    if sch == SCHEME_GFMA:
                        state = rrc.transition(
                            state, RrcEvent.PROMOTE_INACTIVE_CONNECTED,
                            subchannels={(class_key, sid)})
                        state = rrc.transition(state, RrcEvent.PACKET_ARRIVAL_GFMA)
                    rrc_final[u] = state

                if sch in (SCHEME_FGMA, SCHEME_FOUR_WAY, SCHEME_SPS):
                    for u in gids:
                        timeline = rrc.protocol_timeline(
                            proto, t_min, dists[u] / radio.SPEED_OF_LIGHT_M_S)
                        predata_user[u] = timeline.pre_data_delay_s

    # static grant-free allocations are frequency partitions; they must fit
    carrier = scenario.carrier_bandwidth_hz
    if carrier > 0 and static_bw_bs.size and static_bw_bs.max() > carrier * (1 + 1e-12):
        worst = int(np.argmax(static_bw_bs))
        raise rrm.Infeasible(
            f"static grant-free allocations at bs {worst} "
            f"({static_bw_bs[worst]:.4g} Hz) exceed the carrier ({carrier:.4g} Hz)")

    # --- arrivals ----------------------------------------------------------
    per_user_times = []
    for pi in range(n_pops):
        aligned = pop_scheme[pi] == SCHEME_SPS
        for local in range(counts[pi]):
            ss = np.random.SeedSequence([seed, _TAG_ARRIVAL, pi, local])
            per_user_times.append(arrival_times(pop_cls[pi], horizon, ss,
                                                aligned=aligned))
    if per_user_times:
        arr_all = np.concatenate(per_user_times)
        usr_all = np.repeat(np.arange(total_users),
                            [t.size for t in per_user_times])
    else:
        arr_all = np.empty(0)
        usr_all = np.empty(0, dtype=np.int64)

    order = np.lexsort((usr_all, arr_all))
    arrival = arr_all[order]
    user = usr_all[order].astype(np.int64)
    n = arrival.size
    packet_id = np.arange(n, dtype=np.int64)
    pop_pk = user_pop[user] if n else np.empty(0, dtype=np.int64)

    align = np.random.default_rng(
        np.random.SeedSequence([seed, _TAG_ALIGN])).uniform(0.0, t_min, n)
    fail_rng = np.random.default_rng(np.random.SeedSequence([seed, _TAG_FAIL]))
    detect_draw = fail_rng.random(n)
    decode_draw = fail_rng.random(n)

    # --- journeys -----------------------------------------------------------
    pop_bits = np.array([cls.size_bits for cls in pop_cls], dtype=np.int64) \
        if n_pops else np.empty(0, dtype=np.int64)
    pop_lat = np.array([cls.air_latency_s for cls in pop_cls]) if n_pops else np.empty(0)
    pop_decode = np.array([max(t_min, cls.size_bits / DECODER_BITS_PER_S)
                           for cls in pop_cls]) if n_pops else np.empty(0)
    scheme_code = np.array([SCHEMES.index(s) for s in pop_scheme],
                           dtype=np.int64) if n_pops else np.empty(0, dtype=np.int64)

    align_eff = align.copy()
    predata_pk = predata_user[user] if n else np.empty(0)
    sps_pk = scheme_code[pop_pk] == SCHEMES.index(SCHEME_SPS) if n else \
        np.empty(0, dtype=bool)
    if sps_pk.any():
        # grants recur without handshakes: only each group's first packet
        # pays the connection timeline (and its alignment draw)
        align_eff[sps_pk] = 0.0
        keep_predata = np.zeros(n, dtype=bool)
        sub_pk_all = sub_user[user]
        for gids, sched, sid in sps_groups:
            members = np.flatnonzero(sub_pk_all == sid)
            if members.size:
                first = members[0]  # packets are arrival-sorted
                keep_predata[first] = True
                align_eff[first] = align[first]
        predata_pk = np.where(sps_pk & ~keep_predata, 0.0, predata_pk)

    tx_pk = np.full(n, slot_s)
    prop_pk = dists[user] / radio.SPEED_OF_LIGHT_M_S if n else np.empty(0)
    decode_pk = pop_decode[pop_pk] if n else np.empty(0)

    # --- grant-free contention ----------------------------------------------
    ov_mask = np.zeros(n, dtype=bool)
    gfma_pk = scheme_code[pop_pk] == SCHEMES.index(SCHEME_GFMA) if n else \
        np.empty(0, dtype=bool)
    if n and gfma_pk.any():
        idx = np.flatnonzero(gfma_pk)
        tx_start = arrival[idx] + align_eff[idx]
        slot_idx = np.floor(tx_start / slot_s).astype(np.int64)
        provisioned = np.array(
            [d.provisioned_users if d.provisioned_users is not None else 0
             for d in sub_dims], dtype=np.int64)
        over, serial = _resolve_contention(sub_user[user[idx]], slot_idx,
                                           user[idx], packet_id[idx],
                                           provisioned)
        ov_mask[idx[over]] = True
        # an admitted transmitter drains same-slot extras one mini-slot apart
        tx_pk[idx] += serial * slot_s

    latency = align_eff + predata_pk + tx_pk + prop_pk + decode_pk

    # --- failure sampling -----------------------------------------------------
    outcome = np.zeros(n, dtype=np.int8)
    if n:
        outcome[latency > pop_lat[pop_pk]] = _MISS
        eps_dec_pk = eps_dec_user[user]
        outcome[decode_draw < eps_dec_pk] = _DECODE
        eps_det_pk = eps_det_user[user]
        outcome[(eps_det_pk > 0.0) & (detect_draw < eps_det_pk)] = _DETECT
        outcome[ov_mask] = _OVERFLOW

    # --- per-subchannel accounting ----------------------------------------------
    reports = []
    if sub_dims:
        sub_pk = sub_user[user] if n else np.empty(0, dtype=np.int64)
        pk_per_sub = np.bincount(sub_pk, minlength=len(sub_dims)) if n else \
            np.zeros(len(sub_dims), dtype=np.int64)
        fail_pk = np.isin(outcome, (_DECODE, _DETECT, _OVERFLOW)) if n else \
            np.empty(0, dtype=bool)
        fails_per_sub = np.bincount(sub_pk[fail_pk], minlength=len(sub_dims)) \
            if n else np.zeros(len(sub_dims), dtype=np.int64)
        sps_grants = {sid: sched.grant_count for _, sched, sid in sps_groups}
        for sid, (dim, (b, pi, gids)) in enumerate(zip(sub_dims, sub_meta)):
            sch = pop_scheme[pi]
            if sch == SCHEME_GFMA:
                avg_bw = dim.bandwidth_hz  # held open for the whole horizon
            elif sch == SCHEME_SPS:
                avg_bw = dim.bandwidth_hz * slot_s * sps_grants[sid] / horizon
            else:
                avg_bw = dim.bandwidth_hz * slot_s * pk_per_sub[sid] / horizon
            reports.append(SubchannelReport(
                subchannel_id=sid, bs_id=b, population=pops[pi].name,
                class_id=pop_cls[pi].class_id, scheme=sch,
                group_size=int(len(gids)), provisioned=dim.provisioned_users,
                pilot_symbols=dim.pilot_symbols,
                preamble_symbols=dim.preamble_symbols,
                data_symbols=dim.data_symbols, bandwidth_hz=dim.bandwidth_hz,
                duration_s=dim.duration_s, eps_detect=dim.eps_detect,
                eps_overflow=dim.eps_overflow, eps_decode=dim.eps_decode,
                eps_budget=dim.eps_budget, avg_bandwidth_hz=float(avg_bw),
                n_packets=int(pk_per_sub[sid]), n_failures=int(fails_per_sub[sid])))

    partitions = []
    for b in range(scenario.bs_count):
        if static_bw_bs[b] > 0:
            partitions.append((f"bs{b}:GFMA", float(static_bw_bs[b])))
    granted_avg = sum(r.avg_bandwidth_hz for r in reports
                      if r.scheme != SCHEME_GFMA)
    if granted_avg > 0:
        partitions.append(("granted", float(granted_avg)))

    label = scheme_override if scheme_override is not None else \
        "+".join(sorted(set(pop_scheme)))
    return RunMetrics(
        scheme_label=label, horizon_s=horizon, seed=seed,
        pop_names=tuple(p.name for p in pops),
        pop_schemes=tuple(pop_scheme),
        pop_class_ids=tuple(cls.class_id for cls in pop_cls),
        pop_size_bits=tuple(cls.size_bits for cls in pop_cls),
        packet_id=packet_id, user_id=user, pop_index=pop_pk,
        arrival_s=arrival, align_s=align_eff, predata_s=predata_pk,
        tx_s=tx_pk, prop_s=prop_pk, decode_s=decode_pk, latency_s=latency,
        outcome=outcome, subchannels=tuple(reports),
        frame=dataclasses.replace(frame, partitions=tuple(partitions)),
        rrc_final=rrc_final)


# --- summaries ---------------------------------------------------------------

@dataclass(frozen=True)
class ClassSummary:
    scheme: str
    population: str
    class_id: Optional[int]
    generated: int
    delivered: int
    deadline_miss: int
    decode_fail: int
    detect_fail: int
    overflow: int
    reliability: float
    p5_s: float
    p50_s: float
    p95_s: float
    p999_s: float
    goodput_bps: float
    avg_bandwidth_hz: float
    se_bits_per_hz: float


@dataclass(frozen=True)
class Summary:
    rows: Tuple[ClassSummary, ...]
    cdf_quantiles: np.ndarray
    cdf_latency_s: np.ndarray
    goodput_bps: float
    avg_bandwidth_hz: float
    se_bits_per_hz: float
    reliability: float
    p99_s: float


def _order_quantile(values: np.ndarray, qs: np.ndarray) -> np.ndarray:
    """Lower order statistic at each quantile; empty input -> NaNs."""
    if values.size == 0:
        return np.full(qs.shape, math.nan)
    v = np.sort(values)
    idx = np.ceil(qs * v.size).astype(int) - 1
    return v[np.clip(idx, 0, v.size - 1)]


def latency_cdf(latency_s: np.ndarray, outcome: np.ndarray,
                n_points: int = 1000) -> Tuple[np.ndarray, np.ndarray]:
    """Latency distribution over ALL packets: lost ones never arrive and sit
    at +inf, so the curve saturates below 1 when reliability < 1."""
    qs = np.arange(1, n_points + 1) / n_points
    if latency_s.size == 0:
        return qs, np.full(qs.shape, math.nan)
    eff = np.where(np.isin(outcome, (_DECODE, _DETECT, _OVERFLOW)),
                   math.inf, latency_s)
    return qs, _order_quantile(eff, qs)


def summarize(metrics: RunMetrics, n_cdf_points: int = 1000) -> Summary:
    """Per-(scheme, class) reliability/latency/SE table plus CDF samples."""
    quant = np.array([0.05, 0.50, 0.95, 0.999])
    bw_by_pop: dict = {}
    for rep in metrics.subchannels:
        bw_by_pop[rep.population] = bw_by_pop.get(rep.population, 0.0) \
            + rep.avg_bandwidth_hz

    summaries = []
    total_good_bits = 0.0
    for pi, name in enumerate(metrics.pop_names):
        mask = metrics.pop_index == pi
        out = metrics.outcome[mask]
        generated = int(mask.sum())
        delivered = int((out == _DELIVERED).sum())
        finite = metrics.latency_s[mask][np.isin(out, (_DELIVERED, _MISS))]
        p5, p50, p95, p999 = _order_quantile(finite, quant)
        good_bits = metrics.pop_size_bits[pi] * delivered
        total_good_bits += good_bits
        bw = bw_by_pop.get(name, 0.0)
        goodput = good_bits / metrics.horizon_s
        summaries.append(ClassSummary(
            scheme=metrics.pop_schemes[pi], population=name,
            class_id=metrics.pop_class_ids[pi],
            generated=generated, delivered=delivered,
            deadline_miss=int((out == _MISS).sum()),
            decode_fail=int((out == _DECODE).sum()),
            detect_fail=int((out == _DETECT).sum()),
            overflow=int((out == _OVERFLOW).sum()),
            reliability=delivered / generated if generated else math.nan,
            p5_s=float(p5), p50_s=float(p50), p95_s=float(p95),
            p999_s=float(p999),
            goodput_bps=goodput, avg_bandwidth_hz=bw,
            se_bits_per_hz=goodput / bw if bw > 0 else 0.0))

    qs, cdf = latency_cdf(metrics.latency_s, metrics.outcome, n_cdf_points)
    total_bw = sum(bw_by_pop.values())
    goodput_total = total_good_bits / metrics.horizon_s
    finite_all = metrics.latency_s[np.isin(metrics.outcome, (_DELIVERED, _MISS))]
    p99 = float(_order_quantile(finite_all, np.array([0.99]))[0])
    n_total = metrics.n_packets
    reliability = float((metrics.outcome == _DELIVERED).sum() / n_total) \
        if n_total else math.nan
    return Summary(rows=tuple(summaries), cdf_quantiles=qs, cdf_latency_s=cdf,
                   goodput_bps=goodput_total, avg_bandwidth_hz=float(total_bw),
                   se_bits_per_hz=goodput_total / total_bw if total_bw > 0 else 0.0,
                   reliability=reliability, p99_s=p99)


# --- file writers -------------------------------------------------------------

def write_trace(metrics: RunMetrics, path) -> None:
    """One line per packet: ids, scheme, latency components, outcome."""
    with open(path, "w", newline="\n") as f:
        f.write("packet_id,user_id,class_id,ma_kind,arrival_s,align_s,"
                "predata_s,tx_s,prop_s,decode_s,outcome,latency_s\n")
        for i in range(metrics.n_packets):
            pi = metrics.pop_index[i]
            cid = metrics.pop_class_ids[pi]
            f.write(f"{metrics.packet_id[i]},{metrics.user_id[i]},"
                    f"{'' if cid is None else cid},{metrics.pop_schemes[pi]},"
                    f"{metrics.arrival_s[i]:.9e},{metrics.align_s[i]:.9e},"
                    f"{metrics.predata_s[i]:.9e},{metrics.tx_s[i]:.9e},"
                    f"{metrics.prop_s[i]:.9e},{metrics.decode_s[i]:.9e},"
                    f"{OUTCOME_ORDER[metrics.outcome[i]].value},"
                    f"{metrics.latency_s[i]:.9e}\n")


def write_metrics(summary_rows: Sequence[ClassSummary], path) -> None:
    with open(path, "w", newline="\n") as f:
        f.write("scheme,population,class_id,generated,delivered,deadline_miss,"
                "decode_fail,detect_fail,overflow,reliability,p5_s,p50_s,"
                "p95_s,p999_s,goodput_bps,avg_bandwidth_hz,se_bits_per_hz\n")
        for r in summary_rows:
            f.write(f"{r.scheme},{r.population},"
                    f"{'' if r.class_id is None else r.class_id},"
                    f"{r.generated},{r.delivered},{r.deadline_miss},"
                    f"{r.decode_fail},{r.detect_fail},{r.overflow},"
                    f"{r.reliability:.9e},{r.p5_s:.9e},{r.p50_s:.9e},"
                    f"{r.p95_s:.9e},{r.p999_s:.9e},{r.goodput_bps:.9e},"
                    f"{r.avg_bandwidth_hz:.9e},{r.se_bits_per_hz:.9e}\n")


def write_cdf(summary: Summary, path) -> None:
    with open(path, "w", newline="\n") as f:
        f.write("quantile,latency_s\n")
        for q, v in zip(summary.cdf_quantiles, summary.cdf_latency_s):
            val = "inf" if math.isinf(v) else f"{v:.9e}"
            f.write(f"{q:.3f},{val}\n")


def write_dimensioning(metrics: RunMetrics, path) -> None:
    with open(path, "w", newline="\n") as f:
        f.write("subchannel_id,bs_id,population,class_id,scheme,group_size,"
                "provisioned,pilot_symbols,preamble_symbols,data_symbols,"
                "bandwidth_hz,duration_s,eps_detect,eps_overflow,eps_decode,"
                "eps_budget,avg_bandwidth_hz,n_packets,n_failures\n")
        for r in metrics.subchannels:
            f.write(f"{r.subchannel_id},{r.bs_id},{r.population},"
                    f"{'' if r.class_id is None else r.class_id},{r.scheme},"
                    f"{r.group_size},"
                    f"{'' if r.provisioned is None else r.provisioned},"
                    f"{r.pilot_symbols},{r.preamble_symbols},{r.data_symbols},"
                    f"{r.bandwidth_hz:.9e},{r.duration_s:.9e},"
                    f"{r.eps_detect:.9e},{r.eps_overflow:.9e},"
                    f"{r.eps_decode:.9e},{r.eps_budget:.9e},"
                    f"{r.avg_bandwidth_hz:.9e},{r.n_packets},{r.n_failures}\n")
