"""Latency-aware resource management: power control, user grouping, and
subchannel dimensioning for granted and grant-free access.

Dimensioning picks the smallest bandwidth on a search grid such that the
analytic failure budget of the served class is met: decode errors for
granted access; detection misses + slot overflow + decode errors for
grant-free access, with the class budget 1-R split three ways.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from . import radio
from .rrc import Protocol
from .traffic import ArrivalModel, TrafficClass

DEFAULT_W_GRID_HZ: Tuple[float, ...] = (0.5e6, 1e6, 2e6, 4e6, 8e6, 16e6, 32e6)
GROUP_WINDOW_DB = 10.0
DETECTION_RATE_PER_SYMBOL = 1.0  # miss probability exp(-rate * preamble symbols)


class Infeasible(RuntimeError):
    """No grid bandwidth meets the reliability target; split the group or
    extend the slot."""


class InvalidSplit(ValueError):
    """Failure-budget split must be three positive fractions summing to 1."""


# --- power control -----------------------------------------------------------

@dataclass(frozen=True)
class PowerAllocation:
    rho: np.ndarray  # per-user transmit power, normalized to noise
    power_limited: np.ndarray  # True where the cap binds
    rho_target: float


def power_control(betas: Sequence[float], p_max, rho_target: float) -> PowerAllocation:
    """Truncated channel inversion: rho_k = min(P_max, rho_target / beta_k)."""
    betas = np.asarray(betas, dtype=float)
    if betas.size and betas.min() <= 0.0:
        raise ValueError("all betas must be > 0")
    if rho_target <= 0.0:
        raise ValueError("rho_target must be > 0")
    desired = rho_target / betas
    rho = np.minimum(p_max, desired)
    return PowerAllocation(rho=rho, power_limited=desired > p_max,
                           rho_target=rho_target)


# --- user grouping -----------------------------------------------------------

def group_users(betas: Sequence[float], k_max: int,
                window_db: float = GROUP_WINDOW_DB) -> list:
    """Greedy contiguous grouping of the beta-sorted users.

    Returns arrays of indices into ``betas``, strongest first; a group ends
    when it reaches k_max members or would span more than window_db.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    betas = np.asarray(betas, dtype=float)
    if betas.size == 0:
        return []
    if betas.min() <= 0.0:
        raise ValueError("all betas must be > 0")
    order = np.argsort(-betas, kind="stable")
    ratio_cap = 10.0 ** (window_db / 10.0) * (1.0 + 1e-12)  # boundary inclusive

    groups = []
    current: list = []
    head = 0.0
    for idx in order:
        b = betas[idx]
        if current and len(current) < k_max and head / b <= ratio_cap:
            current.append(int(idx))
        else:
            if current:
                groups.append(np.asarray(current, dtype=np.int64))
            current = [int(idx)]
            head = b
    groups.append(np.asarray(current, dtype=np.int64))
    return groups


# --- subchannel / dimensioning types ------------------------------------------

@dataclass(frozen=True)
class Subchannel:
    bandwidth_hz: float
    duration_s: float
    pilot_symbols: int
    data_symbols: int
    assigned_group: Tuple[int, ...]
    ma_kind: Protocol
    preamble_symbols: int = 0
    provisioned: Optional[int] = None  # concurrent grant-free slots m*

    def __post_init__(self) -> None:
        if self.bandwidth_hz <= 0.0 or self.duration_s <= 0.0:
            raise ValueError("bandwidth and duration must be > 0")
        if min(self.pilot_symbols, self.data_symbols, self.preamble_symbols) < 0:
            raise ValueError("symbol counts must be >= 0")
        if self.provisioned is None:
            # granted access: orthogonal pilots cover the whole group
            if self.pilot_symbols < len(self.assigned_group):
                raise ValueError("granted subchannel needs >= one pilot per user")
            if self.data_symbols < 1:
                raise ValueError("subchannel carries no data symbols")
        else:
            # grant-free: pilots cover the provisioned concurrent slots, and a
            # provisioned=0 subchannel legitimately carries pilots/preamble only
            if self.pilot_symbols < self.provisioned:
                raise ValueError("grant-free subchannel needs >= one pilot per slot")
            if self.provisioned > 0 and self.data_symbols < 1:
                raise ValueError("subchannel carries no data symbols")


@dataclass(frozen=True)
class DimensionResult:
    ma_kind: Protocol
    bandwidth_hz: float
    duration_s: float
    pilot_symbols: int
    preamble_symbols: int
    data_symbols: int
    eps_decode: float  # worst user
    eps_detect: float
    eps_overflow: float
    eps_budget: float  # 1 - R of the served class
    provisioned_users: Optional[int]  # m*, grant-free only
    gammas: Tuple[float, ...]
    eps_decode_per_user: Tuple[float, ...]

    def __post_init__(self) -> None:
        total = self.eps_decode + self.eps_detect + self.eps_overflow
        if total > self.eps_budget + 1e-15:
            raise ValueError(f"failure budget violated: {total} > {self.eps_budget}")


def symbols_available(bandwidth_hz: float, duration_s: float,
                      cp_overhead: float) -> int:
    return int(math.floor(bandwidth_hz * duration_s * (1.0 - cp_overhead)))


def _check_grid(w_grid) -> Tuple[float, ...]:
    grid = tuple(float(w) for w in (DEFAULT_W_GRID_HZ if w_grid is None else w_grid))
    if not grid:
        raise ValueError("bandwidth grid is empty")
    if any(w <= 0 for w in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("bandwidth grid must be positive and ascending")
    return grid


def _group_gammas(rx_snrs: np.ndarray, m_antennas: int, pilots: int,
                  co_limit: Optional[int] = None) -> np.ndarray:
    """Hardened SINR per group member.

    rx_snrs are received SNRs (rho_k * beta_k) after power control, so the
    radio-layer calls use beta=1 with rho carrying the product.  Pilot
    quality assumes the equal pilot/data power split.  co_limit restricts
    interference to the strongest co_limit other members (grant-free
    worst case with m* concurrent slots).
    """
    n = rx_snrs.size
    gammas = np.empty(n)
    for k in range(n):
        others = np.delete(rx_snrs, k)
        if co_limit is not None and others.size > co_limit:
            others = np.sort(others)[::-1][:co_limit]
        alpha = radio.pilot_quality(pilots, float(rx_snrs[k]), 1.0)
        gammas[k] = radio.effective_sinr(
            m_antennas, float(rx_snrs[k]), 1.0, alpha,
            [(float(o), 1.0) for o in others])
    return gammas


# --- granted dimensioning ------------------------------------------------------

def dimension_fgma(rx_snrs: Sequence[float], cls: TrafficClass, m_antennas: int,
                   duration_s: float, cp_overhead: float,
                   w_grid: Optional[Sequence[float]] = None) -> DimensionResult:
    """Smallest grid bandwidth delivering the class payload to every group
    member within the full budget 1-R (granted access: no detection or
    overflow terms).  One orthogonal pilot symbol per member."""
    rx = np.asarray(rx_snrs, dtype=float)
    if rx.size == 0:
        raise ValueError("group must be nonempty")
    if rx.min() < 0.0:
        raise ValueError("received SNRs must be >= 0")
    grid = _check_grid(w_grid)
    tau_p = int(rx.size)
    gammas = _group_gammas(rx, m_antennas, tau_p)
    payload = cls.size_bits
    budget = cls.eps_target

    for w in grid:
        n_d = symbols_available(w, duration_s, cp_overhead) - tau_p
        if n_d < 1:
            continue
        eps = [radio.decode_error(n_d, payload, float(g)) for g in gammas]
        worst = max(eps)
        if worst <= budget:
            return DimensionResult(
                ma_kind=Protocol.FGMA, bandwidth_hz=w, duration_s=duration_s,
                pilot_symbols=tau_p, preamble_symbols=0, data_symbols=n_d,
                eps_decode=worst, eps_detect=0.0, eps_overflow=0.0,
                eps_budget=budget, provisioned_users=None,
                gammas=tuple(float(g) for g in gammas),
                eps_decode_per_user=tuple(eps))
    raise Infeasible(
        f"no bandwidth up to {grid[-1]:.3g} Hz meets eps <= {budget:.3g} "
        f"for {payload} bits x {tau_p} users")


# --- grant-free dimensioning -----------------------------------------------------

def overflow_dimension(group_size: int, q: float, eps_overflow: float) -> int:
    """Smallest m with P(Binomial(G, q) > m) <= eps_overflow, exact tail."""
    if group_size < 1:
        raise ValueError("group size must be >= 1")
    if not 0.0 <= q <= 1.0:
        raise ValueError("activation probability must lie in [0, 1]")
    if eps_overflow < 0.0:
        raise ValueError("overflow budget must be >= 0")
    for m in range(group_size + 1):
        if float(stats.binom.sf(m, group_size, q)) <= eps_overflow:
            return m
    return group_size  # sf(G, G, q) = 0, not reached


def detection_preamble_symbols(eps_detect: float,
                               rate: float = DETECTION_RATE_PER_SYMBOL) -> int:
    """Preamble symbols so that the miss probability exp(-rate*tau) meets
    the detection budget; closed form, at least one symbol."""
    if not 0.0 < eps_detect < 1.0:
        raise ValueError("detection budget must lie in (0, 1)")
    if rate <= 0.0:
        raise ValueError("detection rate must be > 0")
    return max(1, int(math.ceil(-math.log(eps_detect) / rate)))


def missed_detection_probability(preamble_symbols: int,
                                 rate: float = DETECTION_RATE_PER_SYMBOL) -> float:
    return math.exp(-rate * preamble_symbols)


def _check_split(eps_split) -> Tuple[float, float, float]:
    split = tuple(float(f) for f in eps_split)
    if len(split) != 3:
        raise InvalidSplit(f"need exactly 3 fractions, got {len(split)}")
    if any(f <= 0.0 for f in split):
        raise InvalidSplit("all fractions must be > 0")
    if not math.isclose(math.fsum(split), 1.0, rel_tol=0.0, abs_tol=1e-9):
        raise InvalidSplit(f"fractions sum to {math.fsum(split)}, expected 1")
    return split  # (overflow, detect, decode)


def activation_probability(cls: TrafficClass, slot_s: float) -> float:
    """Chance one user has >= 1 arrival within a slot."""
    lam = cls.rate_pps
    if cls.arrival_model is ArrivalModel.EVENT_POISSON:
        return 1.0 - math.exp(-lam * slot_s)
    if cls.arrival_model is ArrivalModel.PERIODIC:
        return min(1.0, lam * slot_s)
    ge = cls.ge
    peak = ge.peak_rate_pps if ge.peak_rate_pps > 0 else lam / ge.on_fraction
    return ge.on_fraction * (1.0 - math.exp(-peak * slot_s))


def dimension_gfma(rx_snrs: Sequence[float], cls: TrafficClass, q: float,
                   m_antennas: int, duration_s: float, cp_overhead: float,
                   w_grid: Optional[Sequence[float]] = None,
                   eps_split: Tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3),
                   detection_rate: float = DETECTION_RATE_PER_SYMBOL) -> DimensionResult:
    """Dimension one grant-free subchannel for a candidate set of G users.

    Budget 1-R is split into (overflow, detect, decode).  m* concurrent
    slots are provisioned from the exact binomial tail of the per-slot
    activation; the detection preamble length comes from the closed-form
    miss curve; decode dimensioning then treats m* simultaneous users, each
    seeing the m*-1 strongest others as interference.
    """
    rx = np.asarray(rx_snrs, dtype=float)
    if rx.size == 0:
        raise ValueError("candidate set must be nonempty")
    if rx.min() < 0.0:
        raise ValueError("received SNRs must be >= 0")
    if not 0.0 <= q <= 1.0:
        raise ValueError("activation probability must lie in [0, 1]")
    grid = _check_grid(w_grid)
    ov_frac, det_frac, dec_frac = _check_split(eps_split)
    budget = cls.eps_target
    group_size = int(rx.size)

    m_star = overflow_dimension(group_size, q, ov_frac * budget)
    eps_overflow = float(stats.binom.sf(m_star, group_size, q))
    tau_pre = detection_preamble_symbols(det_frac * budget, detection_rate)
    eps_detect = missed_detection_probability(tau_pre, detection_rate)

    if m_star == 0:
        # vanishing activation: carry pilots/preamble only
        for w in grid:
            if symbols_available(w, duration_s, cp_overhead) >= tau_pre:
                return DimensionResult(
                    ma_kind=Protocol.GFMA, bandwidth_hz=w, duration_s=duration_s,
                    pilot_symbols=0, preamble_symbols=tau_pre, data_symbols=0,
                    eps_decode=0.0, eps_detect=eps_detect,
                    eps_overflow=eps_overflow, eps_budget=budget,
                    provisioned_users=0, gammas=(), eps_decode_per_user=())
        raise Infeasible(f"grid cannot even carry the {tau_pre}-symbol preamble")

    gammas = _group_gammas(rx, m_antennas, pilots=m_star, co_limit=m_star - 1)
    payload = cls.size_bits
    dec_budget = dec_frac * budget
    for w in grid:
        n_d = symbols_available(w, duration_s, cp_overhead) - tau_pre - m_star
        if n_d < 1:
            continue
        eps = [radio.decode_error(n_d, payload, float(g)) for g in gammas]
        worst = max(eps)
        if worst <= dec_budget:
            return DimensionResult(
                ma_kind=Protocol.GFMA, bandwidth_hz=w, duration_s=duration_s,
                pilot_symbols=m_star, preamble_symbols=tau_pre, data_symbols=n_d,
                eps_decode=worst, eps_detect=eps_detect,
                eps_overflow=eps_overflow, eps_budget=budget,
                provisioned_users=m_star,
                gammas=tuple(float(g) for g in gammas),
                eps_decode_per_user=tuple(eps))
    raise Infeasible(
        f"no bandwidth up to {grid[-1]:.3g} Hz meets decode budget "
        f"{dec_budget:.3g} for {payload} bits x {m_star} concurrent users")


# --- semi-persistent scheduling ---------------------------------------------------

@dataclass(frozen=True)
class SpsSchedule:
    dimension: DimensionResult
    period_s: float
    grant_times: np.ndarray  # one recurring grant, first packet pays the handshake

    @property
    def grant_count(self) -> int:
        return int(self.grant_times.size)


def semi_persistent_schedule(rx_snrs: Sequence[float], cls: TrafficClass,
                             m_antennas: int, duration_s: float,
                             cp_overhead: float, period_s: float,
                             horizon_s: float,
                             w_grid: Optional[Sequence[float]] = None) -> SpsSchedule:
    """One granted dimensioning, repeated every period over the horizon.

    Assumes phase-aligned periodic arrivals across the group; the engine
    charges the connection handshake to the first packet only.
    """
    if period_s <= 0.0 or horizon_s <= 0.0:
        raise ValueError("period and horizon must be > 0")
    dim = dimension_fgma(rx_snrs, cls, m_antennas, duration_s, cp_overhead, w_grid)
    count = int(math.ceil(horizon_s / period_s))
    times = period_s * np.arange(count)
    return SpsSchedule(dimension=dim, period_s=period_s, grant_times=times)
