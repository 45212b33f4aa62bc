"""Deployment geometry, channel gains, hardened uplink SINR, short-block
decode errors, and numerology selection.

The SINR expression is a channel-hardening bound for maximum-ratio
combining with imperfect channel estimates: fast fading is abstracted away
and reliability becomes an analytic function of (antennas, powers, gains,
pilot quality), which the dimensioning layer exploits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np

SPEED_OF_LIGHT_M_S = 299_792_458.0
PATHLOSS_FIXED_DB = 128.1  # urban-macro log-distance law at 1 km
PATHLOSS_SLOPE_DB = 37.6
SHADOWING_STD_DB = 8.0
_LOG2E = math.log2(math.e)

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator]


class NoFeasibleNumerology(ValueError):
    """Every catalog entry violates at least one selection constraint."""


class DimensionMismatch(ValueError):
    """Gain table shape does not match the deployment."""


class NonPositiveGain(ValueError):
    """Gain table entries must lie in (0, 1]."""


# --- long-term link gain ---------------------------------------------------

@dataclass(frozen=True)
class LinkGain:
    beta: float  # linear large-scale gain, normalized so rx power/noise = rho*beta
    distance_m: float
    shadowing_db: float = 0.0

    @property
    def pathloss_db(self) -> float:
        return -10.0 * math.log10(self.beta)


def pathloss_gain(distance_m: float, shadowing_db: float = 0.0) -> LinkGain:
    """Log-distance pathloss with an externally drawn shadowing term (dB)."""
    if distance_m < 1.0:
        raise ValueError("distance must be >= 1 m")
    pl_db = PATHLOSS_FIXED_DB + PATHLOSS_SLOPE_DB * math.log10(distance_m / 1000.0) \
        + shadowing_db
    beta = min(1.0, 10.0 ** (-pl_db / 10.0))
    return LinkGain(beta=beta, distance_m=distance_m, shadowing_db=shadowing_db)


def pathloss_beta(distances_m: np.ndarray, shadowing_db: np.ndarray) -> np.ndarray:
    """Vectorized pathloss; same law as pathloss_gain."""
    pl_db = PATHLOSS_FIXED_DB + PATHLOSS_SLOPE_DB * np.log10(distances_m / 1000.0) \
        + shadowing_db
    return np.minimum(1.0, 10.0 ** (-pl_db / 10.0))


# --- hardened SINR ---------------------------------------------------------

def pilot_quality(tau_p: int, rho_p: float, beta: float) -> float:
    """MMSE channel-estimate quality in [0, 1) from pilot energy tau_p*rho_p."""
    if tau_p < 0 or rho_p < 0 or beta < 0:
        raise ValueError("pilot parameters must be >= 0")
    x = tau_p * rho_p * beta
    return x / (1.0 + x)


def effective_sinr(m_antennas: int, rho_k: float, beta_k: float, alpha_k: float,
                   cochannel: Iterable[Tuple[float, float]] = ()) -> float:
    """Deterministic post-combining SINR under channel hardening.

    cochannel lists (rho_j, beta_j) for same-subchannel interferers.
    """
    if m_antennas < 1:
        raise ValueError("antenna count must be >= 1")
    if not 0.0 <= alpha_k <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if rho_k < 0.0 or beta_k < 0.0:
        raise ValueError("powers and gains must be >= 0")
    interference = 0.0
    for rho_j, beta_j in cochannel:
        if rho_j < 0.0 or beta_j < 0.0:
            raise ValueError("powers and gains must be >= 0")
        interference += rho_j * beta_j
    denom = 1.0 + interference + (1.0 - alpha_k) * rho_k * beta_k
    return m_antennas * alpha_k * rho_k * beta_k / denom


@dataclass(frozen=True)
class LinkBudget:
    rho: float
    tau_p: int
    alpha: float
    gamma: float


def link_budget(m_antennas: int, rho: float, beta: float, tau_p: int,
                rho_p: Optional[float] = None,
                cochannel: Iterable[Tuple[float, float]] = ()) -> LinkBudget:
    """Pilot quality plus hardened SINR in one step (rho_p defaults to rho)."""
    if rho_p is None:
        rho_p = rho  # equal pilot/data power split
    alpha = pilot_quality(tau_p, rho_p, beta)
    gamma = effective_sinr(m_antennas, rho, beta, alpha, cochannel)
    return LinkBudget(rho=rho, tau_p=tau_p, alpha=alpha, gamma=gamma)


# --- finite-blocklength decode error ---------------------------------------

def _q_function(x: float) -> float:
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def decode_error(n_symbols: float, payload_bits: float, gamma: float) -> float:
    """Block error probability of an n-symbol codeword carrying b bits at SINR
    gamma, normal approximation with the 0.5*log2(n) correction."""
    if n_symbols < 1:
        raise ValueError("need at least one data symbol")
    if payload_bits < 0:
        raise ValueError("payload must be >= 0 bits")
    if gamma < 0:
        raise ValueError("SINR must be >= 0")
    if gamma == 0.0:
        return 1.0 if payload_bits > 0 else 0.0
    capacity = math.log2(1.0 + gamma)
    dispersion = (1.0 - (1.0 + gamma) ** -2) * _LOG2E ** 2
    arg = (n_symbols * capacity - payload_bits + 0.5 * math.log2(n_symbols)) \
        / math.sqrt(n_symbols * dispersion)
    return min(1.0, max(0.0, _q_function(arg)))


# --- numerology catalog and selection ---------------------------------------

class CpKind:
    NORMAL = "Normal"
    EXTENDED = "Extended"


class FilterClass:
    LOW_OOBE = "LowOOBE"
    SHORT_DELAY = "ShortDelay"


@dataclass(frozen=True)
class Numerology:
    subcarrier_spacing_hz: float
    cp_kind: str
    filter_class: str
    cp_overhead: float  # symbol-inclusive fraction
    cp_length_s: float
    guardband_fraction: float
    filter_delay_s: float

    def __post_init__(self) -> None:
        # stored values must satisfy cp_length = f/(1-f) * (1/scs)
        expected = self.cp_overhead / (1.0 - self.cp_overhead) / self.subcarrier_spacing_hz
        if not math.isclose(self.cp_length_s, expected, rel_tol=1e-9):
            raise ValueError("inconsistent CP length for the stored overhead fraction")

    @property
    def symbol_duration_s(self) -> float:
        # useful symbol + CP
        return 1.0 / self.subcarrier_spacing_hz + self.cp_length_s

    @property
    def total_overhead(self) -> float:
        return self.cp_overhead + self.guardband_fraction


_CP_FRACTIONS = {CpKind.NORMAL: 0.0625, CpKind.EXTENDED: 0.20}
_FILTERS = {
    # filter delay in useful-symbol durations, guardband fraction of band
    FilterClass.LOW_OOBE: (4.0, 0.02),
    FilterClass.SHORT_DELAY: (0.5, 0.10),
}


def _build_catalog() -> tuple:
    entries = []
    for scs in (15e3, 30e3, 60e3, 120e3):
        for cp_kind, frac in _CP_FRACTIONS.items():
            cp_len = frac / (1.0 - frac) / scs
            for filt, (delay_symbols, guard) in _FILTERS.items():
                entries.append(Numerology(
                    subcarrier_spacing_hz=scs, cp_kind=cp_kind, filter_class=filt,
                    cp_overhead=frac, cp_length_s=cp_len, guardband_fraction=guard,
                    filter_delay_s=delay_symbols / scs))
    return tuple(entries)


NUMEROLOGY_CATALOG: tuple = _build_catalog()


def numerology_feasible(entry: Numerology, delay_spread_s: float,
                        coherence_time_s: float, latency_budget_s: float) -> bool:
    return (entry.cp_length_s >= delay_spread_s
            and entry.symbol_duration_s <= coherence_time_s / 10.0
            and entry.filter_delay_s <= 0.1 * latency_budget_s)


def select_numerology(delay_spread_s: float, coherence_time_s: float,
                      latency_budget_s: float) -> Numerology:
    """Pick the feasible catalog entry with the least CP+guard overhead;
    ties go to the larger subcarrier spacing."""
    if min(delay_spread_s, coherence_time_s, latency_budget_s) <= 0.0:
        raise ValueError("all selection inputs must be > 0")
    feasible = [e for e in NUMEROLOGY_CATALOG
                if numerology_feasible(e, delay_spread_s, coherence_time_s,
                                       latency_budget_s)]
    if not feasible:
        raise NoFeasibleNumerology(
            f"no numerology fits delay_spread={delay_spread_s}s, "
            f"coherence={coherence_time_s}s, budget={latency_budget_s}s")
    feasible.sort(key=lambda e: (e.total_overhead, -e.subcarrier_spacing_hz))
    return feasible[0]


def overhead_gain(entry: Numerology, baseline_cp: float = 0.25) -> float:
    """Usable-symbol ratio of an auto-selected CP vs the fixed-CP baseline
    (same filter on both sides, so guardbands cancel)."""
    return (1.0 - entry.cp_overhead) / (1.0 - baseline_cp)


def mixed_overhead_gain(entries: Sequence[Numerology],
                        weights: Optional[Sequence[float]] = None,
                        baseline_cp: float = 0.25) -> float:
    """Population-weighted mean overhead gain across per-group numerologies."""
    if not entries:
        raise ValueError("need at least one numerology")
    if weights is None:
        weights = [1.0] * len(entries)
    if len(weights) != len(entries):
        raise ValueError("weights must pair with entries")
    total_w = float(sum(weights))
    usable = sum(w * (1.0 - e.cp_overhead) for w, e in zip(weights, entries)) / total_w
    return usable / (1.0 - baseline_cp)


# --- deployment -------------------------------------------------------------

@dataclass(frozen=True)
class BaseStation:
    bs_id: int
    position: tuple  # (x, y, z) meters
    antennas: int


@dataclass(frozen=True)
class UserEquipment:
    user_id: int
    position: tuple
    max_power: float  # normalized to noise power


@dataclass(frozen=True)
class Deployment:
    base_stations: tuple
    users: tuple
    gains: np.ndarray  # (users, BSs) linear beta
    distances_m: np.ndarray  # (users, BSs) 3D distances
    association: np.ndarray  # user index -> BS index

    @property
    def serving_beta(self) -> np.ndarray:
        return self.gains[np.arange(len(self.users)), self.association]

    @property
    def serving_distance_m(self) -> np.ndarray:
        return self.distances_m[np.arange(len(self.users)), self.association]


def make_deployment(bs_count: int, user_count: int, area_m: float,
                    antennas: int, max_power: float, seed: SeedLike,
                    bs_height_m: float = 20.0, ue_height_m: float = 1.5) -> Deployment:
    """Square-grid base stations, uniform users, stochastic link gains.

    Association is nearest-BS by 3D distance (ties -> lowest bs_id).
    """
    if bs_count < 1 or user_count < 0:
        raise ValueError("need >= 1 BS and >= 0 users")
    if antennas < 1:
        raise ValueError("antennas must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    cols = int(math.ceil(math.sqrt(bs_count)))
    spacing = area_m / cols
    bs_positions = []
    for i in range(bs_count):
        r, c = divmod(i, cols)
        bs_positions.append(((c + 0.5) * spacing, (r + 0.5) * spacing, bs_height_m))
    base_stations = tuple(BaseStation(i, pos, antennas)
                          for i, pos in enumerate(bs_positions))

    ue_xy = rng.uniform(0.0, area_m, size=(user_count, 2))
    users = tuple(UserEquipment(u, (float(ue_xy[u, 0]), float(ue_xy[u, 1]), ue_height_m),
                                max_power)
                  for u in range(user_count))

    bs_arr = np.array([b.position for b in base_stations])  # (B, 3)
    ue_arr = np.array([u.position for u in users]).reshape(user_count, 3)
    diff = ue_arr[:, None, :] - bs_arr[None, :, :]
    distances = np.sqrt((diff ** 2).sum(axis=2))
    distances = np.maximum(distances, 1.0)  # pathloss law domain

    shadowing = rng.normal(0.0, SHADOWING_STD_DB, size=distances.shape)
    gains = pathloss_beta(distances, shadowing)
    association = np.argmin(distances, axis=1)
    return Deployment(base_stations=base_stations, users=users, gains=gains,
                      distances_m=distances, association=association)


def load_pathloss_matrix(deployment: Deployment, gains: np.ndarray) -> Deployment:
    """Replace the stochastic gains with a measured user x BS table and
    re-associate each user with its strongest BS (ties -> lowest bs_id)."""
    gains = np.asarray(gains, dtype=float)
    expected = (len(deployment.users), len(deployment.base_stations))
    if gains.shape != expected:
        raise DimensionMismatch(f"gain table shape {gains.shape}, expected {expected}")
    if not np.all((gains > 0.0) & (gains <= 1.0)):
        raise NonPositiveGain("gains must lie in (0, 1]")
    association = np.argmax(gains, axis=1)
    return Deployment(base_stations=deployment.base_stations, users=deployment.users,
                      gains=gains, distances_m=deployment.distances_m,
                      association=association)
