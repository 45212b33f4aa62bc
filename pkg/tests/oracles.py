"""Independent reference implementations used to cross-check the package.

Everything here is deliberately written from the model definitions, not
from the package code: high-precision special functions via mpmath, brute
enumeration where the package uses closed forms, and Monte-Carlo physical
models where the package uses analytic bounds.  Keep this module free of
urllcsim imports.
"""

import math

import mpmath
import numpy as np

mpmath.mp.dps = 50


# --- finite-blocklength error, high precision ---------------------------------

def q_function_hp(x) -> float:
    return float(0.5 * mpmath.erfc(mpmath.mpf(x) / mpmath.sqrt(2)))


def decode_error_hp(n: int, b: int, gamma: float) -> float:
    """Normal-approximation block error at 50 decimal digits."""
    g = mpmath.mpf(gamma)
    if g <= 0:
        return 1.0 if b > 0 else 0.0
    log2 = mpmath.log(2)
    cap = mpmath.log(1 + g) / log2
    disp = (1 - (1 + g) ** -2) * (1 / log2) ** 2
    arg = (n * cap - b + mpmath.log(n) / (2 * log2)) / mpmath.sqrt(n * disp)
    eps = 0.5 * mpmath.erfc(arg / mpmath.sqrt(2))
    return float(min(1, max(0, eps)))


# --- binomial overflow provisioning by brute enumeration ------------------------

def mstar_enum(group_size: int, q: float, eps_overflow: float) -> int:
    """Smallest m with P(Binomial(G,q) > m) <= eps, by full pmf summation."""
    pmf = [math.comb(group_size, k) * q ** k * (1 - q) ** (group_size - k)
           for k in range(group_size + 1)]
    for m in range(group_size + 1):
        if sum(pmf[m + 1:]) <= eps_overflow:
            return m
    return group_size


def binom_tail_gt(group_size: int, q: float, m: int) -> float:
    return sum(math.comb(group_size, k) * q ** k * (1 - q) ** (group_size - k)
               for k in range(m + 1, group_size + 1))


# --- granted-access bandwidth dimensioning, exhaustive sweep ---------------------

def wstar_sweep(rx_snrs, m_antennas: int, duration_s: float,
                cp_overhead: float, size_bits: int, eps_target: float,
                w_grid):
    """Evaluate every grid point independently; None when nothing fits.

    Mirrors the dimensioning rule from first principles: one pilot per
    group member, hardening SINR with all other members co-channel, block
    error from the high-precision normal approximation.
    """
    rx = list(float(x) for x in rx_snrs)
    tau_p = len(rx)
    feasible = []
    for w in w_grid:
        n_total = math.floor(w * duration_s * (1.0 - cp_overhead))
        n_d = n_total - tau_p
        if n_d < 1:
            continue
        worst = 0.0
        for k, rk in enumerate(rx):
            alpha = tau_p * rk / (1.0 + tau_p * rk) if rk > 0 else 0.0
            interf = sum(rj for j, rj in enumerate(rx) if j != k)
            gamma = m_antennas * alpha * rk / (1.0 + interf + (1 - alpha) * rk)
            worst = max(worst, decode_error_hp(n_d, size_bits, gamma))
        if worst <= eps_target:
            feasible.append(w)
    return min(feasible) if feasible else None


# --- numerology selection by brute force ------------------------------------------

# the full option catalog, restated: spacing Hz, cp kind, inclusive overhead
# fraction, filter class, (delay in symbol durations, guardband fraction)
_CATALOG = []
for _scs in (15e3, 30e3, 60e3, 120e3):
    for _cp_kind, _f in (("Normal", 0.0625), ("Extended", 0.20)):
        for _fclass, _delay_sym, _guard in (("LowOOBE", 4.0, 0.02),
                                            ("ShortDelay", 0.5, 0.10)):
            _cp_len = _f / (1.0 - _f) / _scs
            _sym = 1.0 / _scs + _cp_len
            _CATALOG.append({
                "scs": _scs, "cp_kind": _cp_kind, "cp_overhead": _f,
                "cp_len": _cp_len, "symbol": _sym,
                "filter_class": _fclass, "filter_delay": _delay_sym / _scs,
                "guard": _guard, "total": _f + _guard,
            })


def numerology_brute(delay_spread_s: float, coherence_time_s: float,
                     latency_budget_s: float):
    """Full scan of all 16 options; returns the winner dict or None."""
    ok = [e for e in _CATALOG
          if e["cp_len"] >= delay_spread_s
          and e["symbol"] <= coherence_time_s / 10.0
          and e["filter_delay"] <= 0.1 * latency_budget_s]
    if not ok:
        return None
    return min(ok, key=lambda e: (e["total"], -e["scs"]))


# --- Gilbert-Elliot chain, explicit per-slot simulation ---------------------------

def ge_chain_count(p_on_off: float, p_off_on: float, peak_rate_pps: float,
                   horizon_s: float, seed, slot_s: float = 1e-3) -> int:
    """Arrival count from a literal slot-by-slot two-state chain."""
    rng = np.random.default_rng(seed)
    n_slots = int(round(horizon_s / slot_s))
    on_frac = p_off_on / (p_on_off + p_off_on)
    on = rng.random() < on_frac  # stationary start
    total = 0
    for _ in range(n_slots):
        if on:
            total += rng.poisson(peak_rate_pps * slot_s)
            if rng.random() < p_on_off:
                on = False
        else:
            if rng.random() < p_off_on:
                on = True
    return total


# --- MRC ergodic rate, genie Monte Carlo ------------------------------------------

def mrc_ergodic_rate(m_antennas: int, rho_beta: float, alpha: float,
                     cochannel_rho_beta, n_draws: int, seed,
                     chunk: int = 20000) -> float:
    """Ergodic achievable rate of maximum-ratio combining, Monte Carlo.

    True channel h = h_est + h_err with h_est ~ CN(0, alpha*rb*I) and
    h_err ~ CN(0, (1-alpha)*rb*I); the receiver combines with h_est and the
    genie computes the exact instantaneous SINR, estimation error and all
    co-channel interferers included.  Jensen puts this at or above the
    deterministic hardening bound.
    """
    rng = np.random.default_rng(seed)
    co = np.asarray(list(cochannel_rho_beta), dtype=float)
    total = 0.0
    done = 0

    def cn(size, var):
        re = rng.standard_normal(size)
        im = rng.standard_normal(size)
        return np.sqrt(var / 2.0) * (re + 1j * im)

    while done < n_draws:
        nb = min(chunk, n_draws - done)
        h_est = cn((nb, m_antennas), alpha * rho_beta)
        h_err = cn((nb, m_antennas), (1.0 - alpha) * rho_beta)
        h = h_est + h_err
        w = h_est
        wn2 = np.sum(np.abs(w) ** 2, axis=1)
        sig = np.abs(np.sum(np.conj(w) * h, axis=1)) ** 2
        denom = wn2.copy()  # unit-power noise through the combiner
        for rb_j in co:
            h_j = cn((nb, m_antennas), rb_j)
            denom += np.abs(np.sum(np.conj(w) * h_j, axis=1)) ** 2
        keep = wn2 > 0
        sinr = np.zeros(nb)
        sinr[keep] = sig[keep] / denom[keep]
        total += float(np.log2(1.0 + sinr).sum())
        done += nb
    return total / n_draws
