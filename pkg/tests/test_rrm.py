"""Power control, grouping, and subchannel dimensioning."""

import math

import numpy as np
import pytest
from scipy import stats

from urllcsim import rrm
from urllcsim.rrc import Protocol
from urllcsim.traffic import ArrivalModel, GilbertElliotState, TrafficClass, from_class_id
from urllcsim.rrm import (
    Infeasible,
    InvalidSplit,
    Subchannel,
    activation_probability,
    detection_preamble_symbols,
    dimension_fgma,
    dimension_gfma,
    group_users,
    missed_detection_probability,
    overflow_dimension,
    power_control,
    semi_persistent_schedule,
)

import oracles

GRID_TO_256_MHZ = (0.5e6, 1e6, 2e6, 4e6, 8e6, 16e6, 32e6, 64e6, 128e6, 256e6)


# --- power control -----------------------------------------------------------

def test_power_control_inverts_channel():
    pa = power_control([1e-10, 2e-10, 1e-6], p_max=1e12, rho_target=1.0)
    np.testing.assert_allclose(pa.rho, [1e10, 0.5e10, 1e6], rtol=1e-12)
    # received SNR rho*beta is flat where the cap does not bind
    assert not pa.power_limited.any()
    # a user with twice the gain transmits at half the power
    assert pa.rho[0] == pytest.approx(2.0 * pa.rho[1], rel=1e-12)


def test_power_control_cap():
    pa = power_control([1e-13, 1e-6], p_max=1e10, rho_target=1.0)
    assert pa.rho[0] == 1e10
    np.testing.assert_array_equal(pa.power_limited, [True, False])
    # boundary: desired power exactly at the cap is not flagged
    pa = power_control([1e-10], p_max=1e10, rho_target=1.0)
    assert pa.rho[0] == 1e10
    assert not pa.power_limited[0]


def test_power_control_received_snr_flat():
    rng = np.random.default_rng(8)
    betas = 10 ** rng.uniform(-13, -6, size=100)
    pa = power_control(betas, p_max=1e15, rho_target=2.5)
    np.testing.assert_allclose(pa.rho * betas, 2.5, rtol=1e-12)


def test_power_control_validation():
    with pytest.raises(ValueError):
        power_control([0.0], p_max=1.0, rho_target=1.0)
    with pytest.raises(ValueError):
        power_control([1e-9], p_max=1.0, rho_target=0.0)


# --- grouping ----------------------------------------------------------------

def test_group_users_splits_by_size():
    groups = group_users(np.full(25, 1e-9), k_max=8)
    assert [len(g) for g in groups] == [8, 8, 8, 1]
    all_idx = np.concatenate(groups)
    assert sorted(all_idx) == list(range(25))


def test_group_users_respects_window():
    # two 15-user clusters 30 dB apart never share a group
    betas = np.concatenate([np.full(15, 1e-6), np.full(15, 1e-9)])
    groups = group_users(betas, k_max=10)
    for g in groups:
        span = betas[g].max() / betas[g].min()
        assert span <= 10.0 ** (10.0 / 10.0) * (1 + 1e-9)
        assert len({betas[i] for i in g}) == 1  # no mixing across the gap


def test_group_users_boundary_span_inclusive():
    # exactly 10 dB apart still fits one group
    betas = np.array([1e-9, 1e-9, 1e-8, 1e-8, 1e-8])
    groups = group_users(betas, k_max=5)
    assert len(groups) == 1
    assert len(groups[0]) == 5


def test_group_users_strongest_first():
    betas = np.array([1e-9, 1e-7, 1e-8])
    groups = group_users(betas, k_max=1)
    assert [int(g[0]) for g in groups] == [1, 2, 0]


def test_group_users_edge_cases():
    assert group_users([], k_max=4) == []
    with pytest.raises(ValueError):
        group_users([1e-9], k_max=0)
    with pytest.raises(ValueError):
        group_users([0.0], k_max=4)


# --- granted dimensioning ------------------------------------------------------

def test_fgma_strong_user_takes_smallest_bandwidth():
    # 80-byte burst at huge received SNR fits the first grid step
    cls = from_class_id(4)
    dim = dimension_fgma([1e6], cls, m_antennas=64, duration_s=2e-4,
                         cp_overhead=0.25)
    assert dim.bandwidth_hz == rrm.DEFAULT_W_GRID_HZ[0]
    assert dim.pilot_symbols == 1
    assert dim.ma_kind is Protocol.FGMA
    # symbol budget arithmetic: floor(W*T*(1-cp)) - pilots
    assert dim.data_symbols == int(0.5e6 * 2e-4 * 0.75) - 1
    assert dim.eps_decode <= cls.eps_target
    assert dim.eps_detect == 0.0 and dim.eps_overflow == 0.0


def test_fgma_group_of_four_reference():
    """8 KB to four users in 0.2 ms with unit received SNR is out of reach
    of a 16 MHz grid; a 10 Gbit/s-class grid admits it."""
    cls = from_class_id(7)
    rx = [1.0, 1.0, 1.0, 1.0]
    with pytest.raises(Infeasible):
        dimension_fgma(rx, cls, m_antennas=64, duration_s=2e-4, cp_overhead=0.25)
    assert oracles.wstar_sweep(rx, 64, 2e-4, 0.25, cls.size_bits,
                               cls.eps_target, rrm.DEFAULT_W_GRID_HZ) is None

    dim = dimension_fgma(rx, cls, m_antennas=64, duration_s=2e-4,
                         cp_overhead=0.25, w_grid=GRID_TO_256_MHZ)
    want = oracles.wstar_sweep(rx, 64, 2e-4, 0.25, cls.size_bits,
                               cls.eps_target, GRID_TO_256_MHZ)
    assert dim.bandwidth_hz == want
    assert dim.bandwidth_hz == 128e6
    assert dim.data_symbols == int(128e6 * 2e-4 * 0.75) - 4 == 19196
    # four equal users, equal power: gamma = M*alpha*rx / (1 + 3rx + (1-alpha)rx)
    alpha = 4.0 / 5.0
    expect_gamma = 64 * alpha * 1.0 / (1.0 + 3.0 + (1.0 - alpha))
    np.testing.assert_allclose(dim.gammas, expect_gamma, rtol=1e-12)


def test_fgma_matches_sweep_oracle_on_random_instances():
    rng = np.random.default_rng(515)
    agree = 0
    for _ in range(30):
        size = int(rng.integers(1, 9))
        rx = list(10 ** rng.uniform(-1.5, 1.5, size))
        m = int(rng.integers(16, 257))
        cls = from_class_id(int(rng.choice([4, 5, 6, 7, 8])))
        try:
            dim = dimension_fgma(rx, cls, m, 2e-4, 0.25, w_grid=GRID_TO_256_MHZ)
            got = dim.bandwidth_hz
        except Infeasible:
            got = None
        want = oracles.wstar_sweep(rx, m, 2e-4, 0.25, cls.size_bits,
                                   cls.eps_target, GRID_TO_256_MHZ)
        assert got == want
        agree += got is not None
    assert agree >= 10  # sweep must exercise the feasible branch


def test_fgma_zero_snr_infeasible():
    with pytest.raises(Infeasible):
        dimension_fgma([0.0], from_class_id(7), 64, 2e-4, 0.25)
    with pytest.raises(ValueError):
        dimension_fgma([], from_class_id(7), 64, 2e-4, 0.25)
    with pytest.raises(ValueError):
        dimension_fgma([-1.0], from_class_id(7), 64, 2e-4, 0.25)


# --- overflow and detection ---------------------------------------------------

def test_overflow_dimension_reference():
    m = overflow_dimension(10, 0.02, 1e-3)
    assert m == 2
    assert m == oracles.mstar_enum(10, 0.02, 1e-3)
    # the tail at m*-1 violates the budget, at m* it meets it
    assert float(stats.binom.sf(1, 10, 0.02)) > 1e-3
    assert float(stats.binom.sf(2, 10, 0.02)) <= 1e-3


def test_overflow_dimension_limits():
    assert overflow_dimension(10, 1e-12, 1e-3) == 0  # vanishing activation
    assert overflow_dimension(1, 1.0, 0.5) == 1  # always-on single user
    assert overflow_dimension(20, 0.0, 0.0) == 0
    with pytest.raises(ValueError):
        overflow_dimension(0, 0.1, 1e-3)
    with pytest.raises(ValueError):
        overflow_dimension(10, 1.5, 1e-3)


def test_overflow_dimension_matches_enumeration():
    for g in (1, 2, 5, 10, 20):
        for q in (0.01, 0.05, 0.1, 0.2):
            for eps in (1e-2, 1e-3, 1e-5):
                assert overflow_dimension(g, q, eps) == oracles.mstar_enum(g, q, eps)


def test_detection_preamble_round_trip():
    tau = detection_preamble_symbols(1e-3)
    assert tau == 7
    p_md = missed_detection_probability(tau)
    assert p_md == pytest.approx(math.exp(-7.0), rel=1e-12)
    assert p_md <= 1e-3
    # round trip holds across the budget range
    for eps in (0.5, 1e-2, 1e-4, 1e-9):
        assert missed_detection_probability(detection_preamble_symbols(eps)) <= eps
    with pytest.raises(ValueError):
        detection_preamble_symbols(0.0)
    with pytest.raises(ValueError):
        detection_preamble_symbols(1.0)


# --- activation probability ------------------------------------------------------

def test_activation_probability_models():
    poisson = from_class_id(7, rate_pps=100.0)
    assert activation_probability(poisson, 2e-4) \
        == pytest.approx(1.0 - math.exp(-0.02), rel=1e-12)
    periodic = from_class_id(3, rate_pps=100.0)
    assert activation_probability(periodic, 2e-4) == pytest.approx(0.02, rel=1e-12)
    assert activation_probability(periodic, 1.0) == 1.0  # capped
    ge = GilbertElliotState(p_on_off=0.5, p_off_on=0.5, peak_rate_pps=200.0)
    bursty = TrafficClass(None, 0.999, 10e-3, 100, ArrivalModel.GILBERT_ELLIOT,
                          100.0, ge=ge)
    assert activation_probability(bursty, 2e-4) \
        == pytest.approx(0.5 * (1.0 - math.exp(-200.0 * 2e-4)), rel=1e-12)


# --- grant-free dimensioning ------------------------------------------------------

def test_gfma_reference_operating_point():
    """Ten class-7 users at unit received SNR, thirds split, 0.2 ms slot."""
    cls = from_class_id(7, rate_pps=100.0)
    q = activation_probability(cls, 2e-4)
    assert q == pytest.approx(0.019801326693244747, rel=1e-14)
    dim = dimension_gfma([1.0] * 10, cls, q, m_antennas=64, duration_s=2e-4,
                         cp_overhead=0.25, w_grid=GRID_TO_256_MHZ)
    assert dim.provisioned_users == 4  # P(Bin(10, q) > 4) first under budget/3
    assert dim.provisioned_users == oracles.mstar_enum(10, q, cls.eps_target / 3.0)
    assert dim.preamble_symbols == 13  # ceil(-ln(1e-5 / 3))
    assert dim.eps_detect == pytest.approx(math.exp(-13.0), rel=1e-12)
    assert dim.bandwidth_hz == 128e6
    assert dim.data_symbols == int(128e6 * 2e-4 * 0.75) - 13 - 4 == 19183
    # m* - 1 = 3 interferers at unit SNR, alpha = m*/(1+m*)
    expect_gamma = 64 * 0.8 / 4.2
    np.testing.assert_allclose(dim.gammas, expect_gamma, rtol=1e-12)
    assert dim.eps_decode + dim.eps_detect + dim.eps_overflow <= dim.eps_budget
    assert dim.eps_budget == pytest.approx(1e-5, rel=1e-9)


def test_gfma_pilots_only_when_activation_vanishes():
    cls = from_class_id(7, rate_pps=100.0)
    dim = dimension_gfma([1.0] * 10, cls, q=1e-12, m_antennas=64,
                         duration_s=2e-4, cp_overhead=0.25)
    assert dim.provisioned_users == 0
    assert dim.pilot_symbols == 0
    assert dim.data_symbols == 0
    assert dim.preamble_symbols == 13
    assert dim.bandwidth_hz == rrm.DEFAULT_W_GRID_HZ[0]
    assert dim.eps_decode == 0.0
    assert dim.gammas == ()


def test_gfma_budget_invariant_across_instances():
    rng = np.random.default_rng(99)
    for _ in range(20):
        size = int(rng.integers(1, 12))
        rx = list(10 ** rng.uniform(-0.5, 1.5, size))
        cls = from_class_id(7, rate_pps=float(rng.uniform(100, 500)))
        q = activation_probability(cls, 2e-4)
        try:
            dim = dimension_gfma(rx, cls, q, 64, 2e-4, 0.25,
                                 w_grid=GRID_TO_256_MHZ)
        except Infeasible:
            continue
        assert dim.eps_decode + dim.eps_detect + dim.eps_overflow \
            <= dim.eps_budget + 1e-15
        assert dim.provisioned_users <= size


def test_gfma_validation():
    cls = from_class_id(7)
    with pytest.raises(ValueError):
        dimension_gfma([], cls, 0.02, 64, 2e-4, 0.25)
    with pytest.raises(ValueError):
        dimension_gfma([1.0], cls, 1.5, 64, 2e-4, 0.25)
    with pytest.raises(InvalidSplit):
        dimension_gfma([1.0], cls, 0.02, 64, 2e-4, 0.25,
                       eps_split=(0.5, 0.5, 0.5))
    with pytest.raises(InvalidSplit):
        dimension_gfma([1.0], cls, 0.02, 64, 2e-4, 0.25,
                       eps_split=(1.0, -0.5, 0.5))
    with pytest.raises(InvalidSplit):
        dimension_gfma([1.0], cls, 0.02, 64, 2e-4, 0.25, eps_split=(0.5, 0.5))
    with pytest.raises(ValueError):
        dimension_gfma([1.0], cls, 0.02, 64, 2e-4, 0.25, w_grid=())
    with pytest.raises(ValueError):
        dimension_gfma([1.0], cls, 0.02, 64, 2e-4, 0.25, w_grid=(2e6, 1e6))


# --- semi-persistent scheduling -----------------------------------------------------

def test_sps_schedule_reference():
    cls = from_class_id(4, rate_pps=100.0)  # small burst, 10 ms period
    sched = semi_persistent_schedule([100.0], cls, m_antennas=64,
                                     duration_s=2e-4, cp_overhead=0.25,
                                     period_s=0.01, horizon_s=0.1)
    assert sched.grant_count == 10
    np.testing.assert_allclose(sched.grant_times, 0.01 * np.arange(10),
                               rtol=0, atol=1e-15)
    assert sched.dimension.ma_kind is Protocol.FGMA
    with pytest.raises(ValueError):
        semi_persistent_schedule([10.0], cls, 64, 2e-4, 0.25,
                                 period_s=0.0, horizon_s=0.1)


# --- subchannel invariants ------------------------------------------------------------

def test_subchannel_invariants():
    ok = Subchannel(1e6, 2e-4, pilot_symbols=4, data_symbols=100,
                    assigned_group=(0, 1, 2, 3), ma_kind=Protocol.FGMA)
    assert ok.provisioned is None
    with pytest.raises(ValueError):
        Subchannel(0.0, 2e-4, 4, 100, (0,), Protocol.FGMA)
    with pytest.raises(ValueError):
        # granted access needs one orthogonal pilot per member
        Subchannel(1e6, 2e-4, 3, 100, (0, 1, 2, 3), Protocol.FGMA)
    with pytest.raises(ValueError):
        Subchannel(1e6, 2e-4, 4, 0, (0, 1, 2, 3), Protocol.FGMA)
    # grant-free: pilots cover provisioned slots, not the whole group
    gf = Subchannel(1e6, 2e-4, 4, 100, tuple(range(10)), Protocol.GFMA,
                    preamble_symbols=13, provisioned=4)
    assert gf.provisioned == 4
    with pytest.raises(ValueError):
        Subchannel(1e6, 2e-4, 3, 100, tuple(range(10)), Protocol.GFMA,
                   preamble_symbols=13, provisioned=4)
    # pilots-only grant-free subchannel is legitimate at provisioned = 0
    idle = Subchannel(0.5e6, 2e-4, 0, 0, tuple(range(10)), Protocol.GFMA,
                      preamble_symbols=13, provisioned=0)
    assert idle.data_symbols == 0
