"""
Grant-free subchannel dimensioning, step by step
================================================

Ten 8 KB/100 pkt/s users against a 99.999% / 2 ms contract: split the
failure budget, provision concurrent slots from the binomial tail, size
the detection preamble, then search the bandwidth grid for the smallest
subchannel whose worst-user decode error still fits.
"""

from scipy import stats

from urllcsim import rrm
from urllcsim.traffic import from_class_id

GRID = (0.5e6, 1e6, 2e6, 4e6, 8e6, 16e6, 32e6, 64e6, 128e6, 256e6)

cls = from_class_id(7, rate_pps=100.0)
slot = 2e-4
group = [1.0] * 10  # received SNRs after channel-inversion power control

budget = cls.eps_target
print(f"class {cls.class_id}: {cls.burst_bytes} B within "
      f"{cls.air_latency_s * 1e3:g} ms at reliability {cls.reliability}")
print(f"failure budget 1 - R = {budget:.1e}, split into thirds of "
      f"{budget / 3:.2e} each")

q = rrm.activation_probability(cls, slot)
print(f"\nper-slot activation q = 1 - exp(-lambda T) = {q:.6f}")

m_star = rrm.overflow_dimension(10, q, budget / 3)
print(f"provisioned concurrent slots m* = {m_star}  "
      f"(P[Bin(10, q) > {m_star}] = {stats.binom.sf(m_star, 10, q):.2e})")

tau = rrm.detection_preamble_symbols(budget / 3)
print(f"detection preamble tau = {tau} symbols  "
      f"(miss probability exp(-{tau}) = {rrm.missed_detection_probability(tau):.2e})")

print("\nbandwidth grid search (0.2 ms slot, 25% CP):")
dim = None
for w in GRID:
    n_total = rrm.symbols_available(w, slot, 0.25)
    n_d = n_total - tau - m_star
    status = "too small"
    if n_d >= 1:
        try:
            dim = rrm.dimension_gfma(group, cls, q, 64, slot, 0.25, w_grid=(w,))
            status = f"eps_decode = {dim.eps_decode:.2e}  <- selected"
        except rrm.Infeasible:
            status = "decode error above budget"
    print(f"  W = {w / 1e6:>6.1f} MHz: {n_d:>6} data symbols  {status}")
    if dim is not None:
        break

print(f"\nresult: W* = {dim.bandwidth_hz / 1e6:.0f} MHz, "
      f"{dim.pilot_symbols} pilots + {dim.preamble_symbols} preamble + "
      f"{dim.data_symbols} data symbols")
total = dim.eps_detect + dim.eps_overflow + dim.eps_decode
print(f"budget check: {dim.eps_detect:.2e} + {dim.eps_overflow:.2e} + "
      f"{dim.eps_decode:.2e} = {total:.2e} <= {budget:.1e}")
