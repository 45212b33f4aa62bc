"""
Uplink link budget, antenna scaling, decode error
=================================================

From distance to pathloss, from pilots to channel-estimate quality, from
antennas to post-combining SINR, and finally to the finite-blocklength
decode error the dimensioner budgets against.
"""

import numpy as np

from urllcsim import radio

print("log-distance pathloss (no shadowing)")
for d in (50, 100, 250, 500, 1000, 2000):
    print(f"  {d:>5} m -> {radio.pathloss_gain(float(d)).pathloss_db:6.1f} dB")

print()
print("pilot quality vs pilot length (received SNR 0.01)")
for tau in (1, 2, 4, 8, 16, 64):
    alpha = radio.pilot_quality(tau, 1.0, 0.01)
    print(f"  tau_p={tau:>3} -> alpha={alpha:.4f}")

print()
print("hardened SINR vs antenna count (alpha from 8 pilots, SNR 0.01)")
lb64 = radio.link_budget(64, 1.0, 0.01, 8)
for m in (16, 32, 64, 128, 256):
    gamma = radio.effective_sinr(m, 1.0, 0.01, lb64.alpha)
    print(f"  M={m:>4} -> gamma={gamma:7.4f}  ({10 * np.log10(gamma):6.2f} dB)")
print("  doubling M doubles gamma, exactly:",
      radio.effective_sinr(128, 1.0, 0.01, lb64.alpha)
      == 2 * radio.effective_sinr(64, 1.0, 0.01, lb64.alpha))

print()
print("decode error for 1000 payload bits at gamma = 1")
for n in (800, 1000, 1200, 1500, 2000):
    eps = radio.decode_error(n, 1000, 1.0)
    print(f"  n={n:>5} symbols -> eps={eps:.3e}")
print("  (the capacity limit n = b / log2(1+gamma) sits at n = 1000;")
print("   reliability is bought with symbols beyond it)")

print()
print("co-channel interference drags the budget back down")
for k in range(4):
    co = [(1.0, 0.01)] * k
    gamma = radio.effective_sinr(64, 1.0, 0.01, lb64.alpha, co)
    print(f"  {k} equal-power interferers -> gamma={gamma:7.4f}")
