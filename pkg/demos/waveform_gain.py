"""
Numerology selection and the CP-overhead dividend
=================================================

A fixed 25% cyclic prefix is paid whether or not the channel needs it.
Selecting subcarrier spacing, CP kind, and filter per population recovers
most of that overhead for clean channels while still covering dispersive
ones.
"""

from urllcsim import radio

print("catalog (16 entries): scs / CP kind / filter -> total overhead")
for e in radio.NUMEROLOGY_CATALOG:
    print(f"  {e.subcarrier_spacing_hz / 1e3:>5.0f} kHz  {e.cp_kind:>8}  "
          f"{e.filter_class:>10}  cp={e.cp_length_s * 1e6:6.2f} us  "
          f"total={e.total_overhead:.4f}")

print()
cases = [
    ("indoor, 0.2 us delay spread", 0.2e-6, 10e-3, 10e-3),
    ("dense urban, 10 us delay spread", 10e-6, 10e-3, 10e-3),
    ("tight 0.5 ms latency budget", 0.2e-6, 10e-3, 0.5e-3),
]
picks = {}
for label, ds, coh, budget in cases:
    e = radio.select_numerology(ds, coh, budget)
    picks[label] = e
    print(f"{label}:")
    print(f"  -> {e.subcarrier_spacing_hz / 1e3:.0f} kHz, {e.cp_kind} CP, "
          f"{e.filter_class} filter (overhead {e.total_overhead:.4f}, "
          f"filter delay {e.filter_delay_s * 1e6:.1f} us)")

print()
short = picks[cases[0][0]]
heavy = picks[cases[1][0]]
single = radio.overhead_gain(short, baseline_cp=0.25)
print(f"usable-symbol gain vs a fixed 25% CP: {single:.4f}x for the clean "
      f"population")
print(f"the dispersive population still needs the extended CP: "
      f"{radio.overhead_gain(heavy, baseline_cp=0.25):.4f}x")

for split in (0.5, 0.75, 0.9):
    mix = radio.mixed_overhead_gain([short, heavy],
                                    weights=[split, 1.0 - split])
    print(f"  {split:4.0%} clean / {1 - split:4.0%} dispersive -> "
          f"mixed gain {mix:.4f}x")
print("even a balanced mix clears a 15% spectral-efficiency dividend")
