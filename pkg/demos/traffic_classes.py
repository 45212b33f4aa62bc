"""
Service classes and use-case presets
====================================

Walk the eight-class QoS table, resolve a few use-case presets onto it,
and draw arrival traces under the three arrival models.
"""

import numpy as np

from urllcsim import traffic
from urllcsim.traffic import ArrivalModel, classify, from_class_id, preset

print("service-class table")
print(f"{'id':>3} {'reliability':>22} {'latency':>16} {'burst bytes':>16} models")
for row in traffic.CLASS_TABLE:
    rel = f"{row.rel_lo} .. {row.rel_hi}"
    lat = f"{row.lat_lo * 1e3:g} .. {row.lat_hi * 1e3:g} ms"
    burst = f"{row.burst_lo} .. {row.burst_hi}"
    models = ",".join(m.value for m in row.rates)
    print(f"{row.class_id:>3} {rel:>22} {lat:>16} {burst:>16} {models}")

print()
print("classifying QoS tuples")
examples = [
    (0.99999, 0.5e-3, 5 * 1024, ArrivalModel.EVENT_POISSON),
    (0.9999999, 2e-3, 80, ArrivalModel.GILBERT_ELLIOT),
    (0.999, 60e-3, 4 * 1024, ArrivalModel.PERIODIC),
]
for rel, lat, burst, model in examples:
    cid = classify(rel, lat, burst, model)
    print(f"  R={rel}, L={lat * 1e3:g} ms, B={burst} B, {model.value} "
          f"-> class {cid}")

print()
print("use-case presets")
for use, kind, kwargs in [("iod", "gps", {}),
                          ("teleop", "haptic", dict(variant="compressed", dofs=100)),
                          ("automotive", "sensor", {}),
                          ("ivr", "3d_audio", {})]:
    cls = preset(use, kind, **kwargs)
    cid = cls.class_id if cls.class_id is not None else "none"
    print(f"  {use}/{kind}: R={cls.reliability}, "
          f"L={cls.air_latency_s * 1e3:g} ms, B={cls.burst_bytes} B, "
          f"{cls.arrival_model.value} @ {cls.rate_pps:.0f} pkt/s -> class {cid}")

print()
print("arrival traces over 100 ms (one user each)")
horizon = 0.1
periodic = from_class_id(3, rate_pps=100.0)
poisson = from_class_id(7, rate_pps=300.0)
bursty = from_class_id(5, rate_pps=500.0)
for label, cls in [("periodic", periodic), ("poisson", poisson),
                   ("on/off", bursty)]:
    times = traffic.arrival_times(cls, horizon, seed=1)
    marks = np.zeros(50, dtype=bool)
    marks[(times / horizon * 50).astype(int)] = True
    lane = "".join("|" if m else "." for m in marks)
    print(f"  {label:>9} ({len(times):>3} pkts) {lane}")
