"""Uplink radio-access simulator for low-latency, high-reliability traffic.

Submodules:
    traffic  - traffic classes, QoS presets, arrival generation
    radio    - pathloss, hardened SINR, finite-blocklength errors, numerology
    rrc      - connection state machine, preamble registry, protocol timelines
    rrm      - power control, grouping, subchannel dimensioning
    engine   - deterministic per-packet simulation and metrics
    cli      - scenario files, protocol comparison runs, output writers
"""

__version__ = "0.1.0"

__all__ = ["traffic", "radio", "rrc", "rrm", "engine", "cli"]
