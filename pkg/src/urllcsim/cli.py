"""Scenario files, validation, and the command-line front end.

A scenario is a flat INI file with [deployment], [frame], [rrm], [run]
sections plus one [population:<name>] section per traffic population.
``validate`` resolves the text into a Scenario or reports every violation
at once; ``run_scenario``/``compare`` orchestrate the engine and write the
trace/metrics/CDF/dimensioning files plus a summary.json for plotting.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

from . import engine, radio, rrc, rrm
from .engine import FrameConfig, SCHEMES
from .traffic import (NoMatchingClass, TrafficClass, UnknownPreset,
                      from_class_id, preset)

_KNOWN_SECTIONS = ("deployment", "frame", "rrm", "run")
_POP_PREFIX = "population:"

_DEPLOY_KEYS = {"bs_count", "area_m", "antennas", "max_power", "rho_target",
                "carrier_bandwidth_hz", "bs_height_m", "ue_height_m"}
_FRAME_KEYS = {"t_min_s", "cp_overhead", "auto_numerology"}
_RRM_KEYS = {"preamble_pool_size", "users_per_subchannel", "w_grid_mhz",
             "eps_split"}
_RUN_KEYS = {"horizon_s", "seed", "replications"}
_POP_KEYS = {"class_id", "preset", "variant", "mode", "dofs", "pick",
             "rate_pps", "count", "scheme", "delay_spread_s",
             "coherence_time_s"}


class ParseError(ValueError):
    """Config text is not parseable at all (syntax, duplicates)."""

    def __init__(self, message: str, line: int = 0, column: int = 1):
        super().__init__(message)
        self.line = line
        self.column = column


class ValidationError(ValueError):
    """Carries every violation found in one pass, not just the first."""

    def __init__(self, violations: Sequence[str]):
        self.violations = tuple(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class Population:
    name: str
    cls: TrafficClass
    count: int
    scheme: str
    delay_spread_s: float = 1e-7
    coherence_time_s: float = 10e-3


@dataclass(frozen=True)
class Scenario:
    bs_count: int
    area_m: float
    antennas: int
    max_power: float
    rho_target: float
    carrier_bandwidth_hz: float
    preamble_pool_size: int
    users_per_subchannel: int
    w_grid_hz: Tuple[float, ...]
    eps_split: Tuple[float, float, float]
    frame: FrameConfig
    populations: Tuple[Population, ...]
    horizon_s: float
    seed: int
    replications: int = 1
    bs_height_m: float = 20.0
    ue_height_m: float = 1.5


def validate_scenario(scenario: Scenario) -> None:
    """Semantic invariants; raises ValidationError listing all violations."""
    v: list = []
    if scenario.bs_count < 1:
        v.append("deployment.bs_count must be >= 1")
    if scenario.area_m <= 0:
        v.append("deployment.area_m must be > 0")
    if scenario.antennas < 1:
        v.append("deployment.antennas must be >= 1")
    if scenario.max_power <= 0:
        v.append("deployment.max_power must be > 0")
    if scenario.rho_target <= 0:
        v.append("deployment.rho_target must be > 0")
    if scenario.carrier_bandwidth_hz < 0:
        v.append("deployment.carrier_bandwidth_hz must be >= 0")
    if scenario.preamble_pool_size < 1:
        v.append("rrm.preamble_pool_size must be >= 1")
    if scenario.users_per_subchannel < 1:
        v.append("rrm.users_per_subchannel must be >= 1")
    try:
        rrm._check_grid(scenario.w_grid_hz)
    except ValueError as e:
        v.append(f"rrm.w_grid_mhz: {e}")
    try:
        rrm._check_split(scenario.eps_split)
    except ValueError as e:
        v.append(f"rrm.eps_split: {e}")
    if scenario.horizon_s <= 0:
        v.append("run.horizon_s must be > 0")
    if scenario.replications < 1:
        v.append("run.replications must be >= 1")
    if not scenario.populations:
        v.append("at least one [population:<name>] section is required")
    for p in scenario.populations:
        if p.count < 0:
            v.append(f"population:{p.name}: count must be >= 0")
        if p.scheme not in SCHEMES:
            v.append(f"population:{p.name}: unknown scheme {p.scheme!r} "
                     f"(expected one of {', '.join(SCHEMES)})")
        if p.delay_spread_s <= 0 or p.coherence_time_s <= 0:
            v.append(f"population:{p.name}: delay_spread_s and "
                     "coherence_time_s must be > 0")
    if scenario.populations:
        max_lat = max(p.cls.air_latency_s for p in scenario.populations)
        if scenario.horizon_s <= 10 * max_lat:
            v.append(f"run.horizon_s must exceed 10x the largest latency "
                     f"budget ({10 * max_lat:.6g} s)")
    if v:
        raise ValidationError(v)


def _line_of(err: configparser.Error) -> int:
    errors = getattr(err, "errors", None)
    if isinstance(err, configparser.ParsingError) and errors:
        return int(errors[0][0])
    return int(getattr(err, "lineno", 0) or 0)


class _Reader:
    """Typed key extraction that collects violations instead of raising."""

    def __init__(self, cp: configparser.ConfigParser, violations: list):
        self.cp = cp
        self.violations = violations

    def get(self, section: str, key: str, conv: Callable, default=None,
            required: bool = False):
        if not self.cp.has_option(section, key):
            if required:
                self.violations.append(f"{section}.{key} is required")
            return default
        raw = self.cp.get(section, key)
        try:
            return conv(raw)
        except (ValueError, TypeError):
            self.violations.append(f"{section}.{key}: cannot read {raw!r}")
            return default


def _to_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(raw)


def _to_floats(raw: str) -> Tuple[float, ...]:
    parts = [p for p in raw.replace(",", " ").split() if p]
    return tuple(float(p) for p in parts)


def validate(text: str) -> Scenario:
    """Resolve raw config text into a Scenario.

    Raises ParseError for unreadable text and ValidationError carrying the
    full list of violations otherwise.
    """
    cp = configparser.ConfigParser(interpolation=None, strict=True,
                                   inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise ParseError(str(e), line=_line_of(e), column=1) from e

    violations: list = []
    for section in cp.sections():
        if section in _KNOWN_SECTIONS:
            continue
        if section.startswith(_POP_PREFIX) and len(section) > len(_POP_PREFIX):
            continue
        violations.append(f"unknown section [{section}]")
    known_keys = {"deployment": _DEPLOY_KEYS, "frame": _FRAME_KEYS,
                  "rrm": _RRM_KEYS, "run": _RUN_KEYS}
    for section in cp.sections():
        allowed = known_keys.get(
            section, _POP_KEYS if section.startswith(_POP_PREFIX) else None)
        if allowed is None:
            continue
        for key in cp.options(section):
            if key not in allowed:
                violations.append(f"{section}.{key}: unknown key")

    r = _Reader(cp, violations)
    bs_count = r.get("deployment", "bs_count", int, default=1, required=True)
    area_m = r.get("deployment", "area_m", float, default=1000.0, required=True)
    antennas = r.get("deployment", "antennas", int, default=64, required=True)
    max_power = r.get("deployment", "max_power", float, default=1e15)
    rho_target = r.get("deployment", "rho_target", float, default=1.0)
    carrier = r.get("deployment", "carrier_bandwidth_hz", float, default=0.0)
    bs_h = r.get("deployment", "bs_height_m", float, default=20.0)
    ue_h = r.get("deployment", "ue_height_m", float, default=1.5)

    t_min = r.get("frame", "t_min_s", float, default=2e-4)
    cp_ov = r.get("frame", "cp_overhead", float, default=0.25)
    auto = r.get("frame", "auto_numerology", _to_bool, default=False)
    if t_min is not None and t_min <= 0:
        violations.append("frame.t_min_s must be > 0")
        t_min = 2e-4
    if cp_ov is not None and not 0.0 <= cp_ov < 1.0:
        violations.append("frame.cp_overhead must lie in [0, 1)")
        cp_ov = 0.25

    pool = r.get("rrm", "preamble_pool_size", int, default=4096)
    k_max = r.get("rrm", "users_per_subchannel", int, default=10)
    grid_mhz = r.get("rrm", "w_grid_mhz", _to_floats, default=None)
    grid_hz = tuple(w * 1e6 for w in grid_mhz) if grid_mhz else \
        rrm.DEFAULT_W_GRID_HZ
    split = r.get("rrm", "eps_split", _to_floats,
                  default=(1 / 3, 1 / 3, 1 / 3))
    if split is not None and len(split) != 3:
        violations.append("rrm.eps_split needs exactly 3 fractions")
        split = (1 / 3, 1 / 3, 1 / 3)

    horizon = r.get("run", "horizon_s", float, default=1.0, required=True)
    seed = r.get("run", "seed", int, default=0, required=True)
    reps = r.get("run", "replications", int, default=1)

    pops: list = []
    for section in cp.sections():
        if not section.startswith(_POP_PREFIX):
            continue
        name = section[len(_POP_PREFIX):]
        count = r.get(section, "count", int, default=0, required=True)
        scheme = r.get(section, "scheme", str, default=engine.SCHEME_GFMA,
                       required=True)
        rate = r.get(section, "rate_pps", float, default=None)
        ds = r.get(section, "delay_spread_s", float, default=1e-7)
        coh = r.get(section, "coherence_time_s", float, default=10e-3)

        has_class = cp.has_option(section, "class_id")
        has_preset = cp.has_option(section, "preset")
        cls: Optional[TrafficClass] = None
        if has_class == has_preset:
            violations.append(
                f"{section}: exactly one of class_id or preset is required")
        elif has_class:
            cid = r.get(section, "class_id", int, default=None)
            if cid is not None:
                try:
                    cls = from_class_id(cid, rate_pps=rate)
                except (NoMatchingClass, KeyError, ValueError):
                    violations.append(
                        f"{section}.class_id: {cid} is not a known class "
                        "(expected 1..8)")
        else:
            spec_str = r.get(section, "preset", str, default="")
            use_case, _, kind = (spec_str or "").partition("/")
            try:
                cls = preset(use_case.strip(), kind.strip(),
                             variant=r.get(section, "variant", str),
                             mode=r.get(section, "mode", str),
                             dofs=r.get(section, "dofs", int),
                             pick=r.get(section, "pick", str, default="mid"))
                if rate is not None:
                    import dataclasses as _dc
                    cls = _dc.replace(cls, rate_pps=rate)
            except (UnknownPreset, NoMatchingClass, KeyError,
                    ValueError) as e:
                violations.append(f"{section}.preset: {e}")
        if cls is None:
            # placeholder keeps later checks running; never returned
            cls = from_class_id(7)
        pops.append(Population(name=name, cls=cls, count=count or 0,
                               scheme=scheme or engine.SCHEME_GFMA,
                               delay_spread_s=ds, coherence_time_s=coh))

    scenario = Scenario(
        bs_count=bs_count or 1, area_m=area_m or 1000.0,
        antennas=antennas or 64, max_power=max_power or 1e15,
        rho_target=rho_target if rho_target and rho_target > 0 else 1.0,
        carrier_bandwidth_hz=carrier if carrier is not None else 0.0,
        preamble_pool_size=pool or 4096, users_per_subchannel=k_max or 10,
        w_grid_hz=grid_hz, eps_split=tuple(split),
        frame=FrameConfig(t_min_s=t_min, cp_overhead=cp_ov,
                          auto_numerology=bool(auto)),
        populations=tuple(pops), horizon_s=horizon or 1.0, seed=seed or 0,
        replications=reps or 1, bs_height_m=bs_h, ue_height_m=ue_h)

    try:
        validate_scenario(scenario)
    except ValidationError as e:
        violations.extend(e.violations)
    if violations:
        raise ValidationError(violations)
    return scenario


def load_scenario(path) -> Scenario:
    with open(path, "r") as f:
        return validate(f.read())


def bundled_config_path(name: str) -> str:
    return os.path.join(os.path.dirname(__file__), "data", name)


# --- orchestration ------------------------------------------------------------

def _rep_seed(base: int, rep: int) -> int:
    return base + 1000003 * rep


def _merge(metrics_list: Sequence[engine.RunMetrics]) -> engine.RunMetrics:
    """Pool replications: packet arrays concatenate, bandwidth averages."""
    import dataclasses as _dc
    import numpy as np
    if len(metrics_list) == 1:
        return metrics_list[0]
    first = metrics_list[0]
    reps = len(metrics_list)
    arrays = {}
    offset = 0
    pid_parts = []
    for m in metrics_list:
        pid_parts.append(m.packet_id + offset)
        offset += m.n_packets
    for field in ("user_id", "pop_index", "arrival_s", "align_s", "predata_s",
                  "tx_s", "prop_s", "decode_s", "latency_s", "outcome"):
        arrays[field] = np.concatenate([getattr(m, field)
                                        for m in metrics_list])
    reports = []
    for m in metrics_list:
        for rep_row in m.subchannels:
            reports.append(_dc.replace(
                rep_row, subchannel_id=len(reports),
                avg_bandwidth_hz=rep_row.avg_bandwidth_hz / reps))
    return _dc.replace(
        first, horizon_s=first.horizon_s * reps,
        packet_id=np.concatenate(pid_parts), subchannels=tuple(reports),
        rrc_final={}, **arrays)


def _run_replications(scenario: Scenario, scheme: Optional[str], seed: int,
                      reps: int) -> Tuple[list, engine.RunMetrics]:
    per_rep = [engine.run(scenario, seed=_rep_seed(seed, k),
                          scheme_override=scheme) for k in range(reps)]
    return per_rep, _merge(per_rep)


def _waveform_block(scenario: Scenario) -> dict:
    entries = []
    gains = []
    weights = []
    for p in scenario.populations:
        try:
            num = radio.select_numerology(p.delay_spread_s, p.coherence_time_s,
                                          p.cls.air_latency_s)
            gain = radio.overhead_gain(num)
            entries.append({"name": p.name, "count": p.count,
                            "cp_overhead": num.cp_overhead, "gain": gain})
            gains.append(num)
            weights.append(p.count)
        except radio.NoFeasibleNumerology:
            entries.append({"name": p.name, "count": p.count,
                            "cp_overhead": None, "gain": None})
    mixed = None
    if gains and len(gains) == len(scenario.populations) and sum(weights) > 0:
        mixed = radio.mixed_overhead_gain(gains, weights)
    return {"baseline_cp_overhead": 0.25, "populations": entries,
            "mixed_gain": mixed}


def _trace_name(prefix: str, scheme: Optional[str], rep: Optional[int]) -> str:
    parts = [prefix]
    if scheme is not None:
        parts.append(scheme)
    if rep is not None:
        parts.append(f"rep{rep}")
    return "_".join(parts) + ".csv"


def _write_outputs(out_dir: str, scheme_tag: Optional[str], per_rep: list,
                   merged: engine.RunMetrics, summary: engine.Summary) -> list:
    written = []
    many = len(per_rep) > 1
    for k, m in enumerate(per_rep):
        rep = k if many else None
        path = os.path.join(out_dir, _trace_name("trace", scheme_tag, rep))
        engine.write_trace(m, path)
        written.append(path)
        path = os.path.join(out_dir,
                            _trace_name("dimensioning", scheme_tag, rep))
        engine.write_dimensioning(m, path)
        written.append(path)
    path = os.path.join(out_dir, _trace_name("cdf", scheme_tag, None))
    engine.write_cdf(summary, path)
    written.append(path)
    return written


def run_scenario(scenario: Scenario, seed: Optional[int] = None,
                 out_dir: str = ".",
                 replications: Optional[int] = None) -> dict:
    """Single run (native per-population schemes); writes all output files."""
    seed = scenario.seed if seed is None else int(seed)
    reps = scenario.replications if replications is None else int(replications)
    os.makedirs(out_dir, exist_ok=True)
    per_rep, merged = _run_replications(scenario, None, seed, reps)
    summary = engine.summarize(merged)
    written = _write_outputs(out_dir, None, per_rep, merged, summary)
    mpath = os.path.join(out_dir, "metrics.csv")
    engine.write_metrics(summary.rows, mpath)
    written.append(mpath)
    doc = _summary_doc(scenario, seed, reps,
                       {merged.scheme_label: (summary, "cdf.csv",
                                              merged.n_packets)})
    jpath = os.path.join(out_dir, "summary.json")
    _write_json(doc, jpath)
    written.append(jpath)
    return {"summary": doc, "files": written}


def compare(scenario: Scenario, protocols: Sequence[str],
            seed: Optional[int] = None, out_dir: str = ".",
            replications: Optional[int] = None) -> dict:
    """Run each protocol on common random numbers; one CDF series each."""
    protocols = list(protocols)
    if not protocols:
        raise ValidationError(["compare needs at least one protocol"])
    bad = [p for p in protocols if p not in SCHEMES]
    if bad:
        raise ValidationError(
            [f"unknown protocol {p!r} (expected {', '.join(SCHEMES)})"
             for p in bad])
    seed = scenario.seed if seed is None else int(seed)
    reps = scenario.replications if replications is None else int(replications)
    os.makedirs(out_dir, exist_ok=True)

    written = []
    rows = []
    blocks = {}
    for proto in protocols:
        per_rep, merged = _run_replications(scenario, proto, seed, reps)
        summary = engine.summarize(merged)
        written += _write_outputs(out_dir, proto, per_rep, merged, summary)
        rows.extend(summary.rows)
        blocks[proto] = (summary, _trace_name("cdf", proto, None),
                         merged.n_packets)
    mpath = os.path.join(out_dir, "metrics.csv")
    engine.write_metrics(rows, mpath)
    written.append(mpath)
    doc = _summary_doc(scenario, seed, reps, blocks)
    jpath = os.path.join(out_dir, "summary.json")
    _write_json(doc, jpath)
    written.append(jpath)
    return {"summary": doc, "files": written}


def _summary_doc(scenario: Scenario, seed: int, reps: int,
                 blocks: dict) -> dict:
    schemes = {}
    for tag, (summary, cdf_file, n_packets) in blocks.items():
        p99 = summary.p99_s
        schemes[tag] = {
            "se_bits_per_hz": summary.se_bits_per_hz,
            "goodput_bps": summary.goodput_bps,
            "avg_bandwidth_hz": summary.avg_bandwidth_hz,
            "reliability": summary.reliability,
            "p99_ms": None if math.isnan(p99) else 1e3 * p99,
            "packets": n_packets,
            "cdf_file": cdf_file,
        }
    deadline = min(p.cls.air_latency_s for p in scenario.populations) \
        if scenario.populations else None
    return {
        "deadline_ms": None if deadline is None else 1e3 * deadline,
        "horizon_s": scenario.horizon_s,
        "seed": seed,
        "replications": reps,
        "schemes": schemes,
        "waveform_gain": _waveform_block(scenario),
    }


def _write_json(doc: dict, path: str) -> None:
    with open(path, "w", newline="\n") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


# --- argument parsing ----------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="urllcsim",
        description="Uplink latency/reliability simulation for short-packet "
                    "traffic over massive-MIMO cells.")
    sub = p.add_subparsers(dest="command", required=True)

    pr = sub.add_parser("run", help="simulate one scenario file")
    pr.add_argument("config", help="scenario .cfg path")
    pr.add_argument("--seed", type=int, default=None)
    pr.add_argument("--out", default=".", help="output directory")
    pr.add_argument("--replications", type=int, default=None)

    pc = sub.add_parser("compare",
                        help="run several access schemes on common arrivals")
    pc.add_argument("config", help="scenario .cfg path")
    pc.add_argument("--protocols", required=True,
                    help="comma-separated scheme names, e.g. GFMA,FGMA,FourWay")
    pc.add_argument("--seed", type=int, default=None)
    pc.add_argument("--out", default=".", help="output directory")
    pc.add_argument("--replications", type=int, default=None)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        scenario = load_scenario(args.config)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except ParseError as e:
        print(f"error: parse error at line {e.line}, column {e.column}: {e}",
              file=sys.stderr)
        return 2
    except ValidationError as e:
        for violation in e.violations:
            print(f"error: {violation}", file=sys.stderr)
        return 2

    try:
        if args.command == "run":
            result = run_scenario(scenario, seed=args.seed, out_dir=args.out,
                                  replications=args.replications)
        else:
            protocols = [s.strip() for s in args.protocols.split(",")
                         if s.strip()]
            result = compare(scenario, protocols, seed=args.seed,
                             out_dir=args.out,
                             replications=args.replications)
    except ValidationError as e:
        for violation in e.violations:
            print(f"error: {violation}", file=sys.stderr)
        return 2
    except (rrm.Infeasible, rrc.PoolExhausted, radio.NoFeasibleNumerology,
            ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    for tag, block in sorted(result["summary"]["schemes"].items()):
        p99 = block["p99_ms"]
        p99_txt = "n/a" if p99 is None else f"{p99:.3f} ms"
        print(f"{tag}: reliability={block['reliability']:.6f} "
              f"p99={p99_txt} se={block['se_bits_per_hz']:.4f} bit/s/Hz")
    for path in result["files"]:
        print(f"wrote {path}")
    return 0


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
