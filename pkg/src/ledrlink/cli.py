"""Command-line experiment harness.

Subcommands:
    run    one scenario -> CSV metrics row (and optional VCD)
    sweep  one parameter over a list of values -> CSV table
    trace  one scenario -> VCD waveform only

Scenarios wire a configured link (or the two-chip loopback) to a synthetic
event source. Config overrides use `--set key=value`; durations, rates,
currents, charges and voltages carry explicit units (670ps, 2.4ns, 10keps,
80nA, 0.54nC, 1.8V) and bare numbers are rejected for dimensioned keys. A
config file holds the same key=value pairs one per line; --set wins.
Relative output paths land in $LEDRLINK_OUT_DIR when it is set.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from . import power
from .kernel import Kernel
from .link import ConfigError, Link, LinkConfig, LinkStats, run_loopback
from .phy import PhyConfig
from .power import PowerParams
from .sources import BurstSource, PeriodicSource, PoissonSource, SaturatingSource
from .vcd import write_vcd

CSV_COLUMNS = (
    "scenario",
    "rate_eps",
    "throughput_eps",
    "first_latency_ns",
    "period_ns",
    "awake_ns_per_event",
    "i_tx_a",
    "i_rx_a",
    "violations",
)

_DURATION_UNITS = {"ps": 1, "ns": 1_000, "us": 1_000_000, "ms": 1_000_000_000, "s": 1_000_000_000_000}
_RATE_SCALES = {"": 1.0, "k": 1e3, "M": 1e6, "G": 1e9}
_CURRENT_UNITS = {"nA": 1e-9, "uA": 1e-6, "mA": 1e-3, "A": 1.0}
_CHARGE_UNITS = {"pC": 1e-12, "nC": 1e-9, "uC": 1e-6, "C": 1.0}


def _split_unit(text: str, key: str) -> tuple[float, str]:
    text = text.strip()
    i = len(text)
    while i > 0 and (text[i - 1].isalpha()):
        i -= 1
    num, unit = text[:i], text[i:]
    if not unit:
        raise ConfigError(
            f"{key}: {text!r} has no unit; dimensioned values require one (e.g. 670ps, 10keps)"
        )
    try:
        return float(num), unit
    except ValueError:
        raise ConfigError(f"{key}: cannot parse number in {text!r}") from None


def parse_duration_ps(text: str, key: str = "duration") -> int:
    value, unit = _split_unit(text, key)
    if unit not in _DURATION_UNITS:
        raise ConfigError(f"{key}: unknown duration unit {unit!r} in {text!r} (use ps/ns/us/ms/s)")
    return round(value * _DURATION_UNITS[unit])


def parse_rate_eps(text: str, key: str = "rate") -> float:
    value, unit = _split_unit(text, key)
    if not unit.endswith("eps") or unit[:-3] not in _RATE_SCALES:
        raise ConfigError(f"{key}: unknown rate unit {unit!r} in {text!r} (use eps/keps/Meps/Geps)")
    return value * _RATE_SCALES[unit[:-3]]


def parse_current_a(text: str, key: str) -> float:
    value, unit = _split_unit(text, key)
    if unit not in _CURRENT_UNITS:
        raise ConfigError(f"{key}: unknown current unit {unit!r} in {text!r} (use nA/uA/mA/A)")
    return value * _CURRENT_UNITS[unit]


def parse_charge_c(text: str, key: str) -> float:
    value, unit = _split_unit(text, key)
    if unit not in _CHARGE_UNITS:
        raise ConfigError(f"{key}: unknown charge unit {unit!r} in {text!r} (use pC/nC/uC/C)")
    return value * _CHARGE_UNITS[unit]


def parse_voltage_v(text: str, key: str) -> float:
    value, unit = _split_unit(text, key)
    if unit != "V":
        raise ConfigError(f"{key}: unknown voltage unit {unit!r} in {text!r} (use V)")
    return value


def parse_count(text: str, key: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{key}: expected a bare integer, got {text!r}") from None


# key -> (section, field, parser); sections: link, phy, power
SCHEMA: dict[str, tuple[str, str, Callable[[str, str], object]]] = {
    "width": ("link", "width", parse_count),
    "W": ("link", "width", parse_count),
    "t_d": ("link", "t_d", parse_duration_ps),
    "t_wk": ("link", "t_wk", parse_duration_ps),
    "queue_depth": ("link", "queue_depth", parse_count),
    "rx_cell_delay": ("link", "rx_cell_delay", parse_duration_ps),
    "ack_wire_delay": ("link", "ack_wire_delay", parse_duration_ps),
    "inter_event_gap": ("link", "inter_event_gap", parse_duration_ps),
    "wake_on": ("phy", "wake_on", parse_duration_ps),
    "wake_off": ("phy", "wake_off", parse_duration_ps),
    "n_lsb_repeat": ("phy", "n_lsb_repeat", parse_count),
    "wire_delay": ("phy", "wire_delay", parse_duration_ps),
    "wire_skew": ("phy", "wire_skew", parse_duration_ps),
    "i_leak_tx": ("power", "i_leak_tx", parse_current_a),
    "i_leak_rx": ("power", "i_leak_rx", parse_current_a),
    "q_event_tx": ("power", "q_event_tx", parse_charge_c),
    "q_event_rx": ("power", "q_event_rx", parse_charge_c),
    "vdd": ("power", "vdd", parse_voltage_v),
}

SOURCES = ("single", "periodic", "poisson", "burst")
SCENARIOS = ("single", "saturation", "idle", "loopback", "periodic", "poisson", "burst")


@dataclass
class ScenarioSpec:
    name: str
    overrides: dict[str, str] = field(default_factory=dict)
    source: str = "single"
    n_events: int = 1
    rate_eps: float = 0.0
    burst_size: int = 4
    burst_gap_ps: int = 100_000
    seed: int = 1
    csv_path: Optional[str] = None
    vcd_path: Optional[str] = None


@dataclass
class ResultRow:
    scenario: str
    rate_eps: float
    throughput_eps: float
    first_latency_ns: float
    period_ns: float
    awake_ns_per_event: float
    i_tx_a: float
    i_rx_a: float
    violations: int

    def as_csv(self) -> str:
        def fmt(x):
            return f"{x:.6g}" if isinstance(x, float) else str(x)

        return ",".join(fmt(getattr(self, c)) for c in CSV_COLUMNS)


def build_configs(overrides: dict[str, str]) -> tuple[LinkConfig, PowerParams]:
    sections: dict[str, dict[str, object]] = {"link": {}, "phy": {}, "power": {}}
    for key, raw in overrides.items():
        if key not in SCHEMA:
            raise ConfigError(f"unknown config key {key!r} (known: {', '.join(sorted(SCHEMA))})")
        section, fname, parser = SCHEMA[key]
        sections[section][fname] = parser(raw, key)
    phy = PhyConfig(**sections["phy"])
    link = LinkConfig(phy=phy, **sections["link"])
    params = PowerParams(**sections["power"])
    return link, params


def load_config_file(path: str) -> dict[str, str]:
    overrides: dict[str, str] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            overrides[key.strip()] = value.strip()
    return overrides


def _trace_entries(link: Link):
    return [
        ("D.f", link.phy.data.f),
        ("D.t", link.phy.data.t),
        ("P.f", link.phy.parity.f),
        ("P.t", link.phy.parity.t),
        ("D_CM", link.phy.data.cm),
        ("P_CM", link.phy.parity.cm),
        ("TX.r", link.tx_ring.txr),
        ("Enc.a", link.tx_ring.enc_a),
        ("out.a", link.out_a),
    ]


def run_scenario(spec: ScenarioSpec) -> tuple[ResultRow, LinkStats]:
    cfg, params = build_configs(spec.overrides)
    if spec.name == "loopback":
        if spec.vcd_path is not None:
            raise ConfigError("the loopback scenario has no single-link VCD export")
        stats, sent, got = run_loopback(lambda w: w, spec.n_events, cfg)
        if got != sent:
            stats.protocol_violations += 1  # data integrity breach counts
        return _make_row(spec, cfg, params, stats), stats

    kernel = Kernel()
    trace = spec.vcd_path is not None
    link = Link(kernel, cfg, consumer=None, trace=trace)
    source = _make_source(spec, kernel, link)
    if source is not None:
        source.start()
    kernel.run_to_quiescence()
    stats = link.snapshot_stats()
    if source is not None and [w.value for w in link.received] != source.sent_words:
        stats.protocol_violations += 1  # data integrity breach counts
    if spec.vcd_path is not None:
        path = resolve_out_path(spec.vcd_path)
        with open(path, "w") as fh:
            write_vcd(fh, _trace_entries(link))
    return _make_row(spec, cfg, params, stats), stats


def _make_source(spec: ScenarioSpec, kernel: Kernel, link: Link):
    if spec.name == "idle":
        return None
    if spec.name == "single":
        return SaturatingSource(kernel, link, 1, spec.seed)
    if spec.name == "saturation":
        return SaturatingSource(kernel, link, spec.n_events, spec.seed)
    if spec.name == "periodic":
        return PeriodicSource(kernel, link, spec.n_events, spec.rate_eps, spec.seed)
    if spec.name == "poisson":
        return PoissonSource(kernel, link, spec.n_events, spec.rate_eps, spec.seed)
    if spec.name == "burst":
        return BurstSource(kernel, link, spec.n_events, spec.burst_size, spec.burst_gap_ps, spec.seed)
    raise ConfigError(f"unknown scenario {spec.name!r} (known: {', '.join(SCENARIOS)})")


def _make_row(spec: ScenarioSpec, cfg: LinkConfig, params: PowerParams, stats: LinkStats) -> ResultRow:
    throughput = min(stats.throughput_eps, cfg.peak_rate_eps)
    sent = max(stats.events_sent, 1)
    return ResultRow(
        scenario=spec.name,
        rate_eps=spec.rate_eps,
        throughput_eps=throughput,
        first_latency_ns=stats.first_word_latency / 1000.0,
        period_ns=stats.steady_period_ps / 1000.0,
        awake_ns_per_event=stats.awake_time_total / sent / 1000.0,
        i_tx_a=power.current_at_rate(throughput, power.TX, params, cfg.peak_rate_eps),
        i_rx_a=power.current_at_rate(throughput, power.RX, params, cfg.peak_rate_eps),
        violations=stats.protocol_violations,
    )


def resolve_out_path(path: str) -> str:
    base = os.environ.get("LEDRLINK_OUT_DIR")
    if base and not os.path.isabs(path):
        return os.path.join(base, path)
    return path


def _emit_csv(rows: Sequence[ResultRow], csv_path: Optional[str]) -> None:
    lines = [",".join(CSV_COLUMNS)] + [r.as_csv() for r in rows]
    text = "\n".join(lines) + "\n"
    if csv_path:
        with open(resolve_out_path(csv_path), "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", required=True, help=f"one of: {', '.join(SCENARIOS)}")
    p.add_argument("--events", type=int, default=1000, help="number of events to run")
    p.add_argument("--rate", default=None, help="source rate for periodic/poisson (e.g. 10keps)")
    p.add_argument("--burst-size", type=int, default=4)
    p.add_argument("--burst-gap", default="100ns", help="gap between bursts (duration)")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", dest="sets")
    p.add_argument("--config", default=None, help="key=value config file")
    p.add_argument("--csv", default=None, help="write the CSV here instead of stdout")


def _spec_from_args(args: argparse.Namespace) -> ScenarioSpec:
    if args.scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {args.scenario!r} (known: {', '.join(SCENARIOS)})")
    overrides: dict[str, str] = {}
    if args.config:
        overrides.update(load_config_file(args.config))
    for item in args.sets:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    rate = parse_rate_eps(args.rate, "--rate") if args.rate else 0.0
    if args.scenario in ("periodic", "poisson") and rate <= 0:
        raise ConfigError(f"scenario {args.scenario!r} needs --rate")
    n_events = 1 if args.scenario == "single" else (0 if args.scenario == "idle" else args.events)
    return ScenarioSpec(
        name=args.scenario,
        overrides=overrides,
        n_events=n_events,
        rate_eps=rate,
        burst_size=args.burst_size,
        burst_gap_ps=parse_duration_ps(args.burst_gap, "--burst-gap"),
        seed=args.seed,
        csv_path=args.csv,
        vcd_path=getattr(args, "vcd", None),
    )


def cmd_run(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args)
    row, _stats = run_scenario(spec)
    _emit_csv([row], spec.csv_path)
    return 0 if row.violations == 0 else 1


def cmd_sweep(args: argparse.Namespace) -> int:
    if args.parameter != "rate" and args.parameter not in SCHEMA:
        raise ConfigError(
            f"unknown sweep parameter {args.parameter!r} (config keys or 'rate')"
        )
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if not values:
        raise ConfigError("--values is empty")
    rows = []
    worst = 0
    for value in values:
        if args.parameter == "rate":
            if args.scenario not in ("periodic", "poisson"):
                args.scenario = "periodic"
            args.rate = value
            spec = _spec_from_args(args)
        else:
            spec = _spec_from_args(args)
            spec.overrides[args.parameter] = value
        spec.csv_path = args.csv
        row, _stats = run_scenario(spec)
        rows.append(row)
        worst = max(worst, row.violations)
    _emit_csv(rows, args.csv)
    return 0 if worst == 0 else 1


def cmd_trace(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args)
    row, _stats = run_scenario(spec)
    return 0 if row.violations == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ledrlink", description="bit-serial asynchronous link simulator"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario, emit a CSV row")
    _add_common(p_run)
    p_run.add_argument("--vcd", default=None, help="also dump a VCD trace here")
    p_run.set_defaults(fn=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run one scenario across parameter values")
    _add_common(p_sweep)
    p_sweep.add_argument("--parameter", required=True)
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    p_sweep.set_defaults(fn=cmd_sweep)

    p_trace = sub.add_parser("trace", help="run one scenario, dump only the VCD")
    _add_common(p_trace)
    p_trace.add_argument("--vcd", required=True)
    p_trace.set_defaults(fn=cmd_trace)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
