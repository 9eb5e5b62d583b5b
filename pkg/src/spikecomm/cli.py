"""Command-line front end: ``spikecomm {gen-graph,simulate,decode,calibrate}``.

All times are milliseconds. Every command writes ``run_config.json`` with
the fully resolved configuration next to its outputs. A JSON file passed
with ``--config`` supplies defaults that individual flags override.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from spikecomm import calibration, decode
from spikecomm.errors import NumericFault, ParameterError, ParseError
from spikecomm.graph import (
    LabeledGraph,
    PartitionSpec,
    degree_stats,
    generate_planted_partition,
    graph_to_json,
    load_edge_list,
    save_edge_list,
)
from spikecomm.network import NeuronParams, SynapseConfig, map_graph_to_network
from spikecomm.simulator import SimulationConfig, SpikeData, simulate_with_traces, traces_to_csv
from spikecomm.stimulus import (
    BETA,
    PULSE_GAP,
    PULSE_WIDTH,
    T_START,
    community_ordered_schedule,
    random_permutation_schedule,
    schedule_from_csv,
    schedule_to_csv,
)

log = logging.getLogger("spikecomm")

GRAPH_SEED_OFFSET = 0
SCHEDULE_SEED_OFFSET = 1


@dataclass
class GraphConfig:
    n: int = 128
    num_communities: int = 4
    z_out: float = 2.0
    avg_degree: float = 16.0
    path: str | None = None


@dataclass
class ScheduleConfig:
    kind: str = "community-ordered"
    drive: list = field(default_factory=lambda: [0, 1, 3])
    t_start: float = T_START
    pulse_width: float = PULSE_WIDTH
    gap: float = PULSE_GAP
    a_max: float | None = None  # None: calibrated for a 21 ms active ISI
    beta: float = BETA


@dataclass
class SimConfig:
    dt: float = 0.1
    duration: float | None = None
    record: list = field(default_factory=list)
    potential_floor: float | None = None


@dataclass
class DecodeConfig:
    metric: str = "weighted"
    bin_width: float = 8000.0
    f0: float | None = None  # None: heuristic lower bound from calibration
    windows: str = "auto"
    sweep: list = field(default_factory=list)
    sources: list | None = None


@dataclass
class RunConfig:
    graph: GraphConfig = field(default_factory=GraphConfig)
    neuron: NeuronParams = field(default_factory=NeuronParams)
    synapse: SynapseConfig = field(default_factory=SynapseConfig)
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    simulation: SimConfig = field(default_factory=SimConfig)
    decode: DecodeConfig = field(default_factory=DecodeConfig)
    out_dir: str = "out"
    seed: int = 0

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        cfg = cls()
        names = {f.name for f in fields(cls)}
        for key, value in doc.items():
            if key not in names:
                raise ParameterError(f"unknown config key {key!r}")
            if isinstance(value, dict):
                try:
                    value = replace(getattr(cfg, key), **value)
                except TypeError as exc:
                    raise ParameterError(f"config section {key!r}: {exc}") from None
            cfg = replace(cfg, **{key: value})
        return cfg

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _override(section, **values):
    return replace(section, **{k: v for k, v in values.items() if v is not None})


def _load_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        try:
            cfg = RunConfig.from_dict(json.loads(Path(args.config).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseError(f"cannot read config {args.config}: {exc}") from exc
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out_dir = args.out
    return cfg


def _neuron_overrides(cfg: RunConfig, args) -> RunConfig:
    cfg.neuron = _override(cfg.neuron, tau=args.tau, v_th=args.v_th, v_reset=args.v_reset, t_refract=args.t_refract)
    if args.w is not None:
        cfg.synapse = SynapseConfig.symmetric(args.w)
    return cfg


def _write(out: Path, name: str, text: str) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text)


def _read_graph(path: Path) -> LabeledGraph:
    try:
        return load_edge_list((path / "edges.csv").read_text(), (path / "labels.csv").read_text())
    except OSError as exc:
        raise ParseError(f"cannot read graph files in {path}: {exc}") from exc


def cmd_gen_graph(args) -> int:
    cfg = _load_config(args)
    cfg.graph = _override(cfg.graph, n=args.n, num_communities=args.communities, avg_degree=args.avg_degree, z_out=args.z_out)
    spec = PartitionSpec(cfg.graph.n, cfg.graph.num_communities, cfg.graph.z_out, cfg.graph.avg_degree, cfg.seed + GRAPH_SEED_OFFSET)
    g = generate_planted_partition(spec)
    out = Path(cfg.out_dir)
    edge_text, label_text = save_edge_list(g)
    _write(out, "edges.csv", edge_text)
    _write(out, "labels.csv", label_text)
    _write(out, "graph.json", graph_to_json(g) + "\n")
    _write(out, "run_config.json", cfg.to_json())
    stats = degree_stats(g)
    print(f"n={g.n} edges={len(g.edges)} communities={g.num_communities} mean_degree={stats.mean_degree:.3f}")
    return 0


def cmd_simulate(args) -> int:
    cfg = _neuron_overrides(_load_config(args), args)
    if args.graph is not None:
        cfg.graph.path = args.graph
    if cfg.graph.path is None:
        raise ParameterError("simulate needs --graph DIR (edges.csv + labels.csv)")
    cfg.schedule = _override(
        cfg.schedule, kind=args.schedule, t_start=args.t_start, pulse_width=args.pulse_width,
        gap=args.gap, a_max=args.a_max, beta=args.beta,
        drive=_ints(args.drive) if args.drive is not None else None,
    )  # fmt: skip
    cfg.simulation = _override(
        cfg.simulation, dt=args.dt, duration=args.duration, potential_floor=args.floor,
        record=_ints(args.record) if args.record is not None else None,
    )  # fmt: skip
    sc = cfg.schedule
    if sc.a_max is None:
        sc.a_max = calibration.amax_for_target_isi(cfg.neuron, 21.0)

    g = _read_graph(Path(cfg.graph.path))
    net = map_graph_to_network(g, cfg.neuron, cfg.synapse)
    common = dict(t_start=sc.t_start, t_A=sc.pulse_width, gap=sc.gap, a_max=sc.a_max, beta=sc.beta)
    if sc.kind == "community-ordered":
        schedule = community_ordered_schedule(g, sc.drive, **common)
    elif sc.kind == "random":
        schedule = random_permutation_schedule(g, seed=cfg.seed + SCHEDULE_SEED_OFFSET, **common)
    else:
        raise ParameterError(f"unknown schedule kind {sc.kind!r}")
    sim = cfg.simulation
    if sim.duration is None:
        sim.duration = schedule.total_duration
    spikes, traces = simulate_with_traces(
        net, schedule, SimulationConfig(sim.dt, sim.duration, bool(sim.record), sim.potential_floor), sim.record
    )
    out = Path(cfg.out_dir)
    _write(out, "spikes.csv", spikes.to_csv())
    _write(out, "schedule.csv", schedule_to_csv(schedule))
    _write(out, "labels.csv", save_edge_list(g)[1])
    if traces:
        _write(out, "membrane.csv", traces_to_csv(traces))
    _write(out, "run_config.json", cfg.to_json())
    print(f"n={g.n} pulses={len(schedule.pulses)} duration_ms={sim.duration} spikes={spikes.total_spikes}")
    return 0


def _parse_windows(text: str) -> list[tuple[float, float]]:
    wins = []
    for part in text.split(","):
        a, b = part.split(":")
        wins.append((float(a), float(b)))
    return wins


def cmd_decode(args) -> int:
    run = Path(args.run)
    try:
        cfg = RunConfig.from_dict(json.loads((run / "run_config.json").read_text()))
        label_text = (run / "labels.csv").read_text()
        spike_text = (run / "spikes.csv").read_text()
        schedule_text = (run / "schedule.csv").read_text()
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read simulation outputs in {run}: {exc}") from exc
    if args.config:
        cfg.decode = RunConfig.from_dict(json.loads(Path(args.config).read_text())).decode
    cfg.decode = _override(
        cfg.decode, metric=args.metric, bin_width=args.bin_dt, f0=args.f0, windows=args.windows,
        sweep=_floats(args.sweep) if args.sweep is not None else None,
        sources=_ints(args.sources) if args.sources is not None else None,
    )  # fmt: skip
    if args.out is not None:
        cfg.out_dir = args.out
    dc = cfg.decode
    g = load_edge_list("", label_text)
    spikes = SpikeData.from_csv(spike_text, g.n, cfg.simulation.duration)
    out = Path(cfg.out_dir)

    matrix = decode.comparison_matrix(decode.binarize(spikes, dc.bin_width), dc.metric)
    _write(out, f"matrix_{dc.metric}_{dc.bin_width:g}ms.csv", matrix.to_csv())
    if args.bipolar:
        if dc.f0 is None:
            order = g.n // max(g.num_communities, 1)
            dc.f0 = calibration.calibrate(
                cfg.neuron, cfg.synapse, cfg.schedule.a_max, cfg.schedule.pulse_width, order, cfg.graph.avg_degree
            ).f_min
        if dc.windows == "auto":
            windows = decode.epoch_windows(schedule_from_csv(schedule_text, gap=cfg.schedule.gap), g.labels)
        else:
            windows = _parse_windows(dc.windows)
        table = decode.bipolar_decode(decode.window_spike_counts(spikes, windows), dc.f0, windows)
        _write(out, "bipolar.csv", table.to_csv())
    if dc.sweep:
        sweep = decode.separability_sweep(
            spikes, g.labels, dc.sweep, dc.sources,
            pulse_width=cfg.schedule.pulse_width if cfg.schedule.kind == "random" else None,
        )  # fmt: skip
        _write(out, "sweep.csv", sweep.to_csv())
        for bw, m in zip(sweep.bin_widths, sweep.margins):
            print(f"bin_width_ms={bw:g} margin={m:.6f}")
    _write(out, "decode_config.json", cfg.to_json())
    return 0


def cmd_calibrate(args) -> int:
    cfg = _neuron_overrides(_load_config(args), args)
    a_max = args.a_max
    if args.target_isi is not None:
        a_max = calibration.amax_for_target_isi(cfg.neuron, args.target_isi)
    report = calibration.calibrate(
        cfg.neuron, cfg.synapse, a_max, args.pulse_width,
        args.community_order, args.avg_degree,
    )  # fmt: skip
    if a_max is None:
        a_max = calibration.amax_for_target_isi(cfg.neuron, 21.0)
    doc = {"a_max": a_max, **report.as_dict()}
    sys.stdout.write("".join(f"{k}={v}\n" for k, v in doc.items()))
    sys.stdout.write(json.dumps(doc, sort_keys=True) + "\n")
    return 0


def _neuron_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tau", type=float)
    p.add_argument("--v-th", type=float)
    p.add_argument("--v-reset", type=float)
    p.add_argument("--t-refract", type=float)
    p.add_argument("--w", type=float, help="synaptic weight magnitude (excitatory +w, inhibitory -w)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spikecomm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--config", help="JSON run config; flags override its values")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--out", help="output directory")

    p = sub.add_parser("gen-graph", help="generate a planted-partition benchmark graph")
    common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--communities", type=int)
    p.add_argument("--avg-degree", type=float)
    p.add_argument("--z-out", type=float)
    p.set_defaults(func=cmd_gen_graph)

    p = sub.add_parser("simulate", help="simulate the spiking network of a graph")
    common(p)
    _neuron_flags(p)
    p.add_argument("--graph", help="directory holding edges.csv and labels.csv")
    p.add_argument("--schedule", choices=["community-ordered", "random"])
    p.add_argument("--drive", help="comma-separated community ids, in driving order")
    p.add_argument("--t-start", type=float)
    p.add_argument("--pulse-width", type=float)
    p.add_argument("--gap", type=float)
    p.add_argument("--a-max", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--duration", type=float)
    p.add_argument("--floor", type=float, help="minimum membrane potential")
    p.add_argument("--record", help="comma-separated neuron ids whose potentials are written")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("decode", help="decode a simulation run")
    p.add_argument("--run", required=True, help="output directory of a simulate run")
    p.add_argument("--config", help="JSON config whose decode section overrides the run's")
    p.add_argument("--out", help="output directory (default: the run directory)")
    p.add_argument("--metric", choices=["plain", "weighted"])
    p.add_argument("--bin-dt", type=float)
    p.add_argument("--bipolar", action="store_true")
    p.add_argument("--f0", type=float)
    p.add_argument("--windows", help="'auto' or start:end,start:end,...")
    p.add_argument("--sweep", help="comma-separated bin widths for the separability sweep")
    p.add_argument("--sources", help="comma-separated source neurons for the sweep")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("calibrate", help="print closed-form firing relations")
    common(p)
    _neuron_flags(p)
    p.add_argument("--a-max", type=float)
    p.add_argument("--target-isi", type=float)
    p.add_argument("--pulse-width", type=float, default=PULSE_WIDTH)
    p.add_argument("--community-order", type=int, default=32)
    p.add_argument("--avg-degree", type=float, default=16.0)
    p.set_defaults(func=cmd_calibrate)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "decode" and args.out is None:
        args.out = args.run
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    logging.captureWarnings(True)
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ParseError, NumericFault, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
