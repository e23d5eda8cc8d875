"""Command-line entry point.

Subcommands: ``aggregate`` runs one defended aggregation over model files,
``serve`` runs the scheduler service, ``simulate`` runs a harness scenario.
Exit codes: 0 success, 2 input error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import FlsgError, SerializationError
from .kvconfig import ConfigError, parse_kv_file
from .models import ModelVector, RoundConfig, deserialize_model, serialize_model
from .pipeline import run_defense_round

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_RUNTIME = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flsg",
        description="Backdoor-aware federated-learning aggregation pipeline.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="enable info logging")
    sub = parser.add_subparsers(dest="command", required=True)

    agg = sub.add_parser("aggregate", help="aggregate a directory of FLSG model files")
    agg.add_argument("global_model", help="FLSG file holding the current global model")
    agg.add_argument("model_dir", help="directory of local-model FLSG files (client order = sorted file names)")
    agg.add_argument("-o", "--output", default="aggregated.flsg", help="output model file")
    agg.add_argument("--report", default=None, help="JSON report path (default: <output>.report.json)")
    agg.add_argument("-k", "--stages", type=int, default=4, help="cascade stage count")
    agg.add_argument("--lambda", dest="noise_range", type=float, default=0.001, help="noise range multiplier")
    agg.add_argument("--seed", type=int, default=0, help="noise generator seed")
    agg.add_argument("--dump-matrix", default=None, metavar="CSV", help="write the cosine-distance matrix as CSV")

    srv = sub.add_parser("serve", help="run the scheduler service until interrupted")
    srv.add_argument("--config", required=True, help="key=value service config file")
    srv.add_argument("--listen", default=None, metavar="HOST:PORT", help="override the config's listen address")
    srv.add_argument("--quorum", type=int, default=None, help="override the config's round quorum")

    sim = sub.add_parser("simulate", help="run an attack/defense scenario")
    sim.add_argument("scenario", help="key=value scenario file")
    sim.add_argument("out_csv", help="round-metrics CSV output path")
    sim.add_argument("--defense", choices=("flame", "fedavg"), default=None, help="override the scenario's defense")

    return parser


def _cmd_aggregate(args) -> int:
    global_path = Path(args.global_model)
    model_dir = Path(args.model_dir)
    if not global_path.is_file():
        print(f"error: global model file not found: {global_path}", file=sys.stderr)
        return EXIT_INPUT
    if not model_dir.is_dir():
        print(f"error: model directory not found: {model_dir}", file=sys.stderr)
        return EXIT_INPUT
    model_files = sorted(p for p in model_dir.iterdir() if p.is_file())
    if not model_files:
        print(f"error: no model files in {model_dir}", file=sys.stderr)
        return EXIT_INPUT

    try:
        global_model = deserialize_model(global_path.read_bytes())
        local_models = [deserialize_model(p.read_bytes()) for p in model_files]
    except SerializationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    try:
        config = RoundConfig(
            n=len(local_models),
            p=global_model.param_count,
            cascade_stages=args.stages,
            noise_range=args.noise_range,
            rng_seed=args.seed,
        )
        new_global, report = run_defense_round(global_model, local_models, config)
    except (FlsgError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    Path(args.output).write_bytes(serialize_model(new_global))
    if args.dump_matrix:
        Path(args.dump_matrix).write_text(report.matrix.to_csv())
    report_path = Path(args.report) if args.report else Path(str(args.output) + ".report.json")
    report_path.write_text(json.dumps(
        {
            "n": config.n,
            "p": config.p,
            "stages": config.cascade_stages,
            "lambda": config.noise_range,
            "seed": config.rng_seed,
            "labels": list(report.labels.labels),
            "acceptedCount": report.accepted_count,
            "allNoiseFallback": report.all_noise_fallback,
            "medianNorm": report.scale.median_norm,
            "passCount": report.cascade.pass_count,
            "vectorFeedsPerPass": list(report.cascade.vector_feeds_per_pass),
            "totalMemoryReloads": report.cascade.total_memory_reloads,
            "dotProductsComputed": report.cascade.dot_products_computed,
            "clients": [p.name for p in model_files],
        },
        indent=2,
    ) + "\n")
    print(f"wrote {args.output} ({config.p} parameters, accepted {report.accepted_count}/{config.n})")
    return EXIT_OK


def _cmd_serve(args) -> int:
    from .service import SchedulerServer, ServiceConfig

    config_path = Path(args.config)
    if not config_path.is_file():
        print(f"error: config file not found: {config_path}", file=sys.stderr)
        return EXIT_INPUT
    try:
        raw = parse_kv_file(config_path)
        known = {
            "listen", "port", "device_key_file", "global_model", "clients",
            "quorum", "stages", "lambda", "seed", "auto_round",
        }
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"{config_path}: unknown keys {sorted(unknown)}")
        device_key = bytes.fromhex(Path(raw["device_key_file"]).read_text().strip())
        global_model = deserialize_model(Path(raw["global_model"]).read_bytes())
        round_config = RoundConfig(
            n=int(raw["clients"]),
            p=global_model.param_count,
            cascade_stages=int(raw.get("stages", "4")),
            noise_range=float(raw.get("lambda", "0.001")),
            rng_seed=int(raw.get("seed", "0")),
        )
        host = raw.get("listen", "127.0.0.1")
        port = int(raw.get("port", "7343"))
        if args.listen:
            host, _, port_text = args.listen.rpartition(":")
            port = int(port_text)
        quorum = int(raw["quorum"]) if "quorum" in raw else None
        if args.quorum is not None:
            quorum = args.quorum
        service_config = ServiceConfig(
            round_config=round_config,
            device_key=device_key,
            host=host or "127.0.0.1",
            port=port,
            quorum=quorum,
            auto_round=raw.get("auto_round", "true").lower() != "false",
        )
    except (ConfigError, SerializationError, KeyError, ValueError, OSError) as exc:
        print(f"error: bad service config: {exc!r}", file=sys.stderr)
        return EXIT_INPUT

    server = SchedulerServer(service_config, global_model)
    try:
        server.serve_forever()
    except OSError as exc:
        print(f"error: cannot listen on {service_config.host}:{service_config.port}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def _cmd_simulate(args) -> int:
    from .harness import metrics_to_csv, run_experiment, scenario_from_file

    scenario_path = Path(args.scenario)
    if not scenario_path.is_file():
        print(f"error: scenario file not found: {scenario_path}", file=sys.stderr)
        return EXIT_INPUT
    try:
        overrides = {"defense": args.defense} if args.defense else {}
        scenario = scenario_from_file(scenario_path, **overrides)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        history = run_experiment(scenario)
    except FlsgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    Path(args.out_csv).write_text(metrics_to_csv(history))
    last = history[-1]
    print(
        f"{scenario.rounds} rounds, defense={scenario.defense}: "
        f"final MA={last.main_accuracy:.4f} BA={last.backdoor_accuracy:.4f}"
    )
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    if args.command == "aggregate":
        return _cmd_aggregate(args)
    if args.command == "serve":
        return _cmd_serve(args)
    return _cmd_simulate(args)


if __name__ == "__main__":
    sys.exit(main())
