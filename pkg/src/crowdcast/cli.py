"""Command-line entry points: training, evaluation, analysis, sweeps, serving."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from .conception import conception_vector, partition_assignments
from .config import ConfigError, RunConfig, load_config, load_scene_source
from .evaluation import (
    ablation_table, analysis_reports, evaluate_forecaster, run_ablation,
)
from .grouping import group_members
from .model import TrajectoryForecaster
from .nn.checkpoint import CheckpointError
from .scene import normalize_instance
from .server import Snapshot, serve

log = logging.getLogger("crowdcast")


def _load_model(cfg: RunConfig, checkpoint: str | None) -> TrajectoryForecaster:
    path = Path(checkpoint or cfg.checkpoint)
    if not path.exists():
        raise FileNotFoundError(f"checkpoint does not exist: {path} (train first or pass --checkpoint)")
    return TrajectoryForecaster.load(path)


def _emit(records, out: str | None):
    lines = [json.dumps(r) for r in records]
    if out:
        Path(out).write_text("\n".join(lines) + "\n")
        print(f"wrote {len(lines)} records to {out}")
    else:
        for line in lines:
            print(line)


def _write_csv(path: str, header: list[str], rows: list[list]):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    print(f"wrote {path}")


def _instance_key(inst) -> dict:
    return {"scene_id": inst.scene_id, "target_id": inst.target_id, "window_start": inst.window_start}


# -- subcommands -------------------------------------------------------------------

def cmd_train(args) -> int:
    cfg = load_config(args.config)
    instances = cfg.instances("train")
    if not instances:
        raise ConfigError("data.train: produced no prediction instances")
    model = cfg.forecaster()
    log.info("training on %d instances (%d epochs, batch %d)", len(instances), model.epochs, model.batch_size)
    model.fit(instances)
    model.save(cfg.checkpoint)
    loss_log = str(cfg.checkpoint) + ".losses.csv"
    _write_csv(loss_log, ["epoch", "loss"], [[i + 1, l] for i, l in enumerate(model.history_)])
    print(f"checkpoint saved to {cfg.checkpoint} (final loss {model.history_[-1]:.6f})")
    return 0


def cmd_eval(args) -> int:
    cfg = load_config(args.config)
    model = _load_model(cfg, args.checkpoint)
    splits = [args.split] if args.split else [s for s in cfg.data if s != "train"] or list(cfg.data)
    print(f"{'split':10s} {'K':>4s} {'min_ade':>10s} {'min_fde':>10s} {'instances':>10s}")
    rows = []
    for split in splits:
        report = evaluate_forecaster(model, cfg.instances(split))
        print(f"{split:10s} {report.k:4d} {report.mean_min_ade:10.4f} {report.mean_min_fde:10.4f} "
              f"{len(report.per_instance_ade):10d}")
        rows.append([split, report.k, report.mean_min_ade, report.mean_min_fde,
                     len(report.per_instance_ade)])
    if args.out:
        _write_csv(args.out, ["split", "k", "min_ade", "min_fde", "instances"], rows)
    return 0


def cmd_predict(args) -> int:
    cfg = load_config(args.config)
    model = _load_model(cfg, args.checkpoint)
    instances = cfg.instances(args.split or "eval")
    records = []
    for pset in model.predict(instances):
        records.append({**_instance_key(pset),
                        "candidates": pset.trajectories.tolist(),
                        "linear_fit": pset.linear_fit.tolist()})
    _emit(records, args.out)
    return 0


def cmd_analyze(args) -> int:
    cfg = load_config(args.config)
    instances = cfg.instances(args.split or next(iter(cfg.data), "eval"))
    records = []
    if args.what == "groups":
        for inst in instances:
            gs = group_members(inst, cfg.grouping)
            ranked = sorted(gs.distances.items(), key=lambda kv: kv[1])
            records.append({**_instance_key(inst),
                            "distance_threshold": cfg.grouping.distance_threshold,
                            "ranked": [{"agent_id": a, "distance": d, "member": a in gs.member_ids}
                                       for a, d in ranked]})
    elif args.what == "conception":
        for inst in instances:
            norm = normalize_instance(inst)
            gs = group_members(norm, cfg.grouping)
            vec = conception_vector(norm, gs, cfg.conception)
            assigned = partition_assignments(norm, gs, cfg.conception)
            records.append({**_instance_key(inst),
                            "values": list(vec.values), "counts": list(vec.counts),
                            "assignments": [{"agent_id": a.agent_id, "partition": a.partition,
                                             "angle": a.angle} for a in assigned]})
    else:  # ratios
        model = _load_model(cfg, args.checkpoint)
        att_rows, con_rows = [], []
        for pset in model.predict(instances):
            contribution, attention = analysis_reports(model, pset)
            records.append({**_instance_key(pset),
                            "contribution": contribution.as_dict(),
                            "attention": attention.as_dict()})
            key = [pset.scene_id, pset.target_id, pset.window_start]
            att_rows.append(key + [attention.right, attention.left, attention.rear])
            con_rows.append(key + [contribution.r_self, contribution.r_group, contribution.r_con])
        if args.csv_prefix:
            _write_csv(f"{args.csv_prefix}-attention.csv",
                       ["scene_id", "target_id", "window_start", "right", "left", "rear"], att_rows)
            _write_csv(f"{args.csv_prefix}-contribution.csv",
                       ["scene_id", "target_id", "window_start", "self", "group", "conception"], con_rows)
    _emit(records, args.out)
    return 0


def cmd_ablate(args) -> int:
    cfg = load_config(args.config)
    train = cfg.instances("train")
    hold = cfg.instances("eval") if "eval" in cfg.data else train
    reports = run_ablation(train, hold, cfg.forecaster())
    print(ablation_table(reports))
    if args.out:
        _write_csv(args.out, ["variant", "min_ade", "min_fde"],
                   [[name, rep.mean_min_ade, rep.mean_min_fde] for name, rep in reports.items()])
    return 0


def _sweep(cfg: RunConfig, values: list[float], param: str, out: str | None, label: str) -> int:
    train = cfg.instances("train")
    hold = cfg.instances("eval") if "eval" in cfg.data else train
    rows = []
    for value in values:
        model = cfg.forecaster(**{param: value})
        model.fit(train)
        report = evaluate_forecaster(model, hold)
        print(f"{label}={value:g}: min_ade {report.mean_min_ade:.4f} min_fde {report.mean_min_fde:.4f}")
        rows.append([value, report.mean_min_ade, report.mean_min_fde])
    if out:
        _write_csv(out, [label, "min_ade", "min_fde"], rows)
    return 0


def cmd_sweep_fov(args) -> int:
    cfg = load_config(args.config)
    angles = [float(a) for a in args.angles.split(",")]
    return _sweep(cfg, angles, "fov_degrees", args.out, "fov_degrees")


def cmd_sweep_dm(args) -> int:
    cfg = load_config(args.config)
    values = [float(v) for v in args.values.split(",")]
    return _sweep(cfg, values, "distance_threshold", args.out, "distance_threshold")


def cmd_serve(args) -> int:
    cfg = load_config(args.config)
    model = _load_model(cfg, args.checkpoint)
    scenes = {}
    if args.demo:
        for kind in ("constant-velocity", "group-pair", "crossing"):
            for scene in load_scene_source(f"synth:{kind}:6:{cfg.window.n_past + cfg.window.n_future}:7",
                                           cfg.interval_seconds):
                scenes[scene.id] = scene
    for split in cfg.data:
        for scene in cfg.scenes(split):
            scenes[scene.id] = scene
    if not scenes:
        raise ConfigError("data: no scenes to serve (configure data paths or pass --demo)")
    snapshot = Snapshot(model=model, scenes=scenes, window=cfg.window)
    serve(snapshot, args.addr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crowdcast",
                                     description="Social-aware trajectory forecasting toolkit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_config(p):
        p.add_argument("config", help="path to a JSON run configuration")
        return p

    with_config(sub.add_parser("train", help="train a model and write a checkpoint"))

    p = with_config(sub.add_parser("eval", help="evaluate a checkpoint (minADE/minFDE table)"))
    p.add_argument("--checkpoint")
    p.add_argument("--split")
    p.add_argument("--out", help="also write the table as CSV")

    p = with_config(sub.add_parser("predict", help="emit candidate trajectories as JSON lines"))
    p.add_argument("--checkpoint")
    p.add_argument("--split")
    p.add_argument("--out")

    p = sub.add_parser("analyze", help="group/conception/ratio reports")
    p.add_argument("what", choices=["groups", "conception", "ratios"])
    with_config(p)
    p.add_argument("--checkpoint", help="needed for 'ratios'")
    p.add_argument("--split")
    p.add_argument("--out")
    p.add_argument("--csv-prefix", help="for 'ratios': also write plot-ready CSVs")

    p = with_config(sub.add_parser("ablate", help="train/evaluate the v0-v3 feature variants"))
    p.add_argument("--out")

    p = with_config(sub.add_parser("sweep-fov", help="metric-vs-FOV-angle sweep"))
    p.add_argument("--angles", default="90,135,180,270,360", help="comma-separated degrees")
    p.add_argument("--out")

    p = with_config(sub.add_parser("sweep-dm", help="metric-vs-distance-threshold sweep"))
    p.add_argument("--values", default="5,10,20,40", help="comma-separated thresholds")
    p.add_argument("--out")

    p = with_config(sub.add_parser("serve", help="serve the JSON HTTP API"))
    p.add_argument("--checkpoint")
    p.add_argument("--addr", help=f"host:port (overrides ${'{'}CROWDCAST_ADDR{'}'})")
    p.add_argument("--demo", action="store_true", help="also serve bundled synthetic scenes")

    return parser


COMMANDS = {
    "train": cmd_train, "eval": cmd_eval, "predict": cmd_predict, "analyze": cmd_analyze,
    "ablate": cmd_ablate, "sweep-fov": cmd_sweep_fov, "sweep-dm": cmd_sweep_dm, "serve": cmd_serve,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, FileNotFoundError, CheckpointError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
