"""Command-line entry point.

Subcommands: simulate, energy, diversity, gradcheck, train-toy,
events-to-frame. Exit codes: 0 success, 1 runtime failure, 2 invalid input.
Every command is a pure function of (config, seed, input files); reruns are
byte-identical. The environment variable TDE_SNN_SEED overrides the config
seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import rng as rng_mod
from .config import ConfigError, RunConfig, load_config, seed_from_env
from .diversity import (
    coverage,
    histogram_to_json,
    pattern_entropy,
    pattern_histogram,
    raster_export,
)
from .encoder import (
    EventFormatError,
    accumulate_events,
    read_events_bin,
    read_events_csv,
)
from .energy import (
    PAPER_SHAPE,
    ledger_energy,
    profile_attention,
    report,
    report_csv,
    report_json,
)
from .gating import build_pipeline
from .ledger import EnergyLedger
from .neuron import LifParams
from .tensor import Tensor
from .train import gradient_check, loss_curves_csv, train_variant


def _load_input(cfg: RunConfig) -> Tensor:
    """Synthetic seeded noise, or an accumulated event frame when configured."""
    if cfg.input.events is None:
        rng = rng_mod.stream(cfg.seed, "input")
        data = rng.normal(0.0, 1.0, (cfg.input.channels, cfg.input.height, cfg.input.width))
        return Tensor(data)
    reader = read_events_csv if cfg.input.format == "csv" else read_events_bin
    events = reader(cfg.input.events)
    window = cfg.input.window
    if window is None:
        upper = max((ev.t for ev in events), default=0) + 1
        window = (0, upper)
    try:
        return accumulate_events(events, cfg.input.height, cfg.input.width, window)
    except ValueError as exc:
        raise ConfigError("input.events", str(exc)) from None


def _pipeline(cfg: RunConfig):
    return build_pipeline(
        cfg.seed,
        in_channels=cfg.input.channels,
        channels=cfg.channels,
        t_steps=cfg.t_steps,
        variant=cfg.variant,
        encoder_kernel=cfg.encoder_kernel,
        per_step_weights=cfg.per_step_weights,
        alpha_init=cfg.alpha_init,
        spatial_kernel=cfg.spatial_kernel,
        lif0_k_percent=cfg.lif0_k_percent,
        params=LifParams(v_th=cfg.v_th, beta=cfg.beta, surrogate_alpha=cfg.surrogate_alpha),
    )


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _alpha_rows(trajectory: list[list[float]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["round", "t", "alpha"])
    for rnd, alphas in enumerate(trajectory):
        for t, a in enumerate(alphas, start=1):
            writer.writerow([rnd, t, repr(a)])
    return buf.getvalue()


def cmd_simulate(args) -> int:
    cfg = load_config(args.config, seed_override=seed_from_env())
    image = _load_input(cfg)
    pipe = _pipeline(cfg)
    out = Path(cfg.out_dir)
    ledger = EnergyLedger()
    if args.baseline:
        spikes = pipe.baseline(image)
        trajectory = [list(pipe.enc.alpha)]
    else:
        trajectory = [list(pipe.enc.alpha)]
        rounds = max(cfg.rounds, 1)
        spikes = None
        for _ in range(rounds):
            spikes, diag = pipe.forward(image, train=cfg.gating, ledger=ledger)
            trajectory.append(list(pipe.enc.alpha))
        if not cfg.gating:
            trajectory = trajectory[:1]
    hist = pattern_histogram(spikes)
    raster_path = out / "raster.csv"
    raster_path.parent.mkdir(parents=True, exist_ok=True)
    raster_export(spikes, raster_path)
    _write(out / "histogram.json", histogram_to_json(hist) + "\n")
    _write(out / "ledger.json", json.dumps(ledger.as_dict(), indent=2) + "\n")
    _write(out / "alpha_trajectory.csv", _alpha_rows(trajectory))
    print(f"simulate: wrote 4 files to {out}")
    return 0


def _paper_or_custom_shape(args) -> tuple[int, int, int, int]:
    if args.paper_shape:
        return PAPER_SHAPE
    if args.shape is None:
        raise ConfigError("shape", "one of --paper-shape or --shape is required")
    parts = args.shape.split(",")
    if len(parts) != 4:
        raise ConfigError("shape", f"expected T,C,H,W, got {args.shape!r}")
    try:
        shape = tuple(int(p) for p in parts)
    except ValueError:
        raise ConfigError("shape", f"non-integer extent in {args.shape!r}") from None
    if any(v < 1 for v in shape):
        raise ConfigError("shape", f"extents must be positive, got {shape}")
    return shape


def cmd_energy(args) -> int:
    shape = _paper_or_custom_shape(args)
    env = seed_from_env()
    seed = env if env is not None else args.seed
    out_dir = Path(args.out) if args.out else None
    if args.compare:
        led_base = profile_attention("tcsa", shape, seed=seed)
        led_sda = profile_attention("sda", shape, seed=seed)
        ratio = ledger_energy(led_sda) / ledger_energy(led_base)
        reports = [
            report("tcsa", shape, led_base, 1.0),
            report("sda", shape, led_sda, ratio),
        ]
        doc = {"reports": reports, "ratio": ratio}
        text = json.dumps(doc, indent=2) + "\n"
        csv_text = report_csv(reports)
    else:
        if args.variant is None:
            raise ConfigError("variant", "--variant is required without --compare")
        led = profile_attention(args.variant, shape, seed=seed)
        rep = report(args.variant, shape, led, None)
        text = report_json(rep)
        csv_text = report_csv([rep])
    if out_dir is not None:
        _write(out_dir / "energy.json", text)
        _write(out_dir / "energy.csv", csv_text)
    sys.stdout.write(text)
    return 0


def cmd_diversity(args) -> int:
    cfg = load_config(args.config, seed_override=seed_from_env())
    if args.layer not in (0, 1):
        raise ConfigError("layer", f"layer must be 0 (encoder) or 1 (body), got {args.layer}")
    image = _load_input(cfg)
    pipe = _pipeline(cfg)
    base_spikes = pipe.baseline(image)
    tde_spikes, diag = pipe.forward(image, train=False)
    if args.layer == 1:
        from .neuron import lif1_dual
        from .tensor import conv2d_time

        base_spikes = lif1_dual(conv2d_time(base_spikes, pipe.body), pipe.params)[0]
        tde_spikes = diag.body_spikes
    hist_base = pattern_histogram(base_spikes)
    hist_tde = pattern_histogram(tde_spikes)
    summary = {
        "seed": cfg.seed,
        "T": cfg.t_steps,
        "layer": args.layer,
        "coverage_baseline": coverage(hist_base),
        "coverage_tde": coverage(hist_tde),
        "entropy_baseline": pattern_entropy(hist_base),
        "entropy_tde": pattern_entropy(hist_tde),
    }
    out = Path(cfg.out_dir)
    _write(out / "histogram_baseline.json", histogram_to_json(hist_base) + "\n")
    _write(out / "histogram_tde.json", histogram_to_json(hist_tde) + "\n")
    _write(out / "diversity_summary.json", json.dumps(summary, indent=2) + "\n")
    print(
        f"coverage: baseline {summary['coverage_baseline']} -> "
        f"tde {summary['coverage_tde']} (max {2 ** cfg.t_steps})"
    )
    return 0


def cmd_gradcheck(args) -> int:
    if args.mode != "relaxed":
        sys.stderr.write(
            "gradcheck: finite differences are invalid through the hard spike "
            "step; run with --mode relaxed\n"
        )
        return 2
    worst = 0.0
    for seed in range(args.seeds):
        err = gradient_check(seed=seed, h=args.h)
        worst = max(worst, err)
        print(f"seed {seed}: max relative error {err:.3e}")
    print(f"worst over {args.seeds} seeds: {worst:.3e} (bound 1e-4)")
    return 0 if worst < 1e-4 else 1


def cmd_train_toy(args) -> int:
    cfg = load_config(args.config, seed_override=seed_from_env())
    curves = {}
    for variant in ("baseline", "tde"):
        curves[variant] = train_variant(
            variant,
            seed=cfg.seed,
            steps=cfg.train.steps,
            batch_size=cfg.train.batch_size,
            lr=cfg.train.lr,
            image_size=cfg.train.image_size,
            t_steps=cfg.t_steps,
            mode=cfg.mode,
        )
    out = Path(cfg.out_dir)
    _write(out / "loss_curves.csv", loss_curves_csv(curves))
    for variant, curve in sorted(curves.items()):
        print(f"{variant}: first {curve[0]:.5f} last {curve[-1]:.5f}")
    return 0


def cmd_events_to_frame(args) -> int:
    reader = read_events_csv if args.format == "csv" else read_events_bin
    events = reader(args.input)
    if args.window:
        parts = args.window.split(",")
        if len(parts) != 2:
            raise ConfigError("window", f"expected a,b got {args.window!r}")
        try:
            window = (int(parts[0]), int(parts[1]))
        except ValueError:
            raise ConfigError("window", f"non-integer bound in {args.window!r}") from None
    else:
        window = (0, max((ev.t for ev in events), default=0) + 1)
    try:
        frame = accumulate_events(events, args.height, args.width, window)
    except ValueError as exc:
        raise ConfigError("input", str(exc)) from None
    rows = []
    for row in frame.data[0]:
        rows.append(",".join(str(int(v)) for v in row))
    _write(Path(args.out), "\n".join(rows) + "\n")
    print(f"wrote {args.height}x{args.width} frame to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tde-snn")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the pipeline, write raster/histogram/ledger/alpha")
    p.add_argument("config")
    p.add_argument("--baseline", action="store_true", help="plain direct-encode pipeline")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("energy", help="attention energy report")
    p.add_argument("--variant", choices=["tcsa", "sda"])
    p.add_argument("--paper-shape", action="store_true")
    p.add_argument("--shape", help="T,C,H,W")
    p.add_argument("--compare", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="directory for energy.json / energy.csv")
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("diversity", help="baseline vs enhanced pattern coverage")
    p.add_argument("config")
    p.add_argument("--layer", type=int, default=0)
    p.set_defaults(func=cmd_diversity)

    p = sub.add_parser("gradcheck", help="tape gradients vs finite differences")
    p.add_argument("--mode", default="relaxed")
    p.add_argument("--h", type=float, default=1e-4)
    p.add_argument("--seeds", type=int, default=5)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("train-toy", help="toy box regressor, baseline vs tde")
    p.add_argument("config")
    p.set_defaults(func=cmd_train_toy)

    p = sub.add_parser("events-to-frame", help="accumulate an event file into a frame CSV")
    p.add_argument("input")
    p.add_argument("--format", choices=["csv", "bin"], default="csv")
    p.add_argument("--out", required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--window", help="a,b (microseconds, half-open)")
    p.set_defaults(func=cmd_events_to_frame)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, EventFormatError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except Exception as exc:  # runtime failure contract
        sys.stderr.write(f"runtime failure: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
