"""Energy cost model (45 nm, 32-bit float): 3.7 pJ per MUL, 0.9 pJ per AC.

Energy is computed on an integer grid of tenth-picojoules, 37*mul + 9*ac,
and converted to joules with a single final rounding; this keeps the
additivity of ledger merges exact. profile_attention runs a variant on a
seeded random membrane tensor and returns its attention-tag ledger slice.
"""

from __future__ import annotations

import csv
import io
import json

import numpy as np

from . import rng as rng_mod
from .attention import AttentionConfig, attention_forward, init_attention_config
from .ledger import EnergyLedger, counting
from .tensor import Tensor

MUL_TENTH_PJ = 37  # 3.7 pJ
AC_TENTH_PJ = 9  # 0.9 pJ
TENTH_PJ = 1e-13  # joules

PAPER_SHAPE = (4, 128, 80, 40)  # T, C, H, W of the reference comparison


def energy_of(mul, ac) -> float:
    """Total energy in joules for the given operation counts."""
    if mul < 0 or ac < 0:
        raise ValueError("operation counts must be non-negative")
    return (MUL_TENTH_PJ * mul + AC_TENTH_PJ * ac) * TENTH_PJ


def ledger_energy(led: EnergyLedger) -> float:
    return energy_of(led.mul_total, led.ac_total)


def compare(a: EnergyLedger, b: EnergyLedger) -> dict:
    """Energy report for b relative to a. ratio is None when undefined."""
    ea, eb = ledger_energy(a), ledger_energy(b)
    if ea == 0.0:
        ratio = 0.0 if eb == 0.0 else None
    else:
        ratio = eb / ea
    return {
        "energy_a_joules": ea,
        "energy_b_joules": eb,
        "ratio": ratio,
        "a": a.as_dict(),
        "b": b.as_dict(),
    }


def profile_attention(
    variant: str,
    shape: tuple[int, int, int, int] = PAPER_SHAPE,
    cfg: AttentionConfig | None = None,
    seed: int = 0,
) -> EnergyLedger:
    """Op counts of one attention forward on a seeded membrane tensor.

    The membrane input depends on (seed, shape) only, never on the variant,
    so tcsa/sda profiles at the same seed see identical inputs.
    """
    if variant not in ("tcsa", "sda"):
        raise ValueError(f"variant must be tcsa or sda, got {variant!r}")
    t, c, h, w = shape
    hin = Tensor(rng_mod.stream(seed, "profile/input").normal(0.0, 1.0, shape))
    if cfg is None:
        cfg = init_attention_config(seed, variant, t, c)
    elif cfg.variant != variant:
        raise ValueError(f"config variant {cfg.variant!r} != requested {variant!r}")
    led = EnergyLedger()
    with counting(led, "attention"):
        attention_forward(hin, cfg)
    return led


def report(variant: str, shape, led: EnergyLedger, ratio_vs_baseline) -> dict:
    return {
        "variant": variant,
        "shape": list(shape),
        "mul": led.mul_total,
        "ac": led.ac_total,
        "energy_joules": ledger_energy(led),
        "ratio_vs_baseline": ratio_vs_baseline,
    }


def report_json(rep: dict) -> str:
    return json.dumps(rep, indent=2) + "\n"


REPORT_FIELDS = ["variant", "shape", "mul", "ac", "energy_joules", "ratio_vs_baseline"]


def report_csv(reps: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_FIELDS)
    for rep in reps:
        row = dict(rep)
        row["shape"] = "x".join(str(v) for v in rep["shape"])
        writer.writerow([row[f] for f in REPORT_FIELDS])
    return buf.getvalue()
