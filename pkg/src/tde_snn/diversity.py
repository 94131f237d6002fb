"""Spike-stream pattern analysis: per-neuron T-bit firing patterns.

Each neuron's spikes over T steps form a T-bit word with the earliest step
as the most significant bit, so the stream 1-1-1-0 reads as the pattern
"1110" (index 14 for T=4). Coverage counts distinct patterns present across
the population; direct encoding collapses this set, the temporal encoder
recovers it.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .tensor import SpikeTrain, Tensor


@dataclass
class PatternHistogram:
    t_steps: int
    counts: np.ndarray  # 2^T bins, indexed by the pattern's binary value

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.shape != (2**self.t_steps,):
            raise ValueError(
                f"histogram needs {2**self.t_steps} bins, got {self.counts.shape}"
            )
        if np.any(self.counts < 0):
            raise ValueError("bin counts must be non-negative")

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def pattern_histogram(spikes: SpikeTrain) -> PatternHistogram:
    """Count the T-bit firing pattern of every neuron in a [T, ...] train."""
    data = spikes.data
    if not np.all((data == 0.0) | (data == 1.0)):
        raise ValueError("spike train contains non-binary values")
    t = data.shape[0]
    if t > 16:
        raise ValueError(f"T={t} too long; patterns are limited to T <= 16")
    flat = data.reshape(t, -1).astype(np.int64)
    weights = 1 << np.arange(t - 1, -1, -1, dtype=np.int64)  # MSB = earliest step
    codes = (weights[:, None] * flat).sum(axis=0)
    counts = np.bincount(codes, minlength=2**t)
    return PatternHistogram(t_steps=t, counts=counts)


def coverage(hist: PatternHistogram) -> int:
    """Number of distinct patterns observed (max 2^T)."""
    return int(np.count_nonzero(hist.counts))


def pattern_entropy(hist: PatternHistogram) -> float:
    """Shannon entropy of the pattern distribution, in bits (0 <= H <= T)."""
    if hist.total == 0:
        raise ValueError("histogram is empty")
    p = hist.counts[hist.counts > 0] / hist.total
    return float(-(p * np.log2(p)).sum())


def histogram_to_json(hist: PatternHistogram) -> str:
    return json.dumps({"T": hist.t_steps, "counts": hist.counts.tolist()})


def histogram_from_json(text: str) -> PatternHistogram:
    doc = json.loads(text)
    return PatternHistogram(t_steps=doc["T"], counts=np.asarray(doc["counts"]))


def raster_export(spikes: SpikeTrain, path, neuron_ids=None) -> None:
    """Write `neuron_id,t,spike` rows, neuron-major then time, t starting at 1.

    neuron_ids optionally restricts the export to a subset (flat indices over
    the non-time axes); an empty selection yields a header-only file.
    """
    data = spikes.data
    if not np.all((data == 0.0) | (data == 1.0)):
        raise ValueError("spike train contains non-binary values")
    t = data.shape[0]
    flat = data.reshape(t, -1).astype(int)
    ids = range(flat.shape[1]) if neuron_ids is None else neuron_ids
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["neuron_id", "t", "spike"])
        for n in ids:
            for step in range(t):
                writer.writerow([n, step + 1, flat[step, n]])


def raster_import(path) -> SpikeTrain:
    """Rebuild a [T, N] spike train from a raster CSV (round-trip check)."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["neuron_id", "t", "spike"]:
            raise ValueError(f"unexpected raster header {header}")
        for row in reader:
            rows.append((int(row[0]), int(row[1]), float(row[2])))
    if not rows:
        return Tensor(np.zeros((0, 0)), binary=True)
    n_neurons = max(r[0] for r in rows) + 1
    t_steps = max(r[1] for r in rows)
    grid = np.zeros((t_steps, n_neurons))
    for n, t, s in rows:
        grid[t - 1, n] = s
    return Tensor(grid, binary=True)
