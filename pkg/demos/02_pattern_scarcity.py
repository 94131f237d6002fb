"""Firing-pattern scarcity and its recovery by the temporal encoder.

Direct encoding feeds the identical stimulus at every step, so a first-layer
neuron's T-bit firing pattern is fully determined by one scalar drive; most
of the 2^T patterns never occur. The encoder recurrence evolves the stimulus
over time and recovers them.
"""

import numpy as np

from tde_snn import Tensor, build_pipeline, coverage, pattern_histogram
from tde_snn import rng as rng_mod

T = 4
pipe = build_pipeline(42, in_channels=1, channels=8, t_steps=T, variant="sda")
image = Tensor(rng_mod.stream(42, "input").normal(0.0, 1.0, (1, 16, 16)))

base_hist = pattern_histogram(pipe.baseline(image))
tde_spikes, _ = pipe.forward(image)
tde_hist = pattern_histogram(tde_spikes)

print(f"{'pattern':>8} {'baseline':>9} {'encoder':>9}")
for code in range(2**T):
    bits = format(code, f"0{T}b")
    print(f"{bits:>8} {base_hist.counts[code]:>9} {tde_hist.counts[code]:>9}")

print(f"\ncoverage: baseline {coverage(base_hist)} / 16, encoder {coverage(tde_hist)} / 16")
missing = [format(c, f"0{T}b") for c in range(2**T) if base_hist.counts[c] == 0]
print(f"patterns absent under direct encoding: {', '.join(missing)}")
print("every one of them is populated after the temporal encoder")
