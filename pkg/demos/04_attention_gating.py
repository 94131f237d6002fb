"""Attention gating: temporal weights steer the encoder's blend coefficients.

Each batch, the per-step temporal attention floats are averaged over samples
and blended halfway into the carried coefficients. High alpha keeps the step
close to the stem feature; low alpha lets the evolved feature dominate.
"""

from tde_snn import Tensor, build_pipeline
from tde_snn import rng as rng_mod

pipe = build_pipeline(42, in_channels=1, channels=8, t_steps=4, variant="sda")
image = Tensor(rng_mod.stream(42, "input").normal(0.0, 1.0, (1, 8, 8)))

print("alpha per time step, starting from the uninformative midpoint 0.5:\n")
print("  round  " + "  ".join(f"t={t}" for t in range(1, 5)))
print("      0  " + "  ".join(f"{a:.3f}" for a in pipe.enc.alpha))
for rnd in range(1, 6):
    pipe.forward(image, train=True)
    print(f"      {rnd}  " + "  ".join(f"{a:.3f}" for a in pipe.enc.alpha))

print("\neach update halves the distance to the batch-mean attention, so the")
print("coefficients settle geometrically; eval mode never mutates them")
