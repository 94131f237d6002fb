"""Train the toy box regressor twice: direct encoding vs the temporal encoder.

Both nets learn to localize a bright rectangle from spikes alone
(straight-through surrogate gradients). A short run is enough to see both
losses fall; the full 200-step golden-seed comparison lives in the
acceptance suite.
"""

import numpy as np

from tde_snn.train import train_variant

STEPS = 40
print(f"training {STEPS} steps per variant (seed 7, batch 6, 12x12 images)...\n")
curves = {}
for variant in ("baseline", "tde"):
    curves[variant] = train_variant(
        variant, seed=7, steps=STEPS, batch_size=6, image_size=12, channels=4
    )

print(f"{'step':>6} {'baseline':>10} {'tde':>10}")
for step in range(0, STEPS, 5):
    print(f"{step:>6} {curves['baseline'][step]:>10.5f} {curves['tde'][step]:>10.5f}")

for variant, curve in curves.items():
    first, last = np.mean(curve[:5]), np.mean(curve[-5:])
    print(f"\n{variant}: smoothed loss {first:.5f} -> {last:.5f}")
