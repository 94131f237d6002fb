"""Leaky integrate-and-fire basics: integration, threshold firing, soft reset.

A neuron driven below threshold accumulates charge until it finally fires;
the soft reset then subtracts the threshold instead of clearing the membrane,
so residual charge carries over.
"""

import numpy as np

from tde_snn import LifParams, LifState, lif1_dual, lif_step, tensor

p = LifParams(v_th=1.0, beta=0.5)

print("constant sub-threshold drive x = 0.6, v_th = 1.0, beta = 0.5")
state = LifState(np.zeros(1))
for step in range(1, 4):
    spikes, state = lif_step(state, tensor([0.6]), p)
    print(f"  step {step}: spike={int(spikes.data[0])}  V={state.v[0]:.4f}")
print("the third step crosses threshold; V keeps the residual 0.025\n")

print("drive exactly at threshold fires immediately (step(0) = 1):")
spikes, state = lif_step(LifState(np.zeros(1)), tensor([1.0]), p)
print(f"  spike={int(spikes.data[0])}  V={state.v[0]:.4f}\n")

print("the dual neuron group also exposes its pre-reset membranes:")
train, membranes = lif1_dual(tensor(np.array([0.6, 0.6, 0.6]).reshape(3, 1)), p)
print(f"  spikes    {train.data.ravel()}")
print(f"  membranes {membranes.data.ravel()}")
