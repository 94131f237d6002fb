"""Operation ledger: counts of float multiplies (MUL) and accumulates (AC).

Counting convention (applies everywhere in the package):

* float x float multiply        -> 1 MUL
* any add/subtract              -> 1 AC
* multiply gated by a binary
  (spike) operand               -> 1 AC per position where the binary
                                   operand(s) are active, nothing elsewhere
* comparisons, copies, top-k
  selection, maxpool, neuron
  membrane updates, elementwise
  nonlinearities                -> free

The last group keeps the ledger a measure of synaptic/attention arithmetic;
spiking paths whose only multiplies are spike-gated therefore record zero
MULs exactly.

Counts are attributed to a string tag (e.g. ``"encoder"``, ``"attention"``).
The active ledger/tag is held in a context variable, so single-threaded use
needs no plumbing and threaded use stays race-free per context.
"""

from __future__ import annotations

from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass, field


@dataclass
class TagCounts:
    mul: int = 0
    ac: int = 0


@dataclass
class EnergyLedger:
    """Per-tag MUL/AC counters. Counts are non-negative and monotone."""

    counts: dict[str, TagCounts] = field(default_factory=dict)

    def add(self, tag: str, mul: int = 0, ac: int = 0) -> None:
        if mul < 0 or ac < 0:
            raise ValueError("ledger increments must be non-negative")
        entry = self.counts.setdefault(tag, TagCounts())
        entry.mul += int(mul)
        entry.ac += int(ac)

    @property
    def mul_total(self) -> int:
        return sum(c.mul for c in self.counts.values())

    @property
    def ac_total(self) -> int:
        return sum(c.ac for c in self.counts.values())

    def tag(self, tag: str) -> TagCounts:
        return self.counts.get(tag, TagCounts())

    def snapshot(self) -> dict[str, tuple[int, int]]:
        return {t: (c.mul, c.ac) for t, c in self.counts.items()}

    def delta(self, since: dict[str, tuple[int, int]]) -> "EnergyLedger":
        """Ledger holding the increments since a snapshot()."""
        out = EnergyLedger()
        for t, c in self.counts.items():
            m0, a0 = since.get(t, (0, 0))
            if c.mul - m0 or c.ac - a0:
                out.add(t, mul=c.mul - m0, ac=c.ac - a0)
        return out

    def as_dict(self) -> dict:
        return {
            "tags": {t: {"mul": c.mul, "ac": c.ac} for t, c in sorted(self.counts.items())},
            "mul_total": self.mul_total,
            "ac_total": self.ac_total,
        }


_active: ContextVar[tuple[EnergyLedger, str] | None] = ContextVar("active_ledger", default=None)


@contextmanager
def counting(ledger: EnergyLedger, tag: str = "default"):
    """Route op counts to `ledger` under `tag` for the dynamic extent."""
    token = _active.set((ledger, tag))
    try:
        yield ledger
    finally:
        _active.reset(token)


def add_mul(n: int) -> None:
    entry = _active.get()
    if entry is not None and n:
        entry[0].add(entry[1], mul=n)


def add_ac(n: int) -> None:
    entry = _active.get()
    if entry is not None and n:
        entry[0].add(entry[1], ac=n)
