"""Event-camera input: accumulate a DVS event stream into a polarity frame.

Events are (x, y, timestamp, polarity) records; a frame is the signed sum of
polarities per pixel over a time window. Both the `x,y,t,p` CSV format and
the packed 13-byte binary format round-trip losslessly.
"""

import tempfile
from pathlib import Path

from tde_snn import Event, accumulate_events
from tde_snn.encoder import read_events_bin, write_events_bin

events = [
    Event(x=1, y=1, t=5, p=+1),
    Event(x=1, y=1, t=6, p=+1),
    Event(x=0, y=0, t=7, p=-1),
    Event(x=3, y=2, t=950, p=+1),  # outside the window below
]

frame = accumulate_events(events, height=4, width=4, window=(0, 100))
print("events:", [(e.x, e.y, e.t, e.p) for e in events])
print("window [0, 100) accumulates to:")
for row in frame.data[0]:
    print("  " + " ".join(f"{int(v):+d}" for v in row))

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "events.bin"
    write_events_bin(events, path)
    back = read_events_bin(path)
    print(f"\nbinary round trip: {path.stat().st_size} bytes for {len(events)} events,")
    print(f"parsed back identically: {back == events}")
