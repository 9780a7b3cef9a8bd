"""Named, independent random substreams derived from one master seed.

Every source of randomness in a run (process noise, measurement noise,
hazard draws, Monte Carlo integration, ...) pulls from its own stream so
that adding draws in one place never perturbs the sequences seen by
another.  Streams are backed by counter-based Philox generators keyed by
a hash of (master seed, stream name), which makes them splittable and
platform-stable.
"""

from __future__ import annotations

import hashlib

import numpy as np

# Canonical stream names used by the simulator.  Anything may request
# additional named streams; these are just the well-known ones.
STREAM_PROCESS = "process-noise"
STREAM_MEASUREMENT = "measurement-noise"
STREAM_HAZARDS = "hazards"
STREAM_MONTE_CARLO = "monte-carlo"
STREAM_INIT = "init"
STREAM_PEER_OBS = "peer-observation"


def derive_stream_key(master_seed: int, name: str) -> int:
    """Stable 128-bit Philox key for a (seed, name) pair."""
    payload = f"{int(master_seed)}/{name}".encode("utf-8")
    digest = hashlib.sha256(payload).digest()
    return int.from_bytes(digest[:16], "little")


def make_stream(master_seed: int, name: str) -> np.random.Generator:
    """Build a fresh generator for one named stream."""
    key = derive_stream_key(master_seed, name)
    return np.random.Generator(np.random.Philox(key=key))


class RngStreams:
    """Lazily-created named generators, all derived from one master seed."""

    def __init__(self, master_seed: int):
        self.master_seed = int(master_seed)
        self._streams: dict[str, np.random.Generator] = {}

    def get(self, name: str) -> np.random.Generator:
        if name not in self._streams:
            self._streams[name] = make_stream(self.master_seed, name)
        return self._streams[name]
