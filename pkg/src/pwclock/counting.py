"""Reproducible coincidence-count sampling.

Every random draw goes through a stream: a Philox (counter-based) generator
keyed by the global seed plus a tuple of integers naming the cell, e.g.
``make_stream(seed, tau_index, delta_index)``. Streams with distinct keys are
independent, so cells can be sampled in any order or concurrently and the
results depend only on (seed, key).
"""

from dataclasses import dataclass, field

import numpy as np

PROB_SUM_TOL = 1e-9


@dataclass
class CountRecord:
    labels: list
    counts: np.ndarray
    total: float = field(default=None)

    def __post_init__(self):
        self.counts = np.asarray(self.counts)
        if len(self.labels) != len(self.counts):
            raise ValueError(f"{len(self.labels)} labels for {len(self.counts)} counts")
        if np.any(self.counts < 0):
            raise ValueError("counts must be non-negative")
        total = self.counts.sum()
        if self.total is None:
            self.total = total
        elif not np.isclose(self.total, total, rtol=0, atol=1e-9 * max(1.0, abs(total))):
            raise ValueError(f"total {self.total} does not match sum of counts {total}")

    def as_dict(self):
        return dict(zip(self.labels, self.counts.tolist()))


def make_stream(seed, *key):
    """Independent generator for (seed, key)."""
    if seed < 0 or any(k < 0 for k in key):
        raise ValueError("seed and stream key must be non-negative integers")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def sample_multinomial(probs, n, stream, labels=None):
    probs = np.asarray(probs, dtype=float)
    if np.any(probs < 0):
        raise ValueError("probabilities must be non-negative")
    if abs(probs.sum() - 1.0) > PROB_SUM_TOL:
        raise ValueError(f"probabilities must sum to 1, got {probs.sum():.12g}")
    if n < 0:
        raise ValueError(f"number of trials must be non-negative, got {n}")
    # numpy rejects sums that exceed 1 by rounding; renormalize inside the tolerance
    counts = stream.multinomial(int(n), probs / probs.sum())
    if labels is None:
        labels = list(range(len(probs)))
    return CountRecord(list(labels), counts, int(n))


def sample_poisson(mean, stream):
    if not mean >= 0:
        raise ValueError(f"Poisson mean must be non-negative, got {mean}")
    return int(stream.poisson(mean))
