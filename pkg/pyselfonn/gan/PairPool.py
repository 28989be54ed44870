from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..dsp.segments import Segment
from ..errors import EmptyInputError


@dataclass(frozen=True, eq=False)
class TrainPair(object):
    healthy: Segment
    faulty: Segment

    def __post_init__(self):
        if self.healthy.key != self.faulty.key:
            raise ValueError(
                f"pair mixes working conditions {self.healthy.key} and {self.faulty.key}"
            )

    @property
    def key(self):
        return self.healthy.key


class PairPool(object):
    """Healthy segments paired with faulty segments of the same (machine,
    sensor, speed, load), redrawn uniformly at every :meth:`sample`."""

    def __init__(self, healthy: Sequence[Segment], faulty: Sequence[Segment]):
        by_key: Dict[Tuple, List[Segment]] = {}
        for segment in faulty:
            by_key.setdefault(segment.key, []).append(segment)
        self.healthy: List[Segment] = [s for s in healthy if s.key in by_key]
        self.faulty_by_key = by_key
        if not self.healthy:
            raise EmptyInputError("no healthy segment has a condition-matched faulty segment")

    def __len__(self) -> int:
        return len(self.healthy)

    def sample(self, rng: np.random.Generator) -> List[TrainPair]:
        pairs = []
        for h in self.healthy:
            candidates = self.faulty_by_key[h.key]
            pairs.append(TrainPair(h, candidates[int(rng.integers(len(candidates)))]))
        return pairs
