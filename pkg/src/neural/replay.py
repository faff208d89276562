"""
Experience Replay
Fixed-capacity ring of (state, action, reward, next_state) records with seeded
uniform minibatch sampling.
"""
from typing import Any, List, NamedTuple, Optional

import numpy as np

from ..errors import ContractViolation

DEFAULT_CAPACITY = 500_000
DEFAULT_BATCH_SIZE = 500


class Experience(NamedTuple):
    state: np.ndarray
    action: Any
    reward: float
    next_state: np.ndarray


class ReplayMemory:
    """Ring buffer; inserting beyond capacity evicts the oldest record."""

    def __init__(self, capacity: int = DEFAULT_CAPACITY, batch_size: int = DEFAULT_BATCH_SIZE):
        if capacity < 1 or batch_size < 1:
            raise ContractViolation("capacity and batch_size must be positive")
        self.capacity = capacity
        self.batch_size = batch_size
        self._slots: List[Optional[Experience]] = []
        self._next = 0

    def __len__(self) -> int:
        return len(self._slots)

    @property
    def ready(self) -> bool:
        return len(self._slots) >= self.batch_size

    def insert(self, experience: Experience) -> None:
        if len(self._slots) < self.capacity:
            self._slots.append(experience)
        else:
            self._slots[self._next] = experience
        self._next = (self._next + 1) % self.capacity

    def sample(self, rng: np.random.Generator) -> Optional[List[Experience]]:
        """
        Uniform minibatch without replacement, or None while fewer than
        ``batch_size`` records are stored.
        """
        if not self.ready:
            return None
        picks = rng.choice(len(self._slots), size=self.batch_size, replace=False)
        return [self._slots[i] for i in picks]

    def contents(self) -> List[Experience]:
        """Stored records, oldest first."""
        if len(self._slots) < self.capacity:
            return list(self._slots)
        return self._slots[self._next:] + self._slots[:self._next]

    def clear(self) -> None:
        self._slots = []
        self._next = 0
