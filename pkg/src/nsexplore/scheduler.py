"""Square-root stream scheduling for the building phase.

Stream p is initiated at quantum q = (p-1)^2 + 1, so after quantum q exactly
ceil(sqrt(q)) streams exist, and at quantum b^2 every stream has been active
for exactly b quanta.  The scheduler itself is environment-free so the exact
combinatorial invariants can be checked directly.
"""

from __future__ import annotations

import math

from .errors import ConfigError


class StreamScheduler:
    def __init__(self):
        self.q = 0
        self.quanta_served = {}
        self.last_active = {}

    @property
    def initiated(self):
        return sorted(self.quanta_served)

    def initiate(self, q: int):
        """Streams newly initiated at quantum q (at most one)."""
        p = math.isqrt(q - 1) + 1
        new = []
        if (p - 1) ** 2 + 1 == q and p not in self.quanta_served:
            self.quanta_served[p] = 0
            self.last_active[p] = 0
            new.append(p)
        return new

    def allocate(self, q: int) -> int:
        """Stream active during quantum q, by the three allocation rules."""
        if not self.quanta_served:
            raise ConfigError("no stream initiated yet")
        if q == 1:
            return 1
        served = self.quanta_served
        if len(set(served.values())) == 1:
            # least recently active, ties by smallest id
            return min(served, key=lambda p: (self.last_active[p], p))
        return min(served, key=lambda p: (served[p], p))

    def next_quantum(self):
        """Advance one quantum; returns (q, newly initiated, active stream)."""
        self.q += 1
        new = self.initiate(self.q)
        p = self.allocate(self.q)
        self.quanta_served[p] += 1
        self.last_active[p] = self.q
        return self.q, new, p

    def fairness_gap(self) -> int:
        """max - min of quanta_served, ignoring a newest stream still catching
        up (initiation necessarily opens a gap of b that rule iii closes)."""
        if not self.quanta_served:
            return 0
        newest = max(self.quanta_served)
        others = [c for p, c in self.quanta_served.items() if p != newest]
        if others and self.quanta_served[newest] < min(others):
            return max(others) - min(others)
        served = list(self.quanta_served.values())
        return max(served) - min(served)
