"""Policies on a discovered state set, and the (K, policies) hypothesis pair."""

from __future__ import annotations

from dataclasses import dataclass, field

from .cmp import RESET


@dataclass(frozen=True)
class Policy:
    """Partial action map; RESET everywhere outside its domain."""

    actions: dict

    def __post_init__(self):
        object.__setattr__(self, "actions", dict(self.actions))

    @property
    def domain(self):
        return frozenset(self.actions)

    def action_for(self, s: int) -> int:
        return self.actions.get(s, RESET)

    def to_json(self) -> dict:
        return {str(s): a for s, a in sorted(self.actions.items())}

    @classmethod
    def from_json(cls, doc: dict) -> "Policy":
        return cls({int(s): int(a) for s, a in doc.items()})


@dataclass(frozen=True)
class Hypothesis:
    """Discovered states with one navigation policy per state."""

    policies: dict

    def __post_init__(self):
        object.__setattr__(self, "policies", dict(self.policies))

    @property
    def K(self):
        return frozenset(self.policies)

    def policy(self, s: int) -> Policy:
        return self.policies[s]

    def states(self) -> list:
        return sorted(self.policies)

    def with_removed(self, states) -> "Hypothesis":
        drop = set(states)
        return Hypothesis({s: p for s, p in self.policies.items() if s not in drop})

    def with_added(self, additions: dict) -> "Hypothesis":
        merged = dict(self.policies)
        merged.update(additions)
        return Hypothesis(merged)

    @classmethod
    def empty(cls) -> "Hypothesis":
        return cls({})

    def to_json(self) -> dict:
        return {str(s): p.to_json() for s, p in sorted(self.policies.items())}

    @classmethod
    def from_json(cls, doc: dict) -> "Hypothesis":
        return cls({int(s): Policy.from_json(p) for s, p in doc.items()})
