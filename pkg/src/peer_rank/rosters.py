"""Who reviews whom: team and sampling rosters."""
from __future__ import annotations

from math import comb
from typing import Iterable

import numpy as np

from .core import SAMPLING_LIMIT, TEAM_LIMIT
from .errors import DomainError

MAX_SAMPLED_TEAMMATES = 2


def team_roster(employee: str, teammates: Iterable[str]) -> list[str]:
    """The first twenty teammates by id; fewer if the team is smaller."""
    teammates = set(teammates)
    if employee in teammates:
        raise DomainError(f"{employee!r} cannot be on their own roster")
    return sorted(teammates)[:TEAM_LIMIT]


def sampling_roster(employee: str, contacts: Iterable[str], teammates: Iterable[str],
                    rng: np.random.Generator) -> list[str]:
    """Up to five recent contacts, at most two of them teammates.

    The roster is drawn uniformly from all largest-possible subsets satisfying
    the teammate limit. Returned sorted by id.
    """
    contacts = sorted(set(contacts))
    if employee in contacts:
        raise DomainError(f"{employee!r} cannot be on their own roster")
    team = set(teammates)
    mates = [c for c in contacts if c in team]
    others = [c for c in contacts if c not in team]
    size = min(SAMPLING_LIMIT, len(others) + min(MAX_SAMPLED_TEAMMATES, len(mates)))
    if size == 0:
        return []
    # number of valid rosters with t teammates, for each feasible t
    options = [(t, comb(len(mates), t) * comb(len(others), size - t))
               for t in range(min(MAX_SAMPLED_TEAMMATES, len(mates), size) + 1)
               if size - t <= len(others)]
    total = sum(w for _, w in options)
    pick = int(rng.integers(total))
    for t, w in options:
        if pick < w:
            break
        pick -= w
    chosen = [mates[i] for i in rng.choice(len(mates), size=t, replace=False)] if t else []
    k = size - t
    if k:
        chosen += [others[i] for i in rng.choice(len(others), size=k, replace=False)]
    return sorted(chosen)
