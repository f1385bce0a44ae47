"""Dining-cryptographers anonymous broadcast and the pad-count baseline.

Each unordered pair of diners shares a one-bit pad per round.  A diner
announces the XOR of their two (or more) pads, plus 1 if they are paying;
the XOR of all announcements is the broadcast bit, and the payer stays
untraceable to any single non-paying observer.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Mapping

import numpy as np

from .errors import ProtocolError


@dataclass(frozen=True)
class DcRound:
    n_diners: int
    pads: dict[tuple[int, int], int]
    payer: int | None
    announcements: tuple[int, ...]

    @property
    def broadcast(self) -> int:
        return sum(self.announcements) % 2


def pad_pairs(n_diners: int) -> list[tuple[int, int]]:
    return list(combinations(range(n_diners), 2))


def run_round(
    n_diners: int,
    payer: int | None,
    pad_source: np.random.Generator | Mapping[tuple[int, int], int],
) -> DcRound:
    """One broadcast round.  pad_source is either an rng (fresh random
    pads) or an explicit mapping over all unordered diner pairs."""
    if n_diners < 3:
        raise ProtocolError(f"need at least 3 diners, got {n_diners}")
    if payer is not None and not 0 <= payer < n_diners:
        raise ProtocolError(f"payer {payer} out of range")
    pairs = pad_pairs(n_diners)
    if isinstance(pad_source, Mapping):
        pads = {tuple(sorted(pair)): int(bit) % 2 for pair, bit in pad_source.items()}
        missing = set(pairs) - set(pads)
        extra = set(pads) - set(pairs)
        if missing or extra:
            raise ProtocolError(
                f"explicit pads must cover each pair exactly once "
                f"(missing {sorted(missing)}, extra {sorted(extra)})"
            )
    else:
        pads = {pair: int(pad_source.integers(0, 2)) for pair in pairs}
    announcements = []
    for diner in range(n_diners):
        total = sum(bit for pair, bit in pads.items() if diner in pair)
        if diner == payer:
            total += 1
        announcements.append(total % 2)
    return DcRound(n_diners, pads, payer, tuple(announcements))


def _observer_view(rnd: DcRound, observer: int) -> tuple:
    own = tuple(
        rnd.pads[pair] for pair in sorted(rnd.pads) if observer in pair
    )
    return own, rnd.announcements


def anonymity_exhaustive_check(n_diners: int = 3) -> bool:
    """Exact untraceability: for every non-paying observer, the multiset of
    possible views (own pads plus all announcements) is identical no matter
    which other diner paid.  Enumerates every pad assignment."""
    pairs = pad_pairs(n_diners)
    for observer in range(n_diners):
        views_by_payer = {}
        for payer in range(n_diners):
            if payer == observer:
                continue
            views = []
            for bits in product((0, 1), repeat=len(pairs)):
                pads = dict(zip(pairs, bits))
                rnd = run_round(n_diners, payer, pads)
                views.append(_observer_view(rnd, observer))
            views_by_payer[payer] = sorted(views)
        reference = next(iter(views_by_payer.values()))
        if any(v != reference for v in views_by_payer.values()):
            return False
    return True


def anonymity_sampled_check(
    n_diners: int, trials: int, rng: np.random.Generator, z: float = 3.0
) -> float:
    """Sampled variant for larger tables: compares the observer-view
    distributions for two candidate payers and returns the largest
    per-view z-statistic (should stay under z for honest rounds)."""
    observer = n_diners - 1
    payers = (0, 1)
    counts: dict[int, dict[tuple, int]] = {p: {} for p in payers}
    for _ in range(trials):
        for p in payers:
            rnd = run_round(n_diners, p, rng)
            view = _observer_view(rnd, observer)
            counts[p][view] = counts[p].get(view, 0) + 1
    worst = 0.0
    views = set(counts[payers[0]]) | set(counts[payers[1]])
    for view in views:
        a = counts[payers[0]].get(view, 0)
        b = counts[payers[1]].get(view, 0)
        pooled = (a + b) / (2 * trials)
        if pooled in (0.0, 1.0):
            continue
        sigma = (pooled * (1 - pooled) * 2 / trials) ** 0.5
        worst = max(worst, abs(a - b) / trials / sigma)
    return worst


def pad_complexity(n_voters: int) -> tuple[int, int]:
    """(total classical one-time pads, entangled states per voter).

    The pairwise-pad scheme costs N(N-1)/2 pads in total (N-1 per voter);
    the entangled-ballot scheme hands each voter a single shared state.
    """
    if n_voters < 2:
        raise ProtocolError(f"need at least 2 voters, got {n_voters}")
    return n_voters * (n_voters - 1) // 2, 1
