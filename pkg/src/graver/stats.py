"""Match aggregation and Agresti-Coull confidence intervals.

Win rates are reported with the Agresti-Coull interval: with z the normal
quantile (1.96 for 95%), ñ = n + z², p̃ = (wins + z²/2) / ñ, the interval is
p̃ ± z·sqrt(p̃(1-p̃)/ñ), clipped to [0, 1]. Games cannot draw (komi 7.5), so
a summary has no draw column.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .search import MatchRecord

DEFAULT_Z = 1.96


class EmptySample(Exception):
    """Summary requested over zero games."""


@dataclass(frozen=True)
class MatchSummary:
    wins: int
    games: int
    winrate: float
    ci_low: float
    ci_high: float
    z: float = DEFAULT_Z

    @property
    def half_width(self) -> float:
        """Half of the (unclipped-symmetric) interval around the centre."""
        return (self.ci_high - self.ci_low) / 2.0

    @property
    def max_deviation(self) -> float:
        """Largest distance between the raw winrate and an interval end."""
        return max(self.ci_high - self.winrate, self.winrate - self.ci_low)

    def __str__(self) -> str:
        return (
            f"{self.wins}/{self.games} = {100 * self.winrate:.1f}% "
            f"[{100 * self.ci_low:.1f}%, {100 * self.ci_high:.1f}%] @95%"
        )


def agresti_coull(wins: int, games: int, z: float = DEFAULT_Z) -> MatchSummary:
    if games <= 0:
        raise EmptySample("no games to summarize")
    if not 0 <= wins <= games:
        raise ValueError(f"wins {wins} outside [0, {games}]")
    if z <= 0:
        raise ValueError("z must be positive")
    n_tilde = games + z * z
    p_tilde = (wins + z * z / 2.0) / n_tilde
    half = z * math.sqrt(p_tilde * (1.0 - p_tilde) / n_tilde)
    return MatchSummary(
        wins=wins,
        games=games,
        winrate=wins / games,
        ci_low=max(0.0, p_tilde - half),
        ci_high=min(1.0, p_tilde + half),
        z=z,
    )


def summarize(records: list[MatchRecord], perspective: str = "a",
              z: float = DEFAULT_Z) -> MatchSummary:
    """Win rate of one agent over both colour assignments."""
    if not records:
        raise EmptySample("no match records")
    if perspective not in ("a", "b"):
        raise ValueError("perspective must be 'a' or 'b'")
    wins = sum(1 for r in records if r.winner == perspective)
    return agresti_coull(wins, len(records), z)


def summary_table(records: list[MatchRecord], z: float = DEFAULT_Z) -> str:
    """Fixed-width report of one finished match."""
    a = summarize(records, "a", z)
    b = summarize(records, "b", z)
    name_a = records[0].agent_a
    name_b = records[0].agent_b
    width = max(len(name_a), len(name_b), 7)
    lines = [
        f"{'agent':<{width}}  {'wins':>5}  {'games':>5}  {'winrate':>8}  95% interval",
        f"{name_a:<{width}}  {a.wins:>5}  {a.games:>5}  {100 * a.winrate:>7.1f}%  "
        f"[{100 * a.ci_low:.1f}%, {100 * a.ci_high:.1f}%]",
        f"{name_b:<{width}}  {b.wins:>5}  {b.games:>5}  {100 * b.winrate:>7.1f}%  "
        f"[{100 * b.ci_low:.1f}%, {100 * b.ci_high:.1f}%]",
    ]
    return "\n".join(lines)
