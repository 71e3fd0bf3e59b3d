import csv
import io
import logging
from dataclasses import dataclass

import numpy as np

from ..diffkernel.rng import make_rng
from ..errors import NumericError, ParameterError
from ..utils import atomic_write_text, format_real

logger = logging.getLogger(__name__)

DEFAULT_DECAY_RATE = 2.0


def eq1_probabilities(n, decay_rate):
    """
    Selection probability of every difficulty rank.

    p_i = exp(-i R / N) / sum_{k=1..N} exp(-k R / N), with i the 1-based
    rank and rank 1 the hardest example. The common factor exp(-R / N) is
    divided out before exponentiating so large R stays finite.

    Parameters
    ----------
    n : int
        Number of ranked examples, at least 1.
    decay_rate : float
        R >= 0; R = 0 gives the uniform distribution.

    Returns
    -------
    numpy.ndarray
        Probabilities for ranks 1..N, summing to 1.
    """
    if n < 1:
        raise ParameterError(f"Need at least one example to rank, got N={n}.")
    if not decay_rate >= 0:
        raise ParameterError(f"Decay rate R must be non-negative, got {decay_rate}.")
    offsets = np.arange(n, dtype=np.float64)  # i - 1
    weights = np.exp(-offsets * (decay_rate / n))
    return weights / weights.sum()


@dataclass(frozen=True)
class DifficultyRanking:
    """
    Examples ordered hardest first.

    Attributes
    ----------
    example_ids : numpy.ndarray
        Example indices in rank order.
    losses : numpy.ndarray
        Their losses, non-increasing.
    ranks : numpy.ndarray
        1..N.
    selection_probs : numpy.ndarray
        Selection probability of each rank.
    decay_rate : float
    """
    example_ids: np.ndarray
    losses: np.ndarray
    ranks: np.ndarray
    selection_probs: np.ndarray
    decay_rate: float

    def __len__(self):
        return self.example_ids.size

    def probability_of(self, example_id):
        pos = np.flatnonzero(self.example_ids == example_id)
        if pos.size == 0:
            raise KeyError(example_id)
        return float(self.selection_probs[pos[0]])

    def to_csv_text(self):
        out = io.StringIO()
        writer = csv.writer(out, lineterminator='\n')
        writer.writerow(['example_id', 'loss', 'rank', 'p_i'])
        for eid, loss, rank, p in zip(self.example_ids, self.losses, self.ranks, self.selection_probs):
            writer.writerow([int(eid), format_real(loss), int(rank), format_real(p)])
        return out.getvalue()

    def to_csv(self, path):
        return atomic_write_text(path, self.to_csv_text())


def rank_by_difficulty(per_example_losses, decay_rate=DEFAULT_DECAY_RATE):
    """Stable descending sort of per-example losses; ties keep the original
    example order. Selection probabilities are attached by rank."""
    losses = np.asarray(per_example_losses, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(losses)):
        raise NumericError("Per-example losses must be finite to rank them.")
    if np.any(losses < 0):
        raise NumericError("Per-example losses must be non-negative to rank them.")
    order = np.argsort(-losses, kind='stable')
    return DifficultyRanking(
        example_ids=order,
        losses=losses[order],
        ranks=np.arange(1, losses.size + 1),
        selection_probs=eq1_probabilities(losses.size, decay_rate),
        decay_rate=float(decay_rate),
    )


def draw_boost_sample(ranking, sample_size, rng_seed):
    """Draws `sample_size` example ids with replacement, each draw picking
    rank i with probability p_i."""
    if sample_size < 1:
        raise ParameterError(f"sample_size must be at least 1, got {sample_size}.")
    rng = make_rng(rng_seed)
    drawn = rng.choice(len(ranking), size=sample_size, replace=True, p=ranking.selection_probs)
    logger.debug(f"Drew {sample_size} examples, {np.unique(drawn).size} distinct, R={ranking.decay_rate}")
    return ranking.example_ids[drawn]
