from .difficulty import DEFAULT_DECAY_RATE, DifficultyRanking, draw_boost_sample, eq1_probabilities, rank_by_difficulty
from .rebalance import RebalanceSpec, rebalance_sample, rebalance_weights
