from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import ParameterError


def as_fraction(value):
    """Reads a decay point given as "1/3", 0.5 or a Fraction exactly."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value).limit_denominator(1_000_000)


@dataclass(frozen=True)
class SgdConfig:
    """Step-decayed SGD with classic momentum.

    The learning rate starts at `learning_rate` and is multiplied by
    `decay_factor` once the step index reaches each `decay_points` fraction
    of `total_steps`.
    """
    learning_rate: float = 0.1
    momentum: float = 0.9
    total_steps: int = 1
    decay_points: tuple = field(default=(Fraction(1, 3), Fraction(2, 3)))
    decay_factor: float = 0.1

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ParameterError(f"learning_rate must be positive, got {self.learning_rate}.")
        if not 0 <= self.momentum < 1:
            raise ParameterError(f"momentum must be in [0, 1), got {self.momentum}.")
        if self.total_steps < 1:
            raise ParameterError(f"total_steps must be at least 1, got {self.total_steps}.")
        if not 0 < self.decay_factor <= 1:
            raise ParameterError(f"decay_factor must be in (0, 1], got {self.decay_factor}.")
        points = tuple(as_fraction(p) for p in self.decay_points)
        if any(not 0 < p < 1 for p in points) or any(a >= b for a, b in zip(points, points[1:])):
            raise ParameterError(f"decay_points must be strictly increasing in (0, 1), got {self.decay_points}.")
        object.__setattr__(self, 'decay_points', points)

    def with_total_steps(self, total_steps):
        return SgdConfig(self.learning_rate, self.momentum, total_steps,
                         self.decay_points, self.decay_factor)

    def to_dict(self):
        return {
            'learning_rate': self.learning_rate,
            'momentum': self.momentum,
            'total_steps': self.total_steps,
            'decay_points': [str(p) for p in self.decay_points],
            'decay_factor': self.decay_factor,
        }


def learning_rate(config, step_index):
    # exact comparison: step 3 of 9 is past the 1/3 point
    decays = sum(1 for p in config.decay_points if step_index >= p * config.total_steps)
    return config.learning_rate * config.decay_factor ** decays


def sgd_step(layers, config, step_index):
    """
    Applies one momentum update to every parameter of `layers`:
    v <- momentum * v + grad, then w <- w - lr(step) * v.

    Parameters
    ----------
    layers : list of LinearLayer
        Layers with populated gradients; updated in place.
    config : SgdConfig
    step_index : int
        Zero-based step within the current training phase.

    Returns
    -------
    list of LinearLayer
        The same layers.
    """
    lr = learning_rate(config, step_index)
    for layer in layers:
        for _, param, grad, velocity in layer.parameters():
            velocity *= config.momentum
            velocity += grad
            param -= lr * velocity
    return layers
