"""Random initialized networks for the benchmark ensembles."""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .gaussian import Gaussian
from .moments import ActivationKind, activation
from .network import LayerParams, Network

INPUT_DIM = 3


class Architecture(str, Enum):
    WIDE = "wide"
    DEEP = "deep"

    @property
    def depth(self):
        return 5 if self is Architecture.WIDE else 20

    @property
    def width(self):
        return 400 if self is Architecture.WIDE else 100


class InputVariance(str, Enum):
    SMALL = "small"
    MEDIUM = "medium"
    LARGE = "large"

    @property
    def scale(self):
        return {"small": 1e-2, "medium": 1.0, "large": 1e2}[self.value]


@dataclass(frozen=True)
class EnsembleSpec:
    architecture: Architecture
    activation: ActivationKind
    residual: bool = False
    variance: InputVariance = InputVariance.MEDIUM
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "architecture", Architecture(self.architecture))
        object.__setattr__(self, "activation", ActivationKind.parse(self.activation))
        object.__setattr__(self, "variance", InputVariance(self.variance))

    @property
    def label(self):
        res = "-residual" if self.residual else ""
        return f"{self.architecture.value}-{self.activation.value}{res}-{self.variance.value}-seed{self.seed}"


def _weights(rng, rows, cols):
    # entry variance sqrt(2) / fan-in
    return rng.normal(0.0, np.sqrt(np.sqrt(2.0) / cols), size=(rows, cols))


def _biases(rng, kind, size):
    if kind is ActivationKind.SINE:
        return rng.uniform(-np.pi, np.pi, size=size)
    return rng.normal(0.0, 1.0, size=size)


def build_network(spec):
    """Hidden layers ``3 -> width -> ... -> width``, then a linear ``width -> 1`` readout.

    The network depends only on the architecture, activation, residual flag
    and seed; the input variance does not enter.
    """
    rng = np.random.default_rng(np.random.SeedSequence([int(spec.seed)]))
    kind = spec.activation
    width = spec.architecture.width
    layers = []
    fan_in = INPUT_DIM
    for _ in range(spec.architecture.depth):
        a = _weights(rng, width, fan_in)
        b = _biases(rng, kind, width)
        if spec.residual and fan_in == width:
            c = np.eye(width)
        else:
            c = np.zeros((width, fan_in))
        layers.append(LayerParams(a, b, c, np.zeros(width), kind))
        fan_in = width
    layers.append(linear_layer(_weights(rng, 1, fan_in), np.zeros(1), kind))
    return Network(layers)


def linear_layer(c, d, kind):
    """Purely affine layer ``x -> C x + d`` written as ``A = 0, b = 0`` with ``sigma(0)`` folded into ``d``."""
    c = np.atleast_2d(np.asarray(c, dtype=float))
    d = np.atleast_1d(np.asarray(d, dtype=float))
    rows, cols = c.shape
    offset = activation(kind, np.zeros(rows))
    return LayerParams(np.zeros((rows, cols)), np.zeros(rows), c, d - offset, kind)


def input_gaussian(spec):
    return Gaussian(np.zeros(INPUT_DIM), spec.variance.scale * np.eye(INPUT_DIM))
