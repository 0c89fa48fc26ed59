"""Small hand-built networks on which some approximation provably fails."""

import json
import os

import numpy as np

from .ensembles import linear_layer
from .gaussian import Gaussian
from .network import LayerParams, Network
from .propagation import SigmaPointScheme


def sine_network():
    """``Y = sin(X)``."""
    return Network([LayerParams([[1.0]], [0.0], [[0.0]], [0.0], "sine")])


def averaging_network(m=100, kind="probit"):
    """``Y1_i = X`` for ``i = 1..m``, then ``Y = mean(Y1)``: two purely affine layers."""
    copy = linear_layer(np.ones((m, 1)), np.zeros(m), kind)
    average = linear_layer(np.full((1, m), 1.0 / m), np.zeros(1), kind)
    return Network([copy, average])


def aligned_sine_network(scheme=None, input_var=1.0):
    """``Y = sin(pi X / alpha)`` with ``+-alpha`` the scheme's outer sigma points for ``N(0, input_var)``."""
    scheme = scheme or SigmaPointScheme.u95()
    alpha = scheme.spread(1) * np.sqrt(input_var)
    return Network([LayerParams([[np.pi / alpha]], [0.0], [[0.0]], [0.0], "sine")])


def heaviside_network(alpha=10.0):
    """``Y1 = 2 u(X)``, ``Y = alpha u(Y1 - 3)``.

    A layer has no output gain on the activation, so ``2 u(X)`` is carried as
    two copies summed by the next layer and the final gain by a linear readout.
    """
    hidden = LayerParams([[1.0], [1.0]], [0.0, 0.0], [[0.0], [0.0]], [0.0, 0.0], "heaviside")
    step = LayerParams([[1.0, 1.0]], [-3.0], [[0.0, 0.0]], [0.0], "heaviside")
    readout = linear_layer([[alpha]], [0.0], "heaviside")
    return Network([hidden, step, readout])


def standard_input(var=1.0):
    return Gaussian([0.0], [[var]])


def write_fixtures(directory, sine_var=1.0):
    """Write the example networks as JSON, each with an embedded ``input`` block."""
    os.makedirs(directory, exist_ok=True)
    docs = {
        "sine.json": (sine_network(), sine_var),
        "averaging.json": (averaging_network(), 1.0),
        "aligned_sine_u95.json": (aligned_sine_network(SigmaPointScheme.u95()), 1.0),
        "aligned_sine_u02.json": (aligned_sine_network(SigmaPointScheme.u02()), 1.0),
        "heaviside.json": (heaviside_network(), 1.0),
    }
    paths = []
    for name, (net, var) in docs.items():
        doc = net.to_dict()
        doc["input"] = {"mean": [0.0], "cov": [[var]]}
        path = os.path.join(directory, name)
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")
        paths.append(path)
    return paths
