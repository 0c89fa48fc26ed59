"""Residual layers ``sigma(A x + b) + C x + d`` and their composition."""

import json
from dataclasses import dataclass

import numpy as np

from .gaussian import DimensionError
from .moments import ActivationKind, activation


@dataclass(frozen=True, eq=False)
class LayerParams:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    kind: ActivationKind

    def __init__(self, a, b, c, d, kind):
        a = np.atleast_2d(np.asarray(a, dtype=float))
        c = np.atleast_2d(np.asarray(c, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        d = np.atleast_1d(np.asarray(d, dtype=float))
        m, n = a.shape
        if c.shape != (m, n):
            raise DimensionError(f"C has shape {c.shape}, expected {(m, n)} to match A")
        if b.shape != (m,) or d.shape != (m,):
            raise DimensionError(f"b and d must have length {m}, got {b.size} and {d.size}")
        for name, arr in (("A", a), ("b", b), ("C", c), ("d", d)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} has non-finite entries")
            arr.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "kind", ActivationKind.parse(kind))

    @property
    def in_dim(self):
        return self.a.shape[1]

    @property
    def out_dim(self):
        return self.a.shape[0]

    @property
    def is_affine(self):
        """True when the activation path is constant (``A == 0``)."""
        return not np.any(self.a)

    def __call__(self, x):
        """Apply to a vector or to a batch of row vectors."""
        x = np.asarray(x, dtype=float)
        return activation(self.kind, x @ self.a.T + self.b) + x @ self.c.T + self.d

    def to_dict(self):
        return {
            "kind": self.kind.value,
            "a": self.a.tolist(),
            "b": self.b.tolist(),
            "c": self.c.tolist(),
            "d": self.d.tolist(),
        }

    @classmethod
    def from_dict(cls, obj):
        return cls(obj["a"], obj["b"], obj["c"], obj["d"], obj["kind"])


class Network:
    """Ordered, shape-checked list of layers."""

    def __init__(self, layers):
        layers = list(layers)
        if not layers:
            raise ValueError("a network needs at least one layer")
        for i in range(1, len(layers)):
            expected = layers[i - 1].out_dim
            if layers[i].in_dim != expected:
                raise DimensionError(f"layer {i}: expected input dim {expected}, got {layers[i].in_dim}")
        self.layers = tuple(layers)

    def __len__(self):
        return len(self.layers)

    def __iter__(self):
        return iter(self.layers)

    def __getitem__(self, i):
        return self.layers[i]

    @property
    def in_dim(self):
        return self.layers[0].in_dim

    @property
    def out_dim(self):
        return self.layers[-1].out_dim

    def __call__(self, x):
        return evaluate(self, x)

    def __repr__(self):
        dims = [self.in_dim] + [layer.out_dim for layer in self.layers]
        kinds = ",".join(layer.kind.value for layer in self.layers)
        return f"Network(dims={dims}, kinds=[{kinds}])"

    def to_dict(self):
        return {"layers": [layer.to_dict() for layer in self.layers]}

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, obj):
        if not isinstance(obj, dict) or "layers" not in obj:
            raise ValueError("network document must be an object with a 'layers' list")
        layers = []
        for i, entry in enumerate(obj["layers"]):
            try:
                layers.append(LayerParams.from_dict(entry))
            except KeyError as exc:
                raise ValueError(f"layer {i}: missing field {exc}") from None
            except (DimensionError, ValueError, TypeError) as exc:
                raise type(exc)(f"layer {i}: {exc}") from None
        return cls(layers)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json(fh.read())


def evaluate(net, x):
    """Forward pass on one input vector or an ``(N, n)`` batch."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != net.in_dim:
        raise DimensionError(f"input has dim {x.shape[-1]}, network expects {net.in_dim}")
    for layer in net:
        x = layer(x)
    return x
