r"""
A small convolutional network that estimates action values.

The network reads a window of the most recent observations, each extended by
the action that preceded it, as a matrix with one row per slot. Two
convolutional layers slide along the time axis, followed by two fully
connected layers. All hidden layers use ReLU activations.

EXAMPLES::

    >>> from edgedefense.core import SeededRng
    >>> net = QNetwork(NetworkSpec(actions=4), rng=SeededRng(0))
    >>> net.spec.signature
    'W=8 C=5 F1=8 k1=3 F2=8 k2=3 H=32 A=4'
    >>> net_forward(net, np.zeros((8, 5))).shape
    (4,)

"""
# ********************************************************************
#  This file is part of edgedefense.
#
#        Copyright (C) 2026 the edgedefense authors
#
#  edgedefense is free software: you can redistribute it and/or modify
#  it under the terms of the GNU General Public License as published by
#  the Free Software Foundation, either version 3 of the License, or
#  (at your option) any later version.
#
#  edgedefense is distributed in the hope that it will be useful,
#  but WITHOUT ANY WARRANTY; without even the implied warranty of
#  MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
#  GNU General Public License for more details.
#
#  You should have received a copy of the GNU General Public License
#  along with edgedefense. If not, see <https://www.gnu.org/licenses/>.
# ********************************************************************
import logging
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from edgedefense.exceptions import ConfigurationError, ContractViolation, WeightsFormatError

logger = logging.getLogger("network")

FORMAT = "edgedefense-qnetwork 1"

TENSORS = (
    "conv1.weight",
    "conv1.bias",
    "conv2.weight",
    "conv2.bias",
    "fc1.weight",
    "fc1.bias",
    "fc2.weight",
    "fc2.bias",
)


@dataclass(frozen=True)
class NetworkSpec:
    r"""
    The layout of a :class:`QNetwork`.

    The input is a ``window`` × (``features`` + 1) matrix. The convolutions
    have ``filters1`` and ``filters2`` filters of width ``kernel1`` and
    ``kernel2``. The hidden fully connected layer has ``hidden`` units and
    the output layer one unit per action.

    EXAMPLES::

        >>> spec = NetworkSpec(actions=12)
        >>> spec.channels, spec.conv1_length, spec.conv2_length
        (5, 6, 4)
        >>> spec.shapes["fc1.weight"]
        (32, 32)

    The window must be long enough for both convolutions::

        >>> NetworkSpec(actions=2, window=4)
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ConfigurationError: Invalid value for window: must be at least kernel1 + kernel2 - 1 = 5 but found 4.

    """

    actions: int
    window: int = 8
    features: int = 4
    filters1: int = 8
    kernel1: int = 3
    filters2: int = 8
    kernel2: int = 3
    hidden: int = 32

    def __post_init__(self):
        for name in ("actions", "window", "features", "filters1", "kernel1", "filters2", "kernel2", "hidden"):
            if getattr(self, name) < 1:
                raise ConfigurationError(name, f"must be positive but found {getattr(self, name)}.")
        if self.window < self.kernel1 + self.kernel2 - 1:
            raise ConfigurationError(
                "window",
                f"must be at least kernel1 + kernel2 - 1 = {self.kernel1 + self.kernel2 - 1} but found {self.window}.",
            )

    @property
    def channels(self):
        return self.features + 1

    @property
    def conv1_length(self):
        return self.window - self.kernel1 + 1

    @property
    def conv2_length(self):
        return self.conv1_length - self.kernel2 + 1

    @property
    def shapes(self):
        return {
            "conv1.weight": (self.filters1, self.channels, self.kernel1),
            "conv1.bias": (self.filters1,),
            "conv2.weight": (self.filters2, self.filters1, self.kernel2),
            "conv2.bias": (self.filters2,),
            "fc1.weight": (self.hidden, self.filters2 * self.conv2_length),
            "fc1.bias": (self.hidden,),
            "fc2.weight": (self.actions, self.hidden),
            "fc2.bias": (self.actions,),
        }

    @property
    def signature(self):
        return (
            f"W={self.window} C={self.channels} F1={self.filters1} k1={self.kernel1} "
            f"F2={self.filters2} k2={self.kernel2} H={self.hidden} A={self.actions}"
        )


def _relu(x):
    return np.maximum(x, 0)


class QNetwork:
    r"""
    A network of the layout ``spec``.

    Weights are drawn uniformly from [-√(6/fan_in), √(6/fan_in)] when a
    ``rng`` is given. Otherwise all weights are zero.

    EXAMPLES:

    A network without weights values all actions at zero, so a greedy agent
    picks the first action::

        >>> net = QNetwork(NetworkSpec(actions=3))
        >>> int(np.argmax(net_forward(net, np.ones((8, 5)))))
        0

    A degenerate network that only consists of a single 2×2 filter computes
    a dot product::

        >>> spec = NetworkSpec(actions=1, window=2, features=1, filters1=1, kernel1=2, filters2=1, kernel2=1, hidden=1)
        >>> net = QNetwork(spec)
        >>> net.params["conv1.weight"][0] = [[0.5, 1.0], [2.0, 0.25]]
        >>> for name in ("conv2.weight", "fc1.weight", "fc2.weight"):
        ...     net.params[name][...] = 1
        >>> net_forward(net, np.array([[1.0, 2.0], [3.0, 4.0]])).tolist()
        [8.5]

    """

    def __init__(self, spec, rng=None):
        self.spec = spec
        self.params = {}
        for name, shape in spec.shapes.items():
            if rng is None or name.endswith(".bias"):
                self.params[name] = np.zeros(shape)
            else:
                limit = np.sqrt(6 / np.prod(shape[1:]))
                self.params[name] = rng.uniform(-limit, limit, size=shape)

    def copy(self):
        r"""
        Return an independent copy of this network.

        EXAMPLES::

            >>> from edgedefense.core import SeededRng
            >>> net = QNetwork(NetworkSpec(actions=2), rng=SeededRng(0))
            >>> clone = net.copy()
            >>> clone.params["fc2.bias"][0] = 1
            >>> float(net.params["fc2.bias"][0])
            0.0

        """
        clone = QNetwork(self.spec)
        clone.load_params(self)
        return clone

    def load_params(self, other):
        for name, value in other.params.items():
            self.params[name] = value.copy()

    def _batch(self, x):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 2
        if single:
            x = x[np.newaxis]
        if x.shape[1:] != (self.spec.window, self.spec.channels):
            raise ContractViolation(
                f"Expected input windows of shape {(self.spec.window, self.spec.channels)} but found {x.shape[1:]}."
            )
        return x, single

    def _forward(self, x):
        p = self.params
        cache = {"x1": sliding_window_view(x, self.spec.kernel1, axis=1)}
        cache["z1"] = np.einsum("blck,fck->blf", cache["x1"], p["conv1.weight"]) + p["conv1.bias"]
        cache["x2"] = sliding_window_view(_relu(cache["z1"]), self.spec.kernel2, axis=1)
        cache["z2"] = np.einsum("blck,fck->blf", cache["x2"], p["conv2.weight"]) + p["conv2.bias"]
        cache["x3"] = _relu(cache["z2"]).reshape(len(x), -1)
        cache["z3"] = cache["x3"] @ p["fc1.weight"].T + p["fc1.bias"]
        cache["x4"] = _relu(cache["z3"])
        return cache["x4"] @ p["fc2.weight"].T + p["fc2.bias"], cache

    def forward(self, x):
        r"""
        Return the action values of the window ``x`` or of a batch of windows.
        """
        x, single = self._batch(x)
        out, _ = self._forward(x)
        return out[0] if single else out

    def loss_and_gradients(self, x, actions, targets):
        r"""
        Return the mean squared error between the values of ``actions`` in
        the windows ``x`` and ``targets``, and its gradients with respect
        to the parameters.
        """
        x, _ = self._batch(x)
        actions = np.asarray(actions, dtype=int)
        targets = np.asarray(targets, dtype=float)
        batch = np.arange(len(x))

        out, cache = self._forward(x)
        error = out[batch, actions] - targets
        loss = float(np.mean(error**2))

        p = self.params
        grads = {}
        dout = np.zeros_like(out)
        dout[batch, actions] = 2 * error / len(x)

        grads["fc2.weight"] = dout.T @ cache["x4"]
        grads["fc2.bias"] = dout.sum(axis=0)

        dz3 = (dout @ p["fc2.weight"]) * (cache["z3"] > 0)
        grads["fc1.weight"] = dz3.T @ cache["x3"]
        grads["fc1.bias"] = dz3.sum(axis=0)

        dz2 = (dz3 @ p["fc1.weight"]).reshape(cache["z2"].shape) * (cache["z2"] > 0)
        grads["conv2.weight"] = np.einsum("blf,blck->fck", dz2, cache["x2"])
        grads["conv2.bias"] = dz2.sum(axis=(0, 1))

        dx2 = np.einsum("blf,fck->blck", dz2, p["conv2.weight"])
        dh1 = np.zeros_like(cache["z1"])
        for k in range(self.spec.kernel2):
            dh1[:, k:k + self.spec.conv2_length, :] += dx2[..., k]
        dz1 = dh1 * (cache["z1"] > 0)
        grads["conv1.weight"] = np.einsum("blf,blck->fck", dz1, cache["x1"])
        grads["conv1.bias"] = dz1.sum(axis=(0, 1))

        return loss, grads

    def sgd(self, grads, learning_rate):
        for name, grad in grads.items():
            self.params[name] -= learning_rate * grad

    def save(self, stream):
        r"""
        Write the weights of this network to ``stream``.

        EXAMPLES::

            >>> from io import StringIO
            >>> from edgedefense.core import SeededRng
            >>> net = QNetwork(NetworkSpec(actions=2), rng=SeededRng(0))
            >>> weights = StringIO()
            >>> net.save(weights)
            >>> print(weights.getvalue()[:80])
            edgedefense-qnetwork 1
            W=8 C=5 F1=8 k1=3 F2=8 k2=3 H=32 A=2
            conv1.weight 8,5,3 ...

        Loading the weights restores the network exactly::

            >>> _ = weights.seek(0)
            >>> restored = QNetwork.load(weights, net.spec)
            >>> windows = SeededRng(1).uniform(0, 1, size=(5, 8, 5))
            >>> bool((restored.forward(windows) == net.forward(windows)).all())
            True

        """
        stream.write(f"{FORMAT}\n{self.spec.signature}\n")
        for name in TENSORS:
            value = self.params[name]
            shape = ",".join(str(n) for n in value.shape)
            numbers = " ".join("%.17g" % x for x in value.ravel())
            stream.write(f"{name} {shape} {numbers}\n")

    @classmethod
    def load(cls, stream, spec):
        r"""
        Return the network of layout ``spec`` whose weights are read from ``stream``.

        EXAMPLES:

        The weights must have the shapes of the layout::

            >>> from io import StringIO
            >>> weights = StringIO()
            >>> QNetwork(NetworkSpec(actions=12)).save(weights)
            >>> _ = weights.seek(0)
            >>> QNetwork.load(weights, NetworkSpec(actions=4))
            Traceback (most recent call last):
            ...
            edgedefense.exceptions.WeightsFormatError: Expected fc2.weight of shape (4, 32) but found (12, 32).

        """
        lines = stream.read().splitlines()
        header = lines[0].strip() if lines else ""
        if header != FORMAT:
            raise WeightsFormatError(
                f"Expected a weights file starting with '{FORMAT}' but found '{header}'."
            )
        if len(lines) != 2 + len(TENSORS):
            raise WeightsFormatError(
                f"Expected {len(TENSORS)} tensors but found {max(0, len(lines) - 2)} lines of tensors."
            )

        net = cls(spec)
        for name, line in zip(TENSORS, lines[2:]):
            if len(line.split()) < 2:
                raise WeightsFormatError(f"Expected tensor {name} but found '{line.strip()}'.")
            found, shape, *numbers = line.split()
            if found != name:
                raise WeightsFormatError(f"Expected tensor {name} but found {found}.")
            shape = tuple(int(n) for n in shape.split(","))
            if shape != spec.shapes[name]:
                raise WeightsFormatError(
                    f"Expected {name} of shape {spec.shapes[name]} but found {shape}."
                )
            if len(numbers) != np.prod(shape):
                raise WeightsFormatError(
                    f"Expected {np.prod(shape)} values for {name} but found {len(numbers)}."
                )
            net.params[name] = np.array([float(x) for x in numbers]).reshape(shape)

        signature = lines[1].strip()
        if signature != spec.signature:
            raise WeightsFormatError(
                f"Expected weights for a network '{spec.signature}' but found '{signature}'."
            )
        logger.debug("Loaded weights for network '%s'.", spec.signature)
        return net


def net_forward(net, window):
    r"""
    Return the action values that ``net`` estimates for the input ``window``.

    EXAMPLES::

        >>> net = QNetwork(NetworkSpec(actions=3))
        >>> net_forward(net, np.zeros((8, 5))).tolist()
        [0.0, 0.0, 0.0]
        >>> net_forward(net, np.zeros((8, 4)))
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ContractViolation: Expected input windows of shape (8, 5) but found (8, 4).

    """
    return net.forward(window)


def gradient_check(net, x, actions, targets, h=1e-5):
    r"""
    Return the largest relative error between the gradients of
    :meth:`QNetwork.loss_and_gradients` and central finite differences with
    step ``h``.

    EXAMPLES::

        >>> from edgedefense.core import SeededRng
        >>> rng = SeededRng(0)
        >>> spec = NetworkSpec(actions=3, window=4, features=2, filters1=2, kernel1=2, filters2=2, kernel2=2, hidden=4)
        >>> errors = []
        >>> for trial in range(10):
        ...     net = QNetwork(spec, rng=rng)
        ...     for name in net.params:
        ...         net.params[name] += rng.uniform(-0.1, 0.1, size=net.params[name].shape)
        ...     x = rng.uniform(-1, 1, size=(4, 4, 3))
        ...     errors.append(gradient_check(net, x, rng.integer_array(3, 4), rng.uniform(-1, 1, size=4)))
        >>> max(errors) < 1e-4
        True

    """
    _, grads = net.loss_and_gradients(x, actions, targets)

    worst = 0.0
    for name, value in net.params.items():
        for index in np.ndindex(value.shape):
            original = value[index]
            value[index] = original + h
            plus, _ = net.loss_and_gradients(x, actions, targets)
            value[index] = original - h
            minus, _ = net.loss_and_gradients(x, actions, targets)
            value[index] = original

            numeric = (plus - minus) / (2 * h)
            analytic = grads[name][index]
            error = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-6)
            worst = max(worst, float(error))
    return worst
