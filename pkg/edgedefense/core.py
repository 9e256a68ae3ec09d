r"""
Shared primitives of the edgedefense simulators.

This module provides the deterministic random number generator used by all
stochastic parts of the package, the quantization of continuous observations
into bins, the composition of several bins into a single tabular state index,
and the hyperparameters shared by the learning agents.

A continuous observation is discretized with a :class:`Quantizer`::

    >>> quantizer = Quantizer(0, 1, 4)
    >>> quantize(quantizer, 0.5)
    2

Several such bins are combined row-major into one index of a table::

    >>> state_index([4, 3, 2], [2, 1, 0])
    14
    >>> decode_state_index([4, 3, 2], 14)
    (2, 1, 0)

All randomness is drawn from a :class:`SeededRng`. Modules draw from child
streams, so adding draws in one module never changes the numbers another
module sees::

    >>> rng = SeededRng(1337)
    >>> rng.child("channel").random() == SeededRng(1337).child("channel").random()
    True
    >>> rng.child("channel").random() == rng.child("agent").random()
    False

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
import math
from dataclasses import dataclass

import numpy as np

from edgedefense.exceptions import ConfigurationError, ContractViolation

logger = logging.getLogger("core")

SEED_MASK = (1 << 64) - 1

# Child streams are derived as seed XOR constant. Never change these within a
# major version, they are part of the reproducibility contract.
STREAMS = {
    "channel": 0x9E3779B97F4A7C15,
    "jammer": 0xC2B2AE3D27D4EB4F,
    "observation": 0x165667B19E3779F9,
    "agent": 0xD6E8FEB86659FD93,
    "auth": 0xFF51AFD7ED558CCD,
    "pretrain": 0xC4CEB9FE1A85EC53,
    "replay": 0x27BB2EE687B0B0FD,
}


class SeededRng:
    r"""
    A seedable pseudo-random number generator.

    The generator is numpy's PCG64 (permuted congruential generator, 128 bit
    state) initialized through numpy's ``SeedSequence`` from a 64 bit seed.
    Identical seeds and identical call sequences produce bit-identical
    output.

    EXAMPLES::

        >>> a = SeededRng(7)
        >>> b = SeededRng(7)
        >>> [a.random() for _ in range(10000)] == [b.random() for _ in range(10000)]
        True

    Seeds must be 64 bit unsigned integers::

        >>> SeededRng(-1)
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ConfigurationError: Invalid value for seed: must be an integer in [0, 2^64) but found -1.

    """

    def __init__(self, seed):
        if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
            raise ConfigurationError("seed", f"must be an integer but found {seed!r}.")
        if not 0 <= seed <= SEED_MASK:
            raise ConfigurationError(
                "seed", f"must be an integer in [0, 2^64) but found {seed}."
            )
        self.seed = int(seed)
        self._generator = np.random.Generator(np.random.PCG64(self.seed))

    def __repr__(self):
        return f"SeededRng({self.seed})"

    def child(self, stream):
        r"""
        Return an independent generator for the named ``stream``.

        The child only depends on the seed of this generator, not on how many
        numbers have been drawn from it.

        EXAMPLES::

            >>> SeededRng(0).child("agent")
            SeededRng(15485907386658061715)

        ::

            >>> SeededRng(0).child("unknown")
            Traceback (most recent call last):
            ...
            KeyError: 'unknown'

        """
        return SeededRng((self.seed ^ STREAMS[stream]) & SEED_MASK)

    def random(self):
        r"""
        Return a float uniformly distributed in [0, 1).

        EXAMPLES::

            >>> 0 <= SeededRng(0).random() < 1
            True

        """
        return float(self._generator.random())

    def integers(self, high):
        r"""
        Return an integer uniformly distributed in [0, ``high``).

        EXAMPLES::

            >>> rng = SeededRng(0)
            >>> sorted(set(rng.integers(3) for _ in range(100)))
            [0, 1, 2]

        """
        return int(self._generator.integers(high))

    def integer_array(self, high, size):
        r"""
        Return ``size`` integers uniformly distributed in [0, ``high``).

        EXAMPLES::

            >>> SeededRng(0).integer_array(5, 3).shape
            (3,)

        """
        return self._generator.integers(high, size=size)

    def normal(self, scale=1.0, size=None):
        r"""
        Return normally distributed numbers with mean zero.

        EXAMPLES::

            >>> SeededRng(0).normal(0.1, size=4).shape
            (4,)

        """
        return self._generator.normal(0.0, scale, size=size)

    def uniform(self, low, high, size=None):
        r"""
        Return numbers uniformly distributed in [``low``, ``high``).

        EXAMPLES::

            >>> bool(all(-1 <= SeededRng(0).uniform(-1, 1, size=100)))
            True

        """
        return self._generator.uniform(low, high, size=size)


@dataclass(frozen=True)
class Quantizer:
    r"""
    Maps real numbers in [``lo``, ``hi``] to ``bins`` equally wide bins.

    Inputs outside of the range are clamped to the edge bins.

    EXAMPLES::

        >>> q = Quantizer(0, 1, 4)
        >>> [q.quantize(x) for x in (-7, 0, 0.24, 0.25, 0.5, 0.99, 1.0, 12)]
        [0, 0, 0, 1, 2, 3, 3, 3]

    The bins must be well defined::

        >>> Quantizer(0, 1, 0)
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ConfigurationError: Invalid value for bins: must be a positive integer but found 0.

    """

    lo: float
    hi: float
    bins: int

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ConfigurationError(
                "hi", f"must be larger than lo={self.lo} but found {self.hi}."
            )
        if isinstance(self.bins, bool) or not isinstance(self.bins, int) or self.bins < 1:
            raise ConfigurationError(
                "bins", f"must be a positive integer but found {self.bins}."
            )

    def quantize(self, x):
        r"""
        Return the bin of ``x``.

        EXAMPLES::

            >>> Quantizer(-1, 1, 2).quantize(0)
            1

        """
        if x >= self.hi:
            return self.bins - 1
        if x <= self.lo:
            return 0
        return min(
            self.bins - 1, int(math.floor((x - self.lo) / (self.hi - self.lo) * self.bins))
        )


def quantize(quantizer, x):
    r"""
    Return the bin index of ``x`` under ``quantizer``.

    EXAMPLES::

        >>> q = Quantizer(0, 1, 4)
        >>> quantize(q, 0.5), quantize(q, 1.0), quantize(q, -7)
        (2, 3, 0)

    The bin index is monotone in ``x``::

        >>> import numpy as np
        >>> bins = [quantize(q, x) for x in np.linspace(-1, 2, 1001)]
        >>> all(a <= b for a, b in zip(bins, bins[1:]))
        True

    """
    return quantizer.quantize(x)


def state_index(bins_per_field, field_bins):
    r"""
    Return the row-major mixed-radix index of the tuple ``field_bins``.

    EXAMPLES::

        >>> state_index([2, 2], [0, 0])
        0
        >>> state_index([2, 2], [1, 1])
        3
        >>> state_index([4, 3, 2], [2, 1, 0])
        14

    TESTS:

    The encoding is a bijection on a 4×4×4×4 grid::

        >>> import itertools
        >>> grid = [4, 4, 4, 4]
        >>> all(decode_state_index(grid, state_index(grid, t)) == t for t in itertools.product(range(4), repeat=4))
        True
        >>> sorted(state_index(grid, t) for t in itertools.product(range(4), repeat=4)) == list(range(256))
        True

    ::

        >>> state_index([2, 2], [0])
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ContractViolation: Expected 2 field bins but found 1.

    """
    if len(bins_per_field) != len(field_bins):
        raise ContractViolation(
            f"Expected {len(bins_per_field)} field bins but found {len(field_bins)}."
        )

    index = 0
    for field, (bins, value) in enumerate(zip(bins_per_field, field_bins)):
        if not 0 <= value < bins:
            raise ContractViolation(
                f"Field {field} has bin {value} but only {bins} bins exist."
            )
        index = index * bins + int(value)
    return index


def decode_state_index(bins_per_field, index):
    r"""
    Return the tuple of field bins encoded by ``index``, the inverse of
    :func:`state_index`.

    EXAMPLES::

        >>> decode_state_index([2, 2], 3)
        (1, 1)

    ::

        >>> decode_state_index([2, 2], 4)
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ContractViolation: Index 4 is out of range for 4 states.

    """
    total = math.prod(bins_per_field)
    if not 0 <= index < total:
        raise ContractViolation(f"Index {index} is out of range for {total} states.")

    fields = []
    for bins in reversed(bins_per_field):
        index, value = divmod(index, bins)
        fields.append(value)
    return tuple(reversed(fields))


@dataclass(frozen=True)
class AgentHyperparams:
    r"""
    Learning rate, discount factor and exploration schedule of a learning agent.

    The learning rate 0.7 and the discount factor 0.1 are the values reported
    for Q-learning based spoofing detection.

    EXAMPLES::

        >>> AgentHyperparams()
        AgentHyperparams(alpha=0.7, gamma=0.1, epsilon0=0.9, epsilon_min=0.01, epsilon_decay=0.995)

    The exploration probability decays geometrically until it reaches its floor::

        >>> hp = AgentHyperparams()
        >>> hp.epsilon(0), round(hp.epsilon(100), 6), hp.epsilon(10**6)
        (0.9, 0.545193, 0.01)

    ::

        >>> AgentHyperparams(gamma=1)
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ConfigurationError: Invalid value for gamma: must be in [0, 1) but found 1.

    """

    alpha: float = 0.7
    gamma: float = 0.1
    epsilon0: float = 0.9
    epsilon_min: float = 0.01
    epsilon_decay: float = 0.995

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ConfigurationError("alpha", f"must be in (0, 1] but found {self.alpha}.")
        if not 0 <= self.gamma < 1:
            raise ConfigurationError("gamma", f"must be in [0, 1) but found {self.gamma}.")
        if not 0 <= self.epsilon0 <= 1:
            raise ConfigurationError(
                "epsilon0", f"must be in [0, 1] but found {self.epsilon0}."
            )
        if not 0 <= self.epsilon_min <= self.epsilon0:
            raise ConfigurationError(
                "epsilon_min",
                f"must be in [0, epsilon0={self.epsilon0}] but found {self.epsilon_min}.",
            )
        if not 0 < self.epsilon_decay <= 1:
            raise ConfigurationError(
                "epsilon_decay", f"must be in (0, 1] but found {self.epsilon_decay}."
            )

    def epsilon(self, t):
        r"""
        Return the exploration probability in slot ``t``.

        EXAMPLES::

            >>> AgentHyperparams(epsilon0=0.5, epsilon_min=0.5).epsilon(1000)
            0.5

        """
        return max(self.epsilon_min, self.epsilon0 * self.epsilon_decay**t)


@dataclass(frozen=True)
class RewardWeights:
    r"""
    Weights combining the components of a reward breakdown into a utility.

    ``sinr`` weighs the spectral efficiency proxy log2(1 + SINR) in bit/s/Hz,
    ``ber`` the bit error probability, ``energy`` the consumed energy in J
    and ``delay`` the computation delay in s.

    EXAMPLES::

        >>> RewardWeights()
        RewardWeights(sinr=1.0, ber=1.0, energy=0.5, delay=0.5)

    ::

        >>> RewardWeights(0, 0, 0, 0)
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ConfigurationError: Invalid value for weights: at least one weight must be positive.

    """

    sinr: float = 1.0
    ber: float = 1.0
    energy: float = 0.5
    delay: float = 0.5

    def __post_init__(self):
        for name in ("sinr", "ber", "energy", "delay"):
            if getattr(self, name) < 0:
                raise ConfigurationError(
                    name, f"must be non-negative but found {getattr(self, name)}."
                )
        if not any(getattr(self, name) > 0 for name in ("sinr", "ber", "energy", "delay")):
            raise ConfigurationError("weights", "at least one weight must be positive.")
