r"""
Finite-state Markov fading channels.

A :class:`ChannelModel` describes the power gain of a radio link as a Markov
chain over a few discrete gain levels. The same construction drives the other
time-variant quantities of the offloading game, i.e., the available bandwidth
and the user density at the edge nodes.

EXAMPLES::

    >>> model = ChannelModel.birth_death([0.02, 0.05, 0.1, 0.2])
    >>> model.transition
    array([[0.8, 0.2, 0. , 0. ],
           [0.2, 0.6, 0.2, 0. ],
           [0. , 0.2, 0.6, 0.2],
           [0. , 0. , 0.2, 0.8]])

A chain moves between the levels of the model::

    >>> from edgedefense.core import SeededRng
    >>> chain = MarkovChain(model, SeededRng(0))
    >>> levels = [chain.step() for _ in range(1000)]
    >>> sorted(set(levels))
    [0, 1, 2, 3]

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
import bisect
import logging
from dataclasses import dataclass

import numpy as np

from edgedefense.exceptions import ConfigurationError

logger = logging.getLogger("channel")


@dataclass(frozen=True, eq=False)
class ChannelModel:
    r"""
    Discrete gain levels and the row-stochastic transition matrix between them.

    EXAMPLES::

        >>> ChannelModel((0.1, 0.2), np.array([[0.5, 0.5], [0.1, 0.9]])).levels
        2

    The levels must be strictly increasing and the rows must be probability
    distributions::

        >>> ChannelModel((0.2, 0.1), np.eye(2))
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ConfigurationError: Invalid value for gain_levels: must be positive and strictly increasing but found (0.2, 0.1).

    ::

        >>> ChannelModel((0.1, 0.2), np.array([[0.5, 0.4], [0.1, 0.9]]))
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ConfigurationError: Invalid value for transition: row 0 sums to 0.9 instead of 1.

    """

    gain_levels: tuple
    transition: np.ndarray

    def __post_init__(self):
        levels = tuple(float(level) for level in self.gain_levels)
        object.__setattr__(self, "gain_levels", levels)

        if not levels or levels[0] <= 0 or any(a >= b for a, b in zip(levels, levels[1:])):
            raise ConfigurationError(
                "gain_levels",
                f"must be positive and strictly increasing but found {self.gain_levels}.",
            )

        transition = np.asarray(self.transition, dtype=float)
        transition.setflags(write=False)
        object.__setattr__(self, "transition", transition)

        if transition.shape != (len(levels), len(levels)):
            raise ConfigurationError(
                "transition",
                f"must be a {len(levels)}×{len(levels)} matrix but found shape {transition.shape}.",
            )
        if (transition < 0).any():
            raise ConfigurationError("transition", "must not have negative entries.")
        for row, total in enumerate(transition.sum(axis=1)):
            if abs(total - 1) > 1e-12:
                raise ConfigurationError(
                    "transition", f"row {row} sums to {total:.12g} instead of 1."
                )

    @classmethod
    def birth_death(cls, gain_levels, stay_prob=0.6):
        r"""
        Return a model that stays on its level with probability ``stay_prob``
        and moves to each neighboring level with probability
        (1 - ``stay_prob``) / 2. A move beyond the first or last level stays
        on that level instead.

        The transition matrix is symmetric, so its stationary distribution is
        uniform.

        EXAMPLES::

            >>> ChannelModel.birth_death([1.0]).transition
            array([[1.]])

        ::

            >>> ChannelModel.birth_death([1.0, 2.0, 3.0], stay_prob=0.5).transition
            array([[0.75, 0.25, 0.  ],
                   [0.25, 0.5 , 0.25],
                   [0.  , 0.25, 0.75]])

        ::

            >>> ChannelModel.birth_death([1.0, 2.0], stay_prob=1.5)
            Traceback (most recent call last):
            ...
            edgedefense.exceptions.ConfigurationError: Invalid value for stay_prob: must be in [0, 1] but found 1.5.

        """
        if not 0 <= stay_prob <= 1:
            raise ConfigurationError(
                "stay_prob", f"must be in [0, 1] but found {stay_prob}."
            )

        n = len(gain_levels)
        move = (1 - stay_prob) / 2
        transition = np.zeros((n, n))
        for level in range(n):
            transition[level, level] = stay_prob
            for neighbor in (level - 1, level + 1):
                transition[level, neighbor if 0 <= neighbor < n else level] += move
        return cls(tuple(gain_levels), transition)

    @property
    def levels(self):
        r"""
        Return the number of levels of this model.

        EXAMPLES::

            >>> ChannelModel.birth_death([0.1, 0.2, 0.4]).levels
            3

        """
        return len(self.gain_levels)

    def scaled(self, factor):
        r"""
        Return a model whose gains are multiplied by ``factor``, e.g., to
        account for the path loss of a link.

        EXAMPLES::

            >>> ChannelModel.birth_death([0.1, 0.2]).scaled(0.5).gain_levels
            (0.05, 0.1)

        """
        return ChannelModel(tuple(level * factor for level in self.gain_levels), self.transition)


class MarkovChain:
    r"""
    The state of a single link driven by a :class:`ChannelModel`.

    The chain starts in a level drawn from the uniform stationary
    distribution of a birth-death model.

    EXAMPLES::

        >>> from edgedefense.core import SeededRng
        >>> chain = MarkovChain(ChannelModel.birth_death([1.0]), SeededRng(0))
        >>> chain.level, chain.gain
        (0, 1.0)
        >>> chain.step()
        0

    Empirical transition frequencies follow the transition matrix::

        >>> model = ChannelModel.birth_death([1.0, 2.0, 3.0])
        >>> chain = MarkovChain(model, SeededRng(1))
        >>> counts = np.zeros((3, 3))
        >>> for _ in range(30000):
        ...     before = chain.level
        ...     counts[before, chain.step()] += 1
        >>> frequencies = counts / counts.sum(axis=1, keepdims=True)
        >>> bool(np.abs(frequencies - model.transition).max() < 0.02)
        True

    """

    def __init__(self, model, rng, level=None):
        self.model = model
        self._rng = rng
        self._cumulative = [list(np.cumsum(row)) for row in model.transition]
        self.level = rng.integers(model.levels) if level is None else level

    @property
    def gain(self):
        return self.model.gain_levels[self.level]

    def step(self):
        r"""
        Advance the chain by one slot and return the new level.
        """
        cumulative = self._cumulative[self.level]
        u = self._rng.random()
        self.level = min(bisect.bisect_right(cumulative, u), len(cumulative) - 1)
        return self.level
