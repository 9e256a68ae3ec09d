r"""
Jammers of the anti-jamming offloading game.

A jammer decides in every slot which edge node it jams, if any. The
:class:`SweepJammer` cycles through the edge nodes on a fixed period while
the :class:`SmartJammer` learns which edge node hurts the device most.

EXAMPLES::

    >>> jammer = make_jammer(JammerConfig(kind="sweep", sweep_period_slots=2), num_edges=3, rng=None)
    >>> [jammer.target(slot) for slot in range(8)]
    [0, 0, 1, 1, 2, 2, 0, 0]

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
from dataclasses import dataclass, field

from edgedefense.agents.tabular import QTable, epsilon_greedy, q_update
from edgedefense.core import AgentHyperparams
from edgedefense.exceptions import ConfigurationError

logger = logging.getLogger("jammer")

JAMMER_KINDS = ("none", "sweep", "smart")


@dataclass(frozen=True)
class JammerConfig:
    r"""
    The attacker of the offloading game.

    The jamming power received at an edge node is ``jam_power_mw`` times the
    gain of the jammer's link to that node. Link gains follow a Markov
    chain over ``gain_levels`` and are scaled by the distance to the edge
    node as ``distance_to_edge`` ^ -``path_loss_exp``. Without distances, the
    jammer is 1 m away from every edge node.

    A smart jammer learns with ``hyperparams`` and pays ``idle_cost`` or
    ``jam_cost`` per slot depending on whether it jams.

    EXAMPLES::

        >>> JammerConfig().kind
        'sweep'

    ::

        >>> JammerConfig(kind="reactive")
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ConfigurationError: Invalid value for kind: must be one of none, sweep, smart but found 'reactive'.

    """

    kind: str = "sweep"
    jam_power_mw: float = 100.0
    sweep_period_slots: int = 2
    gain_levels: tuple = (0.05, 0.1, 0.2, 0.4)
    distance_to_edge: tuple = ()
    path_loss_exp: float = 2.0
    idle_cost: float = 0.0
    jam_cost: float = 0.1
    hyperparams: AgentHyperparams = field(default_factory=AgentHyperparams)

    def __post_init__(self):
        object.__setattr__(self, "gain_levels", tuple(float(g) for g in self.gain_levels))
        object.__setattr__(self, "distance_to_edge", tuple(float(d) for d in self.distance_to_edge))

        if self.kind not in JAMMER_KINDS:
            raise ConfigurationError(
                "kind", f"must be one of {', '.join(JAMMER_KINDS)} but found {self.kind!r}."
            )
        if self.jam_power_mw < 0:
            raise ConfigurationError(
                "jam_power_mw", f"must not be negative but found {self.jam_power_mw}."
            )
        if self.sweep_period_slots < 1:
            raise ConfigurationError(
                "sweep_period_slots", f"must be positive but found {self.sweep_period_slots}."
            )
        if any(d <= 0 for d in self.distance_to_edge):
            raise ConfigurationError(
                "distance_to_edge", f"must be positive but found {self.distance_to_edge}."
            )
        if self.path_loss_exp < 0:
            raise ConfigurationError(
                "path_loss_exp", f"must not be negative but found {self.path_loss_exp}."
            )
        if self.idle_cost < 0 or self.jam_cost < 0:
            raise ConfigurationError("jam_cost", "attack costs must not be negative.")

    def path_loss(self, edge):
        r"""
        Return the factor by which the distance to ``edge`` scales the jamming power.

        EXAMPLES::

            >>> JammerConfig(distance_to_edge=(1.0, 2.0)).path_loss(1)
            0.25

        """
        if not self.distance_to_edge:
            return 1.0
        return self.distance_to_edge[edge] ** -self.path_loss_exp


class NoJammer:
    r"""
    The absence of a jammer.

    EXAMPLES::

        >>> NoJammer().target(7) is None
        True

    """

    phases = 1

    def phase(self, slot):
        return 0

    def target(self, slot):
        return None

    def learn(self, device_edge, device_utility):
        pass


class SweepJammer(NoJammer):
    r"""
    Jams edge node (``slot`` // period) mod ``num_edges`` in every slot.

    The position in the sweep, its phase, is part of the state of a frozen
    environment.

    EXAMPLES::

        >>> jammer = SweepJammer(period=3, num_edges=2)
        >>> jammer.phases
        6
        >>> [jammer.phase(slot) for slot in range(7)]
        [0, 1, 2, 3, 4, 5, 0]
        >>> jammer.target_of_phase(4)
        1

    """

    def __init__(self, period, num_edges):
        self.period = period
        self.num_edges = num_edges
        self.phases = period * num_edges

    def phase(self, slot):
        return slot % self.phases

    def target_of_phase(self, phase):
        return phase // self.period

    def target(self, slot):
        return self.target_of_phase(self.phase(slot))


class SmartJammer(NoJammer):
    r"""
    A jammer that learns with Q-learning whom to jam.

    Its state is the edge node the device offloaded to in the previous slot,
    or ``num_edges`` when the device computed locally. Its actions are
    0 to stay idle and ``i + 1`` to jam edge node ``i``. Its reward is the
    negative utility of the device minus the cost of its action.

    EXAMPLES:

    A jammer that is rewarded for jamming edge node 1 learns to jam it::

        >>> from edgedefense.core import SeededRng
        >>> from edgedefense.core import AgentHyperparams
        >>> config = JammerConfig(kind="smart", hyperparams=AgentHyperparams(epsilon_min=0))
        >>> jammer = SmartJammer(config, num_edges=2, rng=SeededRng(0))
        >>> for slot in range(2000):
        ...     target = jammer.target(slot)
        ...     jammer.learn(1, -1.0 if target == 1 else 0.0)
        >>> jammer.target(2000)
        1

    """

    def __init__(self, config, num_edges, rng):
        self.config = config
        self.num_edges = num_edges
        self.table = QTable(num_edges + 1, num_edges + 1)
        self.state = num_edges
        self.mode = 0
        self._rng = rng
        self._slot = 0

    def target(self, slot):
        epsilon = self.config.hyperparams.epsilon(self._slot)
        self.mode = epsilon_greedy(self.table.values[self.state], epsilon, self._rng)
        return None if self.mode == 0 else self.mode - 1

    def learn(self, device_edge, device_utility):
        r"""
        Learn from the utility the device obtained while offloading to
        ``device_edge`` (``None`` for local computation.)
        """
        cost = self.config.idle_cost if self.mode == 0 else self.config.jam_cost
        next_state = self.num_edges if device_edge is None else device_edge
        q_update(self.table, self.state, self.mode, -device_utility - cost, next_state, self.config.hyperparams)
        self.state = next_state
        self._slot += 1


def make_jammer(config, num_edges, rng):
    r"""
    Return the jammer described by ``config`` for ``num_edges`` edge nodes.

    EXAMPLES::

        >>> make_jammer(JammerConfig(kind="none"), 3, None)
        <edgedefense.environments.jammer.NoJammer object at 0x...>

    """
    if config.kind == "none":
        return NoJammer()
    if config.kind == "sweep":
        return SweepJammer(config.sweep_period_slots, num_edges)
    return SmartJammer(config, num_edges, rng)
