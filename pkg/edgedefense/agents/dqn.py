r"""
Deep Q-learning with experience replay.

The agent keeps the most recent observations in an
:class:`ObservationWindow`, estimates action values with a
:class:`~edgedefense.agents.network.QNetwork` and trains the network on
minibatches drawn from a :class:`ReplayPool` of past experiences. A second
network provides the bootstrapped targets and is synchronized with the
trained network periodically.

EXAMPLES::

    >>> from edgedefense.core import AgentHyperparams, SeededRng
    >>> agent = DQNAgent(2, 3, AgentHyperparams(), SeededRng(0), encoder=np.asarray, settings=DqnSettings(batch_size=4))
    >>> agent.reset([0.5, 0.5])
    >>> action = agent.act()
    >>> agent.learn(action, 1.0, [0.25, 1.0])
    >>> len(agent.pool)
    1

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
from collections import deque
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from edgedefense.agents.network import NetworkSpec, QNetwork
from edgedefense.agents.tabular import EpsilonSchedule, epsilon_greedy
from edgedefense.exceptions import ConfigurationError, ContractViolation

logger = logging.getLogger("dqn")


@dataclass(frozen=True)
class DqnSettings:
    r"""
    The layout of the network and the parameters of its training.

    Every slot, the network takes ``updates_per_slot`` gradient steps on
    minibatches of ``batch_size`` experiences. The target network is
    synchronized every ``target_period`` slots.

    EXAMPLES::

        >>> DqnSettings().network_spec(features=4, actions=12).signature
        'W=8 C=5 F1=8 k1=3 F2=8 k2=3 H=32 A=12'

    ::

        >>> DqnSettings(learning_rate=0)
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ConfigurationError: Invalid value for learning_rate: must be positive but found 0.

    """

    window: int = 8
    filters1: int = 8
    kernel1: int = 3
    filters2: int = 8
    kernel2: int = 3
    hidden: int = 32
    learning_rate: float = 0.01
    batch_size: int = 32
    capacity: int = 2048
    target_period: int = 100
    updates_per_slot: int = 4

    def __post_init__(self):
        for name in ("batch_size", "capacity", "target_period", "updates_per_slot"):
            if getattr(self, name) < 1:
                raise ConfigurationError(name, f"must be positive but found {getattr(self, name)}.")
        if not self.learning_rate > 0:
            raise ConfigurationError("learning_rate", f"must be positive but found {self.learning_rate}.")

    def network_spec(self, features, actions):
        return NetworkSpec(
            actions=actions,
            window=self.window,
            features=features,
            filters1=self.filters1,
            kernel1=self.kernel1,
            filters2=self.filters2,
            kernel2=self.kernel2,
            hidden=self.hidden,
        )


class Experience(NamedTuple):
    r"""
    A transition as stored in the replay pool: the observation window before
    and after ``action`` was played and its ``reward``.
    """

    window: np.ndarray
    action: int
    reward: float
    next_window: np.ndarray


class ReplayPool:
    r"""
    A bounded pool of experiences that evicts the oldest experience first.

    EXAMPLES::

        >>> from edgedefense.core import SeededRng
        >>> pool = ReplayPool(3, SeededRng(0))
        >>> for reward in range(5):
        ...     pool.add(Experience(None, 0, reward, None))
        >>> len(pool), [experience.reward for experience in pool.experiences]
        (3, [2, 3, 4])

    Minibatches are drawn uniformly with replacement::

        >>> from scipy.stats import chisquare
        >>> pool = ReplayPool(10, SeededRng(1))
        >>> for reward in range(10):
        ...     pool.add(Experience(None, 0, reward, None))
        >>> draws = [experience.reward for experience in pool.sample(10000)]
        >>> bool(chisquare(np.bincount(draws, minlength=10)).pvalue > 1e-3)
        True

    """

    def __init__(self, capacity, rng):
        self.capacity = capacity
        self.experiences = deque(maxlen=capacity)
        self._rng = rng

    def __len__(self):
        return len(self.experiences)

    def add(self, experience):
        self.experiences.append(experience)

    def sample(self, size):
        if not self.experiences:
            raise ContractViolation("Cannot sample from an empty replay pool.")
        return [self.experiences[i] for i in self._rng.integer_array(len(self.experiences), size)]


class ObservationWindow:
    r"""
    The ``window`` most recent observations, each extended by the action
    that led to it.

    The action column holds (a + 1)/|A| for action a and 0 where no action
    preceded the observation. Slots before the first observation are zero.

    EXAMPLES::

        >>> window = ObservationWindow(3, features=2, actions=4)
        >>> window.reset([0.5, 0.25])
        >>> window.push([1.0, 0.0], action=1)
        >>> window.matrix().tolist()
        [[0.0, 0.0, 0.0], [0.5, 0.25, 0.0], [1.0, 0.0, 0.5]]

    """

    def __init__(self, window, features, actions):
        self.window = window
        self.features = features
        self.actions = actions
        self._rows = deque(maxlen=window)

    def _row(self, features, action):
        features = np.asarray(features, dtype=float)
        if features.shape != (self.features,):
            raise ContractViolation(f"Expected {self.features} features but found shape {features.shape}.")
        return np.append(features, 0.0 if action is None else (action + 1) / self.actions)

    def reset(self, features):
        self._rows.clear()
        self._rows.extend(np.zeros(self.features + 1) for _ in range(self.window - 1))
        self._rows.append(self._row(features, None))

    def push(self, features, action):
        self._rows.append(self._row(features, action))

    def matrix(self):
        return np.array(self._rows)


def dqn_step(net, target_net, pool, transition, hp, sgd_lr, batch_size=32, step=0, target_period=100, updates=1):
    r"""
    Add ``transition`` to the ``pool``, train ``net`` with ``updates`` steps
    of stochastic gradient descent on minibatches from the pool and return
    the loss of the last minibatch.

    The targets are ``reward + γ·max target_net(next_window)``. The
    ``target_net`` is synchronized with ``net`` after every
    ``target_period``-th step.

    EXAMPLES:

    Without discounting, training on a single experience is a regression
    towards its reward::

        >>> from edgedefense.core import AgentHyperparams, SeededRng
        >>> rng = SeededRng(0)
        >>> net = QNetwork(NetworkSpec(actions=3, features=2), rng=rng)
        >>> target = net.copy()
        >>> pool = ReplayPool(16, rng.child("replay"))
        >>> window = rng.uniform(0, 1, size=(8, 3))
        >>> experience = Experience(window, 2, 1.0, window)
        >>> losses = [dqn_step(net, target, pool, experience, AgentHyperparams(gamma=0), 1e-4, step=step) for step in range(100)]
        >>> all(a > b for (a, b) in zip(losses, losses[1:]))
        True

    The target network follows after ``target_period`` steps::

        >>> bool((target.params["fc2.bias"] == net.params["fc2.bias"]).all())
        True
        >>> _ = dqn_step(net, target, pool, experience, AgentHyperparams(gamma=0), 1e-4, step=100)
        >>> bool((target.params["fc2.bias"] == net.params["fc2.bias"]).all())
        False

    Several updates in one step train further::

        >>> before = dqn_step(net, target, pool, experience, AgentHyperparams(gamma=0), 1e-4, step=101)
        >>> after = dqn_step(net, target, pool, experience, AgentHyperparams(gamma=0), 1e-4, step=102, updates=5)
        >>> bool(after < before)
        True

    """
    pool.add(transition)

    for _ in range(updates):
        batch = pool.sample(batch_size)

        windows = np.array([experience.window for experience in batch])
        next_windows = np.array([experience.next_window for experience in batch])
        actions = np.array([experience.action for experience in batch])
        rewards = np.array([experience.reward for experience in batch], dtype=float)

        targets = rewards + hp.gamma * target_net.forward(next_windows).max(axis=1)
        loss, grads = net.loss_and_gradients(windows, actions, targets)
        net.sgd(grads, sgd_lr)

    if (step + 1) % target_period == 0:
        target_net.load_params(net)

    return loss


class DQNAgent:
    r"""
    A deep Q-learning agent with ε-greedy exploration.

    ``encoder`` maps an observation to a vector of ``features`` numbers. When
    a ``network`` is given, training starts from a copy of its weights.

    EXAMPLES:

    On a game where the third action always pays, the agent learns to
    prefer it::

        >>> from edgedefense.core import AgentHyperparams, SeededRng
        >>> agent = DQNAgent(1, 3, AgentHyperparams(epsilon_decay=0.99), SeededRng(0), encoder=np.asarray)
        >>> agent.reset([0.0])
        >>> for slot in range(500):
        ...     action = agent.act()
        ...     agent.learn(action, float(action == 2), [0.0])
        >>> agent.policy(agent.window.matrix()[np.newaxis]).tolist()
        [2]

    """

    def __init__(self, features, actions, hyperparams, rng, encoder, settings=DqnSettings(), network=None):
        spec = settings.network_spec(features, actions)
        if network is None:
            network = QNetwork(spec, rng=rng)
        elif network.spec != spec:
            raise ContractViolation(
                f"Cannot train a network '{network.spec.signature}' as a network '{spec.signature}'."
            )

        self.hyperparams = hyperparams
        self.settings = settings
        self.encoder = encoder
        self.schedule = EpsilonSchedule(hyperparams)
        self.net = network.copy()
        self.target = network.copy()
        self.pool = ReplayPool(settings.capacity, rng.child("replay"))
        self.window = ObservationWindow(settings.window, features, actions)
        self.loss = None
        self._rng = rng

    @property
    def epsilon(self):
        return self.schedule.value

    def reset(self, observation):
        self.window.reset(self.encoder(observation))

    def act(self):
        return epsilon_greedy(self.net.forward(self.window.matrix()), self.epsilon, self._rng)

    def learn(self, action, reward, observation):
        before = self.window.matrix()
        self.window.push(self.encoder(observation), action)
        self.loss = dqn_step(
            self.net,
            self.target,
            self.pool,
            Experience(before, action, reward, self.window.matrix()),
            self.hyperparams,
            self.settings.learning_rate,
            batch_size=self.settings.batch_size,
            step=self.schedule.slot,
            target_period=self.settings.target_period,
            updates=self.settings.updates_per_slot,
        )
        self.schedule.advance()

    def policy(self, windows):
        r"""
        Return the greedy action for each of the observation ``windows``.
        """
        return np.argmax(self.net.forward(windows), axis=-1)


def hotboot(net, path):
    r"""
    Replace the weights of ``net`` with the weights stored at ``path`` and
    return ``net``.

    EXAMPLES::

        >>> import os.path
        >>> from tempfile import TemporaryDirectory
        >>> from edgedefense.core import SeededRng
        >>> trained = QNetwork(NetworkSpec(actions=2), rng=SeededRng(0))
        >>> with TemporaryDirectory() as directory:
        ...     path = os.path.join(directory, "weights.txt")
        ...     with open(path, "w", encoding="utf-8") as weights:
        ...         trained.save(weights)
        ...     net = hotboot(QNetwork(NetworkSpec(actions=2)), path)
        >>> window = SeededRng(1).uniform(0, 1, size=(8, 5))
        >>> bool((net.forward(window) == trained.forward(window)).all())
        True

    """
    with open(path, encoding="utf-8") as weights:
        loaded = QNetwork.load(weights, net.spec)
    net.load_params(loaded)
    logger.info("Initialized network '%s' from %s.", net.spec.signature, path)
    return net


def average_networks(nets):
    r"""
    Return a network whose weights are the mean of the weights of ``nets``,
    accumulated in the order of ``nets``.

    EXAMPLES::

        >>> a = QNetwork(NetworkSpec(actions=2))
        >>> b = a.copy()
        >>> b.params["fc2.bias"][:] = 1
        >>> average_networks([a, b]).params["fc2.bias"].tolist()
        [0.5, 0.5]

    """
    if not nets:
        raise ContractViolation("Cannot average an empty list of networks.")
    average = QNetwork(nets[0].spec)
    for net in nets:
        if net.spec != average.spec:
            raise ContractViolation(
                f"Cannot average networks '{average.spec.signature}' and '{net.spec.signature}'."
            )
        for name, value in net.params.items():
            average.params[name] += value
    for value in average.params.values():
        value /= len(nets)
    return average
