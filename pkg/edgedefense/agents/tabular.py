r"""
Tabular learning agents.

The agents in this module keep one value per (state, action) pair of a finite
state space. They all follow the same protocol that the experiment harness
drives once per slot::

    agent.reset(observation)
    action = agent.act()
    agent.learn(action, reward, next_observation)

Observations are mapped to state indices by an ``encoder`` callable, so the
same agents learn on the offloading and on the authentication game.

EXAMPLES:

A Q-learning agent on a two-state toy problem where action 1 always pays
more::

    >>> from edgedefense.core import AgentHyperparams, SeededRng
    >>> agent = QLearningAgent(2, 2, AgentHyperparams(), SeededRng(0), encoder=int)
    >>> agent.reset(0)
    >>> for slot in range(200):
    ...     action = agent.act()
    ...     agent.learn(action, float(action), slot % 2)
    >>> agent.policy(2).tolist()
    [1, 1]

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

import numpy as np

from edgedefense.exceptions import ContractViolation

logger = logging.getLogger("tabular")


class QTable:
    r"""
    A dense matrix of action values indexed by state and action.

    EXAMPLES::

        >>> table = QTable(3, 2)
        >>> table.values
        array([[0., 0.],
               [0., 0.],
               [0., 0.]])
        >>> table.states, table.actions
        (3, 2)

    An optimistic table starts from a constant::

        >>> QTable(1, 2, initial=5).values
        array([[5., 5.]])

    """

    def __init__(self, states, actions, initial=0.0):
        if states < 1 or actions < 1:
            raise ContractViolation(
                f"A table needs at least one state and one action but found {states}×{actions}."
            )
        self.values = np.full((states, actions), float(initial))

    @property
    def states(self):
        return self.values.shape[0]

    @property
    def actions(self):
        return self.values.shape[1]

    def check(self, state, action=None):
        r"""
        Raise a :class:`ContractViolation` if ``state`` or ``action`` is not
        an index of this table.

        EXAMPLES::

            >>> QTable(2, 2).check(5)
            Traceback (most recent call last):
            ...
            edgedefense.exceptions.ContractViolation: State 5 is out of range for a table with 2 states.

        """
        if not 0 <= state < self.states:
            raise ContractViolation(
                f"State {state} is out of range for a table with {self.states} states."
            )
        if action is not None and not 0 <= action < self.actions:
            raise ContractViolation(
                f"Action {action} is out of range for a table with {self.actions} actions."
            )

    def greedy_policy(self):
        r"""
        Return the greedy action of every state, breaking ties towards the
        lowest action index.

        EXAMPLES::

            >>> table = QTable(2, 3)
            >>> table.values[1] = [1, 3, 3]
            >>> table.greedy_policy().tolist()
            [0, 1]

        """
        return np.argmax(self.values, axis=1)


def average_tables(tables):
    r"""
    Return a :class:`QTable` whose values are the mean of the values of
    ``tables``, accumulated in the order of ``tables``.

    EXAMPLES::

        >>> a, b = QTable(1, 2), QTable(1, 2, initial=1)
        >>> average_tables([a, b]).values.tolist()
        [[0.5, 0.5]]

    ::

        >>> average_tables([QTable(1, 2), QTable(2, 2)])
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ContractViolation: Cannot average a 1×2 table and a 2×2 table.

    """
    if not tables:
        raise ContractViolation("Cannot average an empty list of tables.")
    average = QTable(tables[0].states, tables[0].actions)
    for table in tables:
        if table.values.shape != average.values.shape:
            raise ContractViolation(
                f"Cannot average a {average.states}×{average.actions} table and a {table.states}×{table.actions} table."
            )
        average.values += table.values
    average.values /= len(tables)
    return average


def q_update(q, s, a, u, s_next, hp, alpha=None):
    r"""
    Apply one Bellman update to the entry ``(s, a)`` of the :class:`QTable`
    ``q`` and return its new value.

    The learning rate defaults to the one of the hyperparameters ``hp``.

    EXAMPLES:

    With the default learning rate 0.7 and discount 0.1::

        >>> from edgedefense.core import AgentHyperparams
        >>> q = QTable(2, 2)
        >>> q.values[1] = [0.5, 0.2]
        >>> abs(q_update(q, 0, 0, 1.0, 1, AgentHyperparams()) - 0.735) < 1e-12
        True

    Only the updated entry changes::

        >>> float(q.values[0, 1]), q.values[1].tolist()
        (0.0, [0.5, 0.2])

    A myopic learner with full learning rate copies the reward::

        >>> q_update(q, 0, 1, 3.25, 1, AgentHyperparams(alpha=1, gamma=0))
        3.25

    TESTS:

    A reward that is zero everywhere keeps a zero table at zero::

        >>> from edgedefense.core import SeededRng
        >>> rng = SeededRng(0)
        >>> q = QTable(4, 3)
        >>> for _ in range(1000):
        ...     _ = q_update(q, rng.integers(4), rng.integers(3), 0.0, rng.integers(4), AgentHyperparams())
        >>> bool((q.values == 0).all())
        True

    Bounded rewards keep the table bounded by the discounted maximum::

        >>> hp = AgentHyperparams(gamma=0.9)
        >>> for _ in range(10000):
        ...     _ = q_update(q, rng.integers(4), rng.integers(3), rng.uniform(-1, 1), rng.integers(4), hp)
        >>> bool(np.abs(q.values).max() <= 1 / (1 - 0.9))
        True

    Indices are validated::

        >>> q_update(q, 0, 3, 1.0, 0, hp)
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ContractViolation: Action 3 is out of range for a table with 3 actions.

    """
    q.check(s, a)
    q.check(s_next)

    alpha = hp.alpha if alpha is None else alpha
    target = u + hp.gamma * q.values[s_next].max()
    value = (1 - alpha) * q.values[s, a] + alpha * target
    q.values[s, a] = value
    return float(value)


def epsilon_greedy(q_row, eps, rng):
    r"""
    Return the index of the largest entry of ``q_row`` with probability
    1 - ``eps`` and a uniformly random index otherwise.

    Ties are broken towards the lowest index.

    EXAMPLES::

        >>> from edgedefense.core import SeededRng
        >>> rng = SeededRng(0)
        >>> epsilon_greedy([1, 3, 2], 0, rng)
        1
        >>> epsilon_greedy([2, 2, 0], 0, rng)
        0

    With full exploration, all actions are equally likely::

        >>> counts = np.bincount([epsilon_greedy([0, 0, 0, 9], 1, rng) for _ in range(10000)], minlength=4)
        >>> bool((np.abs(counts / 10000 - 0.25) < 0.02).all())
        True

    TESTS:

    The greedy choice does not change when the values are shifted or scaled::

        >>> for _ in range(100):
        ...     row = rng.normal(size=5)
        ...     assert epsilon_greedy(row, 0, rng) == epsilon_greedy(3 * row + 7, 0, rng)

    """
    row = np.asarray(q_row, dtype=float)
    if rng.random() < eps:
        return rng.integers(len(row))
    return int(np.argmax(row))


class EpsilonSchedule:
    r"""
    The exploration probability of an agent as it advances slot by slot.

    EXAMPLES::

        >>> from edgedefense.core import AgentHyperparams
        >>> schedule = EpsilonSchedule(AgentHyperparams(epsilon0=0.5, epsilon_decay=0.5, epsilon_min=0.1))
        >>> values = []
        >>> for _ in range(4):
        ...     values.append(schedule.value)
        ...     schedule.advance()
        >>> values
        [0.5, 0.25, 0.125, 0.1]

    """

    def __init__(self, hyperparams):
        self.hyperparams = hyperparams
        self.slot = 0

    @property
    def value(self):
        return self.hyperparams.epsilon(self.slot)

    def advance(self):
        self.slot += 1


class DynaModel:
    r"""
    An empirical model of the environment built from the transitions an
    agent experienced.

    EXAMPLES::

        >>> model = DynaModel()
        >>> model.record(0, 1, 1.0, 2)
        >>> model.record(0, 1, 3.0, 3)
        >>> model.record(0, 1, 2.0, 2)
        >>> model.visits(0, 1), model.mean_reward(0, 1)
        (3, 2.0)
        >>> model.next_state_distribution(0, 1)
        {2: 0.6666666666666666, 3: 0.3333333333333333}
        >>> len(model)
        1

    """

    def __init__(self):
        # (state, action) -> [visits, reward sum, {next state: count}]
        self._entries = {}
        self._keys = []

    def __len__(self):
        return len(self._keys)

    def record(self, s, a, u, s_next):
        key = (s, a)
        if key not in self._entries:
            self._entries[key] = [0, 0.0, {}]
            self._keys.append(key)
        entry = self._entries[key]
        entry[0] += 1
        entry[1] += u
        entry[2][s_next] = entry[2].get(s_next, 0) + 1

    def visits(self, s, a):
        entry = self._entries.get((s, a))
        return 0 if entry is None else entry[0]

    def mean_reward(self, s, a):
        visits, reward, _ = self._entries[(s, a)]
        return reward / visits

    def next_state_distribution(self, s, a):
        visits, _, successors = self._entries[(s, a)]
        return {state: count / visits for state, count in successors.items()}

    def sample(self, rng):
        r"""
        Return a hypothetical transition ``(s, a, u, s_next)``.

        The pair ``(s, a)`` is drawn uniformly from the visited pairs, the
        reward is the mean reward observed for it and the successor is drawn
        from the observed successors.

        EXAMPLES::

            >>> from edgedefense.core import SeededRng
            >>> model = DynaModel()
            >>> model.record(4, 0, 1.5, 7)
            >>> model.sample(SeededRng(0))
            (4, 0, 1.5, 7)

        """
        s, a = self._keys[rng.integers(len(self._keys))]
        visits, reward, successors = self._entries[(s, a)]

        draw = rng.random() * visits
        for s_next, count in successors.items():
            draw -= count
            if draw < 0:
                break
        return s, a, reward / visits, s_next


def dyna_plan(model, q, K, hp, rng, learning_rate=None):
    r"""
    Apply ``K`` Bellman updates to ``q`` with hypothetical transitions drawn
    from the :class:`DynaModel` ``model``.

    The optional ``learning_rate`` is a callable that returns the learning
    rate of a ``(state, action)`` pair.

    EXAMPLES:

    Without planning steps nothing changes::

        >>> from edgedefense.core import AgentHyperparams, SeededRng
        >>> model = DynaModel()
        >>> model.record(0, 0, 1.0, 1)
        >>> q = QTable(2, 1)
        >>> dyna_plan(model, q, 0, AgentHyperparams(), SeededRng(0))
        >>> q.values.tolist()
        [[0.0], [0.0]]

    When the model is exact, planning is the same as replaying the real
    transition::

        >>> dyna_plan(model, q, 5, AgentHyperparams(), SeededRng(0))
        >>> replayed = QTable(2, 1)
        >>> for _ in range(5):
        ...     _ = q_update(replayed, 0, 0, 1.0, 1, AgentHyperparams())
        >>> bool((q.values == replayed.values).all())
        True

    An empty model does not plan::

        >>> dyna_plan(DynaModel(), q, 5, AgentHyperparams(), SeededRng(0))

    """
    if not len(model):
        return

    for _ in range(K):
        s, a, u, s_next = model.sample(rng)
        alpha = None if learning_rate is None else learning_rate(s, a)
        q_update(q, s, a, u, s_next, hp, alpha=alpha)


class PdsModel:
    r"""
    Post-decision state values together with the known part of the dynamics.

    ``known_reward[s, a]`` is the reward component that is known before
    acting, ``post_decision[s, a]`` is the state reached by the known
    deterministic part of the transition. Only the value of post-decision
    states is learned.

    EXAMPLES::

        >>> model = PdsModel(np.array([[1.0, 0.0], [0.0, 2.0]]), np.array([[1, 1], [0, 0]]))
        >>> model.values[:] = [0.5, 0.25]
        >>> model.action_values(0).tolist()
        [1.25, 0.25]
        >>> model.q_values().tolist()
        [[1.25, 0.25], [0.5, 2.5]]

    """

    def __init__(self, known_reward, post_decision, initial=0.0):
        self.known_reward = np.array(known_reward, dtype=float)
        self.post_decision = np.asarray(post_decision, dtype=int)
        if self.known_reward.shape != self.post_decision.shape:
            raise ContractViolation(
                f"Known rewards of shape {self.known_reward.shape} do not match post-decision states of shape {self.post_decision.shape}."
            )
        self.values = np.full(int(self.post_decision.max()) + 1, float(initial))

    @property
    def states(self):
        return self.known_reward.shape[0]

    @property
    def actions(self):
        return self.known_reward.shape[1]

    def action_values(self, state):
        return self.known_reward[state] + self.values[self.post_decision[state]]

    def q_values(self):
        return self.known_reward + self.values[self.post_decision]


def pds_update(model, s, a, u_known, u_unknown, s_next, hp, alpha=None):
    r"""
    Update the value of the post-decision state of ``(s, a)`` in the
    :class:`PdsModel` ``model`` and return it.

    The known reward ``u_known`` is recorded in the model. The learning
    target only contains the unknown reward ``u_unknown`` and the discounted
    action value of ``s_next``, reconstructed from the model.

    EXAMPLES:

    When the whole reward is known and the transition is deterministic,
    the reconstructed action values are those of value iteration::

        >>> from edgedefense.core import AgentHyperparams
        >>> from edgedefense.oracle import ExplicitMdp, value_iteration
        >>> R = np.array([[1.0, 0.0], [0.0, 2.0], [0.5, 0.5], [0.0, 1.0]])
        >>> post = np.array([[1, 1], [2, 2], [3, 3], [0, 0]])
        >>> model = PdsModel(R, post)
        >>> hp = AgentHyperparams(alpha=1, gamma=0.5)
        >>> for sweep in range(60):
        ...     for s in range(4):
        ...         for a in range(2):
        ...             _ = pds_update(model, s, a, R[s, a], 0.0, (s + 1) % 4, hp)
        >>> P = np.zeros((4, 2, 4))
        >>> for s in range(4):
        ...     P[s, :, (s + 1) % 4] = 1
        >>> V, policy, iterations = value_iteration(ExplicitMdp(P, R, 0.5), tol=1e-12)
        >>> bool(np.allclose(model.q_values(), R + 0.5 * P @ V, atol=1e-9))
        True

    TESTS:

    Post-decision values stay bounded by the discounted known rewards::

        >>> from edgedefense.core import SeededRng
        >>> rng = SeededRng(0)
        >>> model = PdsModel(R, post)
        >>> hp = AgentHyperparams(gamma=0.9)
        >>> for _ in range(100000):
        ...     s, a = rng.integers(4), rng.integers(2)
        ...     _ = pds_update(model, s, a, R[s, a], 0.0, (s + 1) % 4, hp)
        >>> bool(np.abs(model.values).max() <= 0.9 * 2 / (1 - 0.9))
        True

    """
    if not (0 <= s < model.states and 0 <= s_next < model.states and 0 <= a < model.actions):
        raise ContractViolation(
            f"Transition ({s}, {a}, {s_next}) is out of range for {model.states} states and {model.actions} actions."
        )

    alpha = hp.alpha if alpha is None else alpha
    model.known_reward[s, a] = u_known
    post = model.post_decision[s, a]
    target = u_unknown + hp.gamma * model.action_values(s_next).max()
    model.values[post] = (1 - alpha) * model.values[post] + alpha * target
    return float(model.values[post])


class TabularAgent:
    r"""
    Base class of the agents that keep a value per state and action.

    Subclasses implement :meth:`action_values`, :meth:`update` and
    :meth:`policy`.

    The learning rate is either the fixed ``alpha`` of the hyperparameters
    or, with ``alpha_schedule="visit"``, decays with the number of visits
    ``n`` of the updated entry as 1/(1+n)^0.6.
    """

    def __init__(self, hyperparams, rng, encoder, alpha_schedule="fixed"):
        if alpha_schedule not in ("fixed", "visit"):
            raise ContractViolation(
                f"Unknown learning rate schedule {alpha_schedule!r}, expected 'fixed' or 'visit'."
            )
        self.hyperparams = hyperparams
        self.schedule = EpsilonSchedule(hyperparams)
        self.encoder = encoder
        self.alpha_schedule = alpha_schedule
        self.state = None
        self._rng = rng
        self._visits = {}

    @property
    def epsilon(self):
        return self.schedule.value

    def learning_rate(self, key):
        r"""
        Return the learning rate for the next update of the entry ``key``.
        """
        if self.alpha_schedule == "fixed":
            return self.hyperparams.alpha
        return 1 / (1 + self._visits.get(key, 0)) ** 0.6

    def _visit(self, key):
        alpha = self.learning_rate(key)
        self._visits[key] = self._visits.get(key, 0) + 1
        return alpha

    def reset(self, observation):
        self.state = self.encoder(observation)

    def act(self):
        return epsilon_greedy(self.action_values(self.state), self.epsilon, self._rng)

    def learn(self, action, reward, observation):
        next_state = self.encoder(observation)
        self.update(self.state, action, reward, next_state)
        self.schedule.advance()
        self.state = next_state

    def action_values(self, state):
        raise NotImplementedError

    def update(self, state, action, reward, next_state):
        raise NotImplementedError

    def policy(self, states):
        raise NotImplementedError


class QLearningAgent(TabularAgent):
    r"""
    Tabular Q-learning with ε-greedy exploration.

    EXAMPLES::

        >>> from edgedefense.core import AgentHyperparams, SeededRng
        >>> agent = QLearningAgent(3, 2, AgentHyperparams(), SeededRng(0), encoder=int)
        >>> agent.reset(2)
        >>> agent.epsilon
        0.9
        >>> agent.learn(1, 1.0, 0)
        >>> agent.table.values[2].tolist()
        [0.0, 0.7]
        >>> agent.state, round(agent.epsilon, 6)
        (0, 0.8955)

    With a decaying learning rate, the first update of an entry copies the
    target::

        >>> agent = QLearningAgent(3, 2, AgentHyperparams(), SeededRng(0), encoder=int, alpha_schedule="visit")
        >>> agent.reset(2)
        >>> agent.learn(1, 1.0, 0)
        >>> agent.table.values[2].tolist()
        [0.0, 1.0]

    """

    def __init__(self, states, actions, hyperparams, rng, encoder, alpha_schedule="fixed", q_init=0.0):
        super().__init__(hyperparams, rng, encoder, alpha_schedule)
        self.table = QTable(states, actions, initial=q_init)

    def action_values(self, state):
        return self.table.values[state]

    def update(self, state, action, reward, next_state):
        q_update(self.table, state, action, reward, next_state, self.hyperparams, alpha=self._visit((state, action)))

    def policy(self, states):
        r"""
        Return the greedy action of each of the ``states``.
        """
        if states != self.table.states:
            raise ContractViolation(
                f"The agent learned {self.table.states} states but a policy for {states} states was requested."
            )
        return self.table.greedy_policy()


class DynaQAgent(QLearningAgent):
    r"""
    Q-learning that additionally replays ``planning_steps`` hypothetical
    transitions from a learned model after every real step.

    EXAMPLES::

        >>> from edgedefense.core import AgentHyperparams, SeededRng
        >>> agent = DynaQAgent(2, 2, AgentHyperparams(), SeededRng(0), encoder=int, planning_steps=10)
        >>> agent.reset(0)
        >>> agent.learn(1, 1.0, 0)
        >>> bool(agent.table.values[0, 1] > 0.7)
        True
        >>> len(agent.model)
        1

    """

    def __init__(self, states, actions, hyperparams, rng, encoder, alpha_schedule="fixed", q_init=0.0, planning_steps=10):
        super().__init__(states, actions, hyperparams, rng, encoder, alpha_schedule, q_init)
        self.planning_steps = planning_steps
        self.model = DynaModel()

    def update(self, state, action, reward, next_state):
        super().update(state, action, reward, next_state)
        self.model.record(state, action, reward, next_state)
        dyna_plan(
            self.model,
            self.table,
            self.planning_steps,
            self.hyperparams,
            self._rng,
            learning_rate=lambda s, a: self.learning_rate((s, a)),
        )


class PdsAgent(TabularAgent):
    r"""
    Post-decision state learning.

    The reward the environment reports is split into the part
    ``known_reward[s, a]`` that the agent knows in advance and the unknown
    remainder that it learns.

    EXAMPLES::

        >>> from edgedefense.core import AgentHyperparams, SeededRng
        >>> known = np.array([[0.0, 1.0], [0.0, 0.0]])
        >>> agent = PdsAgent(known, np.array([[1, 1], [0, 0]]), AgentHyperparams(epsilon0=0, epsilon_min=0), SeededRng(0), encoder=int)
        >>> agent.reset(0)
        >>> agent.act()
        1

    Only the unknown part of the reward enters the post-decision values::

        >>> agent.learn(1, 1.5, 1)
        >>> agent.model.values.tolist()
        [0.0, 0.35]

    """

    def __init__(self, known_reward, post_decision, hyperparams, rng, encoder, alpha_schedule="fixed", q_init=0.0):
        super().__init__(hyperparams, rng, encoder, alpha_schedule)
        self.model = PdsModel(known_reward, post_decision, initial=q_init)

    def action_values(self, state):
        return self.model.action_values(state)

    def update(self, state, action, reward, next_state):
        u_known = float(self.model.known_reward[state, action])
        alpha = self._visit(int(self.model.post_decision[state, action]))
        pds_update(self.model, state, action, u_known, reward - u_known, next_state, self.hyperparams, alpha=alpha)

    def policy(self, states):
        if states != self.model.states:
            raise ContractViolation(
                f"The agent learned {self.model.states} states but a policy for {states} states was requested."
            )
        return np.argmax(self.model.q_values(), axis=1)


class RandomAgent:
    r"""
    An agent that picks uniformly random actions and never learns.

    EXAMPLES::

        >>> from edgedefense.core import SeededRng
        >>> agent = RandomAgent(3, SeededRng(0))
        >>> agent.reset(None)
        >>> sorted(set(agent.act() for _ in range(100)))
        [0, 1, 2]
        >>> agent.epsilon
        1.0

    """

    epsilon = 1.0

    def __init__(self, actions, rng):
        self.actions = actions
        self._rng = rng

    def reset(self, observation):
        pass

    def act(self):
        return self._rng.integers(self.actions)

    def learn(self, action, reward, observation):
        pass

    def policy(self, states):
        r"""
        Return a uniformly random action for each of the ``states``.
        """
        return self._rng.integer_array(self.actions, states)


class FixedAgent:
    r"""
    An agent that always plays the same action.

    EXAMPLES::

        >>> agent = FixedAgent(4)
        >>> agent.reset(None)
        >>> agent.act(), agent.epsilon
        (4, 0.0)
        >>> agent.policy(3).tolist()
        [4, 4, 4]

    """

    epsilon = 0.0

    def __init__(self, action):
        self.action = action

    def reset(self, observation):
        pass

    def act(self):
        return self.action

    def learn(self, action, reward, observation):
        pass

    def policy(self, states):
        return np.full(states, self.action, dtype=int)
