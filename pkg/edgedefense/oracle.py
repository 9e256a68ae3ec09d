r"""
Exact solutions of small Markov decision processes.

The learning agents are validated against the optimal policy of an
:class:`ExplicitMdp` that lists all transition probabilities and expected
rewards. Such an MDP is enumerated from a frozen offloading scenario, see
:func:`edgedefense.environments.offload.enumerate_mdp`.

EXAMPLES:

A two-state problem where the agent should first move to the second state
and then stay there::

    >>> P = np.zeros((2, 2, 2))
    >>> P[0, 0, 0] = P[0, 1, 1] = P[1, 0, 1] = P[1, 1, 0] = 1
    >>> Rw = np.array([[0.0, 1.0], [2.0, 0.0]])
    >>> mdp = ExplicitMdp(P, Rw, gamma=0.9)
    >>> V, policy, iterations = value_iteration(mdp)
    >>> policy.tolist()
    [1, 0]
    >>> bool(np.allclose(V, [19, 20]))
    True

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

from edgedefense.exceptions import ContractViolation

logger = logging.getLogger("oracle")

# Largest number of entries S·A·S of a transition tensor.
MAX_TENSOR_ENTRIES = 10**8


@dataclass(frozen=True, eq=False)
class ExplicitMdp:
    r"""
    A finite MDP given by its dense transition tensor ``P[s, a, s']``, its
    expected rewards ``Rw[s, a]`` and the discount factor ``gamma``.

    The ``start`` states are where episodes begin; they define the states
    reachable under a policy, see :func:`reachable_states`.

    EXAMPLES::

        >>> mdp = ExplicitMdp(np.ones((1, 1, 1)), np.ones((1, 1)), 0.1)
        >>> mdp.S, mdp.A, mdp.start
        (1, 1, (0,))

    Rows of the transition tensor must be probability distributions::

        >>> ExplicitMdp(np.full((1, 2, 1), 0.5), np.ones((1, 2)), 0.1)
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ContractViolation: Transition probabilities of state 0 and action 0 sum to 0.5 instead of 1.

    """

    P: np.ndarray
    Rw: np.ndarray
    gamma: float
    start: tuple = (0,)

    def __post_init__(self):
        P = np.asarray(self.P, dtype=float)
        Rw = np.asarray(self.Rw, dtype=float)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "Rw", Rw)
        object.__setattr__(self, "start", tuple(int(s) for s in self.start))

        if P.ndim != 3 or P.shape[0] != P.shape[2] or P.shape[:2] != Rw.shape:
            raise ContractViolation(
                f"Expected transitions of shape S×A×S and rewards of shape S×A but found {P.shape} and {Rw.shape}."
            )
        if P.size > MAX_TENSOR_ENTRIES:
            raise ContractViolation(
                f"A transition tensor with {P.size} entries exceeds the limit of {MAX_TENSOR_ENTRIES} entries."
            )
        if (P < 0).any():
            raise ContractViolation("Transition probabilities must not be negative.")
        totals = P.sum(axis=2)
        bad = np.argwhere(np.abs(totals - 1) > 1e-9)
        if len(bad):
            s, a = bad[0]
            raise ContractViolation(
                f"Transition probabilities of state {s} and action {a} sum to {totals[s, a]:.12g} instead of 1."
            )
        if not np.isfinite(Rw).all():
            raise ContractViolation("Rewards must be finite.")
        if not 0 <= self.gamma < 1:
            raise ContractViolation(f"The discount factor must be in [0, 1) but found {self.gamma}.")
        if not self.start or not all(0 <= s < self.S for s in self.start):
            raise ContractViolation(f"Start states {self.start} are not states of this MDP.")

    @property
    def S(self):
        return self.P.shape[0]

    @property
    def A(self):
        return self.P.shape[1]

    def backup(self, V):
        r"""
        Return the action values ``Rw + gamma · P V`` for the state values ``V``.

        EXAMPLES::

            >>> mdp = ExplicitMdp(np.ones((1, 2, 1)), np.array([[0.0, 1.0]]), 0.5)
            >>> mdp.backup(np.array([2.0])).tolist()
            [[1.0, 2.0]]

        """
        return self.Rw + self.gamma * (self.P @ V)


def value_iteration(mdp, tol=1e-9):
    r"""
    Return the optimal state values, the greedy optimal policy and the
    number of sweeps of value iteration on ``mdp``.

    Iteration stops once successive values differ by less than ``tol`` in
    the sup norm. Ties between actions go to the lowest action index.

    EXAMPLES:

    A single state paying 1 forever::

        >>> mdp = ExplicitMdp(np.ones((1, 1, 1)), np.ones((1, 1)), 0.1)
        >>> V, policy, iterations = value_iteration(mdp)
        >>> bool(abs(V[0] - 1 / 0.9) < 1e-9)
        True

    A deterministic chain that pays once it reaches its second state::

        >>> P = np.zeros((2, 1, 2))
        >>> P[:, 0, 1] = 1
        >>> V, policy, iterations = value_iteration(ExplicitMdp(P, np.array([[0.0], [1.0]]), 0.5))
        >>> bool(np.allclose(V, [1, 2]))
        True

    TESTS:

    The greedy policy of the optimal values is a fixed point of another
    Bellman backup::

        >>> mdp = random_mdp(10, 3, 0.9, seed=0)
        >>> V, policy, iterations = value_iteration(mdp)
        >>> bool((np.argmax(mdp.backup(V), axis=1) == policy).all())
        True

    ::

        >>> value_iteration(mdp, tol=0)
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ContractViolation: The tolerance must be positive but found 0.

    """
    if not tol > 0:
        raise ContractViolation(f"The tolerance must be positive but found {tol}.")

    V = np.zeros(mdp.S)
    previous = None
    iterations = 0
    while True:
        Q = mdp.backup(V)
        updated = Q.max(axis=1)
        delta = float(np.abs(updated - V).max())
        iterations += 1

        if previous is not None and delta > mdp.gamma * previous + 1e-12 * max(1.0, float(np.abs(updated).max())):
            raise ContractViolation(
                f"Value iteration did not contract in sweep {iterations}: {delta} > {mdp.gamma} · {previous}."
            )

        V = updated
        previous = delta
        if delta < tol:
            break

    logger.debug("Value iteration converged after %d sweeps.", iterations)
    return V, np.argmax(mdp.backup(V), axis=1), iterations


def policy_value(mdp, policy, tol=1e-9):
    r"""
    Return the state values of following ``policy`` on ``mdp``.

    EXAMPLES:

    Always choosing the action that pays nothing has no value::

        >>> mdp = ExplicitMdp(np.ones((1, 2, 1)), np.array([[0.0, 1.0]]), 0.5)
        >>> policy_value(mdp, [0]).tolist()
        [0.0]
        >>> bool(abs(policy_value(mdp, [1])[0] - 2) < 1e-9)
        True

    The optimal policy has the optimal values::

        >>> mdp = random_mdp(10, 3, 0.9, seed=1)
        >>> V, policy, iterations = value_iteration(mdp)
        >>> bool(np.abs(policy_value(mdp, policy) - V).max() < 2e-8)
        True

    TESTS:

    No policy is better than the optimal one::

        >>> from edgedefense.core import SeededRng
        >>> rng = SeededRng(0)
        >>> for seed in range(100):
        ...     mdp = random_mdp(10, 3, 0.9, seed=seed)
        ...     V, optimal, iterations = value_iteration(mdp)
        ...     assert (policy_value(mdp, rng.integer_array(3, 10)) <= V + 1e-7).all()

    On a small MDP, this holds for all deterministic policies::

        >>> import itertools
        >>> P = np.zeros((2, 2, 2))
        >>> P[0, 0, 0] = P[0, 1, 1] = P[1, 0, 1] = P[1, 1, 0] = 1
        >>> mdp = ExplicitMdp(P, np.array([[0.0, 1.0], [2.0, 0.0]]), 0.9)
        >>> V, optimal, iterations = value_iteration(mdp)
        >>> values = {p: policy_value(mdp, p) for p in itertools.product(range(2), repeat=2)}
        >>> all((values[tuple(optimal)] >= v - 1e-9).all() for v in values.values())
        True

    """
    if not tol > 0:
        raise ContractViolation(f"The tolerance must be positive but found {tol}.")

    policy = np.asarray(policy, dtype=int)
    if policy.shape != (mdp.S,) or (policy < 0).any() or (policy >= mdp.A).any():
        raise ContractViolation(
            f"Expected a policy with an action in [0, {mdp.A}) for each of {mdp.S} states."
        )

    states = np.arange(mdp.S)
    P = mdp.P[states, policy]
    R = mdp.Rw[states, policy]

    V = np.zeros(mdp.S)
    while True:
        updated = R + mdp.gamma * (P @ V)
        delta = float(np.abs(updated - V).max())
        V = updated
        if delta < tol:
            return V


def reachable_states(mdp, policy):
    r"""
    Return the sorted states that can be reached from the start states of
    ``mdp`` when following ``policy``.

    EXAMPLES::

        >>> P = np.zeros((3, 2, 3))
        >>> P[0, 0, 0] = P[0, 1, 1] = P[1, :, 1] = P[2, :, 2] = 1
        >>> mdp = ExplicitMdp(P, np.zeros((3, 2)), 0.5)
        >>> reachable_states(mdp, [0, 0, 0]).tolist()
        [0]
        >>> reachable_states(mdp, [1, 0, 0]).tolist()
        [0, 1]

    """
    policy = np.asarray(policy, dtype=int)
    support = mdp.P[np.arange(mdp.S), policy] > 0

    reached = np.zeros(mdp.S, dtype=bool)
    frontier = list(mdp.start)
    reached[frontier] = True
    while frontier:
        state = frontier.pop()
        for successor in np.flatnonzero(support[state] & ~reached):
            reached[successor] = True
            frontier.append(int(successor))
    return np.flatnonzero(reached)


def policy_match(p1, p2, restrict_to=None, mdp=None):
    r"""
    Return the fraction of the states ``restrict_to`` where the policies
    ``p1`` and ``p2`` choose the same action.

    When no states are given, the states reachable under ``p1`` in ``mdp``
    are compared; without an ``mdp`` all states are compared.

    EXAMPLES::

        >>> policy_match([0, 1, 2], [0, 1, 2])
        1.0
        >>> policy_match([0, 1, 2], [1, 2, 0])
        0.0
        >>> policy_match([0] * 20, [0] * 19 + [1])
        0.95

    Only the states that the first policy visits count::

        >>> P = np.zeros((3, 2, 3))
        >>> P[0, 0, 0] = P[0, 1, 1] = P[1, :, 1] = P[2, :, 2] = 1
        >>> mdp = ExplicitMdp(P, np.zeros((3, 2)), 0.5)
        >>> policy_match([1, 0, 0], [1, 0, 1], mdp=mdp)
        1.0

    """
    p1 = np.asarray(p1, dtype=int)
    p2 = np.asarray(p2, dtype=int)
    if p1.shape != p2.shape:
        raise ContractViolation(f"Cannot compare policies of shapes {p1.shape} and {p2.shape}.")

    if restrict_to is None:
        restrict_to = np.arange(len(p1)) if mdp is None else reachable_states(mdp, p1)
    restrict_to = np.asarray(restrict_to, dtype=int)
    if not len(restrict_to):
        return 1.0
    return float(np.mean(p1[restrict_to] == p2[restrict_to]))


def random_mdp(states, actions, gamma, seed):
    r"""
    Return an MDP with random transition probabilities and rewards in [0, 1).

    EXAMPLES::

        >>> mdp = random_mdp(4, 2, 0.5, seed=0)
        >>> mdp.P.shape, mdp.Rw.shape
        ((4, 2, 4), (4, 2))

    """
    from edgedefense.core import SeededRng

    rng = SeededRng(seed)
    P = rng.uniform(0, 1, size=(states, actions, states))
    P /= P.sum(axis=2, keepdims=True)
    return ExplicitMdp(P, rng.uniform(0, 1, size=(states, actions)), gamma)
