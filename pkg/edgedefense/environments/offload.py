r"""
The anti-jamming computation offloading game.

In every slot a mobile device has a computation task of ``task_bits`` bits.
It chooses an edge node and an offloading rate, i.e., the fraction of the
task it transmits to that edge node. The rest is computed locally. A jammer
interferes with the transmission to one of the edge nodes. The device
observes the jamming power it received, the bandwidth, its battery level and
the user density at the edge nodes.

EXAMPLES::

    >>> env, observation = reset(OffloadConfig(), seed=0)
    >>> observation.jam_power_mw, observation.battery_frac
    (0.0, 1.0)
    >>> env.actions
    12

A step returns the next observation and the breakdown of the reward::

    >>> observation, breakdown = step(env, OffloadAction(edge_index=2, rate_level=3))
    >>> breakdown.utility == utility(breakdown.sinr, breakdown.ber, breakdown.energy_j, breakdown.delay_s, env.config.weights)
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
import collections
import logging
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from edgedefense.core import Quantizer, RewardWeights, SeededRng, decode_state_index, state_index
from edgedefense.environments.channel import ChannelModel, MarkovChain
from edgedefense.environments.jammer import JammerConfig, make_jammer
from edgedefense.exceptions import ConfigurationError, ContractViolation, FrozenModeError

logger = logging.getLogger("offload")


@dataclass(frozen=True)
class ChannelConfig:
    r"""
    Fading of the links between the device and the edge nodes.

    Each link follows a birth-death Markov chain over ``gain_levels`` that
    stays on its level with probability ``stay_prob``. The bandwidth, the
    user density and the jammer's links change with the same probabilities.

    EXAMPLES::

        >>> ChannelConfig().model.levels
        4

    ::

        >>> ChannelConfig(stay_prob=2)
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ConfigurationError: Invalid value for stay_prob: must be in [0, 1] but found 2.

    """

    gain_levels: tuple = (0.02, 0.05, 0.1, 0.2)
    stay_prob: float = 0.6

    def __post_init__(self):
        object.__setattr__(self, "gain_levels", tuple(float(g) for g in self.gain_levels))
        # Validates levels and probabilities.
        self.birth_death(self.gain_levels)

    @property
    def model(self):
        return self.birth_death(self.gain_levels)

    def birth_death(self, levels):
        return ChannelModel.birth_death(levels, self.stay_prob)


@dataclass(frozen=True)
class OffloadConfig:
    r"""
    Parameters of the offloading game.

    Powers are in mW, frequencies in Hz, bandwidths in MHz, energies in J and
    distances in m. The device can offload the fractions 0, 1/(R-1), …, 1 of
    its task where R is ``num_rate_levels``.

    The device's links are scaled by ``edge_distance_m`` ^ -``path_loss_exp``.
    When no distances are given, edge node ``i`` is 1 + 0.15·i m away.

    An offloading attempt that fails because the SINR is zero costs a
    timeout of ``timeout_factor`` times the time to compute the whole task
    locally before the offloaded bits are computed locally.

    Without ``battery_dynamics``, the battery stays full. This is required,
    together with exact observations and a jammer that does not learn, to
    enumerate the game as an MDP, see :func:`enumerate_mdp`.

    EXAMPLES::

        >>> config = OffloadConfig()
        >>> config.num_edges, config.num_rate_levels, config.edge_distances
        (3, 4, (1.0, 1.15, 1.3))

    Invalid values are reported with the name of the field::

        >>> OffloadConfig(num_edges=0)
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ConfigurationError: Invalid value for num_edges: must be positive but found 0.

    ::

        >>> OffloadConfig(num_rate_levels=1)
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ConfigurationError: Invalid value for num_rate_levels: must be at least 2 but found 1.

    ::

        >>> OffloadConfig(num_edges=2, edge_distance_m=(1.0, 2.0, 3.0))
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ConfigurationError: Invalid value for edge_distance_m: expected 2 positive distances but found (1.0, 2.0, 3.0).

    """

    num_edges: int = 3
    num_rate_levels: int = 4
    tx_power_mw: float = 100.0
    noise_mw: float = 1.0
    task_bits: int = 100000
    cpu_cycles_per_bit: int = 100
    local_cpu_hz: float = 1e8
    edge_cpu_hz: float = 1e9
    link_rate_bps_per_hz: float = 1.0
    bandwidth_levels_mhz: tuple = (1.0, 2.0)
    energy_per_cycle_j: float = 1e-8
    battery_capacity_j: float = 1000.0
    battery_dynamics: bool = True
    user_density_levels: tuple = (0.0, 1.0, 2.0)
    edge_distance_m: tuple = ()
    path_loss_exp: float = 2.0
    timeout_factor: float = 2.0
    obs_noise_sigma: float = 0.0
    obs_delay_slots: int = 0
    observation_bins: int = 4
    max_states: int = 100000
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    jammer: JammerConfig = field(default_factory=JammerConfig)
    weights: RewardWeights = field(default_factory=RewardWeights)

    def __post_init__(self):
        for name in ("bandwidth_levels_mhz", "user_density_levels", "edge_distance_m"):
            object.__setattr__(self, name, tuple(float(x) for x in getattr(self, name)))

        for name in ("num_edges", "tx_power_mw", "noise_mw", "task_bits", "cpu_cycles_per_bit",
                     "local_cpu_hz", "edge_cpu_hz", "link_rate_bps_per_hz", "battery_capacity_j", "max_states"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(name, f"must be positive but found {getattr(self, name)}.")
        for name in ("energy_per_cycle_j", "path_loss_exp", "timeout_factor", "obs_noise_sigma", "obs_delay_slots"):
            if getattr(self, name) < 0:
                raise ConfigurationError(name, f"must not be negative but found {getattr(self, name)}.")

        if self.num_rate_levels < 2:
            raise ConfigurationError(
                "num_rate_levels", f"must be at least 2 but found {self.num_rate_levels}."
            )
        if self.observation_bins < 2:
            raise ConfigurationError(
                "observation_bins", f"must be at least 2 but found {self.observation_bins}."
            )
        if not self.bandwidth_levels_mhz or min(self.bandwidth_levels_mhz) <= 0:
            raise ConfigurationError(
                "bandwidth_levels_mhz", f"must be positive but found {self.bandwidth_levels_mhz}."
            )
        if not self.user_density_levels or min(self.user_density_levels) < 0:
            raise ConfigurationError(
                "user_density_levels", f"must not be negative but found {self.user_density_levels}."
            )
        if self.edge_distance_m and (
            len(self.edge_distance_m) != self.num_edges or min(self.edge_distance_m) <= 0
        ):
            raise ConfigurationError(
                "edge_distance_m",
                f"expected {self.num_edges} positive distances but found {self.edge_distance_m}.",
            )
        if self.jammer.distance_to_edge and len(self.jammer.distance_to_edge) != self.num_edges:
            raise ConfigurationError(
                "distance_to_edge",
                f"expected {self.num_edges} distances but found {self.jammer.distance_to_edge}.",
            ).within("jammer")

    @property
    def edge_distances(self):
        if self.edge_distance_m:
            return self.edge_distance_m
        return tuple(1 + 0.15 * edge for edge in range(self.num_edges))

    @property
    def actions(self):
        return self.num_edges * self.num_rate_levels

    def action(self, index):
        r"""
        Return the action with the given index.

        Actions are enumerated edge-major, rate-minor.

        EXAMPLES::

            >>> config = OffloadConfig()
            >>> config.action(5)
            OffloadAction(edge_index=1, rate_level=1)
            >>> config.action_index(config.action(5))
            5

        ::

            >>> config.action(12)
            Traceback (most recent call last):
            ...
            edgedefense.exceptions.ContractViolation: Action 12 is out of range for 12 actions.

        """
        if not 0 <= index < self.actions:
            raise ContractViolation(f"Action {index} is out of range for {self.actions} actions.")
        edge_index, rate_level = divmod(int(index), self.num_rate_levels)
        return OffloadAction(edge_index, rate_level)

    def action_index(self, action):
        if not (0 <= action.edge_index < self.num_edges and 0 <= action.rate_level < self.num_rate_levels):
            raise ContractViolation(f"{action} is not an action of a game with {self.num_edges} edge nodes and {self.num_rate_levels} rate levels.")
        return action.edge_index * self.num_rate_levels + action.rate_level

    def offload_fraction(self, action):
        return action.rate_level / (self.num_rate_levels - 1)

    def device_link(self, edge):
        r"""
        Return the fading model of the link from the device to ``edge``.
        """
        return self.channel.model.scaled(self.edge_distances[edge] ** -self.path_loss_exp)

    def jammer_link(self, edge):
        r"""
        Return the fading model of the link from the jammer to ``edge``.
        """
        return self.channel.birth_death(self.jammer.gain_levels).scaled(self.jammer.path_loss(edge))

    def max_jam_power_mw(self):
        r"""
        Return the largest jamming power an edge node can receive.

        EXAMPLES::

            >>> OffloadConfig().max_jam_power_mw()
            40.0

        """
        return self.jammer.jam_power_mw * max(
            self.jammer_link(edge).gain_levels[-1] for edge in range(self.num_edges)
        )

    def perturbed(self, rng, amount=0.2):
        r"""
        Return a copy of this configuration with the jamming power and the
        stay probability of the fading scaled by random factors in
        [1 - ``amount``, 1 + ``amount``].

        EXAMPLES::

            >>> config = OffloadConfig().perturbed(SeededRng(0))
            >>> 80 <= config.jammer.jam_power_mw <= 120
            True

        """
        jam = rng.uniform(1 - amount, 1 + amount)
        stay = rng.uniform(1 - amount, 1 + amount)
        return replace(
            self,
            jammer=replace(self.jammer, jam_power_mw=self.jammer.jam_power_mw * jam),
            channel=replace(self.channel, stay_prob=min(1.0, self.channel.stay_prob * stay)),
        )


@dataclass(frozen=True)
class OffloadAction:
    r"""
    The edge node and the offloading rate level chosen by the device.

    A ``rate_level`` of 0 computes the whole task locally.

    EXAMPLES::

        >>> OffloadAction(edge_index=0, rate_level=0)
        OffloadAction(edge_index=0, rate_level=0)

    """

    edge_index: int
    rate_level: int


@dataclass(frozen=True)
class SlotObservation:
    r"""
    What the device observes at the beginning of a slot: the jamming power
    it received at its edge node in the previous slot, the bandwidth, the
    fraction of its battery left and the user density.
    """

    jam_power_mw: float
    bandwidth_mhz: float
    battery_frac: float
    user_density: float


@dataclass(frozen=True)
class RewardBreakdown:
    r"""
    The components of the reward of a slot and the resulting utility.

    EXAMPLES::

        >>> RewardBreakdown.evaluate(3.0, 0.0, 0.5, 0.3, RewardWeights(1, 0, 1, 1)).utility
        1.2

    """

    sinr: float
    ber: float
    energy_j: float
    delay_s: float
    utility: float

    @classmethod
    def evaluate(cls, sinr_value, ber_value, energy_j, delay_s, weights):
        return cls(
            sinr_value, ber_value, energy_j, delay_s,
            utility(sinr_value, ber_value, energy_j, delay_s, weights),
        )


class Transition(NamedTuple):
    r"""
    An experience of an agent: the reward of ``action`` in ``state`` and the
    state that followed.
    """

    state: object
    action: int
    reward: float
    next_state: object


def sinr(tx_mw, gain, noise_mw, jam_mw, jam_gain):
    r"""
    Return the signal to interference plus noise ratio of a transmission.

    EXAMPLES::

        >>> sinr(100, 0.1, 1, 0, 1)
        10.0
        >>> sinr(100, 0.1, 1, 9, 1)
        1.0
        >>> sinr(0, 0.1, 1, 9, 1)
        0.0

    More jamming never helps::

        >>> values = [sinr(100, 0.1, 1, jam, 0.3) for jam in range(100)]
        >>> all(a >= b for a, b in zip(values, values[1:]))
        True

    """
    return tx_mw * gain / (noise_mw + jam_mw * jam_gain)


def ber(sinr_value):
    r"""
    Return the bit error rate of noncoherent DPSK at ``sinr_value``.

    EXAMPLES::

        >>> ber(0)
        0.5
        >>> round(ber(2), 5)
        0.18394

    The error rate strictly decreases with the SINR::

        >>> rng = SeededRng(0)
        >>> pairs = [sorted(rng.uniform(0, 50, size=2)) for _ in range(1000)]
        >>> all(ber(a) > ber(b) for a, b in pairs if a < b)
        True

    """
    return 0.5 * math.exp(-sinr_value / 2)


def energy_and_delay(cfg, a, sinr, bandwidth_mhz, user_density=0.0):
    r"""
    Return the energy in J and the delay in s to complete the task of a
    slot when taking action ``a``.

    The offloaded bits are transmitted at the rate of the link, shared among
    ``user_density`` other users, and computed at the edge node while the
    rest of the task is computed locally.

    EXAMPLES:

    Computing locally::

        >>> cfg = OffloadConfig()
        >>> energy_and_delay(cfg, OffloadAction(0, 0), 0.0, 1.0)
        (0.1, 0.1)

    Offloading everything to an infinitely fast edge node::

        >>> cfg = OffloadConfig(task_bits=10**6, edge_cpu_hz=math.inf)
        >>> energy_and_delay(cfg, OffloadAction(0, 3), 1.0, 1.0)
        (0.1, 1.0)

    When offloading fails, the device waits for a timeout and then computes
    everything locally::

        >>> cfg = OffloadConfig()
        >>> energy, delay = energy_and_delay(cfg, OffloadAction(0, 3), 0.0, 1.0)
        >>> energy, round(delay, 12)
        (0.1, 0.3)

    """
    cycles_per_task = cfg.task_bits * cfg.cpu_cycles_per_bit
    local_energy = cycles_per_task * cfg.energy_per_cycle_j
    local_time = cycles_per_task / cfg.local_cpu_hz

    f = cfg.offload_fraction(a)
    rate = (
        bandwidth_mhz * 1e6 * cfg.link_rate_bps_per_hz * math.log2(1 + sinr) / (1 + user_density)
    )

    if f == 0:
        return local_energy, local_time

    if rate <= 0:
        timeout = cfg.timeout_factor * local_time
        return local_energy, max(timeout, (1 - f) * local_time) + f * local_time

    transmission_time = f * cfg.task_bits / rate
    energy = cfg.tx_power_mw / 1000 * transmission_time + (1 - f) * local_energy
    delay = max(
        transmission_time + f * cycles_per_task / cfg.edge_cpu_hz,
        (1 - f) * local_time,
    )
    return energy, delay


def utility(sinr, ber, energy_j, delay_s, w):
    r"""
    Return the utility of a slot, i.e., the weighted spectral efficiency
    proxy log2(1 + ``sinr``) minus the weighted bit error rate, energy and
    delay.

    EXAMPLES::

        >>> abs(utility(3, 0.1, 0.5, 0.3, RewardWeights(1, 0, 1, 1)) - 1.2) < 1e-12
        True
        >>> utility(0, 0.5, 1, 1, RewardWeights(0, 1, 0, 0))
        -0.5

    Scaling the weights scales the utility::

        >>> w = RewardWeights()
        >>> abs(utility(3, 0.1, 0.5, 0.3, RewardWeights(2, 2, 1, 1)) - 2 * utility(3, 0.1, 0.5, 0.3, w)) < 1e-12
        True

    """
    return (
        w.sinr * math.log2(1 + sinr)
        - w.ber * ber
        - w.energy * energy_j
        - w.delay * delay_s
    )


def evaluate(cfg, action, gain, jam_mw, jam_gain, bandwidth_mhz, user_density):
    r"""
    Return the :class:`RewardBreakdown` of ``action`` when the link to the
    chosen edge node has ``gain`` and that node receives ``jam_mw`` over a
    link with ``jam_gain``.

    A device that computes locally does not transmit, so its SINR is 0.

    EXAMPLES::

        >>> cfg = OffloadConfig(weights=RewardWeights(1, 0, 0, 0))
        >>> round(evaluate(cfg, OffloadAction(0, 3), 0.1, 0.0, 1.0, 1.0, 0.0).utility, 12)
        3.459431618637
        >>> evaluate(cfg, OffloadAction(0, 0), 0.1, 0.0, 1.0, 1.0, 0.0).sinr
        0.0

    """
    sinr_value = 0.0
    if action.rate_level > 0:
        sinr_value = sinr(cfg.tx_power_mw, gain, cfg.noise_mw, jam_mw, jam_gain)
    energy_j, delay_s = energy_and_delay(cfg, action, sinr_value, bandwidth_mhz, user_density)
    return RewardBreakdown.evaluate(sinr_value, ber(sinr_value), energy_j, delay_s, cfg.weights)


def _jammer_phases(cfg):
    if cfg.jammer.kind == "sweep":
        return cfg.jammer.sweep_period_slots * cfg.num_edges
    return 1


def state_bins(cfg):
    r"""
    Return the number of values of each field of the ground-truth state of
    the game: the sweep phase of the jammer, the level of each device link,
    the level of each jammer link, the bandwidth level and the user density
    level.

    EXAMPLES::

        >>> state_bins(OffloadConfig(num_edges=2, edge_distance_m=(1, 2), jammer=JammerConfig(distance_to_edge=())))
        [4, 4, 4, 4, 4, 2, 3]

    """
    return (
        [_jammer_phases(cfg)]
        + [cfg.channel.model.levels] * cfg.num_edges
        + [len(cfg.jammer.gain_levels)] * cfg.num_edges
        + [len(cfg.bandwidth_levels_mhz), len(cfg.user_density_levels)]
    )


def frozen_violation(cfg):
    r"""
    Return the field and the reason why the game described by ``cfg`` cannot
    be enumerated as an MDP, or ``None`` if it can.

    EXAMPLES::

        >>> frozen_violation(OffloadConfig(obs_noise_sigma=0.1))
        ('obs_noise_sigma', 'observations must be exact.')

    """
    if cfg.obs_noise_sigma != 0:
        return "obs_noise_sigma", "observations must be exact."
    if cfg.obs_delay_slots != 0:
        return "obs_delay_slots", "observations must not be delayed."
    if cfg.jammer.kind not in ("none", "sweep"):
        return "jammer.kind", "the jammer must follow a fixed schedule."
    if cfg.battery_dynamics:
        return "battery_dynamics", "battery dynamics must be disabled."
    states = math.prod(state_bins(cfg))
    if states > cfg.max_states:
        return "max_states", f"the game has {states} states, more than {cfg.max_states}."
    return None


def _require_frozen(cfg):
    violation = frozen_violation(cfg)
    if violation is not None:
        name, reason = violation
        raise FrozenModeError(
            name, f"the environment is not frozen, an exact MDP cannot be enumerated: {reason}"
        )


def enumerate_mdp(cfg, gamma=0.1):
    r"""
    Return the game described by the frozen configuration ``cfg`` as an
    :class:`ExplicitMdp` with discount ``gamma``.

    States are the ground-truth states of :func:`state_bins`, encoded with
    :func:`edgedefense.core.state_index`. Transitions do not depend on the
    action of the device: the sweep phase advances deterministically and all
    links change independently. Episodes start in phase 0 with any link
    levels.

    EXAMPLES:

    A game with a single channel state and no jammer has a single state::

        >>> cfg = frozen_config(num_edges=1, gain_levels=(0.1,), jammer_kind="none")
        >>> mdp = enumerate_mdp(cfg)
        >>> mdp.S, mdp.A
        (1, 3)

    With deterministic channels every transition is certain::

        >>> mdp = enumerate_mdp(frozen_config(gain_levels=(0.1,)))
        >>> bool(((mdp.P == 0) | (mdp.P == 1)).all())
        True

    Probabilities always sum to one::

        >>> mdp = enumerate_mdp(frozen_config())
        >>> mdp.S, mdp.A
        (384, 9)
        >>> bool(np.allclose(mdp.P.sum(axis=2), 1, atol=1e-9))
        True

    Games that are not frozen cannot be enumerated::

        >>> enumerate_mdp(OffloadConfig(battery_dynamics=False, obs_delay_slots=1))
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.FrozenModeError: Invalid value for obs_delay_slots: the environment is not frozen, an exact MDP cannot be enumerated: observations must not be delayed.

    """
    from edgedefense.oracle import ExplicitMdp

    _require_frozen(cfg)

    bins = state_bins(cfg)
    transition = _phase_transition(bins[0])
    for edge in range(cfg.num_edges):
        transition = np.kron(transition, cfg.device_link(edge).transition)
    for edge in range(cfg.num_edges):
        transition = np.kron(transition, cfg.jammer_link(edge).transition)
    transition = np.kron(transition, cfg.channel.birth_death(_ranks(cfg.bandwidth_levels_mhz)).transition)
    transition = np.kron(transition, cfg.channel.birth_death(_ranks(cfg.user_density_levels)).transition)

    states = transition.shape[0]
    P = np.repeat(transition[:, np.newaxis, :], cfg.actions, axis=1)
    start = [s for s in range(states) if decode_state_index(bins, s)[0] == 0]
    return ExplicitMdp(P, reward_matrix(cfg), gamma, start=start)


def _phase_transition(phases):
    transition = np.zeros((phases, phases))
    for phase in range(phases):
        transition[phase, (phase + 1) % phases] = 1
    return transition


def _ranks(levels):
    return tuple(float(rank) for rank in range(1, len(levels) + 1))


def reward_matrix(cfg):
    r"""
    Return the utility of every action in every ground-truth state of the
    frozen game ``cfg``.

    EXAMPLES::

        >>> Rw = reward_matrix(frozen_config())
        >>> Rw.shape
        (384, 9)

    """
    _require_frozen(cfg)

    bins = state_bins(cfg)
    E = cfg.num_edges
    device = [cfg.device_link(edge).gain_levels for edge in range(E)]
    jam = [cfg.jammer_link(edge).gain_levels for edge in range(E)]
    jammer = make_jammer(cfg.jammer, E, None)

    Rw = np.empty((math.prod(bins), cfg.actions))
    for s in range(Rw.shape[0]):
        fields = decode_state_index(bins, s)
        phase, device_levels, jam_levels = fields[0], fields[1:1 + E], fields[1 + E:1 + 2 * E]
        target = jammer.target(phase)
        bandwidth = cfg.bandwidth_levels_mhz[fields[-2]]
        density = cfg.user_density_levels[fields[-1]]
        for a in range(cfg.actions):
            action = cfg.action(a)
            edge = action.edge_index
            Rw[s, a] = evaluate(
                cfg, action,
                device[edge][device_levels[edge]],
                cfg.jammer.jam_power_mw if target == edge else 0.0,
                jam[edge][jam_levels[edge]],
                bandwidth, density,
            ).utility
    return Rw


def known_dynamics(cfg):
    r"""
    Return the part of the frozen game ``cfg`` that a device can know in
    advance: the reward of each action in each state and the post-decision
    state that the action leads to before the channels change.

    The reward only depends on the current state. The post-decision state
    has the sweep phase advanced and all link levels unchanged.

    EXAMPLES::

        >>> cfg = frozen_config()
        >>> known_reward, post_decision = known_dynamics(cfg)
        >>> known_reward.shape, post_decision.shape
        ((384, 9), (384, 9))
        >>> bins = state_bins(cfg)
        >>> decode_state_index(bins, int(post_decision[0, 0]))
        (1, 0, 0, 0, 0, 0, 0, 0, 0)

    """
    bins = state_bins(cfg)
    post = np.empty(math.prod(bins), dtype=int)
    for s in range(len(post)):
        fields = decode_state_index(bins, s)
        post[s] = state_index(bins, ((fields[0] + 1) % bins[0],) + fields[1:])
    return reward_matrix(cfg), np.repeat(post[:, np.newaxis], cfg.actions, axis=1)


def frozen_config(num_edges=3, num_rate_levels=3, gain_levels=(0.02, 0.05, 0.1, 0.2), jammer_kind="sweep", **kwargs):
    r"""
    Return a small configuration of the game that can be enumerated as an
    MDP: one level of jammer gain, bandwidth and user density, a sweep
    period of 2 slots and no battery dynamics.

    EXAMPLES::

        >>> frozen_violation(frozen_config()) is None
        True
        >>> math.prod(state_bins(frozen_config()))
        384

    """
    return OffloadConfig(
        num_edges=num_edges,
        num_rate_levels=num_rate_levels,
        bandwidth_levels_mhz=(1.0,),
        user_density_levels=(0.0,),
        battery_dynamics=False,
        channel=ChannelConfig(gain_levels=gain_levels),
        jammer=JammerConfig(kind=jammer_kind, gain_levels=(0.2,), sweep_period_slots=2, distance_to_edge=()),
        **kwargs,
    )


class OffloadEnvironment:
    r"""
    A running offloading game.

    EXAMPLES::

        >>> env = OffloadEnvironment(OffloadConfig(battery_capacity_j=100), seed=0)
        >>> env.observation.battery_frac
        1.0

    The same seed produces the same game::

        >>> def rollout(seed):
        ...     env = OffloadEnvironment(OffloadConfig(), seed)
        ...     return [env.step(a % 12) for a in range(10)]
        >>> rollout(3) == rollout(3)
        True
        >>> rollout(3) == rollout(4)
        False

    A closed game cannot be played::

        >>> env.close()
        >>> env.step(0)
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ContractViolation: Cannot step a closed environment.

    TESTS:

    Jamming lowers the SINR of the chosen edge node::

        >>> cfg = frozen_config(num_edges=1, jammer_kind="none")
        >>> jammed = replace(cfg, jammer=replace(cfg.jammer, kind="sweep"))
        >>> quiet, loud = OffloadEnvironment(cfg, 5), OffloadEnvironment(jammed, 5)
        >>> all(quiet.step(2)[1].sinr >= loud.step(2)[1].sinr for _ in range(100))
        True

    The battery drains and never becomes negative::

        >>> env = OffloadEnvironment(OffloadConfig(battery_capacity_j=1), seed=0)
        >>> levels = [env.step(0)[0].battery_frac for _ in range(20)]
        >>> levels[-1], all(a >= b for a, b in zip(levels, levels[1:]))
        (0.0, True)

    An empty battery forces local computation::

        >>> env.step(3)[1].sinr, env.last_action
        (0.0, OffloadAction(edge_index=0, rate_level=0))

    """

    def __init__(self, config, seed):
        self.config = config
        rng = SeededRng(seed)

        channel_rng = rng.child("channel")
        E = config.num_edges
        self._links = [MarkovChain(config.device_link(edge), channel_rng) for edge in range(E)]
        self._jam_links = [MarkovChain(config.jammer_link(edge), channel_rng) for edge in range(E)]
        self._bandwidth = MarkovChain(config.channel.birth_death(_ranks(config.bandwidth_levels_mhz)), channel_rng)
        self._density = MarkovChain(config.channel.birth_death(_ranks(config.user_density_levels)), channel_rng)

        self.jammer = make_jammer(config.jammer, E, rng.child("jammer"))
        self._observation_rng = rng.child("observation")

        self.slot = 0
        self.battery_j = config.battery_capacity_j
        self.last_action = None
        self.closed = False

        self._jam_quantizer = Quantizer(0, config.max_jam_power_mw() or 1.0, config.observation_bins - 1)
        self._bandwidth_quantizer = Quantizer(0, max(config.bandwidth_levels_mhz), config.observation_bins)
        self._battery_quantizer = Quantizer(0, 1, config.observation_bins)
        self._density_quantizer = Quantizer(0, max(config.user_density_levels) or 1.0, config.observation_bins)

        truth = self._ground_truth_observation(0.0)
        self._pending = collections.deque([truth] * (config.obs_delay_slots + 1), maxlen=config.obs_delay_slots + 1)
        self.observation = self._observe(truth)

    @property
    def actions(self):
        return self.config.actions

    @property
    def state_bins(self):
        return state_bins(self.config)

    @property
    def state(self):
        r"""
        Return the index of the ground-truth state, consistent with the
        states of :func:`enumerate_mdp`.

        EXAMPLES::

            >>> env = OffloadEnvironment(frozen_config(), seed=0)
            >>> 0 <= env.state < 384
            True

        """
        phase = self.jammer.phase(self.slot)
        return state_index(
            self.state_bins,
            [phase]
            + [link.level for link in self._links]
            + [link.level for link in self._jam_links]
            + [self._bandwidth.level, self._density.level],
        )

    def _ground_truth_observation(self, jam_mw):
        return SlotObservation(
            jam_power_mw=jam_mw,
            bandwidth_mhz=self.config.bandwidth_levels_mhz[self._bandwidth.level],
            battery_frac=self.battery_j / self.config.battery_capacity_j,
            user_density=self.config.user_density_levels[self._density.level],
        )

    def _observe(self, truth):
        self._pending.append(truth)
        observation = self._pending[0]

        sigma = self.config.obs_noise_sigma
        if sigma > 0:
            noise = 1 + self._observation_rng.normal(sigma, size=4)
            observation = SlotObservation(
                jam_power_mw=max(0.0, observation.jam_power_mw * noise[0]),
                bandwidth_mhz=max(1e-9, observation.bandwidth_mhz * noise[1]),
                battery_frac=min(1.0, max(0.0, observation.battery_frac * noise[2])),
                user_density=max(0.0, observation.user_density * noise[3]),
            )
        return observation

    def step(self, action):
        r"""
        Play ``action``, an :class:`OffloadAction` or its index, in the
        current slot and return the next observation and the
        :class:`RewardBreakdown` of this slot.
        """
        if self.closed:
            raise ContractViolation("Cannot step a closed environment.")

        config = self.config
        if not isinstance(action, OffloadAction):
            action = config.action(action)
        config.action_index(action)

        if config.battery_dynamics and self.battery_j <= 0:
            action = OffloadAction(action.edge_index, 0)
        self.last_action = action

        edge = action.edge_index
        target = self.jammer.target(self.slot)
        jam_mw = config.jammer.jam_power_mw if target == edge else 0.0
        jam_gain = self._jam_links[edge].gain
        breakdown = evaluate(
            config, action, self._links[edge].gain, jam_mw, jam_gain,
            config.bandwidth_levels_mhz[self._bandwidth.level],
            config.user_density_levels[self._density.level],
        )

        if config.battery_dynamics:
            self.battery_j = max(0.0, self.battery_j - breakdown.energy_j)

        self.jammer.learn(edge if action.rate_level > 0 else None, breakdown.utility)

        for link in self._links + self._jam_links + [self._bandwidth, self._density]:
            link.step()
        self.slot += 1

        self.observation = self._observe(self._ground_truth_observation(jam_mw * jam_gain))
        return self.observation, breakdown

    def close(self):
        self.closed = True

    def observation_index(self, observation):
        r"""
        Return the tabular state of ``observation``.

        Each of the four observed quantities is quantized into
        ``observation_bins`` bins. The first bin of the jamming power is
        reserved for slots without jamming.

        EXAMPLES::

            >>> env = OffloadEnvironment(OffloadConfig(), seed=0)
            >>> env.observation_index(SlotObservation(0.0, 2.0, 1.0, 0.0))
            60
            >>> env.observation_index(SlotObservation(5.0, 2.0, 1.0, 0.0))
            124
            >>> env.observation_states
            256

        """
        bins = self.config.observation_bins
        jam = 0 if observation.jam_power_mw <= 0 else 1 + self._jam_quantizer.quantize(observation.jam_power_mw)
        return state_index(
            [bins] * 4,
            [
                jam,
                self._bandwidth_quantizer.quantize(observation.bandwidth_mhz),
                self._battery_quantizer.quantize(observation.battery_frac),
                self._density_quantizer.quantize(observation.user_density),
            ],
        )

    @property
    def observation_states(self):
        return self.config.observation_bins**4

    def observation_features(self, observation):
        r"""
        Return ``observation`` as a vector of four numbers in [0, 1] for the
        input of a network.

        EXAMPLES::

            >>> env = OffloadEnvironment(OffloadConfig(), seed=0)
            >>> env.observation_features(SlotObservation(20.0, 1.0, 1.0, 1.0)).tolist()
            [0.5, 0.5, 1.0, 0.5]

        """
        return np.array(
            [
                min(1.0, observation.jam_power_mw / self._jam_quantizer.hi),
                min(1.0, observation.bandwidth_mhz / self._bandwidth_quantizer.hi),
                observation.battery_frac,
                min(1.0, observation.user_density / self._density_quantizer.hi),
            ]
        )


def reset(cfg, seed):
    r"""
    Return a new game for ``cfg`` and its initial observation.

    EXAMPLES::

        >>> env, observation = reset(OffloadConfig(battery_capacity_j=100), seed=7)
        >>> observation == reset(OffloadConfig(battery_capacity_j=100), seed=7)[1]
        True
        >>> observation.battery_frac
        1.0

    """
    env = OffloadEnvironment(cfg, seed)
    return env, env.observation


def step(env, a):
    r"""
    Play the action ``a`` in ``env`` and return the next observation and the
    :class:`RewardBreakdown` of the slot.
    """
    return env.step(a)


def transition_fidelity(cfg, steps=100000, seed=0, min_visits=500):
    r"""
    Compare the transitions of a simulated frozen game with the
    probabilities of :func:`enumerate_mdp`.

    Plays ``steps`` uniformly random actions and returns a table with one
    row per state, action and successor of every state-action pair visited
    at least ``min_visits`` times. The ``z`` column is the deviation of the
    observed count from its expectation in standard deviations of the
    binomial distribution.

    EXAMPLES::

        >>> cfg = frozen_config(num_edges=1, num_rate_levels=2, gain_levels=(0.05, 0.1, 0.2), jammer_kind="none")
        >>> fidelity = transition_fidelity(cfg, steps=20000, seed=0)
        >>> sorted(fidelity.state.unique().tolist()), sorted(fidelity.action.unique().tolist())
        ([0, 1, 2], [0, 1])
        >>> bool(fidelity.z.abs().max() < 5)
        True

    """
    import pandas
    from scipy.stats import binom

    mdp = enumerate_mdp(cfg)
    env = OffloadEnvironment(cfg, seed)
    rng = SeededRng(seed).child("agent")

    counts = np.zeros(mdp.P.shape, dtype=int)
    state = env.state
    for _ in range(steps):
        action = rng.integers(mdp.A)
        env.step(action)
        counts[state, action, env.state] += 1
        state = env.state

    rows = []
    visits = counts.sum(axis=2)
    for s, a in zip(*np.nonzero(visits >= min_visits)):
        n = int(visits[s, a])
        for s_next in np.flatnonzero((mdp.P[s, a] > 0) | (counts[s, a] > 0)):
            p = float(mdp.P[s, a, s_next])
            count = int(counts[s, a, s_next])
            deviation = float(binom.std(n, p))
            if deviation > 0:
                z = (count - n * p) / deviation
            else:
                z = 0.0 if count == n * p else math.inf
            rows.append({
                "state": int(s), "action": int(a), "next_state": int(s_next), "visits": n,
                "expected": p, "observed": count / n, "z": z,
            })

    fidelity = pandas.DataFrame(rows, columns=["state", "action", "next_state", "visits", "expected", "observed", "z"])
    fidelity["within_3sigma"] = fidelity.z.abs() <= 3
    return fidelity
