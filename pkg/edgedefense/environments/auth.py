r"""
Physical layer spoofing detection at an edge node.

Every slot, an edge node receives a message that claims to come from a
legitimate sender. It compares the channel it estimates from the message
with the channel it recorded for that sender and rejects the message when
the two differ by more than a threshold. The threshold is the action of the
defending agent.

EXAMPLES::

    >>> env = AuthEnvironment(AuthConfig(), seed=0)
    >>> observation, reward, outcome = auth_step(env, theta_index=5)
    >>> outcome.classification in ("true-accept", "false-alarm", "miss", "true-reject")
    True
    >>> env.actions
    16

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
from dataclasses import dataclass, field, replace

import numpy as np

from edgedefense.core import Quantizer, SeededRng, state_index
from edgedefense.exceptions import ConfigurationError, ContractViolation

logger = logging.getLogger("auth")


def _default_grid():
    return tuple(float(theta) for theta in np.linspace(0, 0.5, 16))


def _validate_schedule(name, schedule, lo, hi):
    schedule = tuple((int(start), float(value)) for start, value in schedule)
    if not schedule:
        return schedule
    if schedule[0][0] != 0:
        raise ConfigurationError(name, f"the first entry must start at slot 0 but found {schedule[0][0]}.")
    if any(a[0] >= b[0] for a, b in zip(schedule, schedule[1:])):
        raise ConfigurationError(name, "entries must be sorted by strictly increasing start slot.")
    for _, value in schedule:
        if not lo <= value <= hi:
            raise ConfigurationError(name, f"values must be in [{lo}, {hi}] but found {value}.")
    return schedule


def scheduled(schedule, slot, default):
    r"""
    Return the value of the step ``schedule`` of ``(start_slot, value)``
    pairs in ``slot``, or ``default`` for an empty schedule.

    EXAMPLES::

        >>> schedule = ((0, 0.1), (100, 0.5))
        >>> scheduled(schedule, 0, 1.0), scheduled(schedule, 99, 1.0), scheduled(schedule, 100, 1.0)
        (0.1, 0.1, 0.5)
        >>> scheduled((), 7, 1.0)
        1.0

    """
    value = default
    for start, scheduled_value in schedule:
        if start > slot:
            break
        value = scheduled_value
    return value


@dataclass(frozen=True)
class AuthConfig:
    r"""
    Parameters of the spoofing detection game.

    Channels are vectors of ``vec_len`` gains. The legitimate channel is
    estimated with a relative error of ``legit_noise_sigma``. A spoofer's
    channel differs from the recorded one by the relative amount
    ``spoof_offset``. A message is spoofed with the probability that
    ``spoof_prob_schedule`` prescribes for the slot.

    The optional ``spoof_offset_schedule`` and ``legit_noise_schedule`` let
    the spoofer move and the estimation quality change during a run.

    The agent observes rates over the last ``window`` messages, each
    quantized into ``observation_bins`` bins.

    EXAMPLES::

        >>> config = AuthConfig()
        >>> len(config.threshold_grid), config.threshold_grid[-1]
        (16, 0.5)
        >>> config.spoof_prob(0), config.spoof_prob(10000)
        (0.1, 0.5)

    ::

        >>> AuthConfig(spoof_prob_schedule=((5, 0.1),))
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ConfigurationError: Invalid value for spoof_prob_schedule: the first entry must start at slot 0 but found 5.

    ::

        >>> AuthConfig(threshold_grid=(0.1, 0.1))
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ConfigurationError: Invalid value for threshold_grid: must be non-negative and strictly increasing but found (0.1, 0.1).

    """

    vec_len: int = 8
    legit_noise_sigma: float = 0.05
    spoof_offset: float = 0.4
    spoof_prob_schedule: tuple = ((0, 0.1), (10000, 0.5))
    spoof_offset_schedule: tuple = ()
    legit_noise_schedule: tuple = ()
    threshold_grid: tuple = field(default_factory=_default_grid)
    window: int = 50
    g_correct: float = 1.0
    c_false_alarm: float = 1.0
    c_miss: float = 2.0
    observation_bins: int = 4

    def __post_init__(self):
        object.__setattr__(self, "threshold_grid", tuple(float(theta) for theta in self.threshold_grid))
        for name in ("vec_len", "legit_noise_sigma", "spoof_offset", "window", "observation_bins"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(name, f"must be positive but found {getattr(self, name)}.")
        for name in ("g_correct", "c_false_alarm", "c_miss"):
            if getattr(self, name) < 0:
                raise ConfigurationError(name, f"must not be negative but found {getattr(self, name)}.")

        grid = self.threshold_grid
        if not grid or grid[0] < 0 or any(a >= b for a, b in zip(grid, grid[1:])):
            raise ConfigurationError(
                "threshold_grid", f"must be non-negative and strictly increasing but found {grid}."
            )

        if not self.spoof_prob_schedule:
            raise ConfigurationError("spoof_prob_schedule", "must not be empty.")
        object.__setattr__(self, "spoof_prob_schedule", _validate_schedule("spoof_prob_schedule", self.spoof_prob_schedule, 0, 1))
        object.__setattr__(self, "spoof_offset_schedule", _validate_schedule("spoof_offset_schedule", self.spoof_offset_schedule, 0, np.inf))
        object.__setattr__(self, "legit_noise_schedule", _validate_schedule("legit_noise_schedule", self.legit_noise_schedule, 0, np.inf))

    @property
    def actions(self):
        return len(self.threshold_grid)

    def spoof_prob(self, slot):
        return scheduled(self.spoof_prob_schedule, slot, 0.0)

    def offset(self, slot):
        return scheduled(self.spoof_offset_schedule, slot, self.spoof_offset)

    def noise(self, slot):
        return scheduled(self.legit_noise_schedule, slot, self.legit_noise_sigma)

    def perturbed(self, rng, amount=0.2):
        r"""
        Return a copy of this configuration with the spoofer's offset and the
        estimation noise scaled by random factors in
        [1 - ``amount``, 1 + ``amount``].

        EXAMPLES::

            >>> config = AuthConfig().perturbed(SeededRng(0))
            >>> 0.32 <= config.spoof_offset <= 0.48
            True

        """
        offset = rng.uniform(1 - amount, 1 + amount)
        noise = rng.uniform(1 - amount, 1 + amount)
        return replace(
            self,
            spoof_offset=self.spoof_offset * offset,
            legit_noise_sigma=self.legit_noise_sigma * noise,
            spoof_offset_schedule=tuple((start, value * offset) for start, value in self.spoof_offset_schedule),
            legit_noise_schedule=tuple((start, value * noise) for start, value in self.legit_noise_schedule),
        )


@dataclass(frozen=True)
class AuthObservation:
    r"""
    The false alarm rate, the miss detection rate and the fraction of
    spoofed messages among the recent messages.
    """

    recent_false_alarm_rate: float
    recent_miss_rate: float
    recent_spoof_freq: float


def classify(decision, truth):
    r"""
    Return the classification of a ``decision`` on a message whose ``truth``
    is ``"legit"`` or ``"spoof"``.

    EXAMPLES::

        >>> [classify(d, t) for t in ("legit", "spoof") for d in ("accept", "reject")]
        ['true-accept', 'false-alarm', 'miss', 'true-reject']

    """
    return {
        ("accept", "legit"): "true-accept",
        ("reject", "legit"): "false-alarm",
        ("accept", "spoof"): "miss",
        ("reject", "spoof"): "true-reject",
    }[(decision, truth)]


@dataclass(frozen=True)
class AuthOutcome:
    r"""
    The test statistic of a message, the decision taken on it and whether
    it was spoofed.

    EXAMPLES::

        >>> AuthOutcome(0.2, "accept", "spoof").classification
        'miss'

    """

    statistic: float
    decision: str
    truth: str

    @property
    def classification(self):
        return classify(self.decision, self.truth)


def test_statistic(h_est, h_rec):
    r"""
    Return the squared distance of the estimated channel ``h_est`` from the
    recorded channel ``h_rec`` relative to the power of the record.

    EXAMPLES::

        >>> test_statistic([1, 2], [1, 2])
        0.0
        >>> abs(test_statistic([1.1, 0.9], [1, 1]) - 0.01) < 1e-12
        True

    The statistic does not depend on the scale of the channels::

        >>> abs(test_statistic([2.2, 1.8], [2, 2]) - test_statistic([1.1, 0.9], [1, 1])) < 1e-12
        True

    ::

        >>> test_statistic([1, 1], [0, 0])
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ContractViolation: The channel record must not vanish.

    """
    h_est = np.asarray(h_est, dtype=float)
    h_rec = np.asarray(h_rec, dtype=float)
    if h_est.shape != h_rec.shape:
        raise ContractViolation(f"Cannot compare channels of shapes {h_est.shape} and {h_rec.shape}.")

    power = float(h_rec @ h_rec)
    if power <= 0:
        raise ContractViolation("The channel record must not vanish.")
    difference = h_est - h_rec
    return float(difference @ difference) / power


def decide(L, theta):
    r"""
    Return whether a message with test statistic ``L`` is accepted under the
    threshold ``theta``.

    EXAMPLES::

        >>> decide(0, 0)
        'accept'
        >>> decide(0.02, 0.01)
        'reject'

    """
    return "accept" if L <= theta else "reject"


def rates(window):
    r"""
    Return the false alarm rate and the miss detection rate of the outcomes
    in ``window``.

    A rate without messages of its kind is 0.

    EXAMPLES::

        >>> legit = [AuthOutcome(0.0, "accept", "legit")] * 8 + [AuthOutcome(1.0, "reject", "legit")] * 2
        >>> spoof = [AuthOutcome(0.0, "accept", "spoof")] + [AuthOutcome(1.0, "reject", "spoof")] * 4
        >>> rates(legit + spoof)
        (0.2, 0.2)
        >>> rates(legit[:8])
        (0.0, 0.0)
        >>> rates([])
        (0.0, 0.0)

    """
    counts = collections.Counter(outcome.classification for outcome in window)
    legit = counts["true-accept"] + counts["false-alarm"]
    spoof = counts["miss"] + counts["true-reject"]
    return (
        counts["false-alarm"] / legit if legit else 0.0,
        counts["miss"] / spoof if spoof else 0.0,
    )


class AuthEnvironment:
    r"""
    A running spoofing detection game.

    EXAMPLES:

    Without a spoofer and with the loosest threshold, all messages pass::

        >>> env = AuthEnvironment(AuthConfig(spoof_prob_schedule=((0, 0.0),)), seed=0)
        >>> for _ in range(100):
        ...     observation, reward, outcome = auth_step(env, 15)
        >>> observation
        AuthObservation(recent_false_alarm_rate=0.0, recent_miss_rate=0.0, recent_spoof_freq=0.0)

    The strictest threshold rejects every legitimate message::

        >>> for _ in range(100):
        ...     observation, reward, outcome = auth_step(env, 0)
        >>> observation.recent_false_alarm_rate
        1.0

    A closed game cannot be played::

        >>> env.close()
        >>> auth_step(env, 0)
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ContractViolation: Cannot step a closed environment.

    TESTS:

    The same seed plays the same game::

        >>> def outcomes(seed):
        ...     env = AuthEnvironment(AuthConfig(), seed)
        ...     return [auth_step(env, slot % 16)[2] for slot in range(50)]
        >>> outcomes(1) == outcomes(1)
        True

    Rewards follow from the classification::

        >>> env = AuthEnvironment(AuthConfig(spoof_prob_schedule=((0, 0.5),)), seed=2)
        >>> for slot in range(200):
        ...     observation, reward, outcome = auth_step(env, slot % 16)
        ...     assert reward == env.reward(outcome.classification)

    """

    def __init__(self, config, seed):
        self.config = config
        self._rng = SeededRng(seed).child("auth")
        self.record = 0.5 + self._rng.uniform(0, 1, size=config.vec_len)
        self.pattern = 2.0 * self._rng.integer_array(2, config.vec_len) - 1
        self.window = collections.deque(maxlen=config.window)
        self.slot = 0
        self.observation = AuthObservation(0.0, 0.0, 0.0)
        self._quantizer = Quantizer(0, 1, config.observation_bins)
        self.closed = False

    @property
    def actions(self):
        return self.config.actions

    @property
    def observation_states(self):
        return self.config.observation_bins**3

    def reward(self, classification):
        config = self.config
        return {
            "true-accept": config.g_correct,
            "true-reject": config.g_correct,
            "false-alarm": -config.c_false_alarm,
            "miss": -config.c_miss,
        }[classification]

    def message(self):
        r"""
        Return the channel estimated from the next message and whether the
        message is spoofed.
        """
        config = self.config
        spoofed = self._rng.random() < config.spoof_prob(self.slot)
        channel = self.record * (1 + config.offset(self.slot) * self.pattern) if spoofed else self.record
        noise = self._rng.normal(config.noise(self.slot), size=config.vec_len)
        return channel * (1 + noise), "spoof" if spoofed else "legit"

    def step(self, theta_index):
        if self.closed:
            raise ContractViolation("Cannot step a closed environment.")

        if not 0 <= theta_index < self.actions:
            raise ContractViolation(f"Threshold {theta_index} is out of range for {self.actions} thresholds.")

        estimate, truth = self.message()
        statistic = test_statistic(estimate, self.record)
        outcome = AuthOutcome(statistic, decide(statistic, self.config.threshold_grid[theta_index]), truth)
        self.window.append(outcome)
        self.slot += 1

        far, mdr = rates(self.window)
        spoofed = sum(o.truth == "spoof" for o in self.window) / len(self.window)
        self.observation = AuthObservation(far, mdr, spoofed)
        return self.observation, self.reward(outcome.classification), outcome

    def close(self):
        self.closed = True

    def observation_index(self, observation):
        r"""
        Return the tabular state of ``observation``.

        EXAMPLES::

            >>> env = AuthEnvironment(AuthConfig(), seed=0)
            >>> env.observation_index(AuthObservation(0.0, 0.3, 1.0))
            7
            >>> env.observation_states
            64

        """
        bins = self.config.observation_bins
        return state_index(
            [bins] * 3,
            [
                self._quantizer.quantize(observation.recent_false_alarm_rate),
                self._quantizer.quantize(observation.recent_miss_rate),
                self._quantizer.quantize(observation.recent_spoof_freq),
            ],
        )

    def observation_features(self, observation):
        return np.array(
            [observation.recent_false_alarm_rate, observation.recent_miss_rate, observation.recent_spoof_freq]
        )


def auth_step(env, theta_index):
    r"""
    Decide on the next message of ``env`` with the threshold of index
    ``theta_index`` and return the next observation, the reward and the
    :class:`AuthOutcome` of the message.
    """
    return env.step(theta_index)


def sample_statistics(config, messages, seed, spoof_prob=None):
    r"""
    Return the test statistics of ``messages`` messages and whether each was
    spoofed.

    Messages are drawn as in the first slot of ``config`` unless
    ``spoof_prob`` overrides the spoofing probability.

    EXAMPLES::

        >>> statistics, spoofed = sample_statistics(AuthConfig(), 1000, seed=0, spoof_prob=0.5)
        >>> statistics.shape, bool(400 < spoofed.sum() < 600)
        ((1000,), True)

    """
    if spoof_prob is not None:
        config = replace(config, spoof_prob_schedule=((0, spoof_prob),))
    env = AuthEnvironment(config, seed)

    statistics = np.empty(messages)
    spoofed = np.empty(messages, dtype=bool)
    for m in range(messages):
        estimate, truth = env.message()
        statistics[m] = test_statistic(estimate, env.record)
        spoofed[m] = truth == "spoof"
    return statistics, spoofed


def threshold_sweep(statistics, spoofed, grid):
    r"""
    Return the false alarm and miss detection rates of every threshold of
    ``grid`` on the same messages.

    EXAMPLES:

    Looser thresholds raise fewer false alarms and miss more spoofed
    messages::

        >>> config = AuthConfig()
        >>> statistics, spoofed = sample_statistics(config, 10000, seed=0, spoof_prob=0.5)
        >>> sweep = threshold_sweep(statistics, spoofed, config.threshold_grid)
        >>> bool(sweep.far.is_monotonic_decreasing), bool(sweep.mdr.is_monotonic_increasing)
        (True, True)

    With a spoofer far from the legitimate channel, some threshold almost
    never errs::

        >>> bool((sweep.far + sweep.mdr).min() < 0.05)
        True

    The loosest threshold accepts the legitimate messages::

        >>> bool(sweep.far.iloc[-1] < 0.01)
        True

    """
    import pandas

    legit = max(1, int((~spoofed).sum()))
    spoof = max(1, int(spoofed.sum()))
    return pandas.DataFrame(
        {
            "theta": list(grid),
            "far": [float((statistics[~spoofed] > theta).sum()) / legit for theta in grid],
            "mdr": [float((statistics[spoofed] <= theta).sum()) / spoof for theta in grid],
        }
    )
