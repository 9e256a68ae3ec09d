r"""
Configuration of experiments.

An experiment is described by a YAML document with the sections
``experiment``, ``agent`` and one section for the game, ``offload`` or
``auth``. Values that are missing from the document take the defaults
that ``edgedefense print-default-config`` prints.

EXAMPLES::

    >>> config = parse_config('''
    ... experiment:
    ...   agent: dqn
    ...   slots: 100
    ... offload:
    ...   num_edges: 2
    ... ''')
    >>> config.agent, config.slots, config.environment.num_edges
    ('dqn', 100, 2)

Errors name the offending field::

    >>> parse_config('''
    ... offload:
    ...   jammer:
    ...     kind: reactive
    ... ''')
    Traceback (most recent call last):
    ...
    edgedefense.exceptions.ConfigurationError: Invalid value for offload.jammer.kind: must be one of none, sweep, smart but found 'reactive'.

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
import dataclasses
import logging
import os
from dataclasses import dataclass, field
from typing import Optional, Union

import yaml

from edgedefense.agents.dqn import DqnSettings
from edgedefense.core import SEED_MASK, AgentHyperparams
from edgedefense.environments.auth import AuthConfig
from edgedefense.environments.offload import OffloadConfig, frozen_violation
from edgedefense.exceptions import ConfigurationError, FrozenModeError

logger = logging.getLogger("config")

SCENARIOS = {"offload": OffloadConfig, "auth": AuthConfig}

AGENTS = ("random", "fixed", "qlearn", "qlearn-hotboot", "dynaq", "pds", "dqn", "dqn-hotboot")


@dataclass(frozen=True)
class HotbootSettings:
    r"""
    How a hotbooted agent is pretrained before it plays.

    Each of ``perturbations`` workers trains for ``slots`` slots on a game
    whose jamming and fading are perturbed by up to ``amount``. A
    hotbooted DQN starts from the mean of the workers' network weights, a
    hotbooted Q-learner from the mean of their Q-tables. The hotbooted
    agent starts exploring with probability ``epsilon0``.
    """

    perturbations: int = 4
    slots: int = 5000
    amount: float = 0.2
    epsilon0: float = 0.1

    def __post_init__(self):
        if self.perturbations < 1:
            raise ConfigurationError("perturbations", f"must be positive but found {self.perturbations}.")
        if self.slots < 0:
            raise ConfigurationError("slots", f"must not be negative but found {self.slots}.")
        if not 0 <= self.amount < 1:
            raise ConfigurationError("amount", f"must be in [0, 1) but found {self.amount}.")
        if not 0 <= self.epsilon0 <= 1:
            raise ConfigurationError("epsilon0", f"must be in [0, 1] but found {self.epsilon0}.")


@dataclass(frozen=True)
class AgentSettings:
    r"""
    The parameters of the defending agent.

    With ``alpha_schedule="visit"``, tabular agents decay their learning
    rate with the number of visits of each entry instead of using the fixed
    ``hyperparams.alpha``. Without a ``fixed_action``, the fixed agent plays
    the action that performs best in hindsight.

    Agents that replay experience, Dyna-Q from its model and deep Q-learning
    from its replay pool, decay their exploration by
    ``replay_epsilon_decay`` per slot instead of
    ``hyperparams.epsilon_decay``. Set it to ``None`` to use the same decay
    for all agents.

    EXAMPLES::

        >>> AgentSettings(replay_epsilon_decay=1.5)
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ConfigurationError: Invalid value for replay_epsilon_decay: must be in (0, 1] but found 1.5.

    ::

        >>> AgentSettings(alpha_schedule="sometimes")
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ConfigurationError: Invalid value for alpha_schedule: must be fixed or visit but found 'sometimes'.

    """

    hyperparams: AgentHyperparams = field(default_factory=AgentHyperparams)
    alpha_schedule: str = "fixed"
    q_init: float = 0.0
    planning_steps: int = 10
    replay_epsilon_decay: Optional[float] = 0.99
    fixed_action: Optional[int] = None
    dqn: DqnSettings = field(default_factory=DqnSettings)
    hotboot: HotbootSettings = field(default_factory=HotbootSettings)

    def __post_init__(self):
        if self.alpha_schedule not in ("fixed", "visit"):
            raise ConfigurationError(
                "alpha_schedule", f"must be fixed or visit but found {self.alpha_schedule!r}."
            )
        if self.planning_steps < 0:
            raise ConfigurationError(
                "planning_steps", f"must not be negative but found {self.planning_steps}."
            )
        if self.replay_epsilon_decay is not None and not 0 < self.replay_epsilon_decay <= 1:
            raise ConfigurationError(
                "replay_epsilon_decay", f"must be in (0, 1] but found {self.replay_epsilon_decay}."
            )
        if self.fixed_action is not None and self.fixed_action < 0:
            raise ConfigurationError(
                "fixed_action", f"must not be negative but found {self.fixed_action}."
            )


@dataclass(frozen=True)
class ExperimentConfig:
    r"""
    A complete experiment: ``runs`` runs of ``slots`` slots of an ``agent``
    playing the game ``scenario``.

    Run ``i`` is seeded with ``base_seed + i``. Output files are written to
    the directory ``output``. ``training_slots`` is the number of slots an
    agent learns before its policy is compared to the optimal policy by
    ``oracle-check``.

    EXAMPLES::

        >>> config = default_config("auth")
        >>> config.scenario, config.agent, config.runs
        ('auth', 'qlearn', 10)

    ::

        >>> ExperimentConfig(agent="sarsa")
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ConfigurationError: Invalid value for agent: must be one of random, fixed, qlearn, qlearn-hotboot, dynaq, pds, dqn, dqn-hotboot but found 'sarsa'.

    """

    scenario: str = "offload"
    agent: str = "qlearn"
    slots: int = 10000
    runs: int = 10
    base_seed: int = 0
    output: str = "results"
    hotboot_weights: Optional[str] = None
    training_slots: int = 200000
    agent_settings: AgentSettings = field(default_factory=AgentSettings)
    environment: Union[OffloadConfig, AuthConfig] = field(default_factory=OffloadConfig)

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigurationError(
                "scenario", f"must be one of {', '.join(SCENARIOS)} but found {self.scenario!r}."
            )
        if not isinstance(self.environment, SCENARIOS[self.scenario]):
            raise ConfigurationError(
                "scenario", f"a {self.scenario} experiment cannot be played on {type(self.environment).__name__}."
            )
        if self.agent not in AGENTS:
            raise ConfigurationError(
                "agent", f"must be one of {', '.join(AGENTS)} but found {self.agent!r}."
            )
        if self.slots < 0:
            raise ConfigurationError("slots", f"must not be negative but found {self.slots}.")
        if self.runs < 1:
            raise ConfigurationError("runs", f"must be positive but found {self.runs}.")
        if self.training_slots < 0:
            raise ConfigurationError(
                "training_slots", f"must not be negative but found {self.training_slots}."
            )
        if not 0 <= self.base_seed or self.base_seed + self.runs - 1 > SEED_MASK:
            raise ConfigurationError(
                "base_seed", f"must be an integer such that all run seeds are in [0, 2^64) but found {self.base_seed}."
            )
        if self.hotboot_weights is not None and not os.path.exists(self.hotboot_weights):
            raise ConfigurationError(
                "hotboot_weights", f"no weights file found at {self.hotboot_weights}."
            )

        if self.agent == "pds":
            if self.scenario != "offload":
                raise ConfigurationError(
                    "agent", "pds needs the known dynamics of the offloading game."
                )
            violation = frozen_violation(self.environment)
            if violation is not None:
                name, reason = violation
                raise FrozenModeError(
                    name, f"pds needs the known dynamics of a frozen game: {reason}"
                ).within(self.scenario)

        fixed_action = self.agent_settings.fixed_action
        if fixed_action is not None and fixed_action >= self.environment.actions:
            raise ConfigurationError(
                "agent.fixed_action",
                f"must be less than the {self.environment.actions} actions of the game but found {fixed_action}.",
            )

    def seed(self, run):
        return self.base_seed + run


def default_config(scenario="offload"):
    r"""
    Return the default configuration of an experiment on ``scenario``.

    EXAMPLES::

        >>> default_config().environment.num_edges
        3

    """
    if scenario not in SCENARIOS:
        raise ConfigurationError(
            "scenario", f"must be one of {', '.join(SCENARIOS)} but found {scenario!r}."
        )
    return ExperimentConfig(scenario=scenario, environment=SCENARIOS[scenario]())


def _plain(value):
    if isinstance(value, (tuple, list)):
        return [_plain(item) for item in value]
    if isinstance(value, dict):
        return {key: _plain(item) for key, item in value.items()}
    return value


def to_document(config):
    r"""
    Return ``config`` as a nested dictionary of the sections of a YAML document.

    EXAMPLES::

        >>> document = to_document(default_config("auth"))
        >>> list(document)
        ['experiment', 'agent', 'auth']
        >>> document["auth"]["spoof_prob_schedule"]
        [[0, 0.1], [10000, 0.5]]

    """
    experiment = {
        f.name: getattr(config, f.name)
        for f in dataclasses.fields(config)
        if f.name not in ("agent_settings", "environment")
    }
    return {
        "experiment": experiment,
        "agent": _plain(dataclasses.asdict(config.agent_settings)),
        config.scenario: _plain(dataclasses.asdict(config.environment)),
    }


def dump_config(config, out):
    r"""
    Write ``config`` to the stream ``out`` as YAML.

    EXAMPLES::

        >>> from io import StringIO
        >>> out = StringIO()
        >>> dump_config(default_config(), out)
        >>> print(out.getvalue())
        experiment:
          scenario: offload
          agent: qlearn
        ...
        offload:
          num_edges: 3
        ...

    """
    yaml.safe_dump(to_document(config), out, sort_keys=False, default_flow_style=None)


def _check_keys(document, defaults, path):
    if not isinstance(document, dict):
        raise ConfigurationError(path or None, f"expected a mapping but found {document!r}.")
    for key, value in document.items():
        dotted = f"{path}.{key}" if path else str(key)
        if key not in defaults:
            raise ConfigurationError(dotted, "unknown key.")
        if isinstance(defaults[key], dict):
            _check_keys(value, defaults[key], dotted)


def _freeze(value):
    if isinstance(value, list):
        return tuple(_freeze(item) for item in value)
    return value


def _build(cls, values, section):
    kwargs = {}
    for f in dataclasses.fields(cls):
        if f.name not in values:
            continue
        value = values[f.name]
        if dataclasses.is_dataclass(f.type) and isinstance(value, dict):
            value = _build(f.type, value, f"{section}.{f.name}")
        else:
            value = _freeze(value)
        kwargs[f.name] = value

    try:
        return cls(**kwargs)
    except ConfigurationError as e:
        raise e.within(section) from None
    except TypeError as e:
        raise ConfigurationError(section, f"invalid value: {e}.") from None


def parse_config(text, basedir="."):
    r"""
    Return the :class:`ExperimentConfig` described by the YAML ``text``.

    Relative paths in the document are relative to ``basedir``.

    EXAMPLES:

    Printed defaults load into the default configuration::

        >>> from io import StringIO
        >>> out = StringIO()
        >>> dump_config(default_config("auth"), out)
        >>> parse_config(out.getvalue()) == default_config("auth")
        True

    Unknown keys are rejected::

        >>> parse_config('''
        ... offload:
        ...   num_eges: 2
        ... ''')
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ConfigurationError: Invalid value for offload.num_eges: unknown key.

    Invalid values are reported with their section::

        >>> parse_config('''
        ... offload:
        ...   num_edges: 0
        ... ''')
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ConfigurationError: Invalid value for offload.num_edges: must be positive but found 0.

    Syntax errors are reported with their line::

        >>> parse_config('''experiment:
        ...   agent: [dqn
        ... ''')
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ConfigurationError: Cannot parse the configuration in line 3: ...

    The section of the game must match the scenario::

        >>> parse_config('''
        ... auth:
        ...   window: 10
        ... ''')
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ConfigurationError: Invalid value for auth: unknown key.

    """
    from mergedeep import merge

    try:
        document = yaml.load(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = f" in line {mark.line + 1}" if mark is not None else ""
        raise ConfigurationError(
            None, f"Cannot parse the configuration{line}: {getattr(e, 'problem', None) or e}."
        ) from None

    document = document or {}
    if not isinstance(document, dict):
        raise ConfigurationError(None, f"Expected a mapping of sections but found {document!r}.")

    experiment = document.get("experiment") or {}
    scenario = experiment.get("scenario", "offload") if isinstance(experiment, dict) else "offload"
    if scenario not in SCENARIOS:
        raise ConfigurationError(
            "experiment.scenario", f"must be one of {', '.join(SCENARIOS)} but found {scenario!r}."
        )
    defaults = to_document(default_config(scenario))
    _check_keys(document, defaults, "")

    values = merge({}, defaults, document)

    experiment = values["experiment"]
    if experiment["hotboot_weights"] is not None:
        experiment["hotboot_weights"] = os.path.join(basedir, experiment["hotboot_weights"])

    agent_settings = _build(AgentSettings, values["agent"], "agent")
    environment = _build(SCENARIOS[scenario], values[scenario], scenario)

    try:
        return ExperimentConfig(**experiment, agent_settings=agent_settings, environment=environment)
    except ConfigurationError as e:
        # Cross-section checks already name their section.
        if e.field in {f.name for f in dataclasses.fields(ExperimentConfig)}:
            raise e.within("experiment") from None
        raise
    except TypeError as e:
        raise ConfigurationError("experiment", f"invalid value: {e}.") from None


def load_config(path):
    r"""
    Return the :class:`ExperimentConfig` stored in the YAML file at ``path``.

    EXAMPLES::

        >>> from edgedefense.test.cli import TemporaryData
        >>> with TemporaryData("**/offload.yaml") as directory:
        ...     config = load_config(os.path.join(directory, "offload.yaml"))
        >>> config.scenario
        'offload'

    """
    with open(path, encoding="utf-8") as stream:
        config = parse_config(stream.read(), basedir=os.path.dirname(path))
    logger.debug("Loaded %s experiment with agent %s from %s.", config.scenario, config.agent, path)
    return config
