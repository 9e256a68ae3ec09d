r"""
Seeded experiments with the defending agents.

An experiment plays ``runs`` independent runs of a game. Each run is seeded
with ``base_seed + run`` and logs one row of metrics per slot. The metrics
of all runs are summarized by the utility the agent reaches at the end of a
run and by the number of slots it needs to get there.

EXAMPLES::

    >>> from dataclasses import replace
    >>> from edgedefense.config import default_config
    >>> config = replace(default_config(), agent="random", slots=50, runs=2)
    >>> metrics = play_runs(config)
    >>> len(metrics), list(metrics.columns[:4])
    (100, ['run', 'slot', 'edge_index', 'rate_level'])

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
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
import pandas

from edgedefense.agents.dqn import DQNAgent, average_networks, hotboot
from edgedefense.agents.network import QNetwork
from edgedefense.agents.tabular import DynaQAgent, FixedAgent, PdsAgent, QLearningAgent, RandomAgent, average_tables
from edgedefense.core import SeededRng
from edgedefense.environments.auth import AuthEnvironment
from edgedefense.environments.offload import (
    OffloadEnvironment,
    enumerate_mdp,
    frozen_violation,
    known_dynamics,
)
from edgedefense.exceptions import ConfigurationError, FrozenModeError
from edgedefense.oracle import policy_match, policy_value, reachable_states, value_iteration

logger = logging.getLogger("experiment")

LEARNING_AGENTS = ("qlearn", "qlearn-hotboot", "dynaq", "pds", "dqn", "dqn-hotboot")
REPLAY_AGENTS = ("dynaq", "dqn", "dqn-hotboot")

FIELDS = {
    "offload": [
        {"name": "run", "description": "Index of the run, seeded with base_seed + run."},
        {"name": "slot", "description": "Time slot within the run."},
        {"name": "edge_index", "description": "Edge node chosen by the device."},
        {"name": "rate_level", "description": "Offloading rate level, 0 computes the task locally."},
        {"name": "sinr", "description": "Signal to interference plus noise ratio at the edge node.", "unit": "1"},
        {"name": "ber", "description": "Bit error probability of the offloaded bits.", "unit": "1"},
        {"name": "energy_j", "description": "Energy consumed by the device.", "unit": "J"},
        {"name": "delay_s", "description": "Delay until the task is computed.", "unit": "s"},
        {"name": "utility", "description": "Utility of the device in the slot."},
        {"name": "epsilon", "description": "Exploration probability of the agent in the slot."},
    ],
    "auth": [
        {"name": "run", "description": "Index of the run, seeded with base_seed + run."},
        {"name": "slot", "description": "Message index within the run."},
        {"name": "theta_index", "description": "Index of the chosen test threshold in the threshold grid."},
        {"name": "theta", "description": "Test threshold applied to the message."},
        {"name": "statistic", "description": "Relative squared distance of the estimated channel from the record."},
        {"name": "spoofed", "description": "Whether the message was sent by the spoofer."},
        {"name": "rejected", "description": "Whether the message was rejected."},
        {"name": "utility", "description": "Reward of the receiver for its decision."},
        {"name": "epsilon", "description": "Exploration probability of the agent in the slot."},
        {"name": "far", "description": "False alarm rate over the recent messages.", "unit": "1"},
        {"name": "mdr", "description": "Miss detection rate over the recent messages.", "unit": "1"},
    ],
}

SUMMARY_COLUMNS = {
    "offload": ["run", "asymptote", "convergence", "sinr", "energy_j", "delay_s"],
    "auth": ["run", "asymptote", "convergence", "score", "far", "mdr"],
}


def make_environment(config, seed):
    r"""
    Return a new game of the experiment ``config`` seeded with ``seed``.
    """
    if config.scenario == "offload":
        return OffloadEnvironment(config.environment, seed)
    return AuthEnvironment(config.environment, seed)


def _features(env):
    return len(env.observation_features(env.observation))


def make_agent(config, env, rng, prior=None, ground_truth=False):
    r"""
    Return the agent of ``config`` for playing ``env``.

    Tabular agents learn on quantized observations or, with
    ``ground_truth``, on the true state of a frozen game. A hotbooted agent
    starts from ``prior``, pretrained network weights or a pretrained
    Q-table, and explores less.

    EXAMPLES::

        >>> from dataclasses import replace
        >>> from edgedefense.config import default_config
        >>> config = replace(default_config(), agent="dqn")
        >>> env = make_environment(config, 0)
        >>> make_agent(config, env, SeededRng(0)).net.spec.signature
        'W=8 C=5 F1=8 k1=3 F2=8 k2=3 H=32 A=12'

    A hotbooted Q-learner copies the pretrained table::

        >>> from edgedefense.agents.tabular import QTable
        >>> config = replace(default_config(), agent="qlearn-hotboot")
        >>> prior = QTable(env.observation_states, env.actions, initial=1)
        >>> agent = make_agent(config, env, SeededRng(0), prior=prior)
        >>> float(agent.table.values.min()), agent.epsilon
        (1.0, 0.1)
        >>> agent.table is prior
        False

    """
    settings = config.agent_settings
    hp = agent_hyperparams(settings, config.agent)

    if ground_truth:
        states = math.prod(env.state_bins)

        def encoder(observation):
            return env.state
    else:
        states = env.observation_states
        encoder = env.observation_index

    if config.agent == "random":
        return RandomAgent(env.actions, rng)
    if config.agent == "fixed":
        if settings.fixed_action is None:
            raise ConfigurationError("agent.fixed_action", "the fixed action has not been determined.")
        return FixedAgent(settings.fixed_action)
    if config.agent == "qlearn":
        return QLearningAgent(states, env.actions, hp, rng, encoder, settings.alpha_schedule, settings.q_init)
    if config.agent == "qlearn-hotboot":
        if prior is None:
            raise ConfigurationError("agent", "a hotbooted Q-learner needs a pretrained table.")
        agent = QLearningAgent(states, env.actions, hp, rng, encoder, settings.alpha_schedule)
        agent.table.values[:] = prior.values
        return agent
    if config.agent == "dynaq":
        return DynaQAgent(
            states, env.actions, hp, rng, encoder, settings.alpha_schedule, settings.q_init, settings.planning_steps
        )
    if config.agent == "pds":
        known_reward, post_decision = known_dynamics(config.environment)

        def state(observation):
            return env.state

        return PdsAgent(known_reward, post_decision, hp, rng, state, settings.alpha_schedule, settings.q_init)

    return DQNAgent(_features(env), env.actions, hp, rng, env.observation_features, settings.dqn, network=prior)


def agent_hyperparams(settings, agent):
    r"""
    Return the hyperparameters that ``agent`` learns with under the agent
    ``settings``.

    Agents that replay experience use the ``replay_epsilon_decay`` of the
    settings. Hotbooted agents start from the exploration probability of
    the ``hotboot`` settings.

    EXAMPLES::

        >>> from edgedefense.config import AgentSettings
        >>> settings = AgentSettings()
        >>> agent_hyperparams(settings, "qlearn") == settings.hyperparams
        True
        >>> agent_hyperparams(settings, "dynaq").epsilon_decay
        0.99
        >>> hp = agent_hyperparams(settings, "dqn-hotboot")
        >>> hp.epsilon0, hp.epsilon_decay
        (0.1, 0.99)
        >>> hp = agent_hyperparams(settings, "qlearn-hotboot")
        >>> hp.epsilon0, hp.epsilon_decay
        (0.1, 0.995)

    Agents that replay experience never explore more than a Q-learner::

        >>> q, d = agent_hyperparams(settings, "qlearn"), agent_hyperparams(settings, "dqn")
        >>> all(d.epsilon(t) <= q.epsilon(t) for t in range(5000))
        True

    Without a separate decay, all agents explore alike::

        >>> agent_hyperparams(AgentSettings(replay_epsilon_decay=None), "dqn") == settings.hyperparams
        True

    """
    hp = settings.hyperparams
    if agent in REPLAY_AGENTS and settings.replay_epsilon_decay is not None:
        hp = replace(hp, epsilon_decay=settings.replay_epsilon_decay)
    if agent.endswith("-hotboot"):
        hp = replace(hp, epsilon0=settings.hotboot.epsilon0, epsilon_min=min(hp.epsilon_min, settings.hotboot.epsilon0))
    return hp


def _row(config, env, run, slot, action, epsilon, result):
    if config.scenario == "offload":
        _, breakdown = result
        return (
            run, slot, env.last_action.edge_index, env.last_action.rate_level,
            breakdown.sinr, breakdown.ber, breakdown.energy_j, breakdown.delay_s, breakdown.utility, epsilon,
        )
    observation, reward, outcome = result
    return (
        run, slot, action, config.environment.threshold_grid[action], outcome.statistic,
        outcome.truth == "spoof", outcome.decision == "reject", reward, epsilon,
        observation.recent_false_alarm_rate, observation.recent_miss_rate,
    )


def play(config, run, prior=None):
    r"""
    Return the metrics of run ``run`` of the experiment ``config``, one row
    per slot.

    EXAMPLES::

        >>> from dataclasses import replace
        >>> from edgedefense.config import default_config
        >>> config = replace(default_config("auth"), slots=20)
        >>> metrics = play(config, 0)
        >>> list(metrics.columns)
        ['run', 'slot', 'theta_index', 'theta', 'statistic', 'spoofed', 'rejected', 'utility', 'epsilon', 'far', 'mdr']

    Runs do not depend on each other::

        >>> play(config, 1).equals(play(replace(config, base_seed=1), 0).assign(run=1))
        True

    """
    seed = config.seed(run)
    env = make_environment(config, seed)
    agent = make_agent(config, env, SeededRng(seed).child("agent"), prior=prior)
    agent.reset(env.observation)

    rows = []
    for slot in range(config.slots):
        epsilon = agent.epsilon
        action = agent.act()
        result = env.step(action)
        rows.append(_row(config, env, run, slot, action, epsilon, result))
        agent.learn(action, result[1].utility if config.scenario == "offload" else result[1], result[0])
    env.close()

    return pandas.DataFrame(rows, columns=[f["name"] for f in FIELDS[config.scenario]])


def performance(metrics, scenario):
    r"""
    Return how well an agent played according to ``metrics``, larger is
    better.

    On the offloading game, this is the mean utility. On the spoofing game,
    this is minus the mean of the false alarm rate and the miss detection
    rate over all messages.

    EXAMPLES::

        >>> metrics = pandas.DataFrame({"spoofed": [True, True, False, False], "rejected": [True, False, False, False]})
        >>> performance(metrics, "auth")
        -0.25

    """
    if scenario == "offload":
        return float(metrics.utility.mean())
    far, mdr = error_rates(metrics)
    return -(far + mdr) / 2


def error_rates(metrics):
    r"""
    Return the false alarm rate and the miss detection rate over all
    messages in ``metrics``.
    """
    legit = ~metrics.spoofed.astype(bool)
    spoofed = metrics.spoofed.astype(bool)
    rejected = metrics.rejected.astype(bool)
    far = float((rejected & legit).sum() / legit.sum()) if legit.any() else 0.0
    mdr = float((~rejected & spoofed).sum() / spoofed.sum()) if spoofed.any() else 0.0
    return far, mdr


def best_fixed_action(config, run):
    r"""
    Return the action that performs best in hindsight when it is played in
    every slot of run ``run``.

    Ties are broken towards the lowest action.

    EXAMPLES:

    On the spoofing game, the best fixed threshold separates the spoofer
    from the legitimate transmitter::

        >>> from dataclasses import replace
        >>> from edgedefense.config import default_config
        >>> config = replace(default_config("auth"), slots=2000)
        >>> config.environment.threshold_grid[best_fixed_action(config, 0)] > 0
        True

    """
    best, best_performance = 0, -math.inf
    for action in range(config.environment.actions):
        fixed = replace(config, agent="fixed", agent_settings=replace(config.agent_settings, fixed_action=action))
        value = performance(play(fixed, run), config.scenario)
        if value > best_performance:
            best, best_performance = action, value
    return best


def _pretrain_agent(config, env, seed, network):
    settings = config.agent_settings
    rng = SeededRng(seed).child("agent")
    if network is None:
        return QLearningAgent(
            env.observation_states, env.actions, settings.hyperparams, rng,
            env.observation_index, settings.alpha_schedule, settings.q_init,
        )
    return DQNAgent(
        _features(env), env.actions, agent_hyperparams(settings, "dqn"), rng, env.observation_features, settings.dqn, network=network
    )


def pretrain_worker(config, network, seed):
    r"""
    Return a copy of ``network`` trained by a DQN agent for the
    pretraining slots of ``config`` on the game seeded with ``seed``.

    Without a ``network``, a Q-learner is trained instead and its
    :class:`QTable` is returned.
    """
    env = make_environment(config, seed)
    agent = _pretrain_agent(config, env, seed, network)
    agent.reset(env.observation)
    for _ in range(config.agent_settings.hotboot.slots):
        action = agent.act()
        result = env.step(action)
        agent.learn(action, result[1].utility if config.scenario == "offload" else result[1], result[0])
    env.close()
    return agent.table if network is None else agent.net


def _pretrain_all(config, rng, network, jobs):
    hotboot_settings = config.agent_settings.hotboot
    workers = []
    for _ in range(hotboot_settings.perturbations):
        perturbed = replace(config, environment=config.environment.perturbed(rng, hotboot_settings.amount))
        workers.append((perturbed, network, rng.integers(2**32)))

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            return list(executor.map(pretrain_worker, *zip(*workers)))
    return [pretrain_worker(*worker) for worker in workers]


def pretrain(config, jobs=1):
    r"""
    Return a network pretrained on perturbed variants of the game of
    ``config``.

    All workers start from the same network. The result is the mean of
    their weights, taken in the order of the workers.

    EXAMPLES::

        >>> from dataclasses import replace
        >>> from edgedefense.config import HotbootSettings, default_config
        >>> config = default_config()
        >>> config = replace(config, agent_settings=replace(config.agent_settings, hotboot=HotbootSettings(perturbations=2, slots=50)))
        >>> net = pretrain(config)
        >>> net.spec.signature
        'W=8 C=5 F1=8 k1=3 F2=8 k2=3 H=32 A=12'

    The result does not depend on the number of processes::

        >>> window = SeededRng(1).uniform(0, 1, size=(8, 5))
        >>> bool((pretrain(config, jobs=2).forward(window) == net.forward(window)).all())
        True

    """
    rng = SeededRng(config.base_seed).child("pretrain")

    env = make_environment(config, config.base_seed)
    network = QNetwork(config.agent_settings.dqn.network_spec(_features(env), env.actions), rng=rng)

    nets = _pretrain_all(config, rng, network, jobs)
    logger.info("Pretrained network '%s' on %d perturbed games.", network.spec.signature, len(nets))
    return average_networks(nets)


def pretrain_table(config, jobs=1):
    r"""
    Return a Q-table pretrained on perturbed variants of the game of
    ``config``, the mean of the tables learned by the workers.

    EXAMPLES::

        >>> from dataclasses import replace
        >>> from edgedefense.config import HotbootSettings, default_config
        >>> config = default_config()
        >>> config = replace(config, agent_settings=replace(config.agent_settings, hotboot=HotbootSettings(perturbations=2, slots=300)))
        >>> table = pretrain_table(config)
        >>> table.states, table.actions
        (256, 12)
        >>> bool((table.values != 0).any())
        True

    The result does not depend on the number of processes::

        >>> bool((pretrain_table(config, jobs=2).values == table.values).all())
        True

    """
    rng = SeededRng(config.base_seed).child("pretrain")
    tables = _pretrain_all(config, rng, None, jobs)
    logger.info("Pretrained a Q-table on %d perturbed games.", len(tables))
    return average_tables(tables)


def _hotboot_prior(config, jobs):
    if config.agent == "qlearn-hotboot":
        return pretrain_table(config, jobs=jobs)
    if config.agent != "dqn-hotboot":
        return None
    if config.hotboot_weights is not None:
        env = make_environment(config, config.base_seed)
        spec = config.agent_settings.dqn.network_spec(_features(env), env.actions)
        return hotboot(QNetwork(spec), config.hotboot_weights)
    logger.info("No hotboot weights configured, pretraining a network.")
    return pretrain(config, jobs=jobs)


def _play_run(config, run, prior):
    if config.agent == "fixed" and config.agent_settings.fixed_action is None:
        action = best_fixed_action(config, run)
        config = replace(config, agent_settings=replace(config.agent_settings, fixed_action=action))
    metrics = play(config, run, prior=prior)
    logger.info("Finished run %d of %s on %s.", run, config.agent, config.scenario)
    return metrics


def play_runs(config, jobs=1):
    r"""
    Return the metrics of all runs of the experiment ``config``.

    With ``jobs`` larger than one, runs are played in parallel processes.
    The metrics are always ordered by run.

    EXAMPLES::

        >>> from dataclasses import replace
        >>> from edgedefense.config import default_config
        >>> config = replace(default_config(), agent="fixed", slots=30, runs=2)
        >>> play_runs(config, jobs=2).equals(play_runs(config))
        True

    Without slots there are no metrics::

        >>> play_runs(replace(config, slots=0)).empty
        True

    """
    prior = _hotboot_prior(config, jobs)
    runs = range(config.runs)

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            frames = list(executor.map(_play_run, [config] * len(runs), runs, [prior] * len(runs)))
    else:
        frames = [_play_run(config, run, prior) for run in runs]

    return pandas.concat(frames, ignore_index=True)


def convergence_slot(utility, fraction=0.9):
    r"""
    Return the first slot in which the smoothed ``utility`` closes
    ``fraction`` of the gap between its initial value and its asymptote.

    The utility is smoothed by a trailing mean over a twentieth of the
    slots. The asymptote is the mean over the last fifth of the slots.

    EXAMPLES::

        >>> convergence_slot([0.0] * 50 + [1.0] * 50)
        54
        >>> convergence_slot([1.0] * 100)
        4
        >>> math.isnan(convergence_slot([]))
        True

    """
    utility = np.asarray(utility, dtype=float)
    slots = len(utility)
    if not slots:
        return math.nan

    width = max(1, slots // 20)
    asymptote = utility[-max(1, slots // 5):].mean()
    smoothed = pandas.Series(utility).rolling(width).mean().to_numpy()[width - 1:]
    target = smoothed[0] + fraction * (asymptote - smoothed[0])

    reached = np.flatnonzero(smoothed >= target)
    return int(reached[0]) + width - 1 if len(reached) else slots


def summarize(metrics, scenario, runs):
    r"""
    Return one row per run with the asymptotic utility, the convergence slot
    and the scenario specific performance over the last fifth of the slots.

    On the spoofing game, ``score`` is the mean of the false alarm rate and
    the miss detection rate over all messages of the run.

    EXAMPLES::

        >>> metrics = pandas.DataFrame({
        ...     "run": [0] * 10, "slot": range(10), "utility": [0.0] * 5 + [1.0] * 5,
        ...     "sinr": [1.0] * 10, "energy_j": [2.0] * 10, "delay_s": [3.0] * 10})
        >>> summarize(metrics, "offload", runs=1).iloc[0].tolist()
        [0.0, 1.0, 5.0, 1.0, 2.0, 3.0]

    Runs without slots have no data::

        >>> int(summarize(metrics.iloc[:0], "offload", runs=1).isna().sum().sum())
        5

    """
    rows = []
    for run in range(runs):
        frame = metrics[metrics.run == run]
        row = {"run": run}
        if frame.empty:
            rows.append(row)
            continue

        tail = frame.iloc[-max(1, len(frame) // 5):]
        row["asymptote"] = float(tail.utility.mean())
        row["convergence"] = convergence_slot(frame.utility)
        if scenario == "offload":
            for name in ("sinr", "energy_j", "delay_s"):
                row[name] = float(tail[name].mean())
        else:
            far, mdr = error_rates(frame)
            row["score"], row["far"], row["mdr"] = (far + mdr) / 2, far, mdr
        rows.append(row)

    return pandas.DataFrame(rows, columns=SUMMARY_COLUMNS[scenario]).astype(float).astype({"run": int})


def _format(value):
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "no data"
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def summary_text(config, summary):
    r"""
    Return the summary report of ``config`` for the per-run ``summary``.

    The report is a human readable table followed by a block of
    ``key = value`` lines with the medians over all runs.

    EXAMPLES::

        >>> from edgedefense.config import default_config
        >>> summary = summarize(pandas.DataFrame(columns=[f["name"] for f in FIELDS["offload"]]), "offload", runs=1)
        >>> print(summary_text(default_config(), summary))
        Agent qlearn on offload: 1 runs of 10000 slots.
        ...
        [summary]
        scenario = offload
        agent = qlearn
        runs = 1
        slots = 10000
        asymptote = no data
        convergence = no data
        sinr = no data
        energy_j = no data
        delay_s = no data

    """
    lines = [f"Agent {config.agent} on {config.scenario}: {config.runs} runs of {config.slots} slots.", ""]
    lines.append(summary.to_string(index=False, na_rep="no data"))
    lines += ["", "[summary]"]
    lines += [f"{key} = {value}" for key, value in (
        ("scenario", config.scenario), ("agent", config.agent), ("runs", config.runs), ("slots", config.slots))]
    for column in SUMMARY_COLUMNS[config.scenario][1:]:
        values = summary[column].dropna()
        lines.append(f"{column} = {_format(float(values.median()) if len(values) else None)}")
    return "\n".join(lines)


def _write_metadata(out, metadata):
    r"""
    Write ``metadata`` to the ``out`` stream in JSON format.
    """
    import json

    json.dump(metadata, out, ensure_ascii=False, indent=4)
    # json.dump does not terminate the file with a newline.
    out.write("\n")


def _create_package(config, csvname):
    r"""
    Return a data package describing the metrics in ``csvname``.
    """
    from frictionless import Package, Resource, Schema

    from edgedefense.config import to_document

    package = Package(
        resources=[Resource(path=os.path.basename(csvname), basepath=os.path.dirname(csvname))],
    )
    package.infer()
    resource = package.resources[0]
    resource.custom["metadata"] = {"edgedefense": to_document(config)}

    described = Schema.from_descriptor({"fields": FIELDS[config.scenario]})
    resource.schema = Schema.from_descriptor(
        {
            "fields": [
                described.get_field(name).to_dict() | resource.schema.get_field(name).to_dict()
                for name in resource.schema.field_names
            ]
        }
    )
    return package


def outfile(config, suffix):
    r"""
    Return the name of an output file of ``config`` and create its directory.

    EXAMPLES::

        >>> from tempfile import TemporaryDirectory
        >>> from edgedefense.config import default_config
        >>> with TemporaryDirectory() as directory:
        ...     config = replace(default_config("auth"), agent="dynaq", output=os.path.join(directory, "out"))
        ...     os.path.relpath(outfile(config, ".csv"), directory)
        'out/auth_dynaq.csv'

    """
    os.makedirs(config.output, exist_ok=True)
    return os.path.join(config.output, f"{config.scenario}_{config.agent}{suffix}")


def write_results(config, metrics, summary):
    r"""
    Write the ``metrics`` of ``config`` as a CSV with a data package
    descriptor and the ``summary`` as a report.
    """
    csvname = outfile(config, ".csv")
    metrics.to_csv(csvname, index=False, float_format="%.17g", lineterminator="\n")

    if len(metrics):
        package = _create_package(config, csvname)
        with open(outfile(config, ".json"), mode="w", encoding="utf-8") as json:
            _write_metadata(json, package.to_dict())
    else:
        logger.warning("No metrics recorded for %s on %s, not writing a data package.", config.agent, config.scenario)

    with open(outfile(config, "_summary.txt"), mode="w", encoding="utf-8", newline="\n") as report:
        report.write(summary_text(config, summary) + "\n")


def run_experiment(config, jobs=1):
    r"""
    Play all runs of ``config``, write the results to its output directory
    and return the metrics and their per-run summary.

    EXAMPLES::

        >>> from tempfile import TemporaryDirectory
        >>> from edgedefense.config import default_config
        >>> with TemporaryDirectory() as directory:
        ...     config = replace(default_config(), slots=100, runs=2, output=directory)
        ...     metrics, summary = run_experiment(config)
        ...     sorted(os.listdir(directory))
        ['offload_qlearn.csv', 'offload_qlearn.json', 'offload_qlearn_summary.txt']

    The summary can be recomputed from the CSV::

        >>> with TemporaryDirectory() as directory:
        ...     config = replace(default_config(), slots=100, runs=2, output=directory)
        ...     metrics, summary = run_experiment(config)
        ...     recomputed = summarize(pandas.read_csv(outfile(config, ".csv"), float_precision="round_trip"), "offload", runs=2)
        >>> recomputed.equals(summary)
        True

    Running the same configuration twice produces the same files::

        >>> def csv(directory, jobs):
        ...     run_experiment(replace(config, agent="dynaq", output=directory), jobs=jobs)
        ...     with open(os.path.join(directory, "offload_dynaq.csv"), "rb") as metrics:
        ...         return metrics.read()
        >>> with TemporaryDirectory() as a, TemporaryDirectory() as b:
        ...     csv(a, jobs=1) == csv(b, jobs=2)
        True

    """
    metrics = play_runs(config, jobs=jobs)
    summary = summarize(metrics, config.scenario, config.runs)
    write_results(config, metrics, summary)
    return metrics, summary


@dataclass
class Comparison:
    r"""
    The outcome of comparing several agents on the same game and seeds.

    ``summaries`` maps each agent's label to its per-run summary. Each
    verdict is a description of a requested ordering, the fraction of runs
    in which it holds (or ``None`` for orderings of medians) and whether it
    holds.
    """

    scenario: str
    summaries: dict
    verdicts: list

    @property
    def holds(self):
        return all(holds for (_, _, holds) in self.verdicts)

    def text(self):
        lines = [f"Comparison of {', '.join(self.summaries)} on {self.scenario}.", ""]
        for label, summary in self.summaries.items():
            lines += [f"{label}:", summary.to_string(index=False, na_rep="no data"), ""]
        lines.append("[orderings]")
        for description, fraction, holds in self.verdicts:
            detail = "" if fraction is None else f" in {fraction:.0%} of runs"
            lines.append(f"{description} = {'holds' if holds else 'fails'}{detail}")
        return "\n".join(lines)


def _orderings(scenario):
    if scenario == "offload":
        return [("asymptote", ">="), ("sinr", ">="), ("energy_j", "<="), ("delay_s", "<=")]
    return [("score", "<=")]


def compare(configs, jobs=1, quorum=0.8):
    r"""
    Run the experiments ``configs`` and return a :class:`Comparison` that
    checks that each agent performs at least as well as the next one.

    An ordering of per-run values holds when it holds in at least
    ``quorum`` of the runs. Learning agents must also converge no later
    than the next learning agent, comparing the medians over all runs.

    EXAMPLES:

    An agent performs exactly as well as itself::

        >>> from tempfile import TemporaryDirectory
        >>> from edgedefense.config import default_config
        >>> config = replace(default_config(), slots=100, runs=2)
        >>> with TemporaryDirectory() as directory:
        ...     comparison = compare([replace(config, output=directory)] * 2)
        >>> comparison.holds
        True
        >>> print(comparison.text())
        Comparison of qlearn, qlearn#2 on offload.
        ...
        [orderings]
        asymptote(qlearn) >= asymptote(qlearn#2) = holds in 100% of runs
        sinr(qlearn) >= sinr(qlearn#2) = holds in 100% of runs
        energy_j(qlearn) <= energy_j(qlearn#2) = holds in 100% of runs
        delay_s(qlearn) <= delay_s(qlearn#2) = holds in 100% of runs
        convergence(qlearn) <= convergence(qlearn#2) = holds

    Only experiments on the same game and seeds can be compared::

        >>> compare([config, replace(config, base_seed=1)])
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ConfigurationError: Invalid value for base_seed: all experiments must use the same seeds but found 0 and 1.

    TESTS:

    The medians of the per-run summaries order the agents::

        >>> def medians(configs):
        ...     with TemporaryDirectory() as directory:
        ...         comparison = compare([replace(c, output=directory) for c in configs])
        ...     return {label: summary.median() for label, summary in comparison.summaries.items()}

    On the default offloading game, learning pays off and planning with a
    model converges no later than plain Q-learning::

        >>> config = replace(default_config(), slots=2000, runs=5)
        >>> m = medians([replace(config, agent=agent) for agent in ("dynaq", "qlearn", "random")])
        >>> bool(m["qlearn"].asymptote > m["random"].asymptote)
        True
        >>> bool(m["dynaq"].convergence <= m["qlearn"].convergence)
        True

    Hotbooted agents converge no later than their cold started
    counterparts::

        >>> from edgedefense.config import HotbootSettings
        >>> settings = replace(config.agent_settings, hotboot=HotbootSettings(perturbations=2, slots=1000))
        >>> config = replace(config, runs=3, agent_settings=settings)
        >>> m = medians([replace(config, agent=agent) for agent in ("qlearn-hotboot", "qlearn", "dqn-hotboot", "dqn")])
        >>> bool(m["qlearn-hotboot"].convergence <= m["qlearn"].convergence)
        True
        >>> bool(m["dqn-hotboot"].convergence <= m["dqn"].convergence)
        True

    When the spoofer becomes more active and moves closer to the record
    while the channel estimates sharpen, no fixed threshold works in both
    halves of the run but the learned threshold does::

        >>> auth = default_config("auth")
        >>> drift = replace(
        ...     auth.environment,
        ...     spoof_prob_schedule=((0, 0.1), (2000, 0.5)),
        ...     legit_noise_schedule=((0, 0.15), (2000, 0.02)),
        ...     spoof_offset_schedule=((0, 0.4), (2000, 0.25)))
        >>> config = replace(auth, slots=4000, runs=3, environment=drift)
        >>> m = medians([replace(config, agent=agent) for agent in ("qlearn", "fixed")])
        >>> bool(m["qlearn"].score < m["fixed"].score)
        True

    """
    if len(configs) < 2:
        raise ConfigurationError(None, "A comparison needs at least two experiments.")
    first = configs[0]
    for config in configs[1:]:
        if config.scenario != first.scenario:
            raise ConfigurationError(
                "scenario", f"all experiments must play the same game but found {first.scenario} and {config.scenario}."
            )
        for name in ("base_seed", "runs"):
            if getattr(config, name) != getattr(first, name):
                raise ConfigurationError(
                    name, f"all experiments must use the same seeds but found {getattr(first, name)} and {getattr(config, name)}."
                )

    labels = []
    for config in configs:
        label = config.agent
        count = 2
        while label in labels:
            label = f"{config.agent}#{count}"
            count += 1
        labels.append(label)

    summaries = {label: run_experiment(config, jobs=jobs)[1] for label, config in zip(labels, configs)}

    verdicts = []
    for (a, config_a), (b, config_b) in zip(zip(labels, configs), zip(labels[1:], configs[1:])):
        for column, relation in _orderings(first.scenario):
            left, right = summaries[a][column], summaries[b][column]
            valid = left.notna() & right.notna()
            holding = (left >= right) if relation == ">=" else (left <= right)
            fraction = float(holding[valid].mean()) if valid.any() else 0.0
            verdicts.append((f"{column}({a}) {relation} {column}({b})", fraction, fraction >= quorum))
        if config_a.agent in LEARNING_AGENTS and config_b.agent in LEARNING_AGENTS:
            left, right = summaries[a].convergence.median(), summaries[b].convergence.median()
            verdicts.append((f"convergence({a}) <= convergence({b})", None, bool(left <= right)))

    comparison = Comparison(first.scenario, summaries, verdicts)
    with open(os.path.join(first.output, f"compare_{first.scenario}.txt"), mode="w", encoding="utf-8", newline="\n") as report:
        report.write(comparison.text() + "\n")
    return comparison


def oracle_check(config, match=0.95, regret=0.05):
    r"""
    Train the agent of ``config`` on the ground-truth states of a frozen
    offloading game and compare its greedy policy to the optimal policy.

    Returns one row per run with the fraction of matching actions on the
    states that the optimal policy reaches, the largest loss of value of the
    learned policy relative to the largest optimal value, and whether both
    are within ``match`` and ``regret``.

    EXAMPLES::

        >>> from edgedefense.config import AgentSettings, ExperimentConfig
        >>> from edgedefense.environments.offload import frozen_config
        >>> config = ExperimentConfig(
        ...     agent="qlearn", runs=2, training_slots=5000,
        ...     agent_settings=AgentSettings(alpha_schedule="visit"),
        ...     environment=frozen_config(num_edges=1, num_rate_levels=2, gain_levels=(0.05, 0.1, 0.2), jammer_kind="none"))
        >>> oracle_check(config).passed.tolist()
        [True, True]

    A policy that never offloads is reported but does not pass::

        >>> report = oracle_check(replace(config, agent="fixed", runs=1, agent_settings=AgentSettings(fixed_action=0)))
        >>> report.passed.tolist(), bool(report.regret.iloc[0] > 0)
        ([False], True)

    Only frozen games can be checked::

        >>> from edgedefense.config import default_config
        >>> oracle_check(default_config())
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.FrozenModeError: Invalid value for offload.battery_dynamics: the environment is not frozen, an exact MDP cannot be enumerated: battery dynamics must be disabled.

    TESTS:

    Planning agents get at least as close to the optimal policy as
    Q-learning::

        >>> settings = AgentSettings(alpha_schedule="visit", replay_epsilon_decay=None)
        >>> reports = {agent: oracle_check(replace(config, agent=agent, agent_settings=settings)) for agent in ("qlearn", "dynaq", "pds")}
        >>> all(bool((reports[agent].match >= reports["qlearn"].match).all()) for agent in ("dynaq", "pds"))
        True

    """
    if config.scenario != "offload":
        raise ConfigurationError("experiment.scenario", "only the offloading game can be enumerated.")
    if config.agent not in ("qlearn", "dynaq", "pds", "random", "fixed"):
        raise ConfigurationError(
            "experiment.agent", f"only tabular agents can be checked but found {config.agent}."
        )
    violation = frozen_violation(config.environment)
    if violation is not None:
        name, reason = violation
        raise FrozenModeError(
            name, f"the environment is not frozen, an exact MDP cannot be enumerated: {reason}"
        ).within("offload")

    mdp = enumerate_mdp(config.environment, gamma=config.agent_settings.hyperparams.gamma)
    _, optimal, _ = value_iteration(mdp)
    V = policy_value(mdp, optimal)
    reachable = reachable_states(mdp, optimal)
    scale = float(np.abs(V[reachable]).max()) or 1.0

    rows = []
    for run in range(config.runs):
        seed = config.seed(run)
        trained = config
        if config.agent == "fixed" and config.agent_settings.fixed_action is None:
            action = best_fixed_action(replace(config, slots=config.training_slots), run)
            trained = replace(config, agent_settings=replace(config.agent_settings, fixed_action=action))

        env = make_environment(trained, seed)
        agent = make_agent(trained, env, SeededRng(seed).child("agent"), ground_truth=True)
        agent.reset(env.observation)
        for _ in range(config.training_slots):
            action = agent.act()
            observation, breakdown = env.step(action)
            agent.learn(action, breakdown.utility, observation)

        learned = agent.policy(mdp.S)
        fraction = policy_match(optimal, learned, restrict_to=reachable)
        loss = float((V - policy_value(mdp, learned))[reachable].max()) / scale
        rows.append({
            "run": run, "match": fraction, "regret": loss,
            "passed": fraction >= match and loss <= regret,
        })
        logger.info("Run %d of %s matches the optimal policy on %.1f%% of the states.", run, config.agent, 100 * fraction)

    return pandas.DataFrame(rows, columns=["run", "match", "regret", "passed"])
