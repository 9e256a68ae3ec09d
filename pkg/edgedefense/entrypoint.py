r"""
The edgedefense suite.

EXAMPLES::

    >>> from edgedefense.test.cli import invoke
    >>> invoke(cli, "--help")  # doctest: +NORMALIZE_WHITESPACE
    Usage: cli [OPTIONS] COMMAND [ARGS]...
      The edgedefense suite.
    Options:
      --seed INTEGER   Seed of the first run, overriding the configured base_seed.
      --out DIRECTORY  Write output files to this directory.
      --quiet          Only report warnings and errors.
      --jobs INTEGER   Number of processes playing runs in parallel.
      --help           Show this message and exit.
    Commands:
      compare               Compare agents on the same game and seeds.
      oracle-check          Compare a tabular agent to the optimal policy of...
      pretrain              Pretrain a network for hotbooted deep Q-learning.
      print-default-config  Print the default configuration of an experiment...
      run                   Play an experiment and write its metrics.

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
import os
from dataclasses import replace

import click

logger = logging.getLogger("edgedefense")


@click.group(help=__doc__.split("EXAMPLES")[0])
@click.option("--seed", type=int, default=None, help="Seed of the first run, overriding the configured base_seed.")
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Write output files to this directory.")
@click.option("--quiet", is_flag=True, help="Only report warnings and errors.")
@click.option("--jobs", type=int, default=1, show_default=False, help="Number of processes playing runs in parallel.")
@click.pass_context
def cli(ctx, seed, out, quiet, jobs):
    r"""
    Entry point of the command line interface.

    This redirects to the individual commands listed below.
    """
    logging.basicConfig(level=logging.WARNING if quiet else logging.INFO, force=True)
    if jobs < 1:
        raise click.BadParameter(f"must be positive but found {jobs}.", param_hint="--jobs")
    ctx.obj = {"seed": seed, "out": out, "jobs": jobs}


config_argument = click.argument("config", type=click.Path(exists=True, dir_okay=False))


def _load(ctx, path):
    r"""
    Return the experiment configuration at ``path`` with the global
    overrides of the command line applied.

    EXAMPLES::

        >>> from edgedefense.test.cli import TemporaryData
        >>> ctx = click.Context(cli, obj={"seed": 7, "out": None, "jobs": 1})
        >>> with TemporaryData("**/smoke.yaml") as directory:
        ...     config = _load(ctx, os.path.join(directory, "smoke.yaml"))
        >>> config.base_seed
        7

    Invalid configurations are reported without a traceback::

        >>> from edgedefense.test.cli import invoke
        >>> with TemporaryData("**/smoke.yaml") as directory:
        ...     invoke(cli, "--quiet", "--seed", "-1", "run", os.path.join(directory, "smoke.yaml"))
        Error: Invalid value for base_seed: must be an integer such that all run seeds are in [0, 2^64) but found -1.
        Exit status 1

    """
    from edgedefense.config import load_config
    from edgedefense.exceptions import ConfigurationError

    try:
        config = load_config(path)
        if ctx.obj["seed"] is not None:
            config = replace(config, base_seed=ctx.obj["seed"])
        if ctx.obj["out"] is not None:
            config = replace(config, output=ctx.obj["out"])
    except ConfigurationError as e:
        raise click.ClickException(str(e)) from e
    return config


@click.command()
@config_argument
@click.pass_context
def run(ctx, config):
    r"""
    Play an experiment and write its metrics.

    Writes a CSV with one row per slot and run, a data package describing
    it and a summary report.
    \f

    EXAMPLES::

        >>> from edgedefense.test.cli import invoke, TemporaryData
        >>> with TemporaryData("**/smoke.yaml") as directory:
        ...     invoke(cli, "--quiet", "--out", directory, "run", os.path.join(directory, "smoke.yaml"))
        ...     sorted(name for name in os.listdir(directory) if name.startswith("offload"))
        Agent qlearn on offload: 2 runs of 200 slots.
        ...
        [summary]
        scenario = offload
        ...
        ['offload_qlearn.csv', 'offload_qlearn.json', 'offload_qlearn_summary.txt']

    TESTS:

    Running the same configuration twice produces identical metrics::

        >>> def metrics(directory, *args):
        ...     invoke(cli, "--quiet", "--out", directory, *args, "run", os.path.join(directory, "smoke.yaml"))
        ...     with open(os.path.join(directory, "offload_qlearn.csv"), "rb") as csv:
        ...         return csv.read()
        >>> with TemporaryData("**/smoke.yaml") as directory:
        ...     with TemporaryData("**/smoke.yaml") as other:
        ...         metrics(directory) == metrics(other, "--jobs", "2")
        Agent qlearn on offload: 2 runs of 200 slots.
        ...
        True

    """
    from edgedefense.experiment import run_experiment, summary_text

    config = _load(ctx, config)
    _, summary = run_experiment(config, jobs=ctx.obj["jobs"])
    click.echo(summary_text(config, summary))


@click.command()
@click.option(
    "--agent",
    "agents",
    multiple=True,
    help="Compare this agent on the game of the first configuration, can be given repeatedly.",
)
@click.option("--quorum", type=float, default=0.8, show_default=True, help="Fraction of runs in which an ordering must hold.")
@click.argument("configs", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def compare(ctx, agents, quorum, configs):
    r"""
    Compare agents on the same game and seeds.

    Each agent is expected to perform at least as well as the next one.
    The command fails if any of these orderings does not hold.
    \f

    EXAMPLES::

        >>> from edgedefense.test.cli import invoke, TemporaryData
        >>> with TemporaryData("**/smoke.yaml") as directory:
        ...     invoke(cli, "--quiet", "--out", directory, "compare", os.path.join(directory, "smoke.yaml"), "--agent", "qlearn", "--agent", "qlearn")
        Comparison of qlearn, qlearn#2 on offload.
        ...
        convergence(qlearn) <= convergence(qlearn#2) = holds

    """
    from edgedefense.experiment import compare as compare_experiments

    loaded = [_load(ctx, config) for config in configs]
    loaded += [replace(loaded[0], agent=agent) for agent in agents]
    if agents and len(configs) == 1:
        loaded = loaded[1:]

    comparison = compare_experiments(loaded, jobs=ctx.obj["jobs"], quorum=quorum)
    click.echo(comparison.text())
    if not comparison.holds:
        ctx.exit(1)


@click.command(name="oracle-check")
@click.option("--quorum", type=float, default=0.9, show_default=True, help="Fraction of runs that must match the optimal policy.")
@config_argument
@click.pass_context
def oracle_check(ctx, quorum, config):
    r"""
    Compare a tabular agent to the optimal policy of a frozen offloading game.

    The agent learns on the true states of the game for the configured
    number of training slots. Agents that do not learn are reported without
    failing the command.
    \f

    EXAMPLES::

        >>> from edgedefense.test.cli import invoke, TemporaryData
        >>> with TemporaryData("**/frozen_tiny.yaml") as directory:
        ...     invoke(cli, "--quiet", "oracle-check", os.path.join(directory, "frozen_tiny.yaml"))  # doctest: +NORMALIZE_WHITESPACE
        run  match  regret  passed
          0    1.0     0.0    True
          1    1.0     0.0    True
        2 of 2 runs match the optimal policy.

    Games that cannot be enumerated are rejected::

        >>> with TemporaryData("**/smoke.yaml") as directory:
        ...     invoke(cli, "--quiet", "oracle-check", os.path.join(directory, "smoke.yaml"))
        Error: Invalid value for offload.battery_dynamics: the environment is not frozen, an exact MDP cannot be enumerated: battery dynamics must be disabled.
        Exit status 1

    """
    from edgedefense.exceptions import ConfigurationError
    from edgedefense.experiment import LEARNING_AGENTS, oracle_check as check

    config = _load(ctx, config)
    try:
        report = check(config)
    except ConfigurationError as e:
        raise click.ClickException(str(e)) from e
    passed = int(report.passed.sum())
    click.echo(report.to_string(index=False))
    click.echo(f"{passed} of {len(report)} runs match the optimal policy.")
    if config.agent in LEARNING_AGENTS and passed < quorum * len(report):
        ctx.exit(1)


@click.command()
@click.option("-o", "--output", "weights", type=click.Path(dir_okay=False), required=True, help="Write the weights to this file.")
@config_argument
@click.pass_context
def pretrain(ctx, weights, config):
    r"""
    Pretrain a network for hotbooted deep Q-learning.

    The network is trained on randomly perturbed variants of the configured
    game and written in the text format that ``hotboot_weights`` loads.
    \f

    EXAMPLES::

        >>> from edgedefense.test.cli import invoke, TemporaryData
        >>> with TemporaryData("**/smoke.yaml") as directory:
        ...     invoke(cli, "--quiet", "pretrain", os.path.join(directory, "smoke.yaml"), "-o", os.path.join(directory, "weights.txt"))
        ...     with open(os.path.join(directory, "weights.txt"), encoding="utf-8") as stream:
        ...         print(stream.readline().strip())
        edgedefense-qnetwork 1

    """
    from edgedefense.experiment import pretrain as pretrain_network

    network = pretrain_network(_load(ctx, config), jobs=ctx.obj["jobs"])
    os.makedirs(os.path.dirname(weights) or ".", exist_ok=True)
    with open(weights, mode="w", encoding="utf-8", newline="\n") as out:
        network.save(out)
    logger.info("Wrote pretrained weights to %s.", weights)


@click.command(name="print-default-config")
@click.argument("scenario", type=click.Choice(["offload", "auth"]))
def print_default_config(scenario):
    r"""
    Print the default configuration of an experiment on a game.
    \f

    EXAMPLES::

        >>> from edgedefense.test.cli import invoke
        >>> invoke(cli, "print-default-config", "auth")
        experiment:
          scenario: auth
          agent: qlearn
        ...
        auth:
          vec_len: 8
        ...

    """
    from io import StringIO

    from edgedefense.config import default_config, dump_config

    out = StringIO()
    dump_config(default_config(scenario), out)
    click.echo(out.getvalue(), nl=False)


cli.add_command(run)
cli.add_command(compare)
cli.add_command(oracle_check)
cli.add_command(pretrain)
cli.add_command(print_default_config)

# Register command docstrings for doctesting.
# Since commands are not functions anymore due to their decorator, their
# docstrings would otherwise be ignored.
__test__ = {
    name: command.__doc__ for (name, command) in cli.commands.items() if command.__doc__
}
