r"""
A collection of custom exceptions for edgedefense.
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


class ConfigurationError(ValueError):
    r"""
    Raised when a configuration value is invalid.

    The ``field`` names the offending entry. When the error surfaces from a
    nested configuration, the loader prefixes the field with the name of the
    section, see :meth:`within`.

    EXAMPLES::

        >>> from edgedefense.core import Quantizer
        >>> Quantizer(1, 0, 4)
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ConfigurationError: Invalid value for hi: must be larger than lo=1 but found 0.

    ::

        >>> error = ConfigurationError("num_edges", "must be positive but found 0.")
        >>> raise error.within("offload")
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ConfigurationError: Invalid value for offload.num_edges: must be positive but found 0.

    """

    def __init__(self, field, reason):
        self.field = field
        self.reason = reason
        super().__init__(f"Invalid value for {field}: {reason}" if field else reason)

    def within(self, section):
        r"""
        Return a copy of this error whose field lives in ``section``.

        EXAMPLES::

            >>> ConfigurationError("alpha", "must be positive.").within("agent.hyperparams").field
            'agent.hyperparams.alpha'

        """
        field = f"{section}.{self.field}" if self.field else section
        return type(self)(field, self.reason)


class FrozenModeError(ConfigurationError):
    r"""
    Raised when an operation that needs an exactly enumerable (frozen)
    environment is invoked on an environment that is not frozen.

    EXAMPLES::

        >>> from edgedefense.environments.offload import OffloadConfig, enumerate_mdp
        >>> enumerate_mdp(OffloadConfig())
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.FrozenModeError: Invalid value for battery_dynamics: the environment is not frozen, an exact MDP cannot be enumerated: battery dynamics must be disabled.

    """


class ContractViolation(RuntimeError):
    r"""
    Raised when a precondition of an operation does not hold, e.g., an index
    is out of range or a closed environment is stepped.

    EXAMPLES::

        >>> from edgedefense.core import state_index
        >>> state_index([2, 2], [0, 2])
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.ContractViolation: Field 1 has bin 2 but only 2 bins exist.

    """


class WeightsFormatError(ValueError):
    r"""
    Raised when a network weights file does not match the network it is loaded into.

    EXAMPLES::

        >>> from io import StringIO
        >>> from edgedefense.agents.network import NetworkSpec, QNetwork
        >>> QNetwork.load(StringIO("something else\n"), NetworkSpec(actions=4))
        Traceback (most recent call last):
        ...
        edgedefense.exceptions.WeightsFormatError: Expected a weights file starting with 'edgedefense-qnetwork 1' but found 'something else'.

    """
