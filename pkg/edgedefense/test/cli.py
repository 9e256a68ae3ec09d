r"""
Helpers for testing the command line interface.

Click's CliRunner is verbose to use in doctests, so commands are invoked
through :func:`invoke` here. Experiment configurations used by the tests
live in the ``test/data`` directory of the repository and are copied to a
temporary directory by :class:`TemporaryData`.

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


def invoke(command, *args):
    r"""
    Invoke the click ``command`` with the given string arguments and print
    its output.

    EXAMPLES::

        >>> import click
        >>> @click.command()
        ... def jam(): print("Jamming edge 0")
        >>> invoke(jam)
        Jamming edge 0

    Errors are not swallowed::

        >>> @click.command()
        ... def fails(): raise ValueError("expected error")
        >>> invoke(fails)
        Traceback (most recent call last):
        ...
        ValueError: expected error

    A command that exits with a non-zero status reports it::

        >>> @click.command()
        ... def violated(): raise SystemExit(1)
        >>> invoke(violated)
        Exit status 1

    """
    from click.testing import CliRunner

    invocation = CliRunner().invoke(command, args, catch_exceptions=False)
    output = invocation.output.strip()
    if output:
        print(output)
    if invocation.exit_code:
        print(f"Exit status {invocation.exit_code}")


class TemporaryData:
    r"""
    Provides a temporary directory with copies of the configurations
    matching ``patterns``.

    EXAMPLES::

        >>> import os
        >>> with TemporaryData("**/offload*.yaml") as directory:
        ...     "offload.yaml" in os.listdir(directory)
        True

    """

    def __init__(self, *patterns):
        self._patterns = patterns
        self._tmpdir = None

    def __enter__(self):
        import tempfile

        self._tmpdir = tempfile.TemporaryDirectory()

        try:
            import glob
            import os
            import shutil

            import edgedefense

            cwd = os.getcwd()
            os.chdir(os.path.join(os.path.dirname(edgedefense.__file__), "..", "test"))
            try:
                for pattern in self._patterns:
                    for filename in glob.glob(pattern):
                        shutil.copy(filename, self._tmpdir.name)

                return self._tmpdir.name
            finally:
                os.chdir(cwd)
        except Exception:
            self._tmpdir.cleanup()
            raise

    def __exit__(self, *args):
        self._tmpdir.cleanup()
