"""Temporal-logic task automata, tabular Q-learning, and skill composition."""

try:
    from ._tlcompose import *  # noqa: F401,F403
except ImportError:
    # Development tree: the extension sits on sys.path next to the build dir.
    from _tlcompose import *  # noqa: F401,F403

__version__ = "0.1.0"
