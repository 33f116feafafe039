"""Measure-based crowd and swarm dynamics: grid push-forward scheme, particle
oracle and Wasserstein-1 diagnostics."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401

__version__ = "0.1.0"
