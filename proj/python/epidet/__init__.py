"""Optimal epidemic detection by sequential regression Monte Carlo."""

from ._epidet import *  # noqa: F401,F403
from ._epidet import __doc__  # noqa: F401

__version__ = "0.1.0"
