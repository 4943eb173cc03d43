"""Pais-Uhlenbeck oscillator numerics (compiled core)."""

from ._puo import *  # noqa: F401,F403
from ._puo import __version__  # noqa: F401
