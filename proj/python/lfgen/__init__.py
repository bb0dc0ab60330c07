"""Linear-fractional BGW genealogies: laws, simulation, likelihoods, exact oracle, fitting."""

from ._core import *  # noqa: F401,F403
from ._core import LfgenError, __doc__  # noqa: F401
