"""Operator ordering calculus for a single bosonic mode.

Reorders exponentials of linear forms between PQ, QP, normal and
antinormal orderings, builds the squeeze operator several independent
ways and cross-checks every identity in a truncated Fock space.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .fock import *  # noqa: F401,F403
from .orderings import *  # noqa: F401,F403
from .gwt import *  # noqa: F401,F403
from .gaussian import *  # noqa: F401,F403
from .squeeze import *  # noqa: F401,F403
from .verify import VerifyReport, VerifySettings, run_verify  # noqa: F401
