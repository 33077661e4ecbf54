"""Grid-exact laboratory for continuous-variable broadcast-structure bounds.

Thin re-export of the compiled extension; see the project README for the
pipeline overview and the CLI equivalents.
"""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
