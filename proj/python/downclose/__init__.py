from downclose._core import *  # noqa: F401,F403

from downclose._core import __doc__  # noqa: F401
