from ._hfb import *  # noqa: F401,F403
from ._hfb import __doc__  # noqa: F401
