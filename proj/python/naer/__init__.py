from ._naer import *  # noqa: F401,F403
