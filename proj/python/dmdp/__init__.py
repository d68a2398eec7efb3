from ._dmdp import *  # noqa: F401,F403
