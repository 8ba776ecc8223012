from ._stablemil import *  # noqa: F401,F403
from ._stablemil import StableMILError, __doc__  # noqa: F401
