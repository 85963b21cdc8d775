""" StatePoll

Copyright (c) 2021 IdmFoundInHim, under MIT License
"""
# pyright: reportUnsupportedDunderAll=false
from .ergodicity import __all__ as ergodicity__all__
from .errors import __all__ as errors__all__
from .laws import __all__ as laws__all__
from .model import __all__ as model__all__
from .oracle import __all__ as oracle__all__
from .server import __all__ as server__all__
from .simulator import __all__ as simulator__all__
from .symmetric import __all__ as symmetric__all__
from .utilities import __all__ as utilities__all__
from .waiting import __all__ as waiting__all__

__all__ = (
    ["types"]
    + errors__all__
    + model__all__
    + server__all__
    + ergodicity__all__
    + symmetric__all__
    + waiting__all__
    + laws__all__
    + simulator__all__
    + oracle__all__
    + utilities__all__
)

from . import types
from .ergodicity import *
from .errors import *
from .laws import *
from .model import *
from .oracle import *
from .server import *
from .simulator import *
from .symmetric import *
from .utilities import *
from .waiting import *
