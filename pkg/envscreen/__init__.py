from . import config
from . import grid
from . import envelope
from . import mechanism
from . import information

__version__ = "0.1.0"
