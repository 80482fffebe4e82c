from .logger import setup_logger, log_first_n
from .file_io import PathManager
from . import errors
