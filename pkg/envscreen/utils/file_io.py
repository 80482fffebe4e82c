from iopath.common.file_io import PathManager as PathManagerBase

__all__ = ["PathManager"]


PathManager = PathManagerBase()
"""
A project-wide path manager, used for every report written by envscreen.
"""
