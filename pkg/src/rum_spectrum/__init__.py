# -*- coding: utf-8 -*-
from importlib.metadata import version, PackageNotFoundError

try:
    # Change here if project is renamed and does not equal the package name
    dist_name = __name__
    __version__ = version(dist_name)
except PackageNotFoundError:
    __version__ = 'unknown'

LOGGER_BASE_NAME = __name__
FRAMEWORK_DIRECTORY = "frameworks"
N_PROCESSES_ENV = "RUM_SPECTRUM_N_PROCESSES"
