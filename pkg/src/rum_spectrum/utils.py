import json
import logging
import sys
from pathlib import Path

import numpy as np
import pandas as pd
from cbs_utils.misc import create_logger, merge_loggers

from rum_spectrum import LOGGER_BASE_NAME

logger = logging.getLogger(LOGGER_BASE_NAME)

LOG_FORMAT_LONG = '[%(asctime)s] %(name)-5s %(levelname)-8s --- %(message)s (%(filename)s:%(lineno)s)'
LOG_DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


def console_handlers(_logger):
    """The stream handlers of a logger; file handlers carry a baseFilename"""
    return [handle for handle in _logger.handlers if not hasattr(handle, "baseFilename")]


def setup_logging(logger_name=None,
                  write_log_to_file=False,
                  log_file_base="log",
                  log_level_file=logging.INFO,
                  log_level=None,
                  progress_bar=False,
                  ):
    """
    Initialise the logging system of the command line tools

    Parameters
    ----------
    logger_name: str
        Name of the logger to configure. Default: the package logger
    write_log_to_file: bool
        Also write the log to a file with base name *log_file_base*
    log_file_base: str
        Base of the log file name
    log_level_file: int
        Level of the file handler
    log_level: int
        Level of the console handler. Default: INFO
    progress_bar: bool
        A progress bar is shown: console logging is switched off up to critical messages

    Returns
    -------
    logging.Logger:
        The configured logger
    """
    # ~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~
    # Initialise the logging system
    # ~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~

    if not write_log_to_file:
        log_file_base = None

    if logger_name is None:
        name = LOGGER_BASE_NAME
    else:
        name = logger_name

    if log_level is None:
        log_level = logging.INFO

    # calling main twice in one process (tests) must not stack handlers
    for handle in list(logging.getLogger(name).handlers):
        logging.getLogger(name).removeHandler(handle)
        handle.close()

    formatter_long = logging.Formatter(LOG_FORMAT_LONG, datefmt=LOG_DATE_FORMAT)
    _logger = create_logger(name=name,
                            file_log_level=log_level_file,
                            console_log_level=log_level,
                            log_file=log_file_base,
                            formatter_file=formatter_long,
                            console_log_format_long=log_level <= logging.DEBUG,
                            )
    _logger.propagate = False

    for handle in console_handlers(_logger):
        # stdout carries the results
        handle.setStream(sys.stderr)
        if progress_bar:
            # this is the stream handle. Set it to critical so the bar is not interrupted
            handle.setLevel(logging.CRITICAL)

    # merge the settings of our logger with the cbs_utils logger so we control its output
    logging.getLogger("cbs_utils").setLevel(log_level)
    merge_loggers(_logger, "cbs_utils", logger_level_to_merge=log_level)

    return _logger


def complex_to_pairs(values):
    """
    Serialise complex numbers as [re, im] pairs, keeping the nesting of arrays

    Parameters
    ----------
    values: complex or array_like
        Scalar, vector or matrix

    Returns
    -------
    list:
        [re, im] for a scalar, otherwise a nested list of pairs
    """
    array = np.asarray(values, dtype=complex)
    if array.ndim == 0:
        return [float(array.real), float(array.imag)]
    return [complex_to_pairs(item) for item in array]


def is_pair(value):
    return (isinstance(value, (list, tuple)) and len(value) == 2 and
            all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value))


def pairs_to_complex(values):
    """
    Inverse of :func:`complex_to_pairs`; plain real numbers are accepted as well

    Raises
    ------
    ValueError:
        In case an entry is neither a number nor an [re, im] pair
    """
    if isinstance(values, bool):
        raise ValueError(f"boolean {values} is not a number")
    if isinstance(values, (int, float)):
        return complex(values)
    if is_pair(values):
        return complex(values[0], values[1])
    if isinstance(values, (list, tuple)):
        return np.array([pairs_to_complex(item) for item in values], dtype=complex)
    raise ValueError(f"cannot interpret {values!r} as a complex number")


def dump_json(data, stream=None, file_name=None):
    """
    Write a JSON document with stable key order to a stream or a file

    Output is deterministic: keys are sorted and no time stamps are added.
    """
    text = json.dumps(data, indent=2, sort_keys=True)
    if file_name is not None:
        file_name = Path(file_name)
        file_name.parent.mkdir(parents=True, exist_ok=True)
        file_name.write_text(text + "\n")
        logger.info(f"Wrote {file_name}")
    else:
        stream = stream or sys.stdout
        stream.write(text + "\n")
    return text


def write_table(data_frame, file_name=None, stream=None):
    """Write a data frame as CSV to a file or a stream"""
    if file_name is not None:
        file_name = Path(file_name)
        file_name.parent.mkdir(parents=True, exist_ok=True)
        data_frame.to_csv(file_name, index=False, float_format="%.17g")
        logger.info(f"Wrote table with {len(data_frame)} rows to {file_name}")
    else:
        data_frame.to_csv(stream or sys.stdout, index=False, float_format="%.17g")


def records_to_frame(records):
    """Flatten spectrum or Fourier records into a data frame with one column per coordinate"""
    rows = []
    for record in records:
        row = dict()
        for key, value in record.items():
            if key == "character":
                for i, angle in enumerate(value["angles"]):
                    row[f"angle_{i}"] = angle
                for i, index in enumerate(value["torsion_indices"]):
                    row[f"torsion_{i}"] = index
            elif isinstance(value, list):
                row[key] = json.dumps(value)
            else:
                row[key] = value
        rows.append(row)
    return pd.DataFrame(rows)
