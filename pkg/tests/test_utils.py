#!/usr/bin/env python
# -*- coding: utf-8 -*-

import io
import json
import logging
import sys

import numpy as np
import pytest

from rum_spectrum.utils import (complex_to_pairs, console_handlers, dump_json, pairs_to_complex,
                                records_to_frame, setup_logging, write_table)

__author__ = "Eelco van Vliet"
__copyright__ = "Eelco van Vliet"
__license__ = "mit"


def test_setup_logging_does_not_stack_handlers():
    first = setup_logging("rum_spectrum_test")
    second = setup_logging("rum_spectrum_test", log_level=logging.DEBUG)
    assert first is second
    consoles = console_handlers(second)
    assert len(consoles) == 1
    assert consoles[0].level == logging.DEBUG
    assert consoles[0].stream is sys.stderr
    assert not second.propagate


def test_progress_bar_silences_the_console():
    _logger = setup_logging("rum_spectrum_test", progress_bar=True)
    assert all(handle.level == logging.CRITICAL for handle in console_handlers(_logger))


def test_setup_logging_to_file(tmp_path):
    log_file_base = tmp_path / "run"
    _logger = setup_logging("rum_spectrum_test", write_log_to_file=True,
                            log_file_base=str(log_file_base))
    file_handlers = [handle for handle in _logger.handlers if hasattr(handle, "baseFilename")]
    assert len(file_handlers) == 1
    _logger.info("hello")
    for handler in _logger.handlers:
        handler.flush()
    assert "hello" in open(file_handlers[0].baseFilename).read()
    setup_logging("rum_spectrum_test")


def test_complex_pairs():
    assert complex_to_pairs(1 + 2j) == [1.0, 2.0]
    assert complex_to_pairs([[1j, 2]]) == [[[0.0, 1.0], [2.0, 0.0]]]
    assert pairs_to_complex(3) == 3 + 0j
    assert pairs_to_complex([1, 2]) == 1 + 2j
    assert np.allclose(pairs_to_complex([[0, 1], [2, 0], [3, 4]]), [1j, 2, 3 + 4j])
    assert np.allclose(pairs_to_complex(complex_to_pairs([[1j, 2]])), [[1j, 2]])


@pytest.mark.parametrize("value", [True, "1", None, [1, "x", 3]])
def test_pairs_to_complex_rejects_non_numbers(value):
    with pytest.raises(ValueError):
        pairs_to_complex(value)


def test_records_to_frame():
    records = [dict(character=dict(angles=[0.5], torsion_indices=[1]), kernel_dim=1,
                    kernel_basis=[[1.0, 0.0]], component="isolated")]
    frame = records_to_frame(records)
    assert list(frame.columns) == ["angle_0", "torsion_0", "kernel_dim", "kernel_basis",
                                   "component"]
    assert json.loads(frame.loc[0, "kernel_basis"]) == [[1.0, 0.0]]


def test_write_table(tmp_path):
    frame = records_to_frame([dict(character=dict(angles=[], torsion_indices=[0, 2]),
                                   kernel_dim=2)])
    stream = io.StringIO()
    write_table(frame, stream=stream)
    assert stream.getvalue().splitlines() == ["torsion_0,torsion_1,kernel_dim", "0,2,2"]
    file_name = tmp_path / "out" / "table.csv"
    write_table(frame, file_name=file_name)
    assert file_name.read_text() == stream.getvalue()


def test_dump_json_sorts_keys(tmp_path):
    stream = io.StringIO()
    text = dump_json(dict(b=1, a=[1, 2]), stream=stream)
    assert stream.getvalue() == text + "\n"
    assert text.index('"a"') < text.index('"b"')
    file_name = tmp_path / "sub" / "result.json"
    dump_json(dict(b=1, a=2), file_name=file_name)
    assert json.loads(file_name.read_text()) == dict(a=2, b=1)
