#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
    Shared fixtures for the rum_spectrum tests.

    Read more about conftest.py under:
    https://pytest.org/latest/plugins.html
"""

import numpy as np
import pytest

from rum_spectrum.framework_file import bundled_framework_path, framework_from_dict, load_framework
from rum_spectrum.group import AbelianGroupSpec

SQRT3 = 1.7320508075688772
ETA3 = np.exp(2j * np.pi / 3)

ALL_FRAMEWORKS = ("c3h_euclidean", "c3h_cylindrical", "cinfh_euclidean", "frieze_lq",
                  "frieze_lq_g1", "trivial", "edgeless")


def load_bundled(name):
    return load_framework(bundled_framework_path(name))


def frieze_data(q=2.0, braced=False):
    """Framework file content of the p11m frieze in the lq plane"""
    edges = [dict(id="e1", source="v", range="v", gain=[1, 0], derive=True),
             dict(id="e2", source="v", range="v", gain=[1, 1], derive=True)]
    if braced:
        edges.append(dict(id="e3", source="v", range="v", gain=[2, 1], derive=True))
    return dict(group=dict(free_rank=1, torsion=[2]),
                representation=[dict(linear=[[1, 0], [0, 1]], translation=[1, 0]),
                                dict(linear=[[1, 0], [0, -1]])],
                vertices=["v"], placement=dict(v=[0, -1]), norm=dict(kind="lq", q=q),
                edges=edges)


def frieze(q=2.0, braced=False):
    return framework_from_dict(frieze_data(q, braced)).G0


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def c3h():
    return load_bundled("c3h_euclidean")


@pytest.fixture
def c3h_cylindrical():
    return load_bundled("c3h_cylindrical")


@pytest.fixture
def cinfh():
    return load_bundled("cinfh_euclidean")


@pytest.fixture
def frieze_g0():
    return load_bundled("frieze_lq")


@pytest.fixture
def frieze_g1():
    return load_bundled("frieze_lq_g1")


@pytest.fixture
def trivial():
    return load_bundled("trivial")


@pytest.fixture
def edgeless():
    return load_bundled("edgeless")


@pytest.fixture
def z_group():
    return AbelianGroupSpec(1, ())


@pytest.fixture
def z_z2():
    return AbelianGroupSpec(1, (2,))


@pytest.fixture
def z2_z3():
    return AbelianGroupSpec(0, (2, 3))
