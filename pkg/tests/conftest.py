"""
Общие фикстуры тестов ut-pcmaps
"""

import pytest

from ut_pcmaps.core.field import make_field
from ut_pcmaps.core.group_table import build_group_table


@pytest.fixture(scope="session")
def f2():
    return make_field(2)


@pytest.fixture(scope="session")
def f3():
    return make_field(3)


@pytest.fixture(scope="session")
def f4():
    return make_field(2, 2)


@pytest.fixture(scope="session")
def f5():
    return make_field(5)


@pytest.fixture(scope="session")
def ut3_f2(f2):
    return build_group_table(3, f2)


@pytest.fixture(scope="session")
def ut3_f3(f3):
    return build_group_table(3, f3)


@pytest.fixture(scope="session")
def ut4_f2(f2):
    return build_group_table(4, f2)


@pytest.fixture(scope="session")
def ut4_f3(f3):
    return build_group_table(4, f3)


@pytest.fixture(scope="session")
def ut5_f2(f2):
    return build_group_table(5, f2)
