import math
import sys

import pytest

from whitney.dynamics import RodParams
from whitney.profile import make_profile


@pytest.fixture
def params():
    return RodParams(g=9.81, length=1.0)


REST = make_profile("rest")
CONST2 = make_profile("const_accel", accel=2.0)
SINE = make_profile("sinusoid", amplitude=3.0, omega=2.0, phase=0.0)
PRESETS = {"rest": REST, "const_accel": CONST2, "sinusoid": SINE}


@pytest.fixture(params=sorted(PRESETS))
def preset(request):
    return request.param, PRESETS[request.param]


HALF_PI = 0.5 * math.pi


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
