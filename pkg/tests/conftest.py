import pytest
from hypothesis import HealthCheck, settings

from entcone import cone

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def ingleton_cone():
    return cone.build_quantum_ingleton_cone(4)


@pytest.fixture(scope="session")
def ingleton_rays(ingleton_cone):
    return cone.extreme_rays(ingleton_cone)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for res in sorted(RESULTS, key=lambda r: r.number):
            terminalreporter.write_line(res.line())
