import pytest
from hypothesis import HealthCheck, settings

from gpdd.measure import Dirichlet, IndependentProduct, Marginal1D, example_dirichlet

settings.register_profile("default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def dirichlet_exact():
    return example_dirichlet(exact=True)


@pytest.fixture(scope="session")
def dirichlet_float():
    return example_dirichlet(exact=False)


@pytest.fixture(scope="session")
def independent3():
    """Three non-identical independent marginals with rational moments."""
    return IndependentProduct(
        (
            Marginal1D("uniform", (0, 1)),
            Marginal1D("beta", (2, 3)),
            Marginal1D("gaussian", (1, 2)),
        )
    )


@pytest.fixture(scope="session")
def dirichlet4():
    return Dirichlet.from_kappa((1, 2, 1, 1, 3))


ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per acceptance criterion.

    Lines are printed as soon as they are recorded (visible with ``-s``) and
    repeated in the terminal summary.
    """
    lines = request.config.stash[ACCEPTANCE_KEY]

    def record(number, name, ok, detail=""):
        line = f"criterion {number} {name}: {'PASS' if ok else 'FAIL'}" + (f" ({detail})" if detail else "")
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
