import pytest

from flagcert import certify, sdp


@pytest.fixture(scope="session")
def m4_problem():
    return sdp.build_problem(sdp.default_m4_spec())


@pytest.fixture(scope="session")
def m4_solution(m4_problem):
    return sdp.solve(m4_problem, tol=1e-9)


@pytest.fixture(scope="session")
def m4_certificate(m4_problem, m4_solution):
    return certify.round_solution(m4_problem, m4_solution, denominator=10 ** 10)


@pytest.fixture(scope="session")
def goodman_problem():
    return sdp.build_problem(sdp.goodman_spec())


@pytest.fixture(scope="session")
def goodman_solution(goodman_problem):
    return sdp.solve(goodman_problem, tol=1e-10)
