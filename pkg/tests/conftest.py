import numpy as np
import pytest

from sobolkit.designs import JitterArray, Permutation, RlhdFamily


def pytest_terminal_summary(terminalreporter):
    """Print one PASS/FAIL line per acceptance criterion after the run."""
    try:
        import test_acceptance
    except ImportError:
        return
    if not test_acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in test_acceptance.RESULTS:
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"{status}  {name}: {detail}")

# the worked 8 x 2 example: level permutations of X, W and the injected Z1
PI_X = ((1, 3, 8, 4, 6, 2, 5, 7), (4, 5, 6, 7, 1, 8, 3, 2))
PI_W = ((3, 1, 4, 5, 8, 2, 7, 6), (1, 2, 8, 4, 7, 6, 3, 5))
PI_Z1 = (4, 2, 3, 7, 1, 8, 6, 5)

# derived level matrices (columns), checked by hand against the composition
# rule sigma_i = inv(pi_i^W) o pi_i^X and its Z-design analogues
WM1_LEVELS = ((1, 3, 8, 4, 6, 2, 5, 7), (2, 1, 7, 8, 5, 6, 4, 3))
WM2_LEVELS = ((5, 6, 2, 8, 3, 4, 7, 1), (4, 5, 6, 7, 1, 8, 3, 2))
Z1_LEVELS = ((4, 2, 3, 7, 1, 8, 6, 5), (2, 1, 7, 8, 5, 6, 4, 3))
XT_LEVELS = ((4, 2, 3, 7, 1, 8, 6, 5), (7, 8, 5, 2, 4, 6, 1, 3))
WT_LEVELS = ((4, 2, 3, 7, 1, 8, 6, 5), (8, 6, 1, 3, 2, 7, 5, 4))


class InjectedStream:
    """Stands in for a Generator when a test needs a known permutation."""

    def __init__(self, perm_1based):
        self._perm = np.asarray(perm_1based, dtype=np.int64)

    def permutation(self, n):
        assert n == self._perm.size
        return self._perm - 1


@pytest.fixture
def worked_family():
    jitter = JitterArray.sample(8, 2, seed=7)
    return RlhdFamily.from_permutations(jitter, {
        "X": [Permutation(np.array(p)) for p in PI_X],
        "W": [Permutation(np.array(p)) for p in PI_W],
    })


@pytest.fixture
def worked_family_with_z(worked_family):
    worked_family.make_z(1, stream=InjectedStream(PI_Z1))
    return worked_family
