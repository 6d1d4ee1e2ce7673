import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from theta_doubler import hecke
from theta_doubler.characters import kronecker_character
from theta_doubler.dihedral import weight_one_newform
from theta_doubler.eisbasis import weight_k_basis
from theta_doubler.ff import make_field


@pytest.fixture(scope="session")
def F5():
    return make_field(5)


@pytest.fixture(scope="session")
def chi23():
    return kronecker_character(-23)


@pytest.fixture(scope="session")
def f23_int():
    """The level-23 dihedral newform over Z, 600 terms."""
    return weight_one_newform(-23, 600)[0]


@pytest.fixture(scope="session")
def S23(F5, chi23):
    return weight_k_basis(23, 5, chi23, F5)


@pytest.fixture(scope="session")
def comp23(S23, F5, f23_int):
    f = f23_int.reduce(F5)
    target = hecke.eigensystem_from_qexp(f, 23, S23.sturm)
    comp = hecke.localize(S23, target)
    return hecke.with_ops(comp, ["U23", "T5", "<2>", "<5>"])


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("THETA_DOUBLER_CACHE", str(tmp_path / "cache"))


def pytest_terminal_summary(terminalreporter):
    from _criteria import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        status, text, secs = RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {status} ({secs:.1f} s) {text}")
