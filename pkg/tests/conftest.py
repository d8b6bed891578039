import json

import pytest

from eigenreg import twobridge


@pytest.fixture(scope="session")
def fig8_fam():
    return twobridge.rep_family(twobridge.TwoBridgeCode(5, 3, "figure-eight"))


@pytest.fixture(scope="session")
def fig8_curve(fig8_fam):
    return twobridge.eigen_curve(fig8_fam)


@pytest.fixture(scope="session")
def whitehead_fam():
    return twobridge.rep_family(twobridge.TwoBridgeCode(8, 3, "whitehead"))


@pytest.fixture(scope="session")
def trefoil_fam():
    return twobridge.rep_family(twobridge.TwoBridgeCode(3, 1, "trefoil"))


@pytest.fixture()
def fig8_link_file(tmp_path):
    path = tmp_path / "fig8.json"
    path.write_text(json.dumps(
        {"type": "two_bridge", "p": 5, "q": 3, "name": "figure-eight"}))
    return str(path)
