from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def field_csv():
    return DATA / "field.csv"


@pytest.fixture
def trace_csv():
    return DATA / "trace.csv"


@pytest.fixture
def planar_run():
    d = DATA / "di_planar"
    return sorted(d.glob("traj_*.csv")), d / "summary.json"


@pytest.fixture
def violation_run():
    d = DATA / "fov_violation"
    return sorted(d.glob("traj_*.csv")), d / "summary.json"


@pytest.fixture
def spatial_run():
    d = DATA / "spatial_pair"
    return sorted(d.glob("traj_*.csv")), d / "summary.json"


@pytest.fixture
def unicycle_run():
    d = DATA / "unicycle_single"
    return sorted(d.glob("traj_*.csv")), d / "summary.json"
