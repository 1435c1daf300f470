import pytest


@pytest.fixture(autouse=True)
def set_tmp_unobs_dir(tmp_path, monkeypatch):
    unobs_dir = tmp_path / ".unobs"
    unobs_dir.mkdir()
    monkeypatch.setenv("UNOBS_DIR", str(unobs_dir))
    yield
