import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "hydrolab",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("hydrolab")


@pytest.fixture
def output_root(tmp_path, monkeypatch):
    monkeypatch.setenv("HYDROLAB_OUTPUT_ROOT", str(tmp_path))
    return tmp_path
