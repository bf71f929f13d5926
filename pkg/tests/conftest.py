import math
import textwrap

import pytest

from config.settings import get_settings
from core.params import ChannelParams, TolerancePolicy


@pytest.fixture(autouse=True)
def _isolated_settings(monkeypatch, tmp_path):
    monkeypatch.setenv("CHANNEL_UC_LOG_DIR", str(tmp_path / "logs"))
    monkeypatch.setenv("CHANNEL_UC_LOG_TO_FILE", "false")
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def params():
    return ChannelParams(nu=1.0, alpha=0.4, L=math.pi)


@pytest.fixture
def policy():
    return TolerancePolicy()


@pytest.fixture
def write_config(tmp_path):
    def write(body: str, name: str = "run.toml"):
        path = tmp_path / name
        path.write_text(textwrap.dedent(body), encoding="utf-8")
        return path
    return write
