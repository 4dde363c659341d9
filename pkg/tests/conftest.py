import pytest

from support import CONFIG_DIR


@pytest.fixture(scope="session")
def config_dir():
    return CONFIG_DIR
