import pathlib

import pytest

from vqcremap.data import fetch_dataset


@pytest.fixture(scope="session")
def data_dir(tmp_path_factory) -> pathlib.Path:
    """Directory holding the canonical iris.data / wine.data files."""
    d = tmp_path_factory.mktemp("data")
    fetch_dataset("iris", d)
    fetch_dataset("wine", d)
    return d
