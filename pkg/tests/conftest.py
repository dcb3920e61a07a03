"""Shared fixtures: surrogate datasets and cached feature matrices.

The heavier end-to-end fixtures are session-scoped so the full breast/lung
render happens once per pytest run regardless of how many tests consume it.
"""

import pytest

from cgrips.acp import synth_dataset, write_acp_csv
from cgrips.config import PipelineConfig
from cgrips.pipeline import dataset_vectors


@pytest.fixture(scope="session")
def breast_dataset():
    return synth_dataset("breast")


@pytest.fixture(scope="session")
def lung_dataset():
    return synth_dataset("lung")


@pytest.fixture(scope="session")
def breast_csv(tmp_path_factory, breast_dataset):
    path = tmp_path_factory.mktemp("acp") / "breast.csv"
    write_acp_csv(breast_dataset, path)
    return path


@pytest.fixture(scope="session")
def lung_csv(tmp_path_factory, lung_dataset):
    path = tmp_path_factory.mktemp("acp") / "lung.csv"
    write_acp_csv(lung_dataset, path)
    return path


@pytest.fixture(scope="session")
def default_config():
    return PipelineConfig()


@pytest.fixture(scope="session")
def breast_vectors(breast_dataset, default_config):
    """Feature matrix for the whole breast set, rows in dataset order."""
    return dataset_vectors(breast_dataset, default_config)


@pytest.fixture(scope="session")
def lung_vectors(lung_dataset, default_config):
    return dataset_vectors(lung_dataset, default_config)
