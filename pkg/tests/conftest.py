import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gazeauth.catalog import default_tree, load_default_catalog, template_set


@pytest.fixture(scope="session")
def catalog():
    return load_default_catalog()


@pytest.fixture(scope="session")
def catalog_templates(catalog):
    return template_set(catalog)


@pytest.fixture(scope="session")
def catalog_tree(catalog):
    return default_tree(catalog)
