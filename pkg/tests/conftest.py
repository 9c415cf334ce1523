import pytest

import golden_data as gd


@pytest.fixture(scope="session")
def toy():
    cat = gd.toy_catalog()
    return cat, gd.toy_workload(cat)


@pytest.fixture(scope="session")
def sales():
    cat = gd.sales_catalog()
    return cat, gd.sales_workload(cat)
