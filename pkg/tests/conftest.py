import pytest

from ladder_cooling import preset


@pytest.fixture
def ca():
    return preset("ca")
