"""Fixtures shared by the fjsched tests."""
import pytest

from .factories import build_instance


@pytest.fixture(scope="session")
def project_root_path(request):
    """Get the project root path."""
    return request.config.rootpath


@pytest.fixture
def chain_instance():
    """Single processor, one branch task."""
    return build_instance([(2, 0, 0)], [1])


@pytest.fixture
def two_proc_instance():
    """Branch task that pays both communications when run remotely."""
    return build_instance([(2, 3, 4)], [1, 1])
