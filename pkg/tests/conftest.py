"""
Shared fixtures: the testing configuration, the KH profile and its report,
and a writer for sampled profile files.
"""
import os

os.environ.setdefault('MASLOV_ENV', 'testing')

import pytest  # noqa: E402

from backend.maslov.maslovbox import MaslovBoxConfig, assemble_report  # noqa: E402
from backend.maslov.profiles import kh_profile  # noqa: E402


@pytest.fixture(scope='session')
def kh():
    return kh_profile()


@pytest.fixture(scope='session')
def box_config():
    return MaslovBoxConfig.from_config()


@pytest.fixture(scope='session')
def kh_report(kh, box_config):
    """The full KH run; every test using it is slow."""
    return assemble_report(kh, box_config)


@pytest.fixture
def write_profile(tmp_path):
    """Write (x, φ) samples to a text file and return its path."""
    def _write(xs, values, name='profile.txt', header='# x phi'):
        path = tmp_path / name
        rows = [header] if header else []
        rows += [f"{float(x)!r} {float(v)!r}" for x, v in zip(xs, values)]
        path.write_text('\n'.join(rows) + '\n', encoding='utf-8')
        return str(path)
    return _write
