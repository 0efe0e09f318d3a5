from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

FIXTURES = Path(__file__).parent / "fixtures"
STRICT = sorted((FIXTURES / "strict").glob("*.krn"))
CORRUPT = sorted((FIXTURES / "corrupt").glob("*.krn"))

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
settings.load_profile("default")


def read(path: Path) -> str:
    return path.read_text(encoding="utf-8")


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES
