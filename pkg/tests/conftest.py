import sys
from pathlib import Path

import pytest

import fidaudit
from fidaudit.corpus import CATEGORICAL, NUMERIC, FeatureDef, FeatureSchema, load_schema

sys.path.insert(0, str(Path(__file__).parent))

GCD_SCHEMA_PATH = Path(fidaudit.__file__).parent / "data" / "gcd_schema.json"


@pytest.fixture(scope="session")
def gcd_schema() -> FeatureSchema:
    return load_schema(GCD_SCHEMA_PATH)


@pytest.fixture(scope="session")
def toy_schema() -> FeatureSchema:
    return FeatureSchema(
        "TOY",
        [
            FeatureDef(
                key="purpose",
                display_name="purpose",
                kind=CATEGORICAL,
                value_map={"P1": "car (new)", "P2": "education"},
            ),
            FeatureDef(key="duration", display_name="duration", kind=NUMERIC, unit="months"),
        ],
    )
