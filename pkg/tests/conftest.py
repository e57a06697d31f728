from __future__ import annotations

from importlib import resources
from pathlib import Path

import pytest

from taskcell import serde
from taskcell.kb import KnowledgeBase, packaged_cell
from taskcell.tasks import Tables, packaged_models

DATA = Path(__file__).parent / "data"


def data_text(name: str) -> str:
    return resources.files("taskcell.data").joinpath(name).read_text("utf-8")


@pytest.fixture(scope="session")
def study_cell():
    return packaged_cell("study_cell")


@pytest.fixture(scope="session")
def vision_cell():
    return packaged_cell("vision_cell")


@pytest.fixture(scope="session")
def models():
    return packaged_models()


@pytest.fixture(scope="session")
def knowledge():
    return KnowledgeBase.default()


@pytest.fixture(scope="session")
def tables():
    return Tables.packaged()


@pytest.fixture()
def study_script():
    return serde.process_from_json(
        serde.loads_strict(data_text("processes/study_script.json"))
    )


@pytest.fixture()
def study_script_blank():
    return serde.process_from_json(
        serde.loads_strict(data_text("processes/study_script_blank.json"))
    )


@pytest.fixture(scope="session")
def golden_csv() -> str:
    return (DATA / "responses_golden.csv").read_text(encoding="utf-8")
