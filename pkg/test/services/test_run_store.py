# =====================================================
# test/services/test_run_store.py
# =====================================================
import json
import re

import pytest

from src.schemas.goal_model import Actor, ApiMapping, GoalModel
from src.schemas.pipeline import PipelinePhase, PipelineResult
from src.schemas.prompting import ShotStrategy
from src.services.exceptions import MissingArtifact, SchemaError
from src.services.run_store import (
    GOAL_MODEL,
    MANIFEST,
    STAGE_RESULTS,
    RunStore,
    new_run_id,
    parse_api_mappings,
    serialize_api_mappings,
)


@pytest.fixture
def store(tmp_path):
    return RunStore(tmp_path / "runs")


@pytest.fixture
def result():
    return PipelineResult(
        description="An ambulance dispatch system.",
        goal_model=GoalModel(project_id="london_ambulance", actors=[Actor(name="Caller")]),
        api_mappings=[ApiMapping(low_level_goal="Record the call.", api_name="recordUsingPOST")],
        completed_phases=[PipelinePhase.ACTORS],
    )


class TestRunId:

    def test_format(self):
        run_id = new_run_id("london_ambulance", ShotStrategy.ONE_SHOT, False)

        assert re.fullmatch(r"london_ambulance-os-nocritic-[0-9a-f]{8}", run_id)

    def test_unique(self):
        assert new_run_id("d", ShotStrategy.FEW_SHOT, True) != new_run_id("d", ShotStrategy.FEW_SHOT, True)


class TestRunStore:

    def test_run_dir_is_new(self, store):
        store.create_run_dir("r1")

        with pytest.raises(FileExistsError):
            store.create_run_dir("r1")

    def test_write_result(self, store, result):
        store.create_run_dir("r1")

        artifacts = store.write_result("r1", result)

        assert artifacts == {"goal_model": "goal_model.json", "api_mappings": "api_mappings.json",
                             "stage_results": "stage_results.json"}
        stages = json.loads((store.run_dir("r1") / STAGE_RESULTS).read_text(encoding="utf-8"))
        assert stages["completed_phases"] == ["actors"]
        assert "r1" not in (store.run_dir("r1") / GOAL_MODEL).read_text(encoding="utf-8")

    def test_load_back(self, store, result, make_manifest):
        store.create_run_dir("r1")
        artifacts = store.write_result("r1", result)
        store.write_manifest(make_manifest(run_id="r1", artifacts=artifacts))

        assert RunStore.load_manifest(store.run_dir("r1")).run_id == "r1"
        assert RunStore.load_goal_model(store.run_dir("r1") / MANIFEST).actors[0].name == "Caller"
        assert RunStore.load_api_mappings(store.run_dir("r1"))[0].api_name == "recordUsingPOST"

    def test_missing_manifest(self, store):
        with pytest.raises(MissingArtifact):
            RunStore.load_manifest(store.run_dir("absent"))

    def test_manifest_without_goal_model(self, store, make_manifest):
        store.create_run_dir("r1")
        store.write_manifest(make_manifest(run_id="r1"))

        with pytest.raises(MissingArtifact):
            RunStore.load_goal_model(store.run_dir("r1"))
        assert RunStore.load_api_mappings(store.run_dir("r1")) is None

    def test_invalid_manifest(self, store):
        store.create_run_dir("r1")
        (store.run_dir("r1") / MANIFEST).write_text('{"run_id": "r1"}', encoding="utf-8")

        with pytest.raises(SchemaError):
            RunStore.load_manifest(store.run_dir("r1"))


class TestApiMappingsDocument:

    def test_serialize(self):
        data = json.loads(serialize_api_mappings([ApiMapping(low_level_goal="g", api_name="a")]))

        assert data == {"schema_version": 1, "mappings": [{"high_level_goal": "", "low_level_goal": "g", "api_name": "a"}]}

    def test_malformed(self):
        with pytest.raises(SchemaError):
            parse_api_mappings(b'{"items": []}')
