from pathlib import Path

import pytest

from shoal import wire
from shoal.wire import (AddFish, Configure, ErrorMsg, JobCompleted, Pause,
                        RemoveFish, Reset, RunFinished, SetParams, SnapshotMsg,
                        SnapshotRequest, Start, Step, WireError, deserialize,
                        serialize)

GOLDEN = Path(__file__).parent / "golden"

SAMPLES = {
    "command_configure": Configure(config={"mode": "canvas", "seed": 3}),
    "command_start": Start(),
    "command_pause": Pause(),
    "command_step": Step(n=3),
    "command_add_fish": AddFish(task_name="t1", field="Math",
                                keywords=("a", "b", "c", "f", "h")),
    "command_remove_fish": RemoveFish(fish_id=3),
    "command_set_params": SetParams(params={"visual": 2.5, "step": 0.3}),
    "command_snapshot_request": SnapshotRequest(),
    "command_reset": Reset(),
    "event_snapshot": SnapshotMsg(snapshot={
        "v": 1, "session_id": "s1", "mode": "canvas", "iteration": 2, "sim_clock": 2.0,
        "running": False,
        "fish": [{"id": 0, "position": [7.0, 5.0], "fitness": 1.5, "task_ref": "t1",
                  "state": "swimming"}],
        "resources": [{"id": "r0", "name": "east", "plane_position": [4, 4],
                       "policy": "space_shared", "running": 0, "queued_mi": 0.0}],
        "bulletin": {"position": [7.0, 5.0], "fitness": 1.5},
        "completed": [],
    }),
    "event_job_completed": JobCompleted(job={
        "job_id": "t1", "resource": "r0", "submit": 2.0, "start": 2.0, "finish": 7.0,
        "waiting": 0.0, "exec": 5.0}),
    "event_run_finished": RunFinished(summary={
        "iterations": 12, "jobs_completed": 3, "simulated_makespan": 15.0}),
    "event_error": ErrorMsg(code="unknown_fish", message="unknown fish id 9"),
}


class TestGolden:
    @pytest.mark.parametrize("name", sorted(SAMPLES))
    def test_serialization_matches_golden_bytes(self, name):
        expected = (GOLDEN / f"{name}.json").read_bytes()
        assert (serialize(SAMPLES[name]) + "\n").encode("utf-8") == expected

    @pytest.mark.parametrize("name", sorted(SAMPLES))
    def test_round_trip_identity(self, name):
        value = SAMPLES[name]
        assert deserialize(serialize(value)) == value

    def test_golden_files_cover_every_variant(self):
        variants = set(wire.COMMAND_TYPES) | set(wire.EVENT_TYPES)
        assert {type(v) for v in SAMPLES.values()} == variants


class TestSerializeForms:
    def test_step_canonical_form(self):
        assert serialize(Step(n=3)) == '{"v":1,"type":"step","n":3}'

    def test_add_fish_keywords_normalized(self):
        command = AddFish(task_name="t1", field="Math", keywords=("H", "b", "a", "b"))
        assert command.keywords == ("a", "b", "h")


class TestDeserializeErrors:
    def test_negative_step_rejected(self):
        with pytest.raises(WireError, match="at n: must be a positive integer"):
            deserialize('{"v":1,"type":"step","n":-1}')

    def test_zero_step_rejected(self):
        with pytest.raises(WireError, match="positive integer"):
            deserialize('{"v":1,"type":"step","n":0}')

    def test_bool_is_not_an_integer(self):
        with pytest.raises(WireError, match="expected an integer"):
            deserialize('{"v":1,"type":"step","n":true}')

    def test_unknown_field_rejected(self):
        with pytest.raises(WireError, match="at extra: unknown field"):
            deserialize('{"v":1,"type":"start","extra":1}')

    def test_missing_version_rejected(self):
        with pytest.raises(WireError, match="at v"):
            deserialize('{"type":"start"}')

    def test_wrong_version_rejected(self):
        with pytest.raises(WireError, match="unsupported version 2"):
            deserialize('{"v":2,"type":"start"}')

    def test_unknown_type_rejected(self):
        with pytest.raises(WireError, match="unknown message type"):
            deserialize('{"v":1,"type":"warp"}')

    def test_parse_error_reports_position(self):
        with pytest.raises(WireError, match="parse error at position"):
            deserialize('{"v":1,')

    def test_non_object_rejected(self):
        with pytest.raises(WireError, match="expected an object"):
            deserialize('[1,2]')

    def test_set_params_unknown_key_rejected(self):
        with pytest.raises(WireError, match="params.warp: unknown parameter"):
            deserialize('{"v":1,"type":"set_params","params":{"warp":9}}')

    def test_add_fish_empty_keyword_rejected(self):
        with pytest.raises(WireError, match=r"keywords\[1\]"):
            deserialize('{"v":1,"type":"add_fish","task_name":"t","field":"F","keywords":["a",""]}')


def test_snapshot_round_trips_value_equal():
    snapshot = SAMPLES["event_snapshot"].snapshot
    again = deserialize(serialize(SnapshotMsg(snapshot=snapshot)))
    assert again.snapshot == snapshot
