import json

import pytest

from shoal import wire
from shoal.config import ConfigError
from shoal.session import CommandError, Session, SessionManager, replay
from shoal.scheduling import COMPLETED, DISPATCHED, SWIMMING


def optimizer_doc(population=5, iterations=10, jobs=4):
    return {
        "mode": "optimizer",
        "seed": 1,
        "swarm": {"population": population, "iterations": iterations,
                  "visual": 2.0, "step": 0.5},
        "grid": {
            "users": [{"name": "u", "jobs": jobs}],
            "resources": [
                {"name": "fast", "policy": "space_shared",
                 "machines": [{"pes": [{"rating": 100}]}]},
                {"name": "slow", "policy": "space_shared",
                 "machines": [{"pes": [{"rating": 50}]}]},
            ],
            "job_template": {"length_mi": 400},
        },
    }


@pytest.fixture
def canvas_doc(math_field_tree):
    fields_root, _ = math_field_tree
    return {
        "mode": "canvas",
        "seed": 3,
        "swarm": {"visual": 6.0, "step": 2.0, "try_number": 4, "iterations": 60},
        "grid": {
            "users": [{"name": "alice", "jobs": 2}],
            "resources": [
                {"name": "east", "policy": "space_shared",
                 "machines": [{"pes": [{"rating": 100}]}], "plane_position": [4, 4]},
                {"name": "west", "policy": "time_shared",
                 "machines": [{"pes": [{"rating": 50}, {"rating": 50}]}],
                 "plane_position": [25, 20]},
            ],
            "job_template": {"length_mi": 500},
        },
        "scheduling": {"dispatch_epsilon": 2.0},
        "dispatcher": {"fields_root": str(fields_root)},
    }


class TestCreateSession:
    def test_minimal_session_paused_with_population(self):
        manager = SessionManager()
        sid = manager.create_session(optimizer_doc(population=5))
        session = manager.get(sid)
        snap = session.snapshot()
        assert len(snap["fish"]) == 5
        assert snap["iteration"] == 0
        assert snap["running"] is False

    def test_delta_rejected_with_diagnostic(self):
        doc = optimizer_doc()
        doc["swarm"]["delta"] = 1.5
        with pytest.raises(ConfigError, match=r"delta out of \(0,1\)"):
            SessionManager().create_session(doc)

    def test_ids_distinct(self):
        manager = SessionManager()
        assert manager.create_session(optimizer_doc()) != manager.create_session(optimizer_doc())

    def test_canvas_requires_plane_positions(self, canvas_doc):
        doc = json.loads(json.dumps(canvas_doc))
        del doc["grid"]["resources"][0]["plane_position"]
        with pytest.raises(ConfigError, match="plane_position"):
            SessionManager().create_session(doc)

    def test_unknown_session_rejected(self):
        with pytest.raises(CommandError, match="unknown session"):
            SessionManager().get("s99")


class TestCommands:
    def test_add_fish_lands_on_keyword_coordinates(self, canvas_doc):
        manager = SessionManager()
        session = manager.get(manager.create_session(canvas_doc))
        before = len(session.snapshot()["fish"])
        manager.apply_command(session.id, wire.AddFish(
            task_name="t1", field="Math", keywords=("a", "b", "c", "f", "h")))
        snap = session.snapshot()
        assert len(snap["fish"]) == before + 1
        added = [f for f in snap["fish"] if f["task_ref"] == "t1"][0]
        assert added["position"] == [7.0, 5.0]
        assert added["state"] == SWIMMING

    def test_add_fish_unknown_field(self, canvas_doc):
        manager = SessionManager()
        session = manager.get(manager.create_session(canvas_doc))
        with pytest.raises(CommandError, match="unknown field 'Physics'"):
            session.apply(wire.AddFish(task_name="t", field="Physics", keywords=("a",)))

    def test_add_fish_unknown_keyword_strict(self, canvas_doc):
        manager = SessionManager()
        session = manager.get(manager.create_session(canvas_doc))
        before = session.snapshot()
        with pytest.raises(CommandError, match=r"\['zz'\]"):
            session.apply(wire.AddFish(task_name="t", field="Math", keywords=("a", "zz")))
        assert session.snapshot() == before  # atomic: nothing half-applied

    def test_remove_unknown_fish_state_unchanged(self, canvas_doc):
        manager = SessionManager()
        session = manager.get(manager.create_session(canvas_doc))
        before = session.snapshot()
        with pytest.raises(CommandError, match="unknown fish id 99"):
            session.apply(wire.RemoveFish(fish_id=99))
        assert session.snapshot() == before

    def test_remove_swimming_fish(self, canvas_doc):
        manager = SessionManager()
        session = manager.get(manager.create_session(canvas_doc))
        fish_id = session.snapshot()["fish"][0]["id"]
        session.apply(wire.RemoveFish(fish_id=fish_id))
        assert fish_id not in [f["id"] for f in session.snapshot()["fish"]]

    def test_dispatched_fish_not_removable(self, canvas_doc):
        manager = SessionManager()
        session = manager.get(manager.create_session(canvas_doc))
        dispatched = None
        for _ in range(80):
            session.step(1)
            states = {f["id"]: f["state"] for f in session.snapshot()["fish"]}
            dispatched = next((fid for fid, st in states.items() if st != SWIMMING), None)
            if dispatched is not None:
                break
        assert dispatched is not None
        with pytest.raises(CommandError, match="already entered the grid"):
            session.apply(wire.RemoveFish(fish_id=dispatched))

    def test_optimizer_add_fish_appends_candidate(self):
        manager = SessionManager()
        session = manager.get(manager.create_session(optimizer_doc(population=5)))
        session.apply(wire.AddFish(task_name="extra", field="x", keywords=()))
        snap = session.snapshot()
        assert len(snap["fish"]) == 6
        added = snap["fish"][-1]
        assert len(added["position"]) == 4  # one coordinate per job
        assert session.swarm_params.population_size == 6

    def test_optimizer_cannot_remove_last_fish(self):
        manager = SessionManager()
        session = manager.get(manager.create_session(optimizer_doc(population=1)))
        with pytest.raises(CommandError, match="last fish"):
            session.apply(wire.RemoveFish(fish_id=0))

    def test_set_params_invalid_rolls_back(self):
        manager = SessionManager()
        session = manager.get(manager.create_session(optimizer_doc()))
        before = session.settings
        with pytest.raises(CommandError, match="delta"):
            session.apply(wire.SetParams(params={"delta": 2.0}))
        assert session.settings == before

    def test_set_params_population_resizes_optimizer_swarm(self):
        manager = SessionManager()
        session = manager.get(manager.create_session(optimizer_doc(population=5)))
        session.apply(wire.SetParams(params={"population": 8}))
        assert len(session.snapshot()["fish"]) == 8
        session.apply(wire.SetParams(params={"population": 3}))
        assert len(session.snapshot()["fish"]) == 3

    def test_step_advances_iterations(self):
        manager = SessionManager()
        session = manager.get(manager.create_session(optimizer_doc(iterations=50)))
        session.apply(wire.Step(n=3))
        assert session.snapshot()["iteration"] == 3

    def test_reset_rewinds_to_iteration_zero(self):
        manager = SessionManager()
        session = manager.get(manager.create_session(optimizer_doc()))
        session.apply(wire.Step(n=2))
        first = session.snapshot()["fish"]
        session.apply(wire.Reset())
        snap = session.snapshot()
        assert snap["iteration"] == 0
        session.apply(wire.Step(n=2))
        assert session.snapshot()["fish"] == first  # same seed, same trajectory

    def test_configure_replaces_session(self, canvas_doc):
        manager = SessionManager()
        session = manager.get(manager.create_session(optimizer_doc()))
        session.apply(wire.Configure(config=canvas_doc))
        snap = session.snapshot()
        assert snap["mode"] == "canvas"
        assert snap["iteration"] == 0

    def test_start_and_pause_toggle_running(self):
        manager = SessionManager()
        session = manager.get(manager.create_session(optimizer_doc()))
        session.apply(wire.Start())
        assert session.running is True
        session.apply(wire.Pause())
        assert session.running is False


class TestOptimizerLifecycle:
    def test_run_to_finish_emits_stats_and_summary(self):
        manager = SessionManager()
        session = manager.get(manager.create_session(optimizer_doc(iterations=8, jobs=4)))
        subscription = session.subscribe(coalesce=False)
        session.step(8)
        assert session.finished
        events = subscription.drain()
        kinds = [type(e).__name__ for e in events]
        assert kinds.count("JobCompleted") == 4
        assert kinds[-1] == "RunFinished"
        summary = events[-1].summary
        assert summary["jobs_completed"] == 4
        assert summary["estimated_makespan"] > 0
        final_snapshot = [e for e in events if isinstance(e, wire.SnapshotMsg)][-1]
        assert len(final_snapshot.snapshot["completed"]) == 4

    def test_step_past_finish_rejected(self):
        manager = SessionManager()
        session = manager.get(manager.create_session(optimizer_doc(iterations=2)))
        session.step(2)
        with pytest.raises(CommandError, match="finished"):
            session.apply(wire.Step(n=1))


class TestCanvasLifecycle:
    def test_dispatch_is_monotone_and_complete(self, canvas_doc):
        manager = SessionManager()
        session = manager.get(manager.create_session(canvas_doc))
        seen_states = {}
        for _ in range(80):
            if session.finished:
                break
            session.step(1)
            for entry in session.snapshot()["fish"]:
                states = seen_states.setdefault(entry["id"], [])
                if not states or states[-1] != entry["state"]:
                    states.append(entry["state"])
        assert session.finished
        for states in seen_states.values():
            assert states[0] == SWIMMING
            assert states == sorted(states, key=[SWIMMING, DISPATCHED, COMPLETED].index)
        # every task entered the grid exactly once
        assert sorted(session.grid.jobs) == sorted(session.tasks)
        assert len(session.grid.completed) == len(session.tasks)

    def test_snapshot_iterations_non_decreasing(self, canvas_doc):
        manager = SessionManager()
        session = manager.get(manager.create_session(canvas_doc))
        subscription = session.subscribe(coalesce=False)
        session.step(5)
        iterations = [e.snapshot["iteration"] for e in subscription.drain()
                      if isinstance(e, wire.SnapshotMsg)]
        assert iterations == sorted(iterations)


class TestSubscribe:
    def test_paused_session_gets_exactly_one_snapshot(self):
        manager = SessionManager()
        session = manager.get(manager.create_session(optimizer_doc()))
        subscription = session.subscribe()
        events = subscription.drain()
        assert len(events) == 1 and isinstance(events[0], wire.SnapshotMsg)
        assert subscription.drain() == []

    def test_two_subscribers_identical_order(self):
        manager = SessionManager()
        session = manager.get(manager.create_session(optimizer_doc(iterations=20)))
        a = session.subscribe(coalesce=False)
        b = session.subscribe(coalesce=False)
        session.step(4)
        assert [wire.serialize(e) for e in a.drain()] == [wire.serialize(e) for e in b.drain()]

    def test_mid_run_join_starts_with_full_snapshot(self):
        manager = SessionManager()
        session = manager.get(manager.create_session(optimizer_doc(iterations=20)))
        session.step(3)
        subscription = session.subscribe()
        first = subscription.drain()[0]
        assert isinstance(first, wire.SnapshotMsg)
        assert first.snapshot["iteration"] == 3

    def test_slow_subscriber_coalesces_adjacent_snapshots(self):
        manager = SessionManager()
        session = manager.get(manager.create_session(optimizer_doc(iterations=30)))
        slow = session.subscribe()
        session.step(5)
        events = slow.drain()
        snapshots = [e for e in events if isinstance(e, wire.SnapshotMsg)]
        assert len(snapshots) == 1  # only the latest retained
        assert snapshots[-1].snapshot["iteration"] == 5


class TestIsolationAndDeterminism:
    def test_commands_do_not_leak_across_sessions(self):
        manager = SessionManager()
        a = manager.get(manager.create_session(optimizer_doc()))
        b = manager.get(manager.create_session(optimizer_doc()))
        before = b.snapshot()
        a.apply(wire.Step(n=2))
        after = dict(b.snapshot())
        assert {k: v for k, v in after.items() if k != "session_id"} == \
               {k: v for k, v in before.items() if k != "session_id"}

    def test_same_seed_same_snapshots(self):
        snaps = []
        for _ in range(2):
            manager = SessionManager()
            session = manager.get(manager.create_session(optimizer_doc()))
            session.step(5)
            snaps.append(json.dumps(session.snapshot()))
        assert snaps[0] == snaps[1]


class TestReplay:
    def test_replay_reproduces_stream_and_stats(self, canvas_doc):
        commands = [
            {"at_iteration": 0, "command": wire.document(wire.AddFish(
                task_name="t1", field="Math", keywords=("a", "b", "c", "f", "h")))},
            {"at_iteration": 3, "command": wire.document(wire.SetParams(
                params={"dispatch_epsilon": 3.0}))},
        ]
        first = replay(canvas_doc, None, commands, iterations=25)
        second = replay(canvas_doc, None, commands, iterations=25)
        assert first.snapshot_stream == second.snapshot_stream
        assert first.jobs_csv == second.jobs_csv
        assert first.resources_csv == second.resources_csv
        assert '"task_ref":"t1"' in first.snapshot_stream

    def test_command_timing_changes_the_run(self, canvas_doc):
        early = [{"at_iteration": 0, "command": wire.document(wire.AddFish(
            task_name="t1", field="Math", keywords=("a", "b")))}]
        late = [{"at_iteration": 6, "command": wire.document(wire.AddFish(
            task_name="t1", field="Math", keywords=("a", "b")))}]
        assert replay(canvas_doc, None, early, 12).snapshot_stream != \
               replay(canvas_doc, None, late, 12).snapshot_stream
