import numpy as np
import pytest

from shoal import gridsim
from shoal.gridsim import (GridConfigError, Gridlet, JobStats, MachineSpec, PESpec,
                           ResourceSpec, SubmitError, advance_to, build_grid,
                           pending_mi, run_until_idle, running_count, stats_report,
                           step_event, submit)

from conftest import make_job, make_resource


def fluid_finish_times(jobs, total_rating):
    """Independent oracle for egalitarian processor sharing.

    Exact piecewise-linear schedule: between events all residents progress
    at total_rating / k. ``jobs`` is a list of (arrival, length).
    """
    remaining = {}
    finish = {}
    arrivals = sorted(range(len(jobs)), key=lambda i: (jobs[i][0], i))
    t = 0.0
    idx = 0
    while len(finish) < len(jobs):
        if not remaining:
            t = jobs[arrivals[idx]][0]
        while idx < len(arrivals) and jobs[arrivals[idx]][0] <= t + 1e-15:
            i = arrivals[idx]
            remaining[i] = jobs[i][1]
            idx += 1
        rate = total_rating / len(remaining)
        first_done = min(remaining.values()) / rate
        next_arrival = jobs[arrivals[idx]][0] - t if idx < len(arrivals) else float("inf")
        dt = min(first_done, next_arrival)
        for i in list(remaining):
            remaining[i] -= rate * dt
            if remaining[i] <= 1e-9:
                finish[i] = t + dt
                del remaining[i]
        t += dt
    return finish


class TestBuildGrid:
    def test_single_pe_rating(self):
        spec = make_resource(ratings=(100.0,))
        assert spec.total_rating == 100.0
        state = build_grid([spec])
        assert state.clock == 0.0 and not state.pending

    def test_pe_counting(self):
        machines = tuple(MachineSpec(pes=(PESpec(50.0), PESpec(50.0))) for _ in range(2))
        specs = [ResourceSpec(id=f"r{i}", name=f"r{i}", machines=machines, policy="space_shared")
                 for i in range(2)]
        assert sum(len(s.pe_ratings) for s in specs) == 8

    def test_zero_rating_rejected(self):
        with pytest.raises(GridConfigError, match="rating must be positive"):
            PESpec(rating=0.0)

    def test_invalid_policy_rejected(self):
        with pytest.raises(GridConfigError, match="policy"):
            make_resource(policy="round_robin")

    def test_no_resources_rejected(self):
        with pytest.raises(GridConfigError, match="at least one resource"):
            build_grid([])

    def test_duplicate_resource_id_rejected(self):
        with pytest.raises(GridConfigError, match="duplicate"):
            build_grid([make_resource("r0"), make_resource("r0")])


class TestSubmit:
    def test_arrival_at_clock(self):
        state = build_grid([make_resource()])
        submit(state, make_job("a", 1000.0), "r0")
        assert state.pending[0][0] == 0.0

    def test_future_submit_time(self):
        state = build_grid([make_resource()])
        submit(state, make_job("a", 1000.0, submit_time=5.0), "r0")
        assert state.pending[0][0] == 5.0

    def test_duplicate_id_rejected_state_unchanged(self):
        state = build_grid([make_resource()])
        submit(state, make_job("a", 1000.0), "r0")
        with pytest.raises(SubmitError, match="duplicate job id 'a'"):
            submit(state, make_job("a", 500.0), "r0")
        assert len(state.pending) == 1

    def test_unknown_resource_rejected(self):
        state = build_grid([make_resource()])
        with pytest.raises(SubmitError, match="unknown resource"):
            submit(state, make_job("a", 1000.0), "r9")


class TestSpaceShared:
    def test_single_job_timing(self):
        state = build_grid([make_resource()])
        submit(state, make_job("a", 1000.0), "r0")
        _, stats = run_until_idle(state)
        row = stats[0]
        assert row.start_time == 0.0 and row.finish_time == 10.0
        assert row.waiting_time == 0.0 and row.exec_time == 10.0

    def test_fcfs_on_one_pe(self):
        state = build_grid([make_resource()])
        submit(state, make_job("a", 1000.0), "r0")
        submit(state, make_job("b", 1000.0), "r0")
        _, stats = run_until_idle(state)
        by_id = {r.job_id: r for r in stats}
        assert by_id["a"].waiting_time == 0.0 and by_id["a"].finish_time == 10.0
        assert by_id["b"].waiting_time == 10.0 and by_id["b"].finish_time == 20.0

    def test_two_pes_run_in_parallel(self):
        state = build_grid([make_resource(ratings=(100.0, 100.0))])
        submit(state, make_job("a", 1000.0), "r0")
        submit(state, make_job("b", 1000.0), "r0")
        _, stats = run_until_idle(state)
        assert all(r.waiting_time == 0.0 and r.finish_time == 10.0 for r in stats)

    def test_fastest_free_pe_claimed_first(self):
        state = build_grid([make_resource(ratings=(100.0, 50.0))])
        submit(state, make_job("a", 1000.0), "r0")
        _, stats = run_until_idle(state)
        assert stats[0].exec_time == pytest.approx(10.0)

    def test_queue_ordered_by_submit_then_id(self):
        state = build_grid([make_resource()])
        submit(state, make_job("z", 100.0, submit_time=0.0), "r0")
        submit(state, make_job("b", 100.0, submit_time=1.0), "r0")
        submit(state, make_job("a", 100.0, submit_time=1.0), "r0")
        _, stats = run_until_idle(state)
        order = [r.job_id for r in stats]
        assert order == ["z", "a", "b"]

    def test_capacity_never_exceeded(self):
        state = build_grid([make_resource(ratings=(100.0, 100.0, 100.0))])
        rng = np.random.default_rng(5)
        for i in range(30):
            submit(state, make_job(f"j{i:02d}", float(rng.uniform(50, 500)),
                                   submit_time=float(rng.uniform(0, 5))), "r0")
        while True:
            assert running_count(state, "r0") <= 3
            if not step_event(state):
                break
        assert len(state.completed) == 30

    def test_exec_time_is_length_over_rating_exactly(self):
        state = build_grid([make_resource(ratings=(80.0, 125.0))])
        rng = np.random.default_rng(9)
        jobs = [make_job(f"j{i:02d}", float(rng.uniform(100, 900))) for i in range(12)]
        for job in jobs:
            submit(state, job, "r0")
        _, stats = run_until_idle(state)
        lengths = {job.id: job.length for job in jobs}
        for row in stats:
            assert (row.exec_time == pytest.approx(lengths[row.job_id] / 80.0, rel=1e-12)
                    or row.exec_time == pytest.approx(lengths[row.job_id] / 125.0, rel=1e-12))


class TestTimeShared:
    def test_equal_split_two_jobs(self):
        state = build_grid([make_resource(policy="time_shared")])
        submit(state, make_job("a", 1000.0), "r0")
        submit(state, make_job("b", 1000.0), "r0")
        _, stats = run_until_idle(state)
        assert all(r.finish_time == pytest.approx(20.0, rel=1e-9) for r in stats)
        assert all(r.waiting_time == 0.0 for r in stats)

    def test_staggered_arrival_fluid_schedule(self):
        state = build_grid([make_resource(policy="time_shared")])
        submit(state, make_job("a", 1000.0), "r0")
        submit(state, make_job("b", 500.0, submit_time=5.0), "r0")
        _, stats = run_until_idle(state)
        by_id = {r.job_id: r for r in stats}
        assert by_id["a"].finish_time == pytest.approx(15.0, rel=1e-9)
        assert by_id["b"].finish_time == pytest.approx(15.0, rel=1e-9)
        assert by_id["b"].start_time == 5.0

    def test_single_resident_gets_full_rating(self):
        state = build_grid([make_resource(policy="time_shared", ratings=(60.0, 40.0))])
        submit(state, make_job("a", 1000.0), "r0")
        _, stats = run_until_idle(state)
        assert stats[0].finish_time == pytest.approx(10.0, rel=1e-9)

    def test_matches_fluid_oracle_on_random_instances(self):
        rng = np.random.default_rng(17)
        for trial in range(10):
            n = int(rng.integers(2, 7))
            arrivals = np.sort(rng.uniform(0, 20, n))
            lengths = rng.uniform(100, 1500, n)
            rating = float(rng.uniform(40, 150))
            state = build_grid([ResourceSpec(id="r0", name="r0",
                                             machines=(MachineSpec(pes=(PESpec(rating),)),),
                                             policy="time_shared")])
            for i in range(n):
                submit(state, make_job(f"j{i}", float(lengths[i]), submit_time=float(arrivals[i])), "r0")
            _, stats = run_until_idle(state)
            oracle = fluid_finish_times([(float(arrivals[i]), float(lengths[i])) for i in range(n)],
                                        rating)
            for i, row in enumerate(sorted(stats, key=lambda r: r.job_id)):
                assert row.finish_time == pytest.approx(oracle[i], rel=1e-9)

    def test_work_conservation(self):
        # busy wall-clock time * total rating == total MI served
        rng = np.random.default_rng(23)
        state = build_grid([make_resource(policy="time_shared", ratings=(70.0,))])
        lengths = rng.uniform(100, 800, 6)
        for i, length in enumerate(lengths):
            submit(state, make_job(f"j{i}", float(length)), "r0")
        _, stats = run_until_idle(state)
        busy = max(r.finish_time for r in stats) - min(r.start_time for r in stats)
        assert busy * 70.0 == pytest.approx(float(lengths.sum()), rel=1e-9)


class TestEngine:
    def test_idle_step_signals_false(self):
        state = build_grid([make_resource()])
        assert step_event(state) is False

    def test_no_jobs_empty_stats(self):
        state = build_grid([make_resource()])
        _, stats = run_until_idle(state)
        assert stats == [] and state.clock == 0.0

    def test_clock_monotone_over_random_workload(self):
        state = build_grid([make_resource(ratings=(100.0, 60.0)),
                            make_resource("r1", policy="time_shared")])
        rng = np.random.default_rng(3)
        for i in range(40):
            submit(state, make_job(f"j{i:02d}", float(rng.uniform(10, 400)),
                                   submit_time=float(rng.uniform(0, 10))),
                   "r0" if rng.random() < 0.5 else "r1")
        last = 0.0
        while step_event(state):
            assert state.clock >= last
            last = state.clock
        assert len(state.completed) == 40

    def test_every_submitted_job_completes_once(self):
        state = build_grid([make_resource(), make_resource("r1", policy="time_shared")])
        for i in range(25):
            submit(state, make_job(f"j{i:02d}", 100.0 + i), "r0" if i % 2 else "r1")
        _, stats = run_until_idle(state)
        assert sorted(r.job_id for r in stats) == [f"j{i:02d}" for i in range(25)]

    def test_stats_identities(self):
        state = build_grid([make_resource(ratings=(100.0,)),
                            make_resource("r1", policy="time_shared")])
        rng = np.random.default_rng(11)
        for i in range(20):
            submit(state, make_job(f"j{i:02d}", float(rng.uniform(100, 900)),
                                   submit_time=float(rng.uniform(0, 4))),
                   "r0" if i % 3 else "r1")
        _, stats = run_until_idle(state)
        for row in stats:
            assert row.waiting_time == pytest.approx(row.start_time - row.submit_time, abs=1e-12)
            assert row.exec_time == pytest.approx(row.finish_time - row.start_time, abs=1e-12)
            assert row.start_time >= row.submit_time
            assert row.finish_time >= row.start_time

    def test_policy_equivalence_for_single_job(self):
        finishes = []
        for policy in ("space_shared", "time_shared"):
            state = build_grid([make_resource(policy=policy, ratings=(120.0,))])
            submit(state, make_job("a", 600.0), "r0")
            _, stats = run_until_idle(state)
            finishes.append(stats[0].finish_time)
        assert finishes[0] == pytest.approx(finishes[1], rel=1e-12)

    def test_advance_to_and_pending_mi(self):
        state = build_grid([make_resource(ratings=(100.0,))])
        submit(state, make_job("a", 1000.0), "r0")
        submit(state, make_job("b", 500.0), "r0")
        done = advance_to(state, 4.0)
        assert done == [] and state.clock == 4.0
        assert pending_mi(state, "r0") == pytest.approx(1100.0)  # 600 running + 500 queued
        done = advance_to(state, 10.0)
        assert [r.job_id for r in done] == ["a"]
        assert running_count(state, "r0") == 1

    def test_pending_mi_time_shared(self):
        state = build_grid([make_resource(policy="time_shared")])
        submit(state, make_job("a", 1000.0), "r0")
        submit(state, make_job("b", 1000.0), "r0")
        advance_to(state, 5.0)
        assert pending_mi(state, "r0") == pytest.approx(1500.0)  # 100 MIPS * 5 s served


class TestStatsReport:
    def test_empty_report_headers_only(self):
        jobs_csv, resources_csv = stats_report([])
        assert jobs_csv == "job_id,resource,submit,start,finish,waiting,exec\n"
        assert resources_csv == "resource,jobs,busy_time,makespan\n"

    def test_single_job_aggregate(self):
        row = JobStats.build("a", "r0", 0.0, 0.0, 10.0)
        jobs_csv, resources_csv = stats_report([row])
        assert jobs_csv.splitlines()[1] == "a,r0,0.000000,0.000000,10.000000,0.000000,10.000000"
        assert resources_csv.splitlines()[1] == "r0,1,10.000000,10.000000"

    def test_two_resources_two_aggregates(self):
        rows = [JobStats.build("a", "r0", 0.0, 0.0, 10.0),
                JobStats.build("b", "r1", 0.0, 0.0, 5.0)]
        _, resources_csv = stats_report(rows)
        assert len(resources_csv.splitlines()) == 3

    def test_rows_sorted_by_job_id(self):
        rows = [JobStats.build("b", "r0", 0.0, 10.0, 20.0),
                JobStats.build("a", "r0", 0.0, 0.0, 10.0)]
        jobs_csv, _ = stats_report(rows)
        ids = [line.split(",")[0] for line in jobs_csv.splitlines()[1:]]
        assert ids == ["a", "b"]

    def test_busy_time_excludes_idle_gap(self):
        rows = [JobStats.build("a", "r0", 0.0, 0.0, 10.0),
                JobStats.build("b", "r0", 0.0, 15.0, 20.0)]
        _, resources_csv = stats_report(rows)
        parts = resources_csv.splitlines()[1].split(",")
        assert parts[2] == "15.000000"  # 10 + 5, gap not counted
        assert parts[3] == "20.000000"

    def test_report_deterministic(self):
        def build():
            state = build_grid([make_resource(), make_resource("r1", policy="time_shared")])
            for i in range(10):
                submit(state, make_job(f"j{i}", 100.0 * (i + 1)), "r0" if i % 2 else "r1")
            _, stats = run_until_idle(state)
            return stats_report(stats)
        assert build() == build()
