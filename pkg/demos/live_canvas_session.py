"""Steer a live canvas session: add a task-carrying fish, watch it dispatch.

Each fish carries one task and swims on the keyword plane; the objective
pulls fish toward under-loaded resources, and a fish entering a resource's
epsilon ball hands its task to the grid. The whole run is reproducible
from the config, the seed and the command log.
"""

import tempfile
from pathlib import Path

from shoal import wire
from shoal.session import SessionManager, replay

root = Path(tempfile.mkdtemp())
math_field = root / "Fields" / "Math"
math_field.mkdir(parents=True)
for keyword in "abcdefghij":
    (math_field / f"{keyword}.txt").write_text("")

document = {
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
    "dispatcher": {"fields_root": str(root / "Fields")},
}

manager = SessionManager()
session = manager.get(manager.create_session(document))
feed = session.subscribe(coalesce=False)

session.apply(wire.AddFish(task_name="t1", field="Math", keywords=("a", "b", "c", "f", "h")))
t1 = [f for f in session.snapshot()["fish"] if f["task_ref"] == "t1"][0]
print(f"added fish {t1['id']} carrying t1 at plane position {t1['position']}")

while not session.finished:
    session.step(1)
    for event in feed.drain():
        if isinstance(event, wire.JobCompleted):
            job = event.job
            print(f"  iter {session.swarm.iteration:>2}: job {job['job_id']} finished on "
                  f"{job['resource']} (waited {job['waiting']:.1f}s, ran {job['exec']:.1f}s)")
        elif isinstance(event, wire.RunFinished):
            print(f"run finished: {event.summary}")

commands = list(session.command_log)
first = replay(document, None, commands, iterations=session.swarm.iteration)
second = replay(document, None, commands, iterations=session.swarm.iteration)
print(f"replay reproduces the stream byte-for-byte: {first == second}")
