"""Space-shared vs time-shared execution of the same workload.

Four jobs hit one 100 MIPS resource. Under space sharing each job owns the
PE exclusively and the rest queue FCFS; under time sharing every resident
job receives an equal slice of the total rating, so all of them stretch.
"""

from shoal import gridsim
from shoal.gridsim import Gridlet, MachineSpec, PESpec, ResourceSpec

JOBS = [("alpha", 1000.0, 0.0), ("beta", 500.0, 0.0), ("gamma", 800.0, 2.0), ("delta", 300.0, 5.0)]

for policy in ("space_shared", "time_shared"):
    resource = ResourceSpec(id="r0", name="one-box", policy=policy,
                            machines=(MachineSpec(pes=(PESpec(rating=100.0),)),))
    state = gridsim.build_grid([resource])
    for job_id, length, submit_time in JOBS:
        gridsim.submit(state, Gridlet(id=job_id, owner="demo", length=length,
                                      submit_time=submit_time), "r0")
    _, stats = gridsim.run_until_idle(state)

    print(f"\n=== {policy} ===")
    jobs_csv, resources_csv = gridsim.stats_report(stats)
    print(jobs_csv.rstrip())
    print(resources_csv.rstrip())
