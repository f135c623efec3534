import numpy as np
import pytest

from shoal.gridsim import Gridlet, MachineSpec, PESpec, ResourceSpec


class FixedRng:
    """Stands in for a Substream: returns the queued draws verbatim.

    ``low``/``high`` are ignored so tests can inject exact vision scales,
    move fractions or random-walk vectors.
    """

    def __init__(self, *draws):
        self.draws = list(draws)
        self.calls = 0

    def uniform(self, low=0.0, high=1.0, size=None):
        self.calls += 1
        value = self.draws.pop(0)
        if size is None:
            return float(value)
        return np.asarray(value, dtype=float)


@pytest.fixture
def fixed_rng():
    return FixedRng


def make_resource(resource_id="r0", ratings=(100.0,), policy="space_shared",
                  plane_position=None, name=None):
    return ResourceSpec(
        id=resource_id,
        name=name or resource_id,
        machines=(MachineSpec(pes=tuple(PESpec(rating=r) for r in ratings)),),
        policy=policy,
        plane_position=plane_position,
    )


def make_job(job_id, length, submit_time=0.0, owner="u"):
    return Gridlet(id=job_id, owner=owner, length=float(length), submit_time=float(submit_time))


@pytest.fixture
def resource_factory():
    return make_resource


@pytest.fixture
def job_factory():
    return make_job


@pytest.fixture
def math_field_tree(tmp_path):
    """Fields/Math with keywords a..j plus an Items folder holding t1."""
    fields = tmp_path / "Fields"
    math = fields / "Math"
    math.mkdir(parents=True)
    for kw in "abcdefghij":
        (math / f"{kw}.txt").write_text("")
    items = tmp_path / "Items"
    items.mkdir()
    (items / "t1.txt").write_text("Math\na\nb\nc\nf\nh\n")
    return fields, items
