"""Shared fixtures: the expensive flow runs are computed once per session."""

import numpy as np
import pytest

import csflow as cs
from csflow import zoo


@pytest.fixture(scope="session")
def warm_kernel():
    """Trigger the compiled stepper once so timed tests measure the flow,
    not the JIT."""
    tiny = zoo.make_primitive("circle", {"r": 1.0}, 32, dim=2)
    cs.run_flow(tiny, cs.RunPolicy(archive_every=10, check_every=10, max_steps=20))
    return True


@pytest.fixture(scope="session")
def fig8_run(warm_kernel):
    """Figure-eight lift eps=0.2, N=512, archived every 1000 steps, run to
    the diameter stop."""
    curve = zoo.figure_eight_lift(0.2, 512)
    return cs.run_flow(
        curve, cs.RunPolicy(safety=0.4, archive_every=1000, check_every=1000)
    )


@pytest.fixture(scope="session")
def cardioid_run(warm_kernel):
    """Cardioid lift eps=0.05, N=1024, short horizon around the
    vertical-tangent event."""
    curve = zoo.cardioid_lift(0.05, 1024)
    return cs.run_flow(
        curve,
        cs.RunPolicy(safety=0.4, archive_every=500, check_every=500, t_max=0.03),
    )


@pytest.fixture(scope="session")
def wave5_run(warm_kernel):
    """Wave approximation of the stock space curve: output in R^5, eps=0.1."""
    base = zoo.default_wave_base(512)
    curve = zoo.wave_approximation(base, 0.1, 512)
    return cs.run_flow(
        curve, cs.RunPolicy(safety=0.4, archive_every=500, check_every=500)
    )


def cyclic_allclose(a, b, atol):
    return np.max(np.abs(np.asarray(a) - np.asarray(b))) <= atol
