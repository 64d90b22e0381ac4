import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from leadfollow import certify, preset_paper_example, simulate


@pytest.fixture(scope="session")
def paper_config():
    return preset_paper_example()


@pytest.fixture(scope="session")
def paper_noise_config():
    return preset_paper_example(noise=True)


@pytest.fixture(scope="session")
def paper_run(paper_config):
    """Noise-free benchmark run, shared across tests; returns (trajectory,
    wall seconds)."""
    cfg = paper_config
    start = time.perf_counter()
    traj = simulate(
        initial=cfg.initial_state(),
        sched=cfg.schedule,
        topo_family=list(cfg.topologies),
        g=cfg.resolve_gains(),
        leader=cfg.leader,
        noise=cfg.build_noise(),
        h=cfg.h,
        t_final=cfg.t_final,
    )
    return traj, time.perf_counter() - start


@pytest.fixture(scope="session")
def paper_certificate(paper_config):
    cfg = paper_config
    return certify(list(cfg.topologies), cfg.resolve_gains())
