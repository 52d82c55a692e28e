import math

import numpy as np
import pytest
from scipy.linalg import expm

from micromaser.experiments import ExperimentConfig, evolve_and_record
from micromaser.fock import DensityMatrix, ensure_headroom
from micromaser.kick import AtomPreparation, InteractionParams

ACCEPTANCE_LINES = []


def dense_displacement(beta, dim):
    a = np.diag(np.sqrt(np.arange(1, dim)), 1)
    return expm(beta * a.conj().T - np.conj(beta) * a)


def parity_wigner(rho, beta, big=90):
    """(2/pi) Tr[rho D Pi D^dag] with D built densely on a much larger space."""
    d = dense_displacement(beta, big)
    kernel = d @ np.diag((-1.0) ** np.arange(big)) @ d.conj().T
    n = rho.dim
    return (2 / math.pi) * np.trace(rho.elements @ kernel[:n, :n]).real


def random_density(rng, dim, *, pad=3, even_bands=False):
    """Random full-rank state on ``dim`` levels, zero-padded to satisfy the tail condition."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = g @ g.conj().T
    if even_bands:
        parity = np.subtract.outer(np.arange(dim), np.arange(dim)) % 2
        m = np.where(parity == 0, m, 0)
    m /= np.trace(m).real
    m = 0.5 * (m + m.conj().T)
    return DensityMatrix(np.pad(m, (0, pad)))


def random_setup(rng):
    theta = rng.uniform(0, math.pi / 2)
    atom = AtomPreparation(math.cos(theta), math.sin(theta), rng.uniform(0, 2 * math.pi))
    params = InteractionParams(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(0, 20))
    return atom, params


@pytest.fixture(scope="session")
def thermal_run():
    return evolve_and_record(ExperimentConfig(initial_state="thermal", snapshot_every=200))


@pytest.fixture(scope="session")
def coherent_run():
    return evolve_and_record(ExperimentConfig(initial_state="dephased_coherent"))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def default_sweep():
    from micromaser.experiments import DEFAULT_SWEEP, sweep_interaction_time

    return sweep_interaction_time(ExperimentConfig(), DEFAULT_SWEEP)
