"""Shared fixtures: the benchmark design and two reusable seeded populations."""

import numpy as np
import pytest

from ulasso.sampler import SimulationConfig, XiLaw, design_from_config, gen_population

BENCH_SEED = 20240521


@pytest.fixture(scope="session")
def sim_i_p20():
    return SimulationConfig(p=20, rho=0.0, xi_law=XiLaw.NORMAL_3_1, n_pop=100_000, seed=BENCH_SEED)


@pytest.fixture(scope="session")
def spec_i_p20(sim_i_p20):
    return design_from_config(sim_i_p20)


@pytest.fixture(scope="session")
def pop_100k(sim_i_p20, spec_i_p20):
    return gen_population(spec_i_p20, sim_i_p20.n_pop, BENCH_SEED)


@pytest.fixture(scope="session")
def sim_i_p20_500k():
    return SimulationConfig(p=20, rho=0.0, xi_law=XiLaw.NORMAL_3_1, n_pop=500_000, seed=BENCH_SEED)


@pytest.fixture(scope="session")
def spec_i_p20_500k(sim_i_p20_500k):
    return design_from_config(sim_i_p20_500k)


@pytest.fixture(scope="session")
def pop_500k(sim_i_p20_500k, spec_i_p20_500k):
    return gen_population(spec_i_p20_500k, sim_i_p20_500k.n_pop, BENCH_SEED + 1)


@pytest.fixture()
def rng():
    return np.random.default_rng(909)
