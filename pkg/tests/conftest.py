"""Shared fixtures: synthetic corpus, fitted model, bundled network/case."""

import numpy as np
import pytest

from stochdispatch.copula_model import fit_copula, line_flow_variable, sum_variable
from stochdispatch.demo import make_demo_dataset
from stochdispatch.resources import load_case, load_network

CORRIDOR_LINE = 3


@pytest.fixture(scope="session")
def demo_data():
    return make_demo_dataset(n_samples=20000, seed=11)


@pytest.fixture(scope="session")
def sixbus():
    net = load_network("network_6bus.json")
    net.compute_ptdf()
    return net


@pytest.fixture(scope="session")
def sixbus_case():
    return load_case("case_6bus.json")


@pytest.fixture(scope="session")
def demo_model(demo_data, sixbus):
    corridor = sixbus.lines[CORRIDOR_LINE]
    k = sixbus.plant_shift_factors(corridor, demo_data.plants)
    return fit_copula(
        demo_data,
        derived=(
            sum_variable(demo_data.plants),
            line_flow_variable(corridor.index, k, demo_data.plants),
        ),
    )


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
