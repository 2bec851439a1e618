from pathlib import Path

import numpy as np
import pytest
import yaml

from ftnoise.noise_model import CouplingSpec, NoiseModel, QubitLayout

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def config_fixtures():
    return {
        "three_qubit": FIXTURES / "three_qubit.yaml",
        "zero_coupling": FIXTURES / "zero_coupling.yaml",
        "divergent": FIXTURES / "divergent.yaml",
        "parametric": FIXTURES / "parametric.yaml",
        "single_term": FIXTURES / "single_term.yaml",
        "zero_verify": FIXTURES / "zero_verify.yaml",
        "r_cap": FIXTURES / "r_cap.yaml",
        "sweep": FIXTURES / "sweep.yaml",
        "sweep_t0": FIXTURES / "sweep_t0.yaml",
    }


@pytest.fixture
def pair_table():
    return {(0, 1): 0.01, (0, 2): 0.02, (1, 2): 0.03}


@pytest.fixture
def three_qubit_model(pair_table):
    table = dict(pair_table)
    table[(0, 1, 2)] = 0.001
    return NoiseModel(
        layout=QubitLayout(count=3),
        coupling=CouplingSpec(variant="table", table=table),
        t0=1.0,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def write_config(tmp_path):
    """Returns a function which dumps a config document to a YAML file"""

    def _write(document, name="config.yaml"):
        path = tmp_path / name
        with open(path, "w") as fh:
            yaml.safe_dump(document, fh)
        return path

    return _write
