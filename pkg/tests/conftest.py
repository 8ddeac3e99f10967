import numpy as np
import pytest

from qdoe.quantum import Bloch3Model, BlochSubModel, PhaseAmplitudeModel


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


@pytest.fixture
def bloch3():
    return Bloch3Model()


@pytest.fixture
def phase_amplitude():
    return PhaseAmplitudeModel()


@pytest.fixture
def bloch_z():
    return BlochSubModel([3])
