import numpy as np
import pytest

from kolmo import kernel as kern
from kolmo import specfile
from kolmo.coefficients import ConstantField
from kolmo.group import prototype_geometry


@pytest.fixture(scope="session")
def proto():
    return prototype_geometry()


@pytest.fixture(scope="session")
def proto_params(proto):
    return kern.principal_params(proto)


@pytest.fixture(scope="session")
def proto_coeffs():
    return {"A0": ConstantField(np.eye(1), dim=2)}


@pytest.fixture()
def proto_spec_path(tmp_path):
    return specfile.save(specfile.prototype_spec(), tmp_path / "proto.json")
