import json

import numpy as np
import pytest

from qgeo.core.config import DEFAULT_TOLERANCES
from qgeo.models.geometry import GeometryContext
from qgeo.models.spin import build_ensemble, build_spin, ensemble_context, make_ensemble_spec
from qgeo.models.state import make_spectrum
from qgeo.utils.codec import encode_matrix


@pytest.fixture
def tol():
    return DEFAULT_TOLERANCES


@pytest.fixture
def spin_one():
    return build_spin(1)


@pytest.fixture
def ensemble_spec():
    """s = 1 with weights (0.7, 0.3) on m = (1, 0)."""
    return make_ensemble_spec(1, (1, 0), (0.7, 0.3))


@pytest.fixture
def ensemble(ensemble_spec, spin_one):
    return build_ensemble(ensemble_spec, spin_one)


@pytest.fixture
def ensemble_ctx(ensemble_spec):
    return ensemble_context(ensemble_spec)


@pytest.fixture
def qubit_ctx():
    return GeometryContext(make_spectrum((1.0,), (1,)))


@pytest.fixture
def write_json(tmp_path):
    def write(name, document):
        path = tmp_path / name
        path.write_text(json.dumps(document), encoding="utf-8")
        return str(path)

    return write


def matrix_doc(m) -> dict:
    return encode_matrix(np.asarray(m, dtype=np.complex128)).model_dump()
