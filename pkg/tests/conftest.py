import itertools

import pytest

from qcgeom.circuits import CircuitFamily, RotationScheme, Topology
from qcgeom.statevector import GateKind

ENTANGLERS = (GateKind.CNOT, GateKind.CPHASE, GateKind.SQRT_ISWAP)


def family_grid(schemes=None):
    """All (scheme, entangler, topology) families, optionally restricted."""
    schemes = tuple(schemes) if schemes is not None else tuple(RotationScheme)
    return [
        CircuitFamily(s, e, t)
        for s, e, t in itertools.product(schemes, ENTANGLERS, Topology)
    ]


@pytest.fixture
def rng_seed():
    return 12345
