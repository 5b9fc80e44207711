import numpy as np
import pytest

from provdetect.records import NetFlow, ProvenanceEvent

from factories import make_record


@pytest.fixture
def record():
    return make_record(
        events=(
            ProvenanceEvent(kind="file_write", name="write", path="/etc/passwd"),
        ),
        netflows=(NetFlow(raddr="192.168.1.5", rport=80),),
    )


@pytest.fixture
def rng_cluster_data():
    """Two well-separated Gaussian blobs, 20 points each, 5-D."""
    rs = np.random.RandomState(0)
    a = rs.normal(0.0, 0.3, size=(20, 5))
    b = rs.normal(8.0, 0.3, size=(20, 5))
    return np.vstack([a, b])
