import hypothesis
import numpy as np
import pytest
import scipy.sparse as sp

import heatopt as h

hypothesis.settings.register_profile(
    "default", max_examples=25, deadline=None, derandomize=True
)
hypothesis.settings.load_profile("default")


def random_spd(n, rng, scale=1.0):
    """Dense random SPD matrix with eigenvalues in [0.1, 10] * scale, as CSR."""
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    eig = rng.uniform(0.1, 10.0, size=n) * scale
    return sp.csr_array(q @ np.diag(eig) @ q.T)


def dirichlet_top(dims, extents, value=0.0):
    """Grid with a fixed-value top edge/face and insulated remaining boundary."""
    axis = len(dims) - 1
    return h.build_grid(
        dims,
        extents,
        [
            h.BoundaryPatch("top", "dirichlet", value, axis=axis, side=1),
            h.BoundaryPatch("walls", "neumann", 0.0),
        ],
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
