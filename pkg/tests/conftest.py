import numpy as np
import pytest

from tricfrac.operators import GeneralTridiagonal, build_tridiagonal


# printed (u, x, y) rows of the homogeneous iteration, steps 0-10, at alpha = sigma = 1, beta = 4, gamma = 1/2
REFERENCE_TRACE = [
    (-1.000000000, 4.000000000, 0.5000000000),
    (-1.065573770, 3.737704918, 0.5327868852),
    (-1.081224617, 3.715089035, 0.5406123086),
    (-1.083653085, 3.712567903, 0.5418265425),
    (-1.083988278, 3.712258295, 0.5419941392),
    (-1.084032778, 3.712218864, 0.5420163892),
    (-1.084038607, 3.712213775, 0.5420193033),
    (-1.084039366, 3.712213115, 0.5420196832),
    (-1.084039465, 3.712213029, 0.5420197326),
    (-1.084039478, 3.712213018, 0.5420197391),
    (-1.084039480, 3.712213017, 0.5420197399),
]


def random_tridiagonal(rng, n, bound=10.0):
    return build_tridiagonal(
        rng.uniform(-bound, bound, n - 1),
        rng.uniform(-bound, bound, n),
        rng.uniform(-bound, bound, n),
    )


def random_general(rng, n, diag=5.0, off=1.0):
    def cplx(m, s):
        return rng.uniform(-s, s, m) + 1j * rng.uniform(-s, s, m)

    return GeneralTridiagonal(cplx(n, diag), cplx(n - 1, off), cplx(n - 1, off))


def non_spectral_shift(rng, eigenvalues, box=6.0, gap=0.1):
    while True:
        z = complex(rng.uniform(-box, box), rng.uniform(-box, box))
        if np.min(np.abs(np.asarray(eigenvalues) - z)) > gap:
            return z


@pytest.fixture
def rng():
    return np.random.default_rng(20260101)


@pytest.fixture
def sample_model():
    from tricfrac.operators import homogeneous_tridiagonal

    return homogeneous_tridiagonal(40, 1.0, 4.0, 0.5)
