import numpy as np
import pytest

from qtrace.laurent import LaurentPoly
from qtrace.qweyl_algebra import AlgebraParams
from qtrace.positivity import build_paired_ansatz, prepare_configuration
from qtrace.trace_engine import moments

FLAGSHIP_S = 1.2 + 1.0 / 1.2


def flagship_poly() -> LaurentPoly:
    return LaurentPoly({1: 1.0, -1: 1.0, 0: -FLAGSHIP_S})


def self_conjugate_poly(b_roots) -> LaurentPoly:
    """(-1)**deg(B) * B * conj_invol(B): self-conjugate, positivity-compatible sign."""
    B = LaurentPoly.from_roots(list(b_roots))
    return (B * B.conj_invol()).scaled((-1.0) ** len(list(b_roots)))


def random_annulus_b_roots(rng: np.random.Generator, npairs: int):
    """Roots for B with moduli in [1.065, 1.22]; partners land in [0.82, 0.94]."""
    radii = rng.uniform(1.065, 1.22, size=npairs)
    angles = rng.uniform(0.0, 2.0 * np.pi, size=npairs)
    return [r * np.exp(1j * a) for r, a in zip(radii, angles)]


@pytest.fixture(scope="session")
def flagship_params() -> AlgebraParams:
    return AlgebraParams(q=0.5, P=flagship_poly(), k=1)


@pytest.fixture(scope="session")
def flagship_setup(flagship_params):
    """(gauged, poles, solution, oriented) for the flagship configuration."""
    gauged, poles, sol, oriented, _ = prepare_configuration(flagship_params)
    return gauged, poles, sol, oriented


@pytest.fixture(scope="session")
def flagship_trace(flagship_setup):
    """(normalized ansatz, normalized moment table W=32, oriented params)."""
    gauged, poles, _sol, oriented = flagship_setup
    ansatz = build_paired_ansatz(gauged, poles)
    raw = moments(ansatz, 32)
    mt = raw.normalize()
    return ansatz.scaled(1.0 / raw.get(0)), mt, oriented


@pytest.fixture(scope="session")
def flagship_report(flagship_params):
    from qtrace.positivity import classify

    return classify(flagship_params)
