"""Random model factories shared by the test modules."""

import numpy as np

from qtradeoff.closed_forms import PAULI, QubitModel
from qtradeoff.qfi import UnitaryModel

# one "PASS/FAIL criterion N: ..." line per acceptance criterion, echoed in the run summary
ACCEPTANCE_LINES = []


def random_unitary(rng, d):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_hermitian(rng, d, scale=1.0):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (g + g.conj().T) / 2


def random_density(rng, d, mix=0.3):
    """Ginibre state mixed with I/d so the smallest eigenvalue is at least mix/d."""
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    return (1 - mix) * rho + mix * np.eye(d) / d


def random_pure_state(rng, d):
    psi = rng.normal(size=d) + 1j * rng.normal(size=d)
    return psi / np.linalg.norm(psi)


def random_commuting(rng, d, rotate=True):
    W = random_unitary(rng, d) if rotate else np.eye(d)
    a = rng.normal(size=d) * 2
    b = rng.normal(size=d) * 2
    return W @ np.diag(a) @ W.conj().T, W @ np.diag(b) @ W.conj().T


def random_model(rng, d, commuting=None):
    """Random full-rank model; commuting generators only for d >= 3 by default.

    Two commuting qubit generators always give a non-regular model, so d = 2
    uses non-commuting generators unless ``commuting`` is forced.
    """
    if commuting is None:
        commuting = d >= 3 and rng.random() < 0.5
    if commuting:
        X, Y = random_commuting(rng, d)
    else:
        X, Y = random_hermitian(rng, d), random_hermitian(rng, d)
    return UnitaryModel.from_arrays(random_density(rng, d), X, Y)


def random_qubit(rng, r_range=(0.05, 0.95), min_volume=0.0):
    """Random QubitModel; ``min_volume`` bounds |s.(x cross y)| / (|s||x||y|) from below."""
    while True:
        s = rng.normal(size=3)
        s *= rng.uniform(*r_range) / np.linalg.norm(s)
        x = rng.normal(size=3)
        y = rng.normal(size=3)
        vol = abs(s @ np.cross(x, y)) / (np.linalg.norm(s) * np.linalg.norm(x) * np.linalg.norm(y))
        if vol >= min_volume:
            return QubitModel(s, x, y, x0=rng.normal(), y0=rng.normal())


def bloch(v):
    return sum(c * p for c, p in zip(v, PAULI))


def relerr(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))
