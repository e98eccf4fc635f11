"""Shared fixtures: bundled example Hamiltonians and random-instance helpers."""

import pathlib

import numpy as np
import pytest

from scmodes import io
from scmodes.model import CircuitHamiltonian, ModeKind

DATA_DIR = pathlib.Path(__file__).resolve().parent.parent / "data"

CPB_PATH = DATA_DIR / "cooper_pair_box.json"
FLUXONIUM_PATH = DATA_DIR / "coupled_fluxonium.json"


@pytest.fixture(scope="session")
def cpb():
    return io.load_hamiltonian(str(CPB_PATH))


@pytest.fixture(scope="session")
def fluxonium():
    return io.load_hamiltonian(str(FLUXONIUM_PATH))


def random_spd(rng, n, cond=10.0):
    """Random symmetric positive definite matrix with bounded conditioning."""
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    evals = np.exp(rng.uniform(0.0, np.log(cond), size=n))
    return (Q * evals) @ Q.T


def random_orthogonal(rng, n):
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


def random_quadratic_hamiltonian(rng, n, kinds=None):
    """Random junction-free Hamiltonian with PD C_inv and PD M0."""
    kinds = kinds or [ModeKind.INDUCTOR] * n
    return CircuitHamiltonian.create(
        kinds=kinds,
        C_inv=random_spd(rng, n),
        M0=random_spd(rng, n),
    )


def random_free_mode_instance(rng, n_kept, F, rotate=True):
    """Instance with F exactly-free inductor directions among n_kept + F modes.

    Built exposed (free modes first, exact zero M0/N rows) and then
    optionally rotated within the inductor block by a random orthogonal
    mixing, which hides the free directions without breaking exactness.
    """
    n = n_kept + F
    kinds = [ModeKind.INDUCTOR] * n
    C_inv = random_spd(rng, n)
    M0 = np.zeros((n, n))
    M0[F:, F:] = random_spd(rng, n_kept)
    H = CircuitHamiltonian.create(kinds=kinds, C_inv=C_inv, M0=M0)
    if not rotate:
        return H
    Q = random_orthogonal(rng, n)
    from scmodes import canonical

    T = canonical.CanonicalTransform.from_orthogonal(Q)
    return canonical.apply(H, T)


def match_rows_up_to_sign_and_order(got, expected, atol):
    """Assert two matrices agree after permuting/sign-flipping rows of ``got``.

    Each expected row is greedily matched to the unused got row with the
    largest |dot|, then sign-aligned.  Returns the reordered got matrix.
    """
    got = np.asarray(got, dtype=float)
    expected = np.asarray(expected, dtype=float)
    assert got.shape == expected.shape
    used = set()
    reordered = np.zeros_like(expected)
    for i, row in enumerate(expected):
        overlaps = [
            (abs(row @ got[j]), j) for j in range(got.shape[0]) if j not in used
        ]
        _, best = max(overlaps)
        used.add(best)
        candidate = got[best] if row @ got[best] >= 0 else -got[best]
        reordered[i] = candidate
    np.testing.assert_allclose(reordered, expected, atol=atol)
    return reordered
