"""Linear canonical transformations of circuit Hamiltonians.

A transformation is specified by an invertible real matrix W acting on
the flux operators, phi -> W phi; the charges transform contragrediently,
n -> (W^T)^-1 n, which preserves the canonical commutation relations.
Hamiltonians related by such a transformation are unitarily equivalent
and therefore share their spectrum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import CircuitHamiltonian, _symmetrized

INVERSE_RTOL = 1e-10


class SingularTransformError(ValueError):
    """Raised when a transformation matrix is singular to working precision."""


def _inverse_residual(W: np.ndarray, W_inv: np.ndarray) -> float:
    n = W.shape[0]
    return float(np.abs(W @ W_inv - np.eye(n)).max())


@dataclass(frozen=True)
class CanonicalTransform:
    """An invertible flux-space matrix with its cached inverse."""

    W: np.ndarray
    W_inv: np.ndarray

    def __post_init__(self):
        W = np.asarray(self.W, dtype=float)
        W_inv = np.asarray(self.W_inv, dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1] or W.shape != W_inv.shape:
            raise SingularTransformError("W and W_inv must be square matrices of equal shape")
        residual = _inverse_residual(W, W_inv)
        if residual > INVERSE_RTOL * W.shape[0]:
            raise SingularTransformError(
                f"inversion residual {residual:.3e} exceeds tolerance "
                f"{INVERSE_RTOL * W.shape[0]:.3e}; W is singular or W_inv is wrong"
            )
        for a in (W, W_inv):
            a.setflags(write=False)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "W_inv", W_inv)

    @classmethod
    def from_matrix(cls, W) -> "CanonicalTransform":
        """Invert W once (LAPACK partial-pivot LU) and cache the result."""
        W = np.asarray(W, dtype=float)
        try:
            W_inv = np.linalg.inv(W)
        except np.linalg.LinAlgError as exc:
            raise SingularTransformError(f"W is singular: {exc}") from exc
        return cls(W, W_inv)

    @classmethod
    def from_orthogonal(cls, Q) -> "CanonicalTransform":
        Q = np.asarray(Q, dtype=float)
        return cls(Q, Q.T.copy())

    @classmethod
    def identity(cls, n: int) -> "CanonicalTransform":
        return cls(np.eye(n), np.eye(n))

    @property
    def n(self) -> int:
        return self.W.shape[0]

    @property
    def residual(self) -> float:
        return _inverse_residual(self.W, self.W_inv)

    def compose(self, first: "CanonicalTransform") -> "CanonicalTransform":
        """Transform equivalent to applying ``first`` and then ``self``."""
        return CanonicalTransform(self.W @ first.W, first.W_inv @ self.W_inv)


def apply(H: CircuitHamiltonian, T: CanonicalTransform) -> CircuitHamiltonian:
    """Return the Hamiltonian expressed in the transformed operators.

    C_inv -> W C_inv W^T, M0 -> (W^T)^-1 M0 W^-1, N and C_V pick up
    (W^T)^-1, and the junction arguments pick up W^-1 on the right.
    Junction energies, external fluxes, voltages, and mode kinds are
    carried over positionally.
    """
    if T.n != H.n:
        raise SingularTransformError(f"transform is {T.n}x{T.n}, Hamiltonian has n={H.n}")
    W, W_inv = T.W, T.W_inv
    Wmt = W_inv.T  # (W^T)^-1
    return H.replace(
        C_inv=_symmetrized(W @ H.C_inv @ W.T, "C_inv"),
        M0=_symmetrized(Wmt @ H.M0 @ W_inv, "M0"),
        N=Wmt @ H.N,
        C_V=Wmt @ H.C_V,
        J_args=H.J_args @ W_inv,
    )


def offdiag_norm(H: CircuitHamiltonian) -> float:
    """Sum of squared off-diagonal entries of C_inv and M0.

    This is the figure of merit that the decoupling techniques reduce.
    """
    total = 0.0
    for mat in (H.C_inv, H.M0):
        total += float((mat**2).sum() - (np.diag(mat) ** 2).sum())
    return total


def spectral_equivalence_check(
    H: CircuitHamiltonian,
    H2: CircuitHamiltonian,
    k: int,
    cutoff: int,
) -> float:
    """Max absolute difference of the k lowest eigenvalues at a uniform cutoff.

    For H2 = apply(H, T) the difference converges to zero as the cutoff
    grows, since the two Hamiltonians are unitarily equivalent.  Intended
    for desk-scale systems (<= 3 modes).
    """
    if H.n > 3 or H2.n > 3:
        raise ValueError("spectral_equivalence_check is limited to systems of <= 3 modes")
    from . import spectrum

    cutoffs = [cutoff] * H.n
    e1 = spectrum.solve(H, cutoffs, k).eigenvalues
    e2 = spectrum.solve(H2, cutoffs, k).eigenvalues
    return float(np.abs(e1 - e2).max())
