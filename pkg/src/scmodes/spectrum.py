"""Low-energy spectra in truncated per-mode eigenbases.

Each mode gets a primitive basis (harmonic oscillator or charge states),
its local Hamiltonian is densely diagonalized there, and the lowest
``keep`` eigenstates are retained.  The coupled Hamiltonian is assembled
in the product of the retained bases as a sum of tensor products of
local operators, applied matrix-free; small systems are materialized and
solved densely, larger ones go through ARPACK.

Couplings come in two kinds: quadratic charge/flux pairs from the
off-diagonal entries of C_inv and M0, and residual cosine couplings
cos(sum_j a_j phi_j) - sum_j cos(a_j phi_j) produced when a junction
argument spreads over several modes.  The multi-mode cosine is
represented through per-mode phase factors exp(i a phi), keeping every
term a tensor product of local operators.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .model import CircuitHamiltonian, require_valid

# Cosine-argument coefficients below this are dropped consistently from
# local and coupling parts.
COEFF_DROP_TOL = 1e-10

# Quadratic couplings below this (relative to the largest entry of the
# respective matrix) are dropped from the assembled operator.
COUPLING_DROP_RTOL = 1e-12

DENSE_LIMIT = 4096

_HO_DEFAULT_DIM = 200
_CHARGE_DEFAULT_MAX = 40

# Fixed ARPACK starting vector seed; commands must be reproducible.
_ARPACK_SEED = 7


class BasisMismatchError(ValueError):
    """A mode's primitive basis cannot represent a requested term."""


class EigensolverConvergenceError(RuntimeError):
    """Iterative eigensolve failed to converge; carries the best residuals."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class CutoffLimitError(RuntimeError):
    """Adaptive cutoff search hit d_max on some mode."""


@dataclass(frozen=True)
class HarmonicBasis:
    dim: int
    frequency: float
    impedance: float


@dataclass(frozen=True)
class ChargeBasis:
    max_charge: int

    @property
    def dim(self) -> int:
        return 2 * self.max_charge + 1


@dataclass(frozen=True)
class CosineCoupling:
    """Residual coupling -sign*energy*[cos(sum a_j phi_j) - sum cos(a_j phi_j)]."""

    modes: tuple[int, ...]
    coeffs: tuple[float, ...]
    energy: float
    sign: float


def split_cosine_row(
    row: np.ndarray, energy: float, sign: float
) -> tuple[list[tuple[int, float]], CosineCoupling | None]:
    """Local cosine terms and the residual coupling for one junction row."""
    idx = np.nonzero(np.abs(row) > COEFF_DROP_TOL)[0]
    local_terms = [(int(i), float(row[i])) for i in idx]
    if len(local_terms) < 2:
        return local_terms, None
    coupling = CosineCoupling(
        modes=tuple(i for i, _ in local_terms),
        coeffs=tuple(a for _, a in local_terms),
        energy=energy,
        sign=sign,
    )
    return local_terms, coupling


@dataclass(frozen=True)
class LocalMode:
    """One mode's truncated eigenbasis and its operators therein.

    ``phase_factors[a]`` holds exp(i*a*phi) projected onto the retained
    eigenstates; exp(-i*a*phi) is its conjugate transpose.  ``phi_op`` is
    None for charge-basis modes, whose compact phase has no flux operator.
    ``real_basis`` records whether the retained eigenvectors are real,
    which the assembler exploits to keep the product operator real.
    """

    mode_index: int
    basis: HarmonicBasis | ChargeBasis
    energies: np.ndarray
    phi_op: np.ndarray | None
    n_op: np.ndarray
    phase_factors: dict[float, np.ndarray] = field(default_factory=dict)
    real_basis: bool = True

    @property
    def dim(self) -> int:
        return self.energies.shape[0]

    def phase_factor(self, a: float) -> np.ndarray:
        if a in self.phase_factors:
            return self.phase_factors[a]
        if -a in self.phase_factors:
            return self.phase_factors[-a].conj().T
        for key, mat in self.phase_factors.items():
            if np.isclose(key, a, rtol=1e-12, atol=1e-15):
                return mat
            if np.isclose(-key, a, rtol=1e-12, atol=1e-15):
                return mat.conj().T
        raise BasisMismatchError(
            f"mode {self.mode_index} has no phase factor for coefficient {a!r}"
        )

    def truncated(self, d: int) -> "LocalMode":
        """The same mode restricted to its lowest d retained states."""
        if d > self.dim:
            raise ValueError(f"cannot truncate to {d} states, only {self.dim} retained")
        return LocalMode(
            mode_index=self.mode_index,
            basis=self.basis,
            energies=self.energies[:d],
            phi_op=None if self.phi_op is None else self.phi_op[:d, :d],
            n_op=self.n_op[:d, :d],
            phase_factors={a: m[:d, :d] for a, m in self.phase_factors.items()},
            real_basis=self.real_basis,
        )


def default_basis(H: CircuitHamiltonian, mode: int, primitive_dim: int | None = None):
    """Harmonic basis for modes with a diagonal flux term, charge basis otherwise."""
    m_ii = H.M0[mode, mode]
    if m_ii > 1e-10 * max(1.0, np.abs(H.M0).max()):
        c_ii = H.C_inv[mode, mode]
        return HarmonicBasis(
            dim=primitive_dim or _HO_DEFAULT_DIM,
            frequency=float(np.sqrt(c_ii * m_ii)),
            impedance=float(np.sqrt(c_ii / m_ii)),
        )
    if primitive_dim is not None:
        return ChargeBasis(max_charge=max(1, (primitive_dim - 1) // 2))
    return ChargeBasis(max_charge=_CHARGE_DEFAULT_MAX)


def _mode_cosine_terms(H: CircuitHamiltonian, mode: int):
    terms = []
    for r in range(H.n_J):
        a = H.J_args[r, mode]
        if abs(a) > COEFF_DROP_TOL:
            terms.append((float(H.E_J[r]), float(H.E_sign[r]), float(a)))
    return terms


def build_local_mode(
    H: CircuitHamiltonian,
    mode: int,
    primitive_dim: int | None = None,
    keep: int = 10,
    basis: HarmonicBasis | ChargeBasis | None = None,
) -> LocalMode:
    """Diagonalize one mode's local Hamiltonian and retain its lowest states.

    The local Hamiltonian is
    1/2 C_inv_ii n^2 + 1/2 M0_ii phi^2 + (N Phi_x)_i phi
    - sum_r sign_r E_J_r cos(a_r phi) - (C_inv C_V V)_i n
    with the cosine sum running over junction rows with a nonzero
    coefficient on this mode.  Phase factors exp(i*a*phi) are prepared
    for every such coefficient.
    """
    if basis is None:
        basis = default_basis(H, mode, primitive_dim)
    elif primitive_dim is not None and isinstance(basis, HarmonicBasis):
        basis = HarmonicBasis(primitive_dim, basis.frequency, basis.impedance)

    c_ii = float(H.C_inv[mode, mode])
    m_ii = float(H.M0[mode, mode])
    flux_lin = float((H.N @ H.Phi_x)[mode]) if H.Phi_x.size else 0.0
    drive = float((H.C_inv @ (H.C_V @ H.V))[mode]) if H.V.size else 0.0
    cos_terms = _mode_cosine_terms(H, mode)

    if isinstance(basis, HarmonicBasis):
        if m_ii <= 0:
            raise BasisMismatchError(
                f"mode {mode} has no diagonal flux term (M0_ii = {m_ii!r}); "
                "a harmonic-oscillator basis is undefined"
            )
        dim = basis.dim
        if keep > dim:
            raise ValueError(f"keep = {keep} exceeds primitive dimension {dim}")
        freq = np.sqrt(c_ii * m_ii)
        z = np.sqrt(c_ii / m_ii)
        basis = HarmonicBasis(dim, float(freq), float(z))
        ladder = np.diag(np.sqrt(np.arange(1, dim)), 1)  # annihilation
        phi = np.sqrt(z / 2.0) * (ladder + ladder.T)
        n_imag = np.sqrt(1.0 / (2.0 * z)) * (ladder.T - ladder)  # n = i * n_imag
        H_prim = np.diag(freq * (np.arange(dim) + 0.5)) + flux_lin * phi
        xs, U = np.linalg.eigh(phi)
        for energy, sign, a in cos_terms:
            H_prim -= sign * energy * ((U * np.cos(a * xs)) @ U.T)
        real = drive == 0.0
        if not real:
            H_prim = H_prim.astype(complex) - drive * 1j * n_imag
        evals, evecs = np.linalg.eigh(H_prim)
        P = evecs[:, :keep]
        phase = {}
        for a in sorted({a for _, _, a in cos_terms}):
            phase[a] = P.conj().T @ ((U * np.exp(1j * a * xs)) @ U.T) @ P
        return LocalMode(
            mode_index=mode,
            basis=basis,
            energies=evals[:keep],
            phi_op=P.conj().T @ phi @ P,
            n_op=P.conj().T @ (1j * n_imag) @ P,
            phase_factors=phase,
            real_basis=real,
        )

    # charge basis
    if m_ii > 1e-10 * max(1.0, np.abs(H.M0).max()):
        raise BasisMismatchError(
            f"mode {mode} carries a quadratic flux term (M0_ii = {m_ii!r}) that the "
            "charge basis cannot represent; use a harmonic basis"
        )
    if flux_lin != 0.0:
        raise BasisMismatchError(
            f"mode {mode} carries a linear flux term that the charge basis cannot represent"
        )
    dim = basis.dim
    if keep > dim:
        raise ValueError(f"keep = {keep} exceeds primitive dimension {dim}")
    charges = np.arange(-basis.max_charge, basis.max_charge + 1, dtype=float)
    H_prim = np.diag(0.5 * c_ii * charges**2 - drive * charges)
    shifts = {}
    for energy, sign, a in cos_terms:
        ia = round(a)
        if abs(a - ia) > 1e-9 or ia == 0:
            raise BasisMismatchError(
                f"mode {mode}: cosine coefficient {a!r} is not a nonzero integer; "
                "the charge basis supports integer phase shifts only"
            )
        shifts[a] = np.eye(dim, k=-ia)  # exp(i*a*phi): |m> -> |m + a>
        H_prim -= sign * energy * 0.5 * (shifts[a] + shifts[a].T)
    evals, evecs = np.linalg.eigh(H_prim)
    P = evecs[:, :keep]
    return LocalMode(
        mode_index=mode,
        basis=basis,
        energies=evals[:keep],
        phi_op=None,
        n_op=P.T @ np.diag(charges) @ P,
        phase_factors={a: P.T @ mat @ P for a, mat in shifts.items()},
        real_basis=True,
    )


@dataclass(frozen=True)
class CouplingSet:
    """Cross-mode terms: quadratic charge/flux pairs plus cosine residuals."""

    charge: tuple[tuple[int, int, float], ...]
    flux: tuple[tuple[int, int, float], ...]
    cosines: tuple[CosineCoupling, ...]

    @classmethod
    def from_hamiltonian(cls, H: CircuitHamiltonian) -> "CouplingSet":
        def pairs(mat):
            floor = COUPLING_DROP_RTOL * max(1.0, np.abs(mat).max())
            out = []
            for i in range(H.n):
                for j in range(i + 1, H.n):
                    if abs(mat[i, j]) > floor:
                        out.append((i, j, float(mat[i, j])))
            return tuple(out)

        cosines = []
        for r in range(H.n_J):
            _, coupling = split_cosine_row(H.J_args[r], float(H.E_J[r]), float(H.E_sign[r]))
            if coupling is not None:
                cosines.append(coupling)
        return cls(charge=pairs(H.C_inv), flux=pairs(H.M0), cosines=tuple(cosines))


def _apply_local(mat: np.ndarray, psi: np.ndarray, axis: int) -> np.ndarray:
    out = np.tensordot(mat, psi, axes=([1], [axis]))
    return np.moveaxis(out, 0, axis)


@dataclass(frozen=True)
class _Term:
    """One tensor-product term: coeff * prod_j mat_j acting on axis_j.

    With ``real_part`` set the term represents coeff * Re(prod_j mat_j),
    valid when every factor is complex symmetric so that the real part
    equals the Hermitian average (prod + h.c.)/2.  Applying the complex
    product once and discarding the imaginary part is much cheaper than
    expanding the product into real factors.
    """

    coeff: complex
    factors: tuple[tuple[int, np.ndarray], ...]
    real_part: bool = False

    @property
    def is_real(self) -> bool:
        if self.real_part:
            return True
        return self.coeff.imag == 0.0 and all(np.isrealobj(m) for _, m in self.factors)


class ProductOperator:
    """Hermitian operator on a tensor-product space, applied matrix-free.

    Holds a diagonal (the summed local energies) plus a list of terms,
    each a scalar coefficient times a tensor product of per-mode
    matrices.  Real throughout whenever every ingredient is real.
    """

    def __init__(self, dims, diag, terms, dtype):
        self.dims = tuple(int(d) for d in dims)
        self.dim = int(np.prod(self.dims))
        self.dtype = dtype
        self._diag = diag  # ndarray shaped ``dims``
        self._terms = terms  # list[_Term]

    def _product(self, term: _Term, psi: np.ndarray) -> np.ndarray:
        w = psi
        for axis, mat in term.factors:
            w = _apply_local(mat, w, axis)
        return w

    def _apply_term(self, term: _Term, psi: np.ndarray) -> np.ndarray:
        if not term.real_part:
            coeff = term.coeff.real if term.coeff.imag == 0.0 else term.coeff
            return coeff * self._product(term, psi)
        if np.isrealobj(psi):
            return term.coeff.real * self._product(term, psi).real
        # Re(prod) is a real matrix; apply it to real and imaginary parts.
        return term.coeff.real * (
            self._product(term, psi.real).real
            + 1j * self._product(term, psi.imag).real
        )

    def _apply(self, psi: np.ndarray, batched: bool = False) -> np.ndarray:
        diag = self._diag[..., np.newaxis] if batched else self._diag
        out_dtype = np.promote_types(self.dtype, psi.dtype)
        out = (diag * psi).astype(out_dtype, copy=False)
        for term in self._terms:
            out += self._apply_term(term, psi)
        return out

    def matvec(self, v: np.ndarray) -> np.ndarray:
        psi = np.asarray(v).reshape(self.dims)
        return self._apply(psi).reshape(-1)

    def matmat(self, V: np.ndarray) -> np.ndarray:
        V = np.asarray(V)
        batch = V.shape[1]
        psi = V.reshape(self.dims + (batch,))
        return self._apply(psi, batched=True).reshape(self.dim, batch)

    def to_dense(self) -> np.ndarray:
        return self.matmat(np.eye(self.dim, dtype=self.dtype))

    def aslinearoperator(self) -> scipy.sparse.linalg.LinearOperator:
        return scipy.sparse.linalg.LinearOperator(
            shape=(self.dim, self.dim),
            matvec=self.matvec,
            matmat=self.matmat,
            dtype=self.dtype,
        )

    def hermiticity_residual(self, rng=None, trials: int = 4) -> float:
        """max |<u, H v> - <H u, v>| over random unit vector pairs."""
        rng = rng or np.random.default_rng(0)
        worst = 0.0
        for _ in range(trials):
            u = rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)
            v = rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)
            u /= np.linalg.norm(u)
            v /= np.linalg.norm(v)
            worst = max(worst, abs(np.vdot(u, self.matvec(v)) - np.vdot(self.matvec(u), v)))
        return worst


def assemble_hamiltonian(
    locals_: list[LocalMode],
    H: CircuitHamiltonian,
    couplings: CouplingSet,
) -> ProductOperator:
    """Assemble the coupled Hamiltonian in the retained product basis."""
    n = H.n
    if len(locals_) != n or any(loc.mode_index != m for m, loc in enumerate(locals_)):
        raise ValueError("one LocalMode per mode, ordered by mode index, is required")
    dims = tuple(loc.dim for loc in locals_)

    diag = np.zeros(dims)
    for axis, loc in enumerate(locals_):
        shape = [1] * n
        shape[axis] = loc.dim
        diag = diag + loc.energies.reshape(shape)

    terms: list[_Term] = []

    def imagish(mat):
        return np.abs(mat.real).max() <= 1e-14 * max(1.0, np.abs(mat).max())

    def realish(mat):
        return np.isrealobj(mat) or np.abs(mat.imag).max() <= 1e-14 * max(1.0, np.abs(mat).max())

    def symmetric(mat):
        return np.abs(mat - mat.T).max() <= 1e-12 * max(1.0, np.abs(mat).max())

    for i, j, v in couplings.charge:
        coeff = complex(v)
        factors = []
        for mode in (i, j):
            op = locals_[mode].n_op
            if imagish(op):
                # n = i * A with A real: fold the phase into the coefficient.
                coeff *= 1j
                factors.append((mode, np.ascontiguousarray(op.imag)))
            elif realish(op):
                factors.append((mode, np.ascontiguousarray(op.real)))
            else:
                factors.append((mode, op))
        terms.append(_Term(coeff, tuple(factors)))

    for i, j, v in couplings.flux:
        factors = []
        for mode in (i, j):
            op = locals_[mode].phi_op
            if op is None:
                raise BasisMismatchError(
                    f"flux coupling ({i}, {j}) touches charge-basis mode {mode}, "
                    "which has no flux operator"
                )
            factors.append((mode, np.ascontiguousarray(op.real) if realish(op) else op))
        terms.append(_Term(complex(v), tuple(factors)))

    for cc in couplings.cosines:
        pre = -cc.sign * cc.energy
        raw = [(m, locals_[m].phase_factor(a)) for m, a in zip(cc.modes, cc.coeffs)]
        if all(symmetric(e) for _, e in raw):
            # (prod + h.c.)/2 = Re(prod) for symmetric factors: the coupled
            # cosine costs one complex product application per junction row.
            terms.append(_Term(complex(pre), tuple(raw), real_part=True))
            for m, e in raw:
                terms.append(_Term(complex(-pre), ((m, np.ascontiguousarray(e.real)),)))
        else:
            terms.append(_Term(complex(pre / 2), tuple(raw)))
            terms.append(_Term(complex(pre / 2), tuple((m, e.conj().T) for m, e in raw)))
            for m, e in raw:
                terms.append(_Term(complex(-pre / 2), ((m, e),)))
                terms.append(_Term(complex(-pre / 2), ((m, e.conj().T),)))

    dtype = np.float64 if all(t.is_real for t in terms) else np.complex128
    return ProductOperator(dims, diag, terms, dtype)


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: np.ndarray   # (k,) ascending, GHz*h
    eigenvectors: np.ndarray  # (dim, k) columns in the product basis
    cutoffs: tuple[int, ...]
    residuals: np.ndarray     # (k,) ||H v - E v||


def eigensolve(
    op: ProductOperator, k: int, tol: float = 1e-9, ncv: int | None = None
) -> SpectrumResult:
    """k lowest eigenpairs: dense below DENSE_LIMIT, otherwise ARPACK."""
    if op.dim < k:
        raise ValueError(f"operator dimension {op.dim} is smaller than k = {k}")
    if op.dim <= DENSE_LIMIT or k >= op.dim - 1:
        dense = op.to_dense()
        dense = (dense + dense.conj().T) / 2.0
        evals, evecs = scipy.linalg.eigh(dense)
        evals, evecs = evals[:k], evecs[:, :k]
    else:
        ncv = ncv or min(op.dim, max(2 * k + 1, 40))
        maxiter = max(100, (10 * op.dim) // max(ncv - k, 1))
        rng = np.random.default_rng(_ARPACK_SEED)
        v0 = rng.standard_normal(op.dim)
        try:
            evals, evecs = scipy.sparse.linalg.eigsh(
                op.aslinearoperator(), k=k, which="SA", tol=tol, ncv=ncv,
                maxiter=maxiter, v0=v0,
            )
        except scipy.sparse.linalg.ArpackNoConvergence as exc:
            got = exc.eigenvalues
            res = None
            if exc.eigenvectors is not None and exc.eigenvectors.size:
                res = np.array(
                    [
                        np.linalg.norm(op.matvec(v) - e * v)
                        for e, v in zip(got, exc.eigenvectors.T)
                    ]
                )
            raise EigensolverConvergenceError(
                f"ARPACK did not converge within {maxiter} iterations "
                f"({len(got)} of {k} eigenpairs found)",
                residuals=res,
            ) from exc
        order = np.argsort(evals)
        evals, evecs = evals[order], evecs[:, order]
    norms = np.linalg.norm(evecs, axis=0)
    evecs = evecs / norms
    residuals = np.array(
        [np.linalg.norm(op.matvec(evecs[:, i]) - evals[i] * evecs[:, i]) for i in range(k)]
    )
    return SpectrumResult(
        eigenvalues=np.asarray(evals, dtype=float),
        eigenvectors=evecs,
        cutoffs=op.dims,
        residuals=residuals,
    )


def _primitive_for_keep(H, mode, keep):
    basis = default_basis(H, mode)
    if isinstance(basis, HarmonicBasis):
        return max(_HO_DEFAULT_DIM, 4 * keep)
    return 2 * max(_CHARGE_DEFAULT_MAX, 2 * keep) + 1


def make_locals_builder(H: CircuitHamiltonian):
    """Builder (mode, keep) -> LocalMode that caches and truncates.

    The primitive diagonalization is mode-local and independent of keep,
    so a larger previously built mode is sliced instead of rebuilt.
    """
    cache: dict[int, LocalMode] = {}

    def build(mode: int, keep: int) -> LocalMode:
        cached = cache.get(mode)
        if cached is None or cached.dim < keep:
            cached = build_local_mode(
                H, mode, primitive_dim=_primitive_for_keep(H, mode, keep), keep=keep
            )
            cache[mode] = cached
        return cached.truncated(keep)

    return build


def solve(
    H: CircuitHamiltonian,
    cutoffs,
    k: int = 10,
    tol: float = 1e-9,
    ncv: int | None = None,
    locals_builder=None,
) -> SpectrumResult:
    """Build local modes at the given cutoffs, assemble, and eigensolve."""
    require_valid(H)
    cutoffs = [int(d) for d in cutoffs]
    if len(cutoffs) != H.n:
        raise ValueError(f"{len(cutoffs)} cutoffs given for {H.n} modes")
    builder = locals_builder or make_locals_builder(H)
    locals_ = [builder(m, cutoffs[m]) for m in range(H.n)]
    op = assemble_hamiltonian(locals_, H, CouplingSet.from_hamiltonian(H))
    return eigensolve(op, k=k, tol=tol, ncv=ncv)


@dataclass(frozen=True)
class ReducedDensityMatrix:
    mode_index: int
    rho: np.ndarray

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.rho))


def reduced_density_matrix(
    result: SpectrumResult, state: int, mode: int
) -> ReducedDensityMatrix:
    """Trace the chosen eigenstate's projector over all modes but one."""
    k = result.eigenvalues.shape[0]
    if not 0 <= state < k:
        raise IndexError(f"state {state} out of range (k = {k})")
    if not 0 <= mode < len(result.cutoffs):
        raise IndexError(f"mode {mode} out of range")
    psi = result.eigenvectors[:, state].reshape(result.cutoffs)
    others = [ax for ax in range(len(result.cutoffs)) if ax != mode]
    rho = np.tensordot(psi.conj(), psi, axes=(others, others))
    rho = (rho + rho.conj().T) / 2.0
    return ReducedDensityMatrix(mode_index=mode, rho=rho)


def adaptive_cutoffs(
    H: CircuitHamiltonian,
    locals_builder=None,
    epsilon: float = 1e-17,
    d_init: int = 8,
    d_max: int = 64,
    max_rounds: int = 10,
    tol: float = 1e-9,
) -> tuple[int, ...]:
    """Per-mode cutoffs d_k with ground-state populations below epsilon past d_k.

    Working dimensions start at d_init; a mode whose population has not
    decayed below epsilon by its last retained state is doubled (capped at
    d_max, beyond which the offending mode raises), otherwise the minimal
    d with all populations at indices >= d below epsilon becomes its
    target.  Working dimensions then sit one state above the targets so
    the criterion stays observable, and the rounds stop at a fixed point
    or after ``max_rounds``.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    require_valid(H)
    n = H.n
    builder = locals_builder or make_locals_builder(H)
    couplings = CouplingSet.from_hamiltonian(H)
    work = [min(d_init, d_max)] * n
    prev_targets = None
    targets = list(work)
    for _ in range(max_rounds):
        locals_ = [builder(m, work[m]) for m in range(n)]
        op = assemble_hamiltonian(locals_, H, couplings)
        ground = eigensolve(op, k=1, tol=tol)
        targets = []
        grew = False
        for m in range(n):
            pops = reduced_density_matrix(ground, 0, m).populations
            above = np.nonzero(pops >= epsilon)[0]
            t = int(above[-1]) + 1 if above.size else 1
            targets.append(t)
            if t >= work[m]:
                # Populations have not decayed below epsilon within this
                # mode's working basis: double it.
                if work[m] >= d_max:
                    raise CutoffLimitError(
                        f"mode {m}: population {pops[-1]:.3e} at state {work[m] - 1} "
                        f"still exceeds epsilon = {epsilon:.3e} at d_max = {d_max}"
                    )
                work[m] = min(2 * work[m], d_max)
                grew = True
            else:
                # Shrink to one past the target so the criterion at index t
                # stays observable next round.
                work[m] = t + 1
        if grew:
            prev_targets = None
            continue
        if targets == prev_targets:
            return tuple(targets)
        prev_targets = targets
    return tuple(targets)


def spectrum_vs_cutoff(H: CircuitHamiltonian, k: int, d_values) -> list[tuple[int, np.ndarray]]:
    """The k lowest eigenvalues at each uniform per-mode cutoff d."""
    builder = make_locals_builder(H)
    rows = []
    for d in d_values:
        result = solve(H, [int(d)] * H.n, k=k, locals_builder=builder)
        rows.append((int(d), result.eigenvalues))
    return rows
