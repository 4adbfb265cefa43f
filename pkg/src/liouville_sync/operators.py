"""Finite-dimensional operator algebra on tensor-product Hilbert spaces.

Dense complex matrices throughout.  Conventions used everywhere in this
package:

* qubit basis index 0 is the ``sigma_z = +1`` (spin-up) state, so
  ``SIGMA_MINUS @ e0 = e1`` and ``SIGMA_MINUS @ e1 = 0``;
* multi-site bases are ordered site-major, ``index = sum_j i_j * prod_{k>j} d_k``;
* fermionic modes are realized with Jordan-Wigner strings in a fixed,
  documented mode order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "HilbertSpace",
    "Operator",
    "DensityMatrix",
    "SitePermutation",
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "SIGMA_PLUS",
    "SIGMA_MINUS",
    "identity",
    "zero_operator",
    "embed_site_operator",
    "partial_trace",
    "partial_trace_matrix",
    "hs_inner",
    "hs_norm",
    "commutator",
    "anticommutator",
    "bloch_vector",
    "spin_matrices",
    "fermion_operators",
    "permutation_operator",
    "basis_ket",
    "ket_projector",
    "hermitian_basis",
    "random_pure_state",
    "random_density_matrix",
    "random_hermitian",
]

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
SIGMA_PLUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
SIGMA_MINUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)


class DimensionMismatchError(ValueError):
    """Operands live on incompatible spaces or have wrong shapes."""


@dataclass(frozen=True)
class HilbertSpace:
    """Ordered list of local dimensions defining the tensor structure."""

    site_dims: tuple

    def __init__(self, site_dims: Iterable[int]):
        dims = tuple(int(d) for d in site_dims)
        if not dims:
            raise ValueError("site_dims must be non-empty")
        if any(d < 2 for d in dims):
            raise ValueError("every site dimension must be >= 2")
        object.__setattr__(self, "site_dims", dims)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.site_dims))

    @property
    def n_sites(self) -> int:
        return len(self.site_dims)

    def __repr__(self):
        return f"HilbertSpace({list(self.site_dims)})"


def _as_matrix(obj) -> np.ndarray:
    if isinstance(obj, Operator):
        return obj.matrix
    return np.asarray(obj, dtype=complex)


@dataclass(frozen=True)
class Operator:
    """A dense complex matrix bound to a :class:`HilbertSpace`.

    Instances are immutable; arithmetic returns new operators on the same
    space.  Hermiticity/unitarity checks are cached together with the
    tolerance they were established at, and are never trusted across
    arithmetic (every derived operator starts with an empty cache).
    """

    space: HilbertSpace
    matrix: np.ndarray
    flags: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        d = self.space.total_dim
        if mat.shape != (d, d):
            raise DimensionMismatchError(
                f"matrix shape {mat.shape} does not match total_dim {d}"
            )
        mat = mat.copy()
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    # -- algebra ---------------------------------------------------------
    def _wrap(self, mat) -> "Operator":
        return Operator(self.space, mat)

    def __add__(self, other):
        self._check_space(other)
        return self._wrap(self.matrix + _as_matrix(other))

    def __sub__(self, other):
        self._check_space(other)
        return self._wrap(self.matrix - _as_matrix(other))

    def __mul__(self, scalar):
        return self._wrap(self.matrix * complex(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return self._wrap(-self.matrix)

    def __matmul__(self, other):
        self._check_space(other)
        return self._wrap(self.matrix @ _as_matrix(other))

    def dag(self) -> "Operator":
        return self._wrap(self.matrix.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def norm(self) -> float:
        """Frobenius norm."""
        return float(np.linalg.norm(self.matrix))

    def _check_space(self, other):
        if isinstance(other, Operator) and other.space != self.space:
            raise DimensionMismatchError("operators live on different spaces")

    # -- cached structure checks ----------------------------------------
    def is_hermitian(self, tol: float = 1e-12) -> bool:
        key = ("hermitian", tol)
        if key not in self.flags:
            defect = np.linalg.norm(self.matrix - self.matrix.conj().T)
            scale = max(np.linalg.norm(self.matrix), 1.0)
            self.flags[key] = bool(defect <= tol * scale)
        return self.flags[key]

    def is_unitary(self, tol: float = 1e-12) -> bool:
        key = ("unitary", tol)
        if key not in self.flags:
            d = self.space.total_dim
            defect = np.linalg.norm(
                self.matrix.conj().T @ self.matrix - np.eye(d)
            )
            self.flags[key] = bool(defect <= tol * d)
        return self.flags[key]


class DensityMatrix(Operator):
    """An operator validated as a physical state.

    Hermitian within ``tol``, unit trace within ``tol`` and minimum
    eigenvalue ``>= -tol``.
    """

    def __init__(self, space: HilbertSpace, matrix, tol: float = 1e-10):
        super().__init__(space, matrix)
        mat = self.matrix
        herm_defect = np.linalg.norm(mat - mat.conj().T)
        if herm_defect > tol * max(np.linalg.norm(mat), 1.0):
            raise ValueError(f"not Hermitian: defect {herm_defect:.3e}")
        tr = np.trace(mat)
        if abs(tr - 1.0) > 10 * tol:
            raise ValueError(f"trace {tr} != 1")
        evals = np.linalg.eigvalsh(0.5 * (mat + mat.conj().T))
        if evals.min() < -tol:
            raise ValueError(f"negative eigenvalue {evals.min():.3e}")
        object.__setattr__(self, "validation_tol", tol)


@dataclass(frozen=True)
class SitePermutation:
    """Exchange of two sites with equal local dimension."""

    space: HilbertSpace
    j: int
    k: int

    def __post_init__(self):
        dims = self.space.site_dims
        n = len(dims)
        if not (0 <= self.j < n and 0 <= self.k < n):
            raise IndexError("site index out of range")
        if dims[self.j] != dims[self.k]:
            raise DimensionMismatchError(
                f"site dims differ: {dims[self.j]} vs {dims[self.k]}"
            )


# ---------------------------------------------------------------------------
# constructors and embeddings
# ---------------------------------------------------------------------------

def identity(space: HilbertSpace) -> Operator:
    return Operator(space, np.eye(space.total_dim, dtype=complex))


def zero_operator(space: HilbertSpace) -> Operator:
    return Operator(space, np.zeros((space.total_dim,) * 2, dtype=complex))


def embed_site_operator(local, site_index: int, space: HilbertSpace) -> Operator:
    """Kronecker-embed a single-site operator, identities elsewhere.

    ``local`` acts on ``site_dims[site_index]``; the result acts on the full
    space as ``1 x ... x local x ... x 1``.
    """
    dims = space.site_dims
    if not 0 <= site_index < len(dims):
        raise IndexError(f"site index {site_index} out of range")
    loc = _as_matrix(local)
    d = dims[site_index]
    if loc.shape != (d, d):
        raise DimensionMismatchError(
            f"local operator shape {loc.shape} does not match site dim {d}"
        )
    left = int(np.prod(dims[:site_index])) if site_index else 1
    right = int(np.prod(dims[site_index + 1:])) if site_index + 1 < len(dims) else 1
    mat = np.kron(np.kron(np.eye(left), loc), np.eye(right))
    return Operator(space, mat)


def product_operator(space: HilbertSpace, factors: dict) -> Operator:
    """Tensor product with given single-site factors, identity on the rest.

    ``factors`` maps site index to a local matrix.
    """
    mat = np.eye(1, dtype=complex)
    for j, d in enumerate(space.site_dims):
        f = _as_matrix(factors[j]) if j in factors else np.eye(d)
        if f.shape != (d, d):
            raise DimensionMismatchError(f"factor at site {j} has shape {f.shape}")
        mat = np.kron(mat, f)
    return Operator(space, mat)


def partial_trace_matrix(mat: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out all sites not in ``keep`` (kept sites stay in ascending order)."""
    dims = list(dims)
    keep = sorted(set(int(s) for s in keep))
    if not keep:
        raise ValueError("keep_sites must be non-empty")
    if any(not 0 <= s < len(dims) for s in keep):
        raise IndexError("keep site index out of range")
    n = len(dims)
    traced = [s for s in range(n) if s not in keep]
    tensor = np.asarray(mat, dtype=complex).reshape(dims + dims)
    row_order = keep + traced
    order = row_order + [n + s for s in row_order]
    d_keep = int(np.prod([dims[s] for s in keep]))
    d_out = int(np.prod([dims[s] for s in traced])) if traced else 1
    t = tensor.transpose(order).reshape(d_keep, d_out, d_keep, d_out)
    return np.einsum("abcb->ac", t)


def partial_trace(rho, keep_sites) -> DensityMatrix:
    """Reduced state on ``keep_sites`` (ascending order)."""
    if not isinstance(rho, Operator):
        raise TypeError("partial_trace expects an Operator/DensityMatrix")
    dims = rho.space.site_dims
    keep = sorted(set(int(s) for s in keep_sites))
    red = partial_trace_matrix(rho.matrix, dims, keep)
    red_space = HilbertSpace([dims[s] for s in keep])
    return DensityMatrix(red_space, red, tol=1e-8)


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product Tr(a^dag b), conjugate-linear in ``a``."""
    am, bm = _as_matrix(a), _as_matrix(b)
    if am.shape != bm.shape:
        raise DimensionMismatchError("hs_inner operands differ in shape")
    if isinstance(a, Operator) and isinstance(b, Operator) and a.space != b.space:
        raise DimensionMismatchError("hs_inner operands on different spaces")
    return complex(np.vdot(am, bm))


def hs_norm(a) -> float:
    return float(np.linalg.norm(_as_matrix(a)))


def commutator(a, b) -> np.ndarray:
    am, bm = _as_matrix(a), _as_matrix(b)
    return am @ bm - bm @ am


def anticommutator(a, b) -> np.ndarray:
    am, bm = _as_matrix(a), _as_matrix(b)
    return am @ bm + bm @ am


def bloch_vector(rho) -> np.ndarray:
    """Bloch components a_i = Tr(rho sigma_i) of a single-qubit state."""
    mat = _as_matrix(rho)
    if mat.shape != (2, 2):
        raise DimensionMismatchError("bloch_vector needs a 2x2 state")
    return np.array([
        np.trace(mat @ SIGMA_X).real,
        np.trace(mat @ SIGMA_Y).real,
        np.trace(mat @ SIGMA_Z).real,
    ])


# ---------------------------------------------------------------------------
# site operators
# ---------------------------------------------------------------------------

def spin_matrices(s: float):
    """Standard spin-s matrices ``(S+, S-, Sz)``.

    Basis is ordered by decreasing magnetic quantum number m = s, ..., -s,
    so index 0 is the highest-weight state.  Ladder elements are
    ``<m+1|S+|m> = sqrt(s(s+1) - m(m+1))``.
    """
    two_s = 2 * s
    if two_s < 0 or abs(two_s - round(two_s)) > 1e-12:
        raise ValueError(f"invalid spin {s}: 2s must be a non-negative integer")
    dim = int(round(two_s)) + 1
    m = s - np.arange(dim)  # m values in basis order
    sz = np.diag(m).astype(complex)
    sp = np.zeros((dim, dim), dtype=complex)
    for i in range(1, dim):
        # raises |m> -> |m+1>, i.e. basis index i -> i-1
        sp[i - 1, i] = np.sqrt(s * (s + 1) - m[i] * (m[i] + 1))
    sm = sp.conj().T
    return sp, sm, sz


def fermion_operators(n_modes: int):
    """Jordan-Wigner annihilation/creation matrices for ``n_modes`` modes.

    Mode ``p`` acts on qubit ``p`` of ``HilbertSpace([2]*n_modes)`` with a
    sigma_z string on all earlier modes; qubit index 0 means empty, 1 means
    occupied.  Returns ``(space, [c_0..], [cdag_0..])``.
    """
    if n_modes < 1:
        raise ValueError("need at least one mode")
    space = HilbertSpace([2] * n_modes)
    lower = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)  # |empty><occ|
    ann = []
    for p in range(n_modes):
        factors = {q: SIGMA_Z for q in range(p)}
        factors[p] = lower
        ann.append(product_operator(space, factors))
    cre = [c.dag() for c in ann]
    return space, ann, cre


def permutation_operator(perm: SitePermutation) -> Operator:
    """Unitary, Hermitian involution exchanging sites ``perm.j`` and ``perm.k``."""
    dims = perm.space.site_dims
    d = perm.space.total_dim
    n = len(dims)
    strides = np.ones(n, dtype=int)
    for s in range(n - 2, -1, -1):
        strides[s] = strides[s + 1] * dims[s + 1]
    mat = np.zeros((d, d), dtype=complex)
    for idx in range(d):
        rem = idx
        digits = []
        for s in range(n):
            digits.append(rem // strides[s])
            rem %= strides[s]
        digits[perm.j], digits[perm.k] = digits[perm.k], digits[perm.j]
        target = int(np.dot(digits, strides))
        mat[target, idx] = 1.0
    return Operator(perm.space, mat)


def basis_ket(space: HilbertSpace, indices: Sequence[int]) -> np.ndarray:
    """Computational-basis product ket |i_0, i_1, ...>."""
    dims = space.site_dims
    if len(indices) != len(dims):
        raise DimensionMismatchError("one index per site required")
    vec = np.array([1.0 + 0j])
    for i, d in zip(indices, dims):
        if not 0 <= i < d:
            raise IndexError(f"basis index {i} out of range for dim {d}")
        e = np.zeros(d, dtype=complex)
        e[i] = 1.0
        vec = np.kron(vec, e)
    return vec


def ket_projector(space: HilbertSpace, vec: np.ndarray) -> DensityMatrix:
    v = np.asarray(vec, dtype=complex)
    v = v / np.linalg.norm(v)
    return DensityMatrix(space, np.outer(v, v.conj()))


def hermitian_basis(dim: int):
    """Orthogonal Hermitian basis of dim x dim matrices (generalized Gell-Mann).

    Contains the normalized identity, symmetric and antisymmetric
    off-diagonal elements and the diagonal traceless ladder; all elements
    have unit Frobenius norm.
    """
    basis = [np.eye(dim, dtype=complex) / np.sqrt(dim)]
    for j in range(dim):
        for k in range(j + 1, dim):
            sym = np.zeros((dim, dim), dtype=complex)
            sym[j, k] = sym[k, j] = 1 / np.sqrt(2)
            asym = np.zeros((dim, dim), dtype=complex)
            asym[j, k] = -1j / np.sqrt(2)
            asym[k, j] = 1j / np.sqrt(2)
            basis.extend([sym, asym])
    for l in range(1, dim):
        diag = np.zeros(dim, dtype=complex)
        diag[:l] = 1.0
        diag[l] = -l
        basis.append(np.diag(diag) / np.linalg.norm(diag))
    return basis


# ---------------------------------------------------------------------------
# random states (seeded; used by tests and sampling-based diagnostics)
# ---------------------------------------------------------------------------

def random_pure_state(space: HilbertSpace, rng: np.random.Generator) -> DensityMatrix:
    d = space.total_dim
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return ket_projector(space, v)


def random_density_matrix(space: HilbertSpace, rng: np.random.Generator,
                          rank: int | None = None) -> DensityMatrix:
    d = space.total_dim
    r = d if rank is None else min(rank, d)
    g = rng.normal(size=(d, r)) + 1j * rng.normal(size=(d, r))
    mat = g @ g.conj().T
    mat /= np.trace(mat).real
    return DensityMatrix(space, mat)


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (g + g.conj().T)
