"""Lindblad generators as dense superoperator matrices.

The generator acts on density operators as

    L[rho] = -i [H, rho] + sum_mu ( 2 L_mu rho L_mu^dag - {L_mu^dag L_mu, rho} )

with the rate amplitudes folded into the jump operators (note the factor 2
on the sandwich term; jump amplitudes g produce decay rates proportional
to g^2 times twice the usual half-rate convention).

Vectorization is column-stacking throughout: ``vec(A X B) = (B^T kron A) vec(X)``.
Every :class:`Superoperator` carries the convention tag and it is asserted
at module boundaries.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .operators import HilbertSpace, Operator, hs_norm

__all__ = [
    "LindbladModel",
    "Superoperator",
    "EigenSystem",
    "VECTORIZATION",
    "vec",
    "unvec",
    "assemble",
    "adjoint",
    "apply_generator",
    "apply_adjoint_generator",
    "eigensystem",
    "is_unital",
    "model_scale",
    "DimensionOverflowError",
]

VECTORIZATION = "column-stacking"

#: hard cap on the superoperator side length; raise above this
DEFAULT_SIDE_CAP = 4096
#: warn when forming dense superoperators above this Hilbert dimension
DENSE_WARN_DIM = 16


class DimensionOverflowError(ValueError):
    """Requested dense superoperator exceeds the configured size cap."""


@dataclass(frozen=True)
class LindbladModel:
    """Hamiltonian plus jump operators (amplitudes folded in)."""

    space: HilbertSpace
    hamiltonian: Operator
    jumps: tuple
    label: str = ""

    def __init__(self, space, hamiltonian, jumps, label=""):
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "hamiltonian", hamiltonian)
        object.__setattr__(self, "jumps", tuple(jumps))
        object.__setattr__(self, "label", label)
        h = hamiltonian.matrix
        defect = np.linalg.norm(h - h.conj().T)
        if defect > 1e-12 * max(np.linalg.norm(h), 1.0):
            raise ValueError(f"Hamiltonian not Hermitian: defect {defect:.3e}")
        if hamiltonian.space != space:
            raise ValueError("Hamiltonian lives on a different space")
        for L in self.jumps:
            if L.space != space:
                raise ValueError("jump operator lives on a different space")


@dataclass(frozen=True)
class Superoperator:
    """Dense matrix acting on column-stacked operators."""

    hilbert_dim: int
    matrix: np.ndarray
    vectorization: str = VECTORIZATION
    kind: str = "generator"  # or "heisenberg"
    space: HilbertSpace | None = field(default=None, compare=False)

    def __post_init__(self):
        d2 = self.hilbert_dim ** 2
        if self.matrix.shape != (d2, d2):
            raise ValueError("superoperator side must be hilbert_dim**2")
        if self.vectorization != VECTORIZATION:
            raise ValueError(f"unsupported vectorization {self.vectorization!r}")

    def __call__(self, mat: np.ndarray) -> np.ndarray:
        return apply_superoperator(self, mat)


def vec(mat: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(mat, dtype=complex).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    return np.asarray(v, dtype=complex).reshape((d, d), order="F")


def apply_superoperator(superop: Superoperator, mat: np.ndarray) -> np.ndarray:
    if superop.vectorization != VECTORIZATION:
        raise ValueError("vectorization convention mismatch")
    d = superop.hilbert_dim
    m = mat.matrix if isinstance(mat, Operator) else np.asarray(mat, dtype=complex)
    return unvec(superop.matrix @ vec(m), d)


def _check_size(d: int, side_cap: int):
    if d * d > side_cap:
        raise DimensionOverflowError(
            f"superoperator side {d * d} exceeds cap {side_cap}"
        )
    if d > DENSE_WARN_DIM:
        warnings.warn(
            f"forming dense superoperator for Hilbert dimension {d}",
            stacklevel=3,
        )


def assemble(model: LindbladModel, side_cap: int = DEFAULT_SIDE_CAP) -> Superoperator:
    """Dense matrix of the generator on the vectorized operator space."""
    d = model.space.total_dim
    _check_size(d, side_cap)
    eye = np.eye(d)
    h = model.hamiltonian.matrix
    mat = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for L in model.jumps:
        Lm = L.matrix
        LdL = Lm.conj().T @ Lm
        mat += 2.0 * np.kron(Lm.conj(), Lm)
        mat -= np.kron(eye, LdL) + np.kron(LdL.T, eye)
    return Superoperator(d, mat, kind="generator", space=model.space)


def adjoint(model: LindbladModel, side_cap: int = DEFAULT_SIDE_CAP) -> Superoperator:
    """Heisenberg-picture generator: dO/dt = +i[H,O] + sum 2 L^dag O L - {L^dag L, O}."""
    d = model.space.total_dim
    _check_size(d, side_cap)
    eye = np.eye(d)
    h = model.hamiltonian.matrix
    mat = 1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for L in model.jumps:
        Lm = L.matrix
        LdL = Lm.conj().T @ Lm
        mat += 2.0 * np.kron(Lm.T, Lm.conj().T)
        mat -= np.kron(eye, LdL) + np.kron(LdL.T, eye)
    return Superoperator(d, mat, kind="heisenberg", space=model.space)


def apply_generator(model: LindbladModel, mat) -> np.ndarray:
    """Matrix-free action of the generator on an operator."""
    m = mat.matrix if isinstance(mat, Operator) else np.asarray(mat, dtype=complex)
    h = model.hamiltonian.matrix
    out = -1j * (h @ m - m @ h)
    for L in model.jumps:
        Lm = L.matrix
        LdL = Lm.conj().T @ Lm
        out += 2.0 * (Lm @ m @ Lm.conj().T) - (LdL @ m + m @ LdL)
    return out


def apply_adjoint_generator(model: LindbladModel, mat) -> np.ndarray:
    m = mat.matrix if isinstance(mat, Operator) else np.asarray(mat, dtype=complex)
    h = model.hamiltonian.matrix
    out = 1j * (h @ m - m @ h)
    for L in model.jumps:
        Lm = L.matrix
        LdL = Lm.conj().T @ Lm
        out += 2.0 * (Lm.conj().T @ m @ Lm) - (LdL @ m + m @ LdL)
    return out


def is_unital(model: LindbladModel, tol: float = 1e-12):
    """Whether the generator annihilates the identity.

    Returns ``(bool, residual)`` with residual = ||L[1]||_F, which equals
    ``2 ||sum_mu [L_mu, L_mu^dag]||_F``.
    """
    d = model.space.total_dim
    residual = np.linalg.norm(apply_generator(model, np.eye(d)))
    scale = max(model_scale(model), 1.0)
    return bool(residual <= tol * scale * d), float(residual)


def model_scale(model: LindbladModel) -> float:
    """max(||H||_2, max_mu ||L_mu||_2^2, 1) -- the tolerance ladder scale."""
    scale = max(1.0, np.linalg.norm(model.hamiltonian.matrix, 2))
    for L in model.jumps:
        scale = max(scale, np.linalg.norm(L.matrix, 2) ** 2)
    return float(scale)


# ---------------------------------------------------------------------------
# eigensystem
# ---------------------------------------------------------------------------

@dataclass
class ClusterInfo:
    eigenvalue: complex
    indices: list
    overlap_condition: float
    defective: bool


@dataclass
class EigenSystem:
    """Biorthonormal right/left eigenpairs of a superoperator.

    ``right[k]``/``left[k]`` satisfy L[rho_k] = lambda_k rho_k and
    L^dag[sigma_k] = lambda_k^* sigma_k with <<sigma_k|rho_k'>> = delta_kk'.
    Eigenvalues are sorted by decreasing real part (slowest first), ties by
    imaginary part.
    """

    eigenvalues: np.ndarray
    right: list
    left: list
    space: HilbertSpace | None
    overlap_condition: float
    clusters: list
    max_residual: float
    scale: float

    @property
    def dim(self) -> int:
        return int(round(np.sqrt(len(self.eigenvalues))))

    def overlaps(self, rho0) -> np.ndarray:
        """Expansion coefficients <<sigma_k|rho0>> of a state."""
        m = rho0.matrix if isinstance(rho0, Operator) else np.asarray(rho0, dtype=complex)
        return np.array([np.vdot(s.matrix, m) for s in self.left])

    def spectral_gap(self, tol: float = 1e-9) -> float:
        """Smallest |Re lambda| over non-peripheral modes."""
        re = np.abs(self.eigenvalues.real)
        decaying = re[re > tol * max(self.scale, 1.0)]
        if decaying.size == 0:
            return np.inf
        return float(decaying.min())


def _cluster_indices(values: np.ndarray, radius: float):
    """Group eigenvalue indices within ``radius`` (transitive closure on a chain)."""
    order = np.lexsort((values.imag, values.real))
    clusters = []
    current = [order[0]]
    for idx in order[1:]:
        if abs(values[idx] - values[current[-1]]) <= radius:
            current.append(idx)
        else:
            clusters.append(current)
            current = [idx]
    clusters.append(current)
    return clusters


def eigensystem(superop: Superoperator, cluster_radius_factor: float = 1e-7,
                residual_tol: float = 1e-9) -> EigenSystem:
    """Full dense eigendecomposition with cluster-wise biorthonormalization.

    Degenerate eigenvalues are grouped within ``cluster_radius_factor * scale``
    and the left vectors are corrected by solving the small overlap system per
    cluster; clusters whose overlap matrix is numerically singular are flagged
    as defective (pseudo-inverse used, condition number reported) instead of
    being silently mis-normalized.
    """
    if superop.vectorization != VECTORIZATION:
        raise ValueError("vectorization convention mismatch")
    d = superop.hilbert_dim
    mat = superop.matrix
    w, vl, vr = scipy.linalg.eig(mat, left=True, right=True)
    scale = float(np.abs(w).max()) if w.size else 0.0
    radius = cluster_radius_factor * max(scale, 1.0)

    clusters = []
    for idx_list in _cluster_indices(w, radius):
        VL = vl[:, idx_list]
        VR = vr[:, idx_list]
        G = VL.conj().T @ VR
        cond = float(np.linalg.cond(G))
        defective = not np.isfinite(cond) or cond > 1e10
        if defective:
            VLn = VL @ np.linalg.pinv(G).conj().T
        else:
            # <<sigma_i|rho_j>> = delta within the cluster
            VLn = VL @ np.linalg.inv(G).conj().T
        vl[:, idx_list] = VLn
        clusters.append(ClusterInfo(
            eigenvalue=complex(np.mean(w[idx_list])),
            indices=list(map(int, idx_list)),
            overlap_condition=cond,
            defective=defective,
        ))

    # residuals of the right eigenpairs
    res = np.linalg.norm(mat @ vr - vr * w[None, :], axis=0)
    max_residual = float(res.max()) if res.size else 0.0
    if max_residual > residual_tol * max(scale, 1.0):
        warnings.warn(
            f"eigenpair residual {max_residual:.3e} exceeds "
            f"{residual_tol:.1e} * scale", stacklevel=2)

    order = np.lexsort((w.imag, -w.real))
    space = superop.space if superop.space is not None else HilbertSpace([d])
    if space.total_dim != d:
        space = HilbertSpace([d])
    right = [Operator(space, unvec(vr[:, i], d)) for i in order]
    left = [Operator(space, unvec(vl[:, i], d)) for i in order]
    inv_order = {int(old): new for new, old in enumerate(order)}
    for c in clusters:
        c.indices = sorted(inv_order[i] for i in c.indices)

    try:
        overlap_condition = float(abs(np.linalg.cond(vr, 1)))
    except np.linalg.LinAlgError:
        overlap_condition = np.inf

    return EigenSystem(
        eigenvalues=w[order],
        right=right,
        left=left,
        space=space,
        overlap_condition=overlap_condition,
        clusters=clusters,
        max_residual=max_residual,
        scale=max(scale, 1.0),
    )
