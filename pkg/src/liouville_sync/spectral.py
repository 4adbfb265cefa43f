"""Peripheral spectrum, stationary states and dynamical-symmetry discovery.

Tolerance ladder (relative to ``scale = max(||H||_2, max ||L||_2^2, 1)``):
structural residuals 1e-10, eigenvalue classification 1e-9, rank decisions
at singular value 1e-10 * d.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import numpy as np
import scipy.linalg

from .operators import HilbertSpace, Operator, hs_norm
from .liouvillian import (
    EigenSystem, LindbladModel, apply_generator, assemble, eigensystem,
    is_unital, model_scale, vec, unvec,
)

__all__ = [
    "PeripheralSpectrum",
    "PeripheralEntry",
    "CommensurabilityReport",
    "StationaryStates",
    "DynamicalSymmetry",
    "DiscoveryResult",
    "CommutantBasis",
    "AbsenceCertificate",
    "LadderResult",
    "peripheral_spectrum",
    "stationary_states",
    "coherence_mode_residuals",
    "coherence_mode_residuals_projected",
    "unitary_completion",
    "find_dynamical_symmetries",
    "ladder_eigenvalue",
    "commutant",
    "no_sync_certificate",
    "left_symmetry_operator",
]

STRUCTURAL_TOL = 1e-10
EIGENVALUE_TOL = 1e-9
RANK_TOL = 1e-10


# ---------------------------------------------------------------------------
# peripheral spectrum and commensurability
# ---------------------------------------------------------------------------

@dataclass
class PeripheralEntry:
    eigenvalue: complex
    right: Operator
    left: Operator


@dataclass
class CommensurabilityReport:
    commensurate: bool
    base: float | None
    assignments: list      # (frequency, integer multiple or None)


@dataclass
class PeripheralSpectrum:
    entries: list
    tolerance: float
    commensurability: CommensurabilityReport

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([e.eigenvalue.imag for e in self.entries])

    def nonzero_frequencies(self, tol: float = 1e-9) -> np.ndarray:
        f = self.frequencies
        return f[np.abs(f) > tol]


def _commensurability(freqs, rel_tol=1e-6, max_den=12) -> CommensurabilityReport:
    """Assign positive frequencies to an integer lattice via rational fits."""
    pos = sorted({f for f in np.abs(freqs) if f > 0})
    if not pos:
        return CommensurabilityReport(True, None, [])
    fmin = pos[0]
    fractions = []
    for f in pos:
        r = f / fmin
        frac = Fraction(r).limit_denominator(max_den)
        if abs(r - float(frac)) > rel_tol * max(1.0, r):
            assignments = [(f, None) for f in pos]
            return CommensurabilityReport(False, None, assignments)
        fractions.append(frac)
    lcm_q = 1
    for frac in fractions:
        lcm_q = lcm_q * frac.denominator // gcd(lcm_q, frac.denominator)
    base = fmin / lcm_q
    assignments = [(f, int(round(f / base))) for f in pos]
    return CommensurabilityReport(True, base, assignments)


def peripheral_spectrum(eig: EigenSystem, tol: float = EIGENVALUE_TOL) -> PeripheralSpectrum:
    """All eigensystem entries with |Re lambda| <= tol * scale, sorted by Im."""
    cut = tol * eig.scale
    entries = [
        PeripheralEntry(complex(lam), r, l)
        for lam, r, l in zip(eig.eigenvalues, eig.right, eig.left)
        if abs(lam.real) <= cut
    ]
    entries.sort(key=lambda e: e.eigenvalue.imag)
    freqs = [e.eigenvalue.imag for e in entries if abs(e.eigenvalue.imag) > cut]
    return PeripheralSpectrum(entries, tol, _commensurability(freqs))


# ---------------------------------------------------------------------------
# stationary states
# ---------------------------------------------------------------------------

@dataclass
class StationaryStates:
    basis: list           # Operator null-space basis (HS-orthonormal)
    proper: list          # physical states (Hermitian, PSD, trace 1) in the span
    max_rank: int
    clip_report: list     # (label, clipped magnitude) for each accepted state
    dim: int


def _null_space_projector(basis_vecs):
    """Orthonormal columns spanning the null space."""
    q, _ = np.linalg.qr(np.column_stack(basis_vecs))
    return q


def stationary_states(eig: EigenSystem, tol: float = EIGENVALUE_TOL,
                      clip_budget: float = 1e-6, n_samples: int = 20,
                      seed: int = 0) -> StationaryStates:
    """Null-space basis and proper states constructed from it.

    Proper candidates are obtained by Hermitizing null-space elements and
    keeping either the clipped matrix (when the clipped weight stays below
    ``clip_budget``) or its positive/negative parts, each renormalized and
    accepted only if it lies back in the null-space span.  ``max_rank`` is
    the maximal rank over the accepted states and sampled convex
    combinations, with rank decided at singular value ``tol * dim``.
    """
    cut = tol * eig.scale
    idx = [k for k, lam in enumerate(eig.eigenvalues) if abs(lam) <= cut]
    if not idx:
        raise ValueError("empty null space: generator is not trace preserving")
    d = eig.dim
    raw = [eig.right[k].matrix for k in idx]
    q = _null_space_projector([vec(m) for m in raw])
    basis = [Operator(eig.space, unvec(q[:, i], d)) for i in range(q.shape[1])]

    def in_span(mat):
        v = vec(mat)
        resid = np.linalg.norm(v - q @ (q.conj().T @ v))
        return resid <= max(10 * cut, 1e-9) * np.linalg.norm(v)

    proper, clip_report = [], []

    def consider(mat, label):
        herm = 0.5 * (mat + mat.conj().T)
        if np.linalg.norm(herm) < 1e-12:
            return
        w, v = np.linalg.eigh(herm)
        total = np.abs(w).sum()
        for sign in (+1, -1):
            part = np.where(sign * w > 0, sign * w, 0.0)
            tr = part.sum()
            if tr <= 1e-10 * total:
                continue
            clipped = np.abs(np.where(sign * w < 0, w, 0.0)).sum() / total
            cand = (v * part) @ v.conj().T / tr
            if not in_span(cand):
                continue
            if any(np.linalg.norm(cand - p.matrix) < 1e-8 for p in proper):
                continue
            proper.append(Operator(eig.space, cand))
            clip_report.append((f"{label}{'+' if sign > 0 else '-'}",
                                float(clipped)))

    # the identity's projection onto the null space is the natural candidate
    # for a faithful state (equals 1/d exactly for unital generators)
    eye_proj = unvec(q @ (q.conj().T @ vec(np.eye(d) / d)), d)
    consider(eye_proj, "identity_projection")
    for i, b in enumerate(basis):
        consider(b.matrix, f"basis{i}")
        consider(1j * b.matrix, f"basis{i}i")
    if len(proper) > 1:
        consider(sum(p.matrix for p in proper) / len(proper), "barycenter")

    rank_cut = tol * d
    max_rank = 0
    rng = np.random.default_rng(seed)
    combos = [p.matrix for p in proper]
    for _ in range(n_samples):
        if not proper:
            break
        wts = rng.random(len(proper))
        wts /= wts.sum()
        combos.append(sum(w * p.matrix for w, p in zip(wts, proper)))
    for mat in combos:
        s = np.linalg.svd(mat, compute_uv=False)
        max_rank = max(max_rank, int((s > rank_cut).sum()))
    return StationaryStates(basis, proper, max_rank, clip_report, d)


# ---------------------------------------------------------------------------
# oscillating-coherence certificates
# ---------------------------------------------------------------------------

def unitary_completion(a: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Unitary polar factor of ``a`` (partial isometries get completed)."""
    w, _, vh = np.linalg.svd(np.asarray(a, dtype=complex))
    return w @ vh


def _norm_matrix(x):
    return x.matrix if isinstance(x, Operator) else np.asarray(x, dtype=complex)


def coherence_mode_residuals(a, rho_inf, model: LindbladModel, lam: float,
                             tol: float = STRUCTURAL_TOL, complete: bool = True):
    """Residuals of the purely-imaginary-eigenvalue certificate for (A, rho_inf).

    Checks, for U the unitary completion of A (A itself if ``complete`` is
    False):

        [L_mu, U] rho_inf = 0
        (-i[H, U] - sum_mu [L_mu^dag, U] L_mu) rho_inf = i lam U rho_inf

    and reports the unitarity defect of U.  All residuals are normalized by
    ``scale * ||U rho_inf||``.
    """
    A = _norm_matrix(a)
    rho = _norm_matrix(rho_inf)
    U = unitary_completion(A) if complete else A
    h = model.hamiltonian.matrix
    scale = model_scale(model)
    d = U.shape[0]
    mode = U @ rho
    norm = max(np.linalg.norm(mode), 1e-300)

    jump_residuals = []
    gen = -1j * (h @ U - U @ h)
    for L in model.jumps:
        Lm = L.matrix
        jump_residuals.append(
            float(np.linalg.norm((Lm @ U - U @ Lm) @ rho) / (scale * norm)))
        Ld = Lm.conj().T
        gen = gen - (Ld @ U - U @ Ld) @ Lm
    generator_residual = float(
        np.linalg.norm(gen @ rho - 1j * lam * mode) / (scale * norm))
    unitarity_defect = float(np.linalg.norm(U.conj().T @ U - np.eye(d)) / np.sqrt(d))
    passed = (all(r <= tol for r in jump_residuals)
              and generator_residual <= tol and unitarity_defect <= tol)
    return {
        "jump_residuals": jump_residuals,
        "generator_residual": generator_residual,
        "unitarity_defect": unitarity_defect,
        "passed": bool(passed),
    }


def coherence_mode_residuals_projected(a, rho_inf, model: LindbladModel,
                                       lam: float, tol: float = STRUCTURAL_TOL,
                                       complete: bool = True):
    """Sandwiched necessary conditions for a purely imaginary eigenvalue.

        -i rho U^dag [H, U] rho = i lam rho^2
        rho U^dag [L_mu^dag, U] L_mu rho = 0
        rho [L_mu^dag, U^dag] L_mu rho = 0
    """
    A = _norm_matrix(a)
    rho = _norm_matrix(rho_inf)
    U = unitary_completion(A) if complete else A
    h = model.hamiltonian.matrix
    scale = model_scale(model)
    rho2 = rho @ rho
    norm = max(np.linalg.norm(rho2), 1e-300)
    Ud = U.conj().T
    r1 = float(np.linalg.norm(
        -1j * rho @ Ud @ (h @ U - U @ h) @ rho - 1j * lam * rho2) / (scale * norm))
    r2 = 0.0
    r3 = 0.0
    for L in model.jumps:
        Lm = L.matrix
        Ld = Lm.conj().T
        r2 = max(r2, float(np.linalg.norm(
            rho @ Ud @ (Ld @ U - U @ Ld) @ Lm @ rho) / (scale * norm)))
        r3 = max(r3, float(np.linalg.norm(
            rho @ (Ld @ Ud - Ud @ Ld) @ Lm @ rho) / (scale * norm)))
    passed = r1 <= tol and r2 <= tol and r3 <= tol
    return {"hamiltonian_residual": r1, "jump_residual": r2,
            "dagger_residual": r3, "passed": bool(passed)}


# ---------------------------------------------------------------------------
# dynamical symmetry discovery
# ---------------------------------------------------------------------------

@dataclass
class DynamicalSymmetry:
    """An (A, omega) pair with its certification residuals.

    ``kind == "strong"`` entries satisfy [H, A] = omega A together with
    vanishing commutators with every jump and its dagger; ``kind ==
    "coherence"`` entries are peripheral eigenmodes certified through the
    state-dependent conditions, with ``residual_jumps`` measured as the best
    ||[L, A] rho_inf|| over the proper stationary states.
    """

    A: Operator
    omega: float
    kind: str
    residual_h: float
    residual_jumps: float
    trace_defect: float
    rho_pair: np.ndarray | None = None
    lam: float | None = None


@dataclass
class DiscoveryResult:
    entries: list
    commutant_dim: int
    adh_invariant: bool        # whole jump commutant already ad_H-invariant
    invariance_residual: float
    used_spectral_route: bool

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def nonzero(self, tol: float = 1e-9):
        return [e for e in self.entries if abs(e.omega) > tol]


def _stacked_commutator_null_space(mats, d, rank_tol=RANK_TOL):
    """Orthonormal basis of {X : [X, M] = 0 for all M}, as d^2 x k columns."""
    eye = np.eye(d)
    blocks = []
    for m in mats:
        nm = max(np.linalg.norm(m, 2), 1e-300)
        blocks.append((np.kron(eye, m) - np.kron(m.T, eye)) / nm)
    if not blocks:
        return np.eye(d * d, dtype=complex)
    K = np.vstack(blocks)
    _, s, vh = np.linalg.svd(K)
    cut = rank_tol * d
    null_mask = np.ones(d * d, dtype=bool)
    null_mask[: s.size] = s <= cut
    return vh.conj().T[:, null_mask]


def _largest_adh_invariant_subspace(basis, h, d, scale, tol):
    """Shrink an operator subspace until it is invariant under X -> [H, X].

    Repeatedly removes the directions whose ad_H image leaks out of the
    current span (null space of the leakage map).  Terminates because the
    dimension is strictly decreasing; the fixed point is the largest
    ad_H-invariant subspace of the input span.
    """
    q = basis
    leak_cut = max(tol * scale * 10, 1e-8)
    while q.shape[1] > 0:
        images = np.column_stack([
            vec(h @ unvec(q[:, i], d) - unvec(q[:, i], d) @ h)
            for i in range(q.shape[1])
        ])
        leak = images - q @ (q.conj().T @ images)
        leak_norm = np.linalg.norm(leak, axis=0)
        if leak_norm.max() <= leak_cut:
            return q, images, float(leak_norm.max())
        _, s, vh = np.linalg.svd(leak)
        keep = np.ones(q.shape[1], dtype=bool)
        keep[: s.size] = s <= leak_cut
        if keep.all():
            # numerical stalemate; drop the worst direction
            keep[np.argmax(leak_norm)] = False
        q = q @ vh.conj().T[:, keep]
        if q.shape[1]:
            q, _ = np.linalg.qr(q)
    return q, np.zeros((d * d, 0), dtype=complex), 0.0


def find_dynamical_symmetries(model: LindbladModel, tol: float = EIGENVALUE_TOL,
                              eig: EigenSystem | None = None,
                              coherences: str = "auto") -> DiscoveryResult:
    """Discover (A, omega) pairs generating the peripheral spectrum.

    Strong route: the joint commutant of all jump operators and their
    daggers is computed as the null space of the stacked commutator map,
    then shrunk to its largest subspace invariant under X -> [H, X] (the
    shrinkage is reported through ``adh_invariant`` /
    ``invariance_residual``).  The restriction of ad_H to that subspace is
    Hermitian in the Hilbert-Schmidt inner product, so its
    eigendecomposition yields real frequencies and orthogonal operators.

    Spectral route (``coherences="auto"``: runs when the strong route finds
    no nonzero frequency): every nonzero-frequency peripheral eigenmode is
    returned as a "coherence" entry with omega = -Im(lambda), matching the
    ladder eigenvalue relation.
    """
    scale = model_scale(model)
    h = model.hamiltonian.matrix
    d = model.space.total_dim
    jump_mats = []
    for L in model.jumps:
        jump_mats.extend([L.matrix, L.matrix.conj().T])
    basis = _stacked_commutator_null_space(jump_mats, d)
    k = basis.shape[1]

    inv_basis, ad_images, leak = _largest_adh_invariant_subspace(
        basis, h, d, scale, tol)
    adh_invariant = inv_basis.shape[1] == k

    entries = []
    used_spectral = False
    if inv_basis.shape[1]:
        r = inv_basis.conj().T @ ad_images
        asym = np.linalg.norm(r - r.conj().T)
        if asym > 1e-8 * max(np.linalg.norm(r), 1.0):
            warnings.warn(f"restricted generator asymmetry {asym:.3e}")
        omegas, vecs = np.linalg.eigh(0.5 * (r + r.conj().T))
        for w, v in zip(omegas, vecs.T):
            a = unvec(inv_basis @ v, d)
            a = a / np.linalg.norm(a)
            res_h = float(np.linalg.norm(h @ a - a @ h - w * a) / scale)
            res_j = 0.0
            for m in jump_mats:
                res_j = max(res_j, float(np.linalg.norm(m @ a - a @ m)
                                         / max(np.linalg.norm(m, 2), 1e-300)))
            entries.append(DynamicalSymmetry(
                A=Operator(model.space, a), omega=float(w), kind="strong",
                residual_h=res_h, residual_jumps=res_j,
                trace_defect=float(abs(np.trace(a))) if abs(w) > tol * scale else 0.0,
            ))

    no_oscillating_strong = not any(abs(e.omega) > tol * scale for e in entries)
    if (coherences == "always") or (coherences == "auto" and no_oscillating_strong):
        used_spectral = True
        if eig is None:
            eig = eigensystem(assemble(model))
        peri = peripheral_spectrum(eig, tol)
        stat = stationary_states(eig, tol)
        proper = [p.matrix for p in stat.proper] or [np.eye(d) / d]
        for entry in peri.entries:
            im = entry.eigenvalue.imag
            if abs(im) <= tol * eig.scale:
                continue
            a = entry.right.matrix / np.linalg.norm(entry.right.matrix)
            omega = -im
            res_h = float(np.linalg.norm(h @ a - a @ h - omega * a) / scale)
            res_j = np.inf
            best_rho = None
            for rho in proper:
                worst = 0.0
                for m in jump_mats:
                    worst = max(worst, float(
                        np.linalg.norm((m @ a - a @ m) @ rho)
                        / max(np.linalg.norm(m, 2), 1e-300)))
                if worst < res_j:
                    res_j, best_rho = worst, rho
            entries.append(DynamicalSymmetry(
                A=Operator(model.space, a), omega=float(omega), kind="coherence",
                residual_h=res_h, residual_jumps=float(res_j),
                trace_defect=float(abs(np.trace(a))),
                rho_pair=best_rho, lam=float(im),
            ))

    return DiscoveryResult(
        entries=entries,
        commutant_dim=k,
        adh_invariant=adh_invariant,
        invariance_residual=leak,
        used_spectral_route=used_spectral,
    )


# ---------------------------------------------------------------------------
# ladder states
# ---------------------------------------------------------------------------

@dataclass
class LadderResult:
    state: np.ndarray | None
    eigenvalue: complex | None
    residual: float | None
    annihilated: bool


def ladder_eigenvalue(a, rho_inf, model: LindbladModel, n: int, m: int) -> LadderResult:
    """Rayleigh quotient of the generator on A^n rho_inf (A^dag)^m.

    For a strong dynamical symmetry with frequency omega the measured
    eigenvalue is -1j * omega * (n - m); the sign is reported, not asserted.
    A vanishing ladder state is a valid outcome (finite ladder) and is
    flagged as annihilated.
    """
    A = _norm_matrix(a)
    rho = _norm_matrix(rho_inf)
    x = np.linalg.matrix_power(A, n) @ rho @ np.linalg.matrix_power(A.conj().T, m)
    norm = np.linalg.norm(x)
    ref = np.linalg.norm(rho) * max(np.linalg.norm(A, 2), 1.0) ** (n + m)
    if norm <= 1e-12 * max(ref, 1e-300):
        return LadderResult(None, None, None, True)
    lx = apply_generator(model, x)
    lam = complex(np.vdot(x, lx) / np.vdot(x, x))
    residual = float(np.linalg.norm(lx - lam * x) / (model_scale(model) * norm))
    return LadderResult(x, lam, residual, False)


# ---------------------------------------------------------------------------
# commutant and the absence certificate
# ---------------------------------------------------------------------------

@dataclass
class CommutantBasis:
    basis: list
    is_trivial: bool
    max_residual: float


def commutant(model: LindbladModel, tol: float = RANK_TOL) -> CommutantBasis:
    """HS-orthonormal basis of {H, L_mu, L_mu^dag}'."""
    d = model.space.total_dim
    mats = [model.hamiltonian.matrix]
    for L in model.jumps:
        mats.extend([L.matrix, L.matrix.conj().T])
    cols = _stacked_commutator_null_space(mats, d, rank_tol=tol)
    basis = [Operator(model.space, unvec(cols[:, i], d)) for i in range(cols.shape[1])]
    max_residual = 0.0
    for b in basis:
        for m in mats:
            r = np.linalg.norm(m @ b.matrix - b.matrix @ m) / max(np.linalg.norm(m, 2), 1e-300)
            max_residual = max(max_residual, float(r))
    is_trivial = False
    if len(basis) == 1:
        overlap = abs(np.vdot(basis[0].matrix, np.eye(d) / np.sqrt(d)))
        is_trivial = overlap > 1 - 1e-8
    return CommutantBasis(basis, is_trivial, max_residual)


@dataclass
class AbsenceCertificate:
    certified: bool
    commutant_trivial: bool
    full_rank_stationary: bool
    commutant_dim: int
    max_rank: int | None
    peripheral_crosscheck: bool | None    # True = consistent, None = not run


def no_sync_certificate(model: LindbladModel, tol: float = EIGENVALUE_TOL,
                        eig: EigenSystem | None = None) -> AbsenceCertificate:
    """Certify absence of persistent oscillations (hence of stable sync).

    Certified when a full-rank stationary state exists (unitality, or
    max_rank == dim from the null space) and the commutant of
    {H, L, L^dag} is trivial.  When an eigensystem is available the
    peripheral spectrum is cross-checked for nonzero frequencies.
    """
    d = model.space.total_dim
    comm = commutant(model)
    unital, _ = is_unital(model)
    max_rank = None
    if unital:
        full_rank = True
    else:
        if eig is None:
            eig = eigensystem(assemble(model))
        stat = stationary_states(eig, tol)
        max_rank = stat.max_rank
        full_rank = stat.max_rank == d
    certified = bool(full_rank and comm.is_trivial)
    crosscheck = None
    if eig is not None:
        peri = peripheral_spectrum(eig, tol)
        has_osc = peri.nonzero_frequencies(tol * eig.scale).size > 0
        crosscheck = not (certified and has_osc)
    return AbsenceCertificate(
        certified=certified,
        commutant_trivial=comm.is_trivial,
        full_rank_stationary=full_rank,
        commutant_dim=len(comm.basis),
        max_rank=max_rank,
        peripheral_crosscheck=crosscheck,
    )


def left_symmetry_operator(a, rho_inf, rho_faithful, cond_limit: float = 1e10):
    """Left-eigenmode generator A' = A rho_inf rho_faithful^{-1}.

    The conditioning of the faithful state is reported; a warning is raised
    when it exceeds ``cond_limit`` (near-singular rho_faithful makes the
    extraction unreliable).
    """
    A = _norm_matrix(a)
    rho = _norm_matrix(rho_inf)
    rf = _norm_matrix(rho_faithful)
    cond = float(np.linalg.cond(rf))
    if cond > cond_limit:
        warnings.warn(f"faithful state condition number {cond:.3e}; "
                      "left-operator extraction is ill-conditioned")
    return A @ rho @ np.linalg.inv(rf), cond
