"""Time evolution of states and observables.

Two propagation paths: spectral (expand in the biorthonormal eigenbasis and
apply exp(lambda t)) and an adaptive explicit integrator (DOP853,
rtol 1e-10 / atol 1e-12).  The spectral path is the default whenever the
eigenvector basis is well conditioned; the integrator doubles as an
independent oracle in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .operators import (
    HilbertSpace, Operator, DensityMatrix, bloch_vector, partial_trace_matrix,
)
from .liouvillian import (
    EigenSystem, LindbladModel, apply_generator,
    apply_adjoint_generator, assemble, adjoint, eigensystem, vec, unvec,
)

__all__ = [
    "Trajectory",
    "ObservableSeries",
    "propagate",
    "heisenberg_evolve",
    "expectation_series",
    "asymptotic_state",
    "bloch_trajectory",
    "transient_time",
]

#: spectral path refused above this eigenbasis condition number
CONDITION_LIMIT = 1e8
INTEGRATOR_RTOL = 1e-10
INTEGRATOR_ATOL = 1e-12


@dataclass
class Trajectory:
    times: np.ndarray
    states: list                     # DensityMatrix per time point
    method: str                      # "spectral" or "integrator"
    max_step_error: float            # estimate reported by the chosen path
    trace_drift: float               # max |Tr rho(t) - 1|
    positivity_drift: float          # most negative eigenvalue encountered
    space: HilbertSpace
    warnings: list = field(default_factory=list)

    def __len__(self):
        return len(self.times)


@dataclass
class ObservableSeries:
    times: np.ndarray
    values: np.ndarray
    label: str = ""
    site: int | None = None


def _check_times(times):
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size < 1:
        raise ValueError("times must be a 1d grid")
    if np.any(np.diff(t) <= 0):
        raise ValueError("times must be strictly increasing")
    return t


def _spectral_states(eig: EigenSystem, rho0_mat, times):
    """States along the grid; rho0 is the state at times[0]."""
    c = eig.overlaps(rho0_mat)
    d = eig.dim
    basis = np.column_stack([vec(r.matrix) for r in eig.right])
    out = []
    for t in times:
        v = basis @ (c * np.exp(eig.eigenvalues * (t - times[0])))
        out.append(unvec(v, d))
    return out


def _integrate(generator_matvec, y0, times):
    t0, t1 = float(times[0]), float(times[-1])
    if t1 == t0:
        return [y0.copy()], 0.0
    sol = solve_ivp(
        lambda t, y: generator_matvec(y), (t0, t1), y0,
        t_eval=times, method="DOP853",
        rtol=INTEGRATOR_RTOL, atol=INTEGRATOR_ATOL, dense_output=False,
    )
    if not sol.success:
        raise RuntimeError(f"integrator failed: {sol.message}")
    return list(sol.y.T), INTEGRATOR_RTOL * max(1.0, np.abs(sol.y).max())


def propagate(model: LindbladModel, rho0, times, method: str = "auto",
              eig: EigenSystem | None = None) -> Trajectory:
    """Evolve a state along dt rho = L[rho]; rho0 is the state at times[0].

    ``method`` is "auto" (spectral if the eigenbasis condition number stays
    below 1e8, else integrator), "spectral" or "integrator".
    """
    times = _check_times(times)
    rho0_mat = rho0.matrix if isinstance(rho0, Operator) else np.asarray(rho0, dtype=complex)
    if isinstance(rho0, Operator) and rho0.space != model.space:
        raise ValueError("initial state lives on a different space")
    d = model.space.total_dim
    notes = []

    chosen = method
    if method in ("auto", "spectral"):
        if eig is None:
            eig = eigensystem(assemble(model))
        if eig.overlap_condition > CONDITION_LIMIT:
            if method == "spectral":
                raise RuntimeError(
                    f"eigenbasis condition {eig.overlap_condition:.2e} exceeds "
                    f"{CONDITION_LIMIT:.0e}; spectral path refused")
            notes.append(
                f"spectral path refused (condition {eig.overlap_condition:.2e}); "
                "integrator used")
            chosen = "integrator"
        else:
            chosen = "spectral"

    if chosen == "spectral":
        mats = _spectral_states(eig, rho0_mat, times)
        step_error = eig.max_residual * max(times[-1] - times[0], 1.0)
    else:
        chosen = "integrator"
        ys, step_error = _integrate(
            lambda y: vec(apply_generator(model, unvec(y, d))),
            vec(rho0_mat), times)
        mats = [unvec(y, d) for y in ys]

    trace_drift = 0.0
    pos_drift = 0.0
    states = []
    for m in mats:
        trace_drift = max(trace_drift, abs(np.trace(m).real - 1)
                          + abs(np.trace(m).imag))
        herm = 0.5 * (m + m.conj().T)
        wmin = float(np.linalg.eigvalsh(herm).min())
        pos_drift = min(pos_drift, wmin)
        states.append(DensityMatrix(model.space, herm / np.trace(herm).real,
                                    tol=1e-7))
    return Trajectory(times, states, chosen, float(step_error),
                      float(trace_drift), float(pos_drift), model.space, notes)


def heisenberg_evolve(model: LindbladModel, observable, times,
                      method: str = "auto",
                      adjoint_eig: EigenSystem | None = None) -> list:
    """Evolve an observable along dt O = L^dag[O]; returns Operator list."""
    times = _check_times(times)
    o_mat = observable.matrix if isinstance(observable, Operator) else np.asarray(observable, dtype=complex)
    d = model.space.total_dim

    chosen = method
    if method in ("auto", "spectral"):
        if adjoint_eig is None:
            adjoint_eig = eigensystem(adjoint(model))
        if adjoint_eig.overlap_condition > CONDITION_LIMIT:
            if method == "spectral":
                raise RuntimeError("adjoint eigenbasis too ill-conditioned")
            chosen = "integrator"
        else:
            chosen = "spectral"

    if chosen == "spectral":
        mats = _spectral_states(adjoint_eig, o_mat, times)
    else:
        ys, _ = _integrate(
            lambda y: vec(apply_adjoint_generator(model, unvec(y, d))),
            vec(o_mat), times)
        mats = [unvec(y, d) for y in ys]
    return [Operator(model.space, m) for m in mats]


def expectation_series(traj: Trajectory, observable, label: str = "",
                       site: int | None = None) -> ObservableSeries:
    """Tr(O rho(t)) along a trajectory; real series for Hermitian O."""
    o_mat = observable.matrix if isinstance(observable, Operator) else np.asarray(observable, dtype=complex)
    if o_mat.shape[0] != traj.space.total_dim:
        raise ValueError("observable dimension does not match trajectory")
    values = np.array([np.trace(o_mat @ s.matrix) for s in traj.states])
    hermitian = np.linalg.norm(o_mat - o_mat.conj().T) <= 1e-12 * max(
        np.linalg.norm(o_mat), 1.0)
    if hermitian and np.abs(values.imag).max(initial=0.0) <= 1e-10 * max(
            1.0, np.abs(values).max()):
        values = values.real
    return ObservableSeries(traj.times, values, label=label, site=site)


def transient_time(eig: EigenSystem, factor: float = 10.0,
                   tol: float = 1e-9) -> float:
    """Default transient cutoff tau = factor / spectral gap."""
    gap = eig.spectral_gap(tol)
    if not np.isfinite(gap) or gap <= 0:
        return 0.0
    return float(factor / gap)


def asymptotic_state(eig: EigenSystem, rho0, t: float,
                     tol: float = 1e-9) -> Operator:
    """Peripheral-mode projection of the evolved state at time t.

    Agrees with full propagation up to exp(-gap * t) times the decaying
    modes' weight; the result is returned as a plain Operator because at
    finite t it is a density matrix only up to that same error.
    """
    rho0_mat = rho0.matrix if isinstance(rho0, Operator) else np.asarray(rho0, dtype=complex)
    c = eig.overlaps(rho0_mat)
    d = eig.dim
    cut = tol * eig.scale
    out = np.zeros((d, d), dtype=complex)
    for k, lam in enumerate(eig.eigenvalues):
        if abs(lam.real) <= cut:
            out += np.exp(lam * t) * c[k] * eig.right[k].matrix
    return Operator(eig.space, out)


def bloch_trajectory(traj: Trajectory, site: int) -> np.ndarray:
    """Per-time-point Bloch vectors of the reduced state on a qubit site."""
    dims = traj.space.site_dims
    if dims[site] != 2:
        raise ValueError(f"site {site} has dimension {dims[site]}, need 2")
    out = np.zeros((len(traj.times), 3))
    for i, s in enumerate(traj.states):
        red = partial_trace_matrix(s.matrix, dims, [site])
        out[i] = bloch_vector(red)
    return out
