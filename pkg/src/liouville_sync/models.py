"""Builders for the worked example models, with known-answer registries.

Basis conventions (documented here because every registry formula depends
on them):

* Qubits: basis index 0 is spin-up (``sigma_z = +1``); ``SIGMA_MINUS``
  annihilates index 1.  The three-qubit chain registry below follows the
  opposite ket-labelling common in the synchronization literature, where
  the label ``0`` denotes the state annihilated by ``sigma_minus`` (our
  index 1) -- :func:`chain_ket` performs that mapping, so the registry's
  dark state ``|000>`` is our basis index 7.  As a consequence the site-0
  Bloch vector of the dark state is ``(0, 0, -1)`` in the standard
  ``a_i = Tr(rho sigma_i)`` components (plots that label the ket ``|0>``
  as the north pole show the same point as ``(0, 0, +1)``).
* Spin-1 sites: index 0, 1, 2 correspond to m = +1, 0, -1.
* Fermions: Jordan-Wigner modes ordered site-major, spin-minor:
  ``(0, up), (0, down), (1, up), ...``; qubit index 1 = occupied.

Jump-operator amplitudes are folded into the operators: an amplitude g
enters the dissipator as ``2 g^2 (...)``.  The spin-1 scenario builders
below take *rates* (the linear coefficient of the dissipator) and fold in
``sqrt(rate)`` amplitudes, matching the closed-form slow eigenvalues they
register; this is noted per builder.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .operators import (
    HilbertSpace, Operator, basis_ket, embed_site_operator,
    fermion_operators, identity, random_hermitian, spin_matrices,
    SIGMA_MINUS, SIGMA_PLUS, SIGMA_Z,
)
from .liouvillian import LindbladModel, apply_generator, is_unital, model_scale

__all__ = [
    "KnownAnswer",
    "SymmetryEntry",
    "chain_ket",
    "xxz_loss_model",
    "hubbard_model",
    "hubbard_spin_raising",
    "spin1_pair_model",
    "spin1_inverted_limit_cycle",
    "spin1_zeno_pair",
    "spin1_pure_gain",
    "negative_control_model",
    "BUILDERS",
]


@dataclass
class SymmetryEntry:
    """A registered (A, omega) pair.

    ``kind == "strong"``: [H, A] = omega A and A commutes with every jump
    operator and its dagger.  ``kind == "coherence"``: A rho_pair is an
    eigenmode with eigenvalue ``1j * lam`` (lam real), certified through the
    state-dependent conditions rather than full commutation.
    """

    label: str
    a_matrix: np.ndarray
    omega: float
    kind: str = "strong"
    rho_pair: np.ndarray | None = None
    lam: float | None = None


@dataclass
class KnownAnswer:
    """Closed-form answers bundled with a model for cross-checking."""

    label: str
    stationary: list = field(default_factory=list)   # (name, matrix) pairs
    symmetries: list = field(default_factory=list)   # SymmetryEntry
    peripheral_frequencies: list = field(default_factory=list)
    frequency_base: float | None = None
    extras: dict = field(default_factory=dict)
    notes: str = ""

    def validate(self, model: LindbladModel, tol: float = 1e-10):
        """Residual-check every stored answer against the assembled generator.

        Raises AssertionError on any failure; called by the builders so a
        registry can never be constructed inconsistent with its model.
        """
        scale = model_scale(model)
        h = model.hamiltonian.matrix
        for name, rho in self.stationary:
            res = np.linalg.norm(apply_generator(model, rho))
            assert res <= tol * scale * np.linalg.norm(rho), \
                f"{self.label}/{name}: stationarity residual {res:.3e}"
        for entry in self.symmetries:
            a = entry.a_matrix
            if entry.kind == "strong":
                res_h = np.linalg.norm(h @ a - a @ h - entry.omega * a)
                assert res_h <= tol * scale * np.linalg.norm(a), \
                    f"{self.label}/{entry.label}: [H,A] residual {res_h:.3e}"
                for L in model.jumps:
                    for x in (L.matrix, L.matrix.conj().T):
                        res_l = np.linalg.norm(x @ a - a @ x)
                        assert res_l <= tol * scale * np.linalg.norm(a), \
                            f"{self.label}/{entry.label}: jump commutator {res_l:.3e}"
            else:
                mode = a @ entry.rho_pair
                res = np.linalg.norm(
                    apply_generator(model, mode) - 1j * entry.lam * mode)
                assert res <= tol * scale * np.linalg.norm(mode), \
                    f"{self.label}/{entry.label}: eigenmode residual {res:.3e}"
        return self


# ---------------------------------------------------------------------------
# three-qubit exchange chain with single-site loss
# ---------------------------------------------------------------------------

def chain_ket(space: HilbertSpace, labels) -> np.ndarray:
    """Product ket from dark-state labels: label 0 = the sigma_minus dark state.

    Accepts a string like ``"001"`` or an iterable of 0/1 labels and maps
    label ``c`` on a qubit to basis index ``1 - c``.
    """
    if isinstance(labels, str):
        labels = [int(c) for c in labels]
    return basis_ket(space, [1 - int(c) for c in labels])


def xxz_loss_model(delta: float, b_field: float, gamma: float):
    """Three-qubit periodic XXZ chain with loss on site 0.

    H = sum_j  sigma+_j sigma-_{j+1} + sigma-_j sigma+_{j+1}
             + delta sigma^z_j sigma^z_{j+1} + b_field sigma^z_j   (j+1 mod 3)

    with the single jump L = gamma * sigma-_0.  Sites 1 and 2 carry the
    anti-synchronized limit cycle at angular frequency
    |omega| = |-1 + 2 b_field - 4 delta|.
    """
    space = HilbertSpace([2, 2, 2])
    n = 3
    h = np.zeros((8, 8), dtype=complex)
    for j in range(n):
        k = (j + 1) % n
        sp_j = embed_site_operator(SIGMA_PLUS, j, space).matrix
        sm_j = embed_site_operator(SIGMA_MINUS, j, space).matrix
        sp_k = embed_site_operator(SIGMA_PLUS, k, space).matrix
        sm_k = embed_site_operator(SIGMA_MINUS, k, space).matrix
        sz_j = embed_site_operator(SIGMA_Z, j, space).matrix
        sz_k = embed_site_operator(SIGMA_Z, k, space).matrix
        h += sp_j @ sm_k + sm_j @ sp_k + delta * (sz_j @ sz_k) + b_field * sz_j
    jump = gamma * embed_site_operator(SIGMA_MINUS, 0, space).matrix
    model = LindbladModel(
        space, Operator(space, h), [Operator(space, jump)],
        label="xxz_loss",
    )

    omega = -1.0 + 2.0 * b_field - 4.0 * delta
    dark = chain_ket(space, "000")
    v = chain_ket(space, "001") - chain_ket(space, "010")
    rho1 = np.outer(dark, dark.conj())
    rho2 = 0.5 * np.outer(v, v.conj())
    a_op = np.outer(v, dark.conj())
    answer = KnownAnswer(
        label="xxz_loss",
        stationary=[("dark_product", rho1), ("dark_singlet", rho2)],
        symmetries=[SymmetryEntry(
            label="raising_coherence", a_matrix=a_op, omega=omega,
            kind="coherence", rho_pair=rho1, lam=-omega)],
        peripheral_frequencies=[0.0, abs(omega)],
        frequency_base=abs(omega) if abs(omega) > 1e-12 else None,
        extras={
            "omega": omega,
            "sync_pair": (1, 2),
            "anti": True,
            "sync_observable": "sx",
            "bloch_pole_site0": (0.0, 0.0, -1.0),
        },
        notes="loss site is 0; anti-synchronized pair is (1, 2); "
              "omega = -1 + 2*b_field - 4*delta",
    )
    answer.validate(model)
    return model, answer


# ---------------------------------------------------------------------------
# fermionic chain with on-site pair loss/gain and dephasing
# ---------------------------------------------------------------------------

def _hubbard_modes(n_sites):
    space, ann, cre = fermion_operators(2 * n_sites)
    up = [(ann[2 * j], cre[2 * j]) for j in range(n_sites)]
    down = [(ann[2 * j + 1], cre[2 * j + 1]) for j in range(n_sites)]
    return space, up, down


def hubbard_spin_raising(n_sites: int) -> np.ndarray:
    """Total spin raising operator sum_j c^dag_{j,up} c_{j,down}."""
    _, up, down = _hubbard_modes(n_sites)
    return sum(up[j][1].matrix @ down[j][0].matrix for j in range(n_sites))


def hubbard_model(n_sites: int, U, eps, B, gamma_minus, gamma_plus, gamma_z):
    """Spin-1/2 fermionic chain with pair loss/gain and dephasing.

    Open 1D chain, Hamiltonian

        H = -sum_{<ij>,s} (c^dag_{i,s} c_{j,s} + h.c.) + sum_j U_j n_{j,up} n_{j,down}
            + sum_j eps_j n_j + (B_j / 2)(n_{j,up} - n_{j,down})

    with jumps (amplitudes folded in)

        L-_j = gamma_minus_j c_{j,down} c_{j,up}
        L+_j = gamma_plus_j  c^dag_{j,up} c^dag_{j,down}
        Lz_j = gamma_z_j n_j.

    For a homogeneous field B the total spin raising operator is a strong
    dynamical symmetry with frequency B; the map is unital iff
    gamma_plus_j == gamma_minus_j for every j.
    """
    if n_sites > 3:
        raise ValueError("n_sites capped at 3 (Hilbert dimension 4**n)")
    U, eps, B = (np.broadcast_to(x, (n_sites,)).astype(float)
                 for x in (U, eps, B))
    gm, gp, gz = (np.broadcast_to(x, (n_sites,)).astype(float)
                  for x in (gamma_minus, gamma_plus, gamma_z))
    space, up, down = _hubbard_modes(n_sites)
    d = space.total_dim
    h = np.zeros((d, d), dtype=complex)
    for j in range(n_sites - 1):
        for ops in (up, down):
            hop = ops[j][1].matrix @ ops[j + 1][0].matrix
            h += -(hop + hop.conj().T)
    for j in range(n_sites):
        n_up = up[j][1].matrix @ up[j][0].matrix
        n_dn = down[j][1].matrix @ down[j][0].matrix
        h += U[j] * (n_up @ n_dn) + eps[j] * (n_up + n_dn)
        h += 0.5 * B[j] * (n_up - n_dn)
    jumps = []
    for j in range(n_sites):
        if gm[j]:
            jumps.append(Operator(space, gm[j] * down[j][0].matrix @ up[j][0].matrix))
        if gp[j]:
            jumps.append(Operator(space, gp[j] * up[j][1].matrix @ down[j][1].matrix))
        if gz[j]:
            n_j = (up[j][1].matrix @ up[j][0].matrix
                   + down[j][1].matrix @ down[j][0].matrix)
            jumps.append(Operator(space, gz[j] * n_j))
    model = LindbladModel(space, Operator(space, h), jumps, label="hubbard")

    homogeneous = np.allclose(B, B[0])
    symmetries = []
    freqs = [0.0]
    base = None
    if homogeneous:
        s_plus = hubbard_spin_raising(n_sites)
        symmetries = [
            SymmetryEntry("spin_raising", s_plus, float(B[0]), kind="strong"),
            SymmetryEntry("spin_lowering", s_plus.conj().T, -float(B[0]),
                          kind="strong"),
        ]
        if abs(B[0]) > 1e-12:
            freqs = [0.0, abs(float(B[0]))]
            base = abs(float(B[0]))
    unital, unital_residual = is_unital(model)
    answer = KnownAnswer(
        label="hubbard",
        stationary=[("maximally_mixed", np.eye(d) / d)] if unital else [],
        symmetries=symmetries,
        peripheral_frequencies=freqs,
        frequency_base=base,
        extras={
            "unital": unital,
            "unital_residual": unital_residual,
            "homogeneous_field": homogeneous,
            "field": float(B[0]) if homogeneous else list(map(float, B)),
        },
        notes="mode order site-major spin-minor; peripheral frequencies are "
              "integer multiples of the homogeneous field",
    )
    answer.validate(model)
    return model, answer


# ---------------------------------------------------------------------------
# coupled spin-1 pair
# ---------------------------------------------------------------------------

def spin1_pair_model(omega_a: float, omega_b: float, eps: float,
                     gamma_u, gamma_d, label="spin1_pair"):
    """Two coupled spin-1 sites with directional pumping jumps.

    H = omega_a Sz_0 + omega_b Sz_1 + (i eps / 2)(S+_0 S-_1 - S+_1 S-_0);
    jumps L_u_j = gamma_u[j] S+_j Sz_j and L_d_j = gamma_d[j] S-_j Sz_j
    (arguments are amplitudes).
    """
    space = HilbertSpace([3, 3])
    sp, sm, sz = spin_matrices(1)
    sp0 = embed_site_operator(sp, 0, space).matrix
    sp1 = embed_site_operator(sp, 1, space).matrix
    sm0 = embed_site_operator(sm, 0, space).matrix
    sm1 = embed_site_operator(sm, 1, space).matrix
    sz0 = embed_site_operator(sz, 0, space).matrix
    sz1 = embed_site_operator(sz, 1, space).matrix
    h = (omega_a * sz0 + omega_b * sz1
         + 0.5j * eps * (sp0 @ sm1 - sp1 @ sm0))
    gu = np.broadcast_to(gamma_u, (2,)).astype(float)
    gd = np.broadcast_to(gamma_d, (2,)).astype(float)
    site_ops = [(sp0, sm0, sz0), (sp1, sm1, sz1)]
    jumps = []
    for j, (spj, smj, szj) in enumerate(site_ops):
        if gu[j]:
            jumps.append(Operator(space, gu[j] * spj @ szj))
        if gd[j]:
            jumps.append(Operator(space, gd[j] * smj @ szj))
    return LindbladModel(space, Operator(space, h), jumps, label=label)


def spin1_inverted_limit_cycle(omega: float = 1.0, gamma: float = 1.0,
                               mu: float = 1e-4, eps: float = 0.01):
    """Opposite pumping on the two sites; ultra-low-frequency slow modes.

    ``gamma`` and ``mu`` are dissipator *rates* (amplitudes sqrt(gamma),
    sqrt(mu) are folded into the jumps), so the slow eigenvalue cluster sits
    at {0, -2 mu, -mu +- 2i eps} up to O(mu^2, eps^2, eps mu) corrections.
    ``mu`` defaults strictly positive: at mu = 0 the single-site stationary
    states are degenerate and the cluster formulas do not apply.
    """
    model = spin1_pair_model(
        omega, omega, eps,
        gamma_u=(np.sqrt(gamma), np.sqrt(mu)),
        gamma_d=(np.sqrt(mu), np.sqrt(gamma)),
        label="spin1_inverted_limit_cycle",
    )
    space = model.space
    # site 0 pumped up with weak loss -> |m=0>; site 1 mirrored -> |m=0>
    ket00 = basis_ket(space, [1, 1])
    answer = KnownAnswer(
        label="spin1_inverted_limit_cycle",
        stationary=[],
        peripheral_frequencies=[0.0],
        extras={
            "slow_eigenvalues": [0.0, -2 * mu, -mu + 2j * eps, -mu - 2j * eps],
            "slow_tolerance": 5e-4,
            "initial_state": np.outer(ket00, ket00.conj()),
            "rates": {"gamma": gamma, "mu": mu},
        },
        notes="slow eigenvalues valid to O(mu^2, eps^2, eps*mu); "
              "initial state |m=0, m=0|",
    )
    return model, answer


def spin1_zeno_pair(gamma: float = 100.0, omega_a: float = 0.5,
                    omega_b: float = 1.5, eps: float = 2.0, mu: float = 0.0):
    """Detuned pair under strong dissipation (rate ``gamma``).

    Weak unitary dynamics lifts the degenerate stationary subspace of the
    dissipator, producing metastable oscillations with O(1) frequencies and
    O(1/gamma) decay.  Initialised in |m=0, m=0| the Sz observables
    anti-synchronize metastably, but not robustly.
    """
    model = spin1_pair_model(
        omega_a, omega_b, eps,
        gamma_u=(np.sqrt(gamma), np.sqrt(mu) if mu else 0.0),
        gamma_d=(np.sqrt(mu) if mu else 0.0, np.sqrt(gamma)),
        label="spin1_zeno_pair",
    )
    ket00 = basis_ket(model.space, [1, 1])
    answer = KnownAnswer(
        label="spin1_zeno_pair",
        peripheral_frequencies=[],
        extras={
            "initial_state": np.outer(ket00, ket00.conj()),
            "rate": gamma,
            "observable": "Sz",
            "expect_metastable_anti": True,
            "expect_robust": False,
        },
        notes="decay of the metastable modes scales as 1/gamma",
    )
    return model, answer


def _spin1_gain_registry(omega_a, omega_b, eps, space):
    """Dark-block eigenstructure of the pure-gain pair.

    The gain jumps annihilate span{|m=1>, |m=0>} per site; the Hamiltonian-
    invariant part of the product dark space is spanned by |1,1> and the
    block {|1,0>, |0,1>} with 2x2 Hamiltonian [[omega_a, i eps],
    [-i eps, omega_b]].  All registry states and symmetry operators follow
    from that block's eigendecomposition.
    """
    a2 = omega_a - omega_b
    a3 = np.sqrt(4 * eps ** 2 + a2 ** 2)
    e_top = omega_a + omega_b
    e_plus = 0.5 * (omega_a + omega_b) + 0.5 * a3
    e_minus = 0.5 * (omega_a + omega_b) - 0.5 * a3

    ket_11 = basis_ket(space, [0, 0])          # m = (+1, +1)
    ket_10 = basis_ket(space, [0, 1])          # m = (+1, 0)
    ket_01 = basis_ket(space, [1, 0])          # m = (0, +1)
    a1 = 2 * eps
    v_plus = 1j * a1 * ket_10 + (a3 - a2) * ket_01
    v_plus /= np.linalg.norm(v_plus)
    v_minus = 1j * a1 * ket_10 - (a3 + a2) * ket_01
    v_minus /= np.linalg.norm(v_minus)

    omega1 = e_top - e_plus     # = (omega_a + omega_b - a3) / 2
    omega2 = e_top - e_minus    # = (omega_a + omega_b + a3) / 2
    omega3 = a3

    rho2 = np.outer(ket_11, ket_11.conj())
    rho3 = 0.5 * (np.outer(ket_10, ket_10.conj()) + np.outer(ket_01, ket_01.conj()))
    rho1 = np.outer(ket_10, ket_10.conj())
    if abs(a2) > 1e-12:
        c = eps / a2
        rho1 = rho1 + 1j * c * (np.outer(ket_10, ket_01.conj())
                                - np.outer(ket_01, ket_10.conj()))

    sym = [
        SymmetryEntry("top_coherence_plus", np.outer(ket_11, v_plus.conj()),
                      omega1, kind="coherence", rho_pair=rho3, lam=-omega1),
        SymmetryEntry("top_coherence_minus", np.outer(ket_11, v_minus.conj()),
                      omega2, kind="coherence", rho_pair=rho3, lam=-omega2),
        SymmetryEntry("block_coherence", np.outer(v_plus, v_minus.conj()),
                      omega3, kind="coherence", rho_pair=rho3, lam=-omega3),
    ]
    return (rho1, rho2, rho3), sym, (omega1, omega2, omega3)


def spin1_pure_gain(omega_a: float, omega_b: float, eps: float,
                    gain_a: float = 1.0, gain_b: float = 0.5):
    """Asymmetric pure gain: stable limit cycles without robust synchronization.

    Peripheral frequencies are { (omega_a + omega_b -+ a3)/2, a3 } with
    a3 = sqrt(4 eps^2 + (omega_a - omega_b)^2), independent of the gain
    amplitudes.  The registered symmetry operators are constructed from the
    dark-block eigenvectors; note the first stationary entry is an exact
    null-space element but is positive semidefinite only for
    |eps / (omega_a - omega_b)| small.
    """
    if not (gain_a and gain_b):
        raise ValueError("both gain amplitudes must be nonzero")
    model = spin1_pair_model(omega_a, omega_b, eps,
                             gamma_u=(gain_a, gain_b), gamma_d=(0.0, 0.0),
                             label="spin1_pure_gain")
    states, sym, omegas = _spin1_gain_registry(omega_a, omega_b, eps, model.space)
    answer = KnownAnswer(
        label="spin1_pure_gain",
        stationary=[("block_mixture", states[0]),
                    ("top_product", states[1]),
                    ("block_uniform", states[2])],
        symmetries=sym,
        peripheral_frequencies=sorted({0.0} | {abs(w) for w in omegas}),
        extras={"omegas": omegas, "expect_robust": False},
        notes="no exchange symmetry between the detuned sites; "
              "persistent oscillations but no robust synchronization",
    )
    answer.validate(model)
    return model, answer


# ---------------------------------------------------------------------------
# negative control: jumps spanning a complete algebra
# ---------------------------------------------------------------------------

def negative_control_model(n_qubits: int, gamma: float = 1.0,
                           hamiltonian: np.ndarray | None = None,
                           seed: int = 1234):
    """Raising and lowering jumps on every site of a qubit chain.

    The jump set generates the full Pauli algebra, so the commutant of
    {H, L, L^dag} is trivial for any H and the generator is unital: no
    purely imaginary eigenvalues can survive.
    """
    if n_qubits > 4:
        raise ValueError("n_qubits capped at 4")
    space = HilbertSpace([2] * n_qubits)
    d = space.total_dim
    if hamiltonian is None:
        hamiltonian = random_hermitian(d, np.random.default_rng(seed))
    jumps = []
    for k in range(n_qubits):
        jumps.append(Operator(space, gamma * embed_site_operator(SIGMA_PLUS, k, space).matrix))
        jumps.append(Operator(space, gamma * embed_site_operator(SIGMA_MINUS, k, space).matrix))
    return LindbladModel(space, Operator(space, hamiltonian), jumps,
                         label="negative_control")


#: builder table used by the CLI config loader
BUILDERS = {
    "xxz_loss": xxz_loss_model,
    "hubbard": hubbard_model,
    "spin1_inverted_limit_cycle": spin1_inverted_limit_cycle,
    "spin1_zeno_pair": spin1_zeno_pair,
    "spin1_pure_gain": spin1_pure_gain,
}
