import numpy as np
import pytest
import scipy.linalg

from liouville_sync.operators import (
    HilbertSpace, Operator, SIGMA_Z, SIGMA_MINUS, SIGMA_PLUS, SIGMA_X,
    embed_site_operator, identity, random_density_matrix, random_hermitian,
)
from liouville_sync.liouvillian import (
    LindbladModel, assemble, adjoint, apply_generator, apply_adjoint_generator,
    eigensystem, is_unital, model_scale, vec, unvec,
    DimensionOverflowError,
)

from conftest import random_model


def qubit_model(h_mat, jump_mats):
    space = HilbertSpace([2])
    return LindbladModel(
        space,
        Operator(space, h_mat),
        [Operator(space, j) for j in jump_mats],
    )


def direct_rhs(model, rho):
    """Reference evaluation of the master-equation right-hand side."""
    h = model.hamiltonian.matrix
    out = -1j * (h @ rho - rho @ h)
    for L in model.jumps:
        Lm = L.matrix
        out += 2 * Lm @ rho @ Lm.conj().T
        ldl = Lm.conj().T @ Lm
        out -= ldl @ rho + rho @ ldl
    return out


class TestAssemble:
    def test_zero_model(self):
        m = qubit_model(np.zeros((2, 2)), [])
        assert np.allclose(assemble(m).matrix, 0)

    def test_dephasing_spectrum(self):
        # one jump g*sigma_z: coherences decay at 4 g^2
        g = 1.0
        m = qubit_model(np.zeros((2, 2)), [g * SIGMA_Z])
        w = np.linalg.eigvals(assemble(m).matrix)
        assert np.allclose(np.sort(w.real), [-4, -4, 0, 0], atol=1e-12)
        assert np.allclose(w.imag, 0, atol=1e-12)

    def test_precession_spectrum(self):
        omega = 0.7
        m = qubit_model(0.5 * omega * SIGMA_Z, [])
        w = np.linalg.eigvals(assemble(m).matrix)
        assert np.allclose(np.sort_complex(w), np.sort_complex(
            np.array([0, 0, 1j * omega, -1j * omega])), atol=1e-12)

    def test_action_matches_direct_rhs(self):
        rng = np.random.default_rng(21)
        space = HilbertSpace([2, 2])
        m = random_model(space, 3, rng)
        sup = assemble(m)
        for _ in range(20):
            rho = random_density_matrix(space, rng)
            lhs = unvec(sup.matrix @ vec(rho.matrix), 4)
            assert np.allclose(lhs, direct_rhs(m, rho.matrix), atol=1e-12)
            assert np.allclose(apply_generator(m, rho.matrix), direct_rhs(m, rho.matrix))

    def test_trace_preservation(self):
        rng = np.random.default_rng(4)
        space = HilbertSpace([3])
        m = random_model(space, 2, rng)
        for _ in range(200):
            rho = random_density_matrix(space, rng)
            drho = apply_generator(m, rho.matrix)
            assert abs(np.trace(drho)) < 1e-12 * np.linalg.norm(rho.matrix)

    def test_size_guard(self):
        space = HilbertSpace([2] * 4)
        m = random_model(space, 1, np.random.default_rng(0))
        with pytest.raises(DimensionOverflowError):
            assemble(m, side_cap=100)

    def test_dense_warning_above_dim16(self):
        space = HilbertSpace([2] * 5)
        m = random_model(space, 1, np.random.default_rng(0))
        with pytest.warns(UserWarning):
            assemble(m)


class TestAdjoint:
    def test_identity_annihilated(self):
        rng = np.random.default_rng(31)
        m = random_model(HilbertSpace([2, 2]), 2, rng)
        assert np.linalg.norm(apply_adjoint_generator(m, np.eye(4))) < 1e-12

    def test_h_only_sign(self):
        h = random_hermitian(2, np.random.default_rng(1))
        m = qubit_model(h, [])
        o = random_hermitian(2, np.random.default_rng(2))
        assert np.allclose(apply_adjoint_generator(m, o), 1j * (h @ o - o @ h))

    def test_duality_random_pairs(self):
        rng = np.random.default_rng(17)
        space = HilbertSpace([2, 2])
        m = random_model(space, 3, rng)
        for _ in range(50):
            rho = random_density_matrix(space, rng)
            o = random_hermitian(4, rng)
            lhs = np.trace(o @ apply_generator(m, rho.matrix))
            rhs = np.trace(apply_adjoint_generator(m, o) @ rho.matrix)
            assert abs(lhs - rhs) < 1e-12 * max(abs(lhs), 1)

    def test_matrix_is_conjugate_transpose(self):
        rng = np.random.default_rng(12)
        m = random_model(HilbertSpace([2, 3]), 2, rng)
        assert np.allclose(adjoint(m).matrix, assemble(m).matrix.conj().T, atol=1e-12)


class TestUnital:
    def test_pure_dephasing_unital(self):
        h = random_hermitian(2, np.random.default_rng(5))
        m = qubit_model(h, [0.8 * SIGMA_Z])
        flag, res = is_unital(m)
        assert flag and res < 1e-14

    def test_decay_not_unital(self):
        m = qubit_model(np.zeros((2, 2)), [SIGMA_MINUS])
        flag, res = is_unital(m)
        # L[1] = 2 [sigma-, sigma+] = -2 sigma_z
        assert not flag
        assert abs(res - 2 * np.sqrt(2)) < 1e-12

    def test_balanced_gain_loss_unital(self):
        g = 0.6
        m = qubit_model(np.zeros((2, 2)), [g * SIGMA_MINUS, g * SIGMA_PLUS])
        flag, _ = is_unital(m)
        assert flag


class TestEigensystem:
    def test_zero_superoperator(self):
        m = qubit_model(np.zeros((2, 2)), [])
        eig = eigensystem(assemble(m))
        assert np.allclose(eig.eigenvalues, 0)
        # biorthonormality still holds
        g = np.array([[complex(np.vdot(l.matrix, r.matrix)) for r in eig.right]
                      for l in eig.left])
        assert np.allclose(g, np.eye(4), atol=1e-8)

    def test_dephasing_stationary_space(self):
        m = qubit_model(np.zeros((2, 2)), [SIGMA_Z])
        eig = eigensystem(assemble(m))
        assert np.allclose(np.sort(eig.eigenvalues.real), [-4, -4, 0, 0], atol=1e-10)
        stationary = [r.matrix for r, lam in zip(eig.right, eig.eigenvalues)
                      if abs(lam) < 1e-10]
        for s in stationary:
            off = s - np.diag(np.diag(s))
            assert np.linalg.norm(off) < 1e-10

    def test_biorthonormality_random(self):
        rng = np.random.default_rng(42)
        m = random_model(HilbertSpace([2, 2]), 2, rng)
        eig = eigensystem(assemble(m))
        g = np.array([[complex(np.vdot(l.matrix, r.matrix)) for r in eig.right]
                      for l in eig.left])
        assert np.abs(g - np.eye(len(eig.eigenvalues))).max() < 1e-8

    def test_left_vectors_satisfy_adjoint_equation(self):
        rng = np.random.default_rng(43)
        m = random_model(HilbertSpace([3]), 2, rng)
        sup = assemble(m)
        eig = eigensystem(sup)
        for lam, sig in zip(eig.eigenvalues, eig.left):
            resid = sup.matrix.conj().T @ vec(sig.matrix) - np.conj(lam) * vec(sig.matrix)
            assert np.linalg.norm(resid) < 1e-6 * eig.scale * np.linalg.norm(sig.matrix)

    def test_spectrum_left_half_plane_and_conjugation(self):
        rng = np.random.default_rng(44)
        for trial in range(5):
            m = random_model(HilbertSpace([2, 2]), 2, rng)
            eig = eigensystem(assemble(m))
            assert eig.eigenvalues.real.max() <= 1e-9 * eig.scale
            w = eig.eigenvalues
            # closed under conjugation: every eigenvalue has a conjugate partner
            for lam in w:
                assert np.abs(w - np.conj(lam)).min() < 1e-9 * eig.scale

    def test_propagator_against_expm_oracle(self):
        rng = np.random.default_rng(45)
        space = HilbertSpace([2])
        m = random_model(space, 1, rng)
        sup = assemble(m)
        eig = eigensystem(sup)
        rho0 = random_density_matrix(space, rng)
        t = 0.37
        c = eig.overlaps(rho0)
        spectral = sum(ck * np.exp(lam * t) * r.matrix
                       for ck, lam, r in zip(c, eig.eigenvalues, eig.right))
        oracle = unvec(scipy.linalg.expm(t * sup.matrix) @ vec(rho0.matrix), 2)
        assert np.allclose(spectral, oracle, atol=1e-10)

    def test_spectral_gap(self):
        m = qubit_model(np.zeros((2, 2)), [SIGMA_Z])
        eig = eigensystem(assemble(m))
        assert abs(eig.spectral_gap() - 4) < 1e-10


class TestXXZEigenvalueAnchor:
    def test_peripheral_pm_4i(self):
        # 3-qubit chain, periodic, Delta=1, B=0.5, loss amplitude 2 on site 1:
        # purely imaginary pair at +-4i
        from liouville_sync.models import xxz_loss_model
        model, _ = xxz_loss_model(1.0, 0.5, 2.0)
        eig = eigensystem(assemble(model))
        w = eig.eigenvalues
        for target in (4j, -4j):
            dist = np.abs(w - target).min()
            assert dist < 1e-9


def test_model_scale():
    m = qubit_model(2 * SIGMA_Z.real.astype(complex), [3 * SIGMA_MINUS])
    assert abs(model_scale(m) - 9) < 1e-12
