import numpy as np
import pytest

from liouville_sync.operators import (
    HilbertSpace, Operator, SIGMA_MINUS, SIGMA_PLUS, SIGMA_Z,
    embed_site_operator, random_density_matrix, random_hermitian, hs_inner,
)
from liouville_sync.liouvillian import (
    LindbladModel, assemble, eigensystem, apply_generator, model_scale,
)
from liouville_sync.spectral import (
    peripheral_spectrum, stationary_states, coherence_mode_residuals,
    coherence_mode_residuals_projected, unitary_completion,
    find_dynamical_symmetries, ladder_eigenvalue, commutant,
    no_sync_certificate, left_symmetry_operator,
)
from liouville_sync.models import (
    xxz_loss_model, hubbard_model, hubbard_spin_raising, spin1_pure_gain,
    negative_control_model,
)

from conftest import random_model


@pytest.fixture(scope="module")
def xxz():
    model, answer = xxz_loss_model(1.0, 0.5, 2.0)
    eig = eigensystem(assemble(model))
    return model, answer, eig


@pytest.fixture(scope="module")
def hubbard():
    model, answer = hubbard_model(2, U=1.0, eps=0.3, B=1.0,
                                  gamma_minus=0.5, gamma_plus=0.5, gamma_z=0.3)
    eig = eigensystem(assemble(model))
    return model, answer, eig


def dephasing_model():
    space = HilbertSpace([2])
    return LindbladModel(space, Operator(space, np.zeros((2, 2))),
                         [Operator(space, SIGMA_Z)])


class TestPeripheralSpectrum:
    def test_dephasing_zero_only(self):
        eig = eigensystem(assemble(dephasing_model()))
        peri = peripheral_spectrum(eig)
        assert len(peri.entries) == 2
        assert np.allclose(peri.frequencies, 0, atol=1e-10)

    def test_xxz_frequencies(self, xxz):
        _, answer, eig = xxz
        peri = peripheral_spectrum(eig)
        freqs = np.round(sorted(peri.frequencies), 8)
        assert np.allclose(freqs, [-4, 0, 0, 4], atol=1e-9)
        assert peri.commensurability.commensurate

    def test_hubbard_integer_lattice(self, hubbard):
        _, answer, eig = hubbard
        peri = peripheral_spectrum(eig)
        b = answer.extras["field"]
        for f in peri.nonzero_frequencies():
            n = round(f / b)
            assert abs(f - n * b) < 1e-8

    def test_incommensurate_flagged(self):
        from liouville_sync.spectral import _commensurability
        report = _commensurability([1.0, np.sqrt(2)])
        assert not report.commensurate


class TestStationaryStates:
    def test_unital_full_rank(self, hubbard):
        model, _, eig = hubbard
        stat = stationary_states(eig)
        d = model.space.total_dim
        assert stat.max_rank == d
        # identity/d among proper states
        eye = np.eye(d) / d
        assert min(np.linalg.norm(p.matrix - eye) for p in stat.proper) < 1e-8

    def test_xxz_null_space(self, xxz):
        _, answer, eig = xxz
        stat = stationary_states(eig)
        assert len(stat.basis) == 2
        assert stat.max_rank == 2
        for name, target in answer.stationary:
            # target must lie in the null-space span and appear among proper states
            dists = [np.linalg.norm(p.matrix - target) for p in stat.proper]
            assert min(dists) < 1e-8, name

    def test_amplitude_damping_unique_dark_state(self):
        space = HilbertSpace([2])
        model = LindbladModel(space, Operator(space, np.zeros((2, 2))),
                              [Operator(space, SIGMA_MINUS)])
        eig = eigensystem(assemble(model))
        stat = stationary_states(eig)
        assert len(stat.basis) == 1
        assert stat.max_rank == 1
        assert np.allclose(stat.proper[0].matrix, np.diag([0.0, 1.0]), atol=1e-10)

    def test_proper_states_are_physical(self, xxz):
        _, _, eig = xxz
        stat = stationary_states(eig)
        for p in stat.proper:
            m = p.matrix
            assert np.allclose(m, m.conj().T, atol=1e-10)
            assert abs(np.trace(m) - 1) < 1e-10
            assert np.linalg.eigvalsh(m).min() > -1e-10


class TestCoherenceCertificates:
    def test_identity_stationary_case(self, xxz):
        model, answer, _ = xxz
        rho1 = answer.stationary[0][1]
        rep = coherence_mode_residuals(np.eye(8), rho1, model, 0.0)
        assert rep["passed"]

    def test_xxz_registry_triple(self, xxz):
        model, answer, _ = xxz
        entry = answer.symmetries[0]
        rho1 = answer.stationary[0][1]
        rep = coherence_mode_residuals(entry.a_matrix, rho1, model, entry.lam)
        assert rep["passed"]
        assert rep["generator_residual"] <= 1e-10
        assert max(rep["jump_residuals"]) <= 1e-10
        rep2 = coherence_mode_residuals_projected(entry.a_matrix, rho1, model,
                                                  entry.lam)
        assert rep2["passed"]

    def test_random_a_fails(self):
        model = dephasing_model()
        rng = np.random.default_rng(3)
        a = random_hermitian(2, rng)
        rho = np.eye(2) / 2
        rep = coherence_mode_residuals(a, rho, model, 1.0)
        assert not rep["passed"]
        assert rep["generator_residual"] > 1e-3

    def test_perturbation_sensitivity(self, xxz):
        # residuals grow linearly with a Hermitian perturbation of A
        model, answer, _ = xxz
        entry = answer.symmetries[0]
        rho1 = answer.stationary[0][1]
        rng = np.random.default_rng(8)
        h = random_hermitian(8, rng)
        h /= np.linalg.norm(h)
        sizes = np.array([1e-2, 1e-3, 1e-4])
        resid = []
        for s in sizes:
            rep = coherence_mode_residuals(
                entry.a_matrix + s * h, rho1, model, entry.lam)
            resid.append(max(rep["generator_residual"], *rep["jump_residuals"]))
        ratios = np.array(resid) / sizes
        assert ratios.max() / ratios.min() < 10  # roughly proportional

    def test_unitary_completion(self, xxz):
        _, answer, _ = xxz
        u = unitary_completion(answer.symmetries[0].a_matrix)
        assert np.allclose(u.conj().T @ u, np.eye(8), atol=1e-12)


class TestDiscovery:
    def test_closed_system_coherences(self):
        # no jumps, nondegenerate H: all |m><n| with omega = E_m - E_n
        space = HilbertSpace([2])
        h = np.diag([0.3, -0.9]).astype(complex)
        model = LindbladModel(space, Operator(space, h), [])
        disc = find_dynamical_symmetries(model)
        assert disc.commutant_dim == 4
        assert disc.adh_invariant
        omegas = sorted(round(e.omega, 9) for e in disc.entries)
        assert omegas == [-1.2, 0.0, 0.0, 1.2]

    def test_hubbard_strong_raising(self, hubbard):
        model, answer, _ = hubbard
        disc = find_dynamical_symmetries(model)
        assert not disc.used_spectral_route
        b = answer.extras["field"]
        sp = hubbard_spin_raising(2)
        sp = (sp / np.linalg.norm(sp)).reshape(-1)
        sub = np.column_stack([e.A.matrix.reshape(-1) for e in disc.entries
                               if abs(e.omega - b) < 1e-8])
        assert sub.shape[1] >= 1
        q, _ = np.linalg.qr(sub)
        assert np.linalg.norm(q.conj().T @ sp) > 1 - 1e-8
        # conjugate partner
        assert any(abs(e.omega + b) < 1e-8 for e in disc.entries)

    def test_sigma_pm_chain_no_oscillations(self):
        model = negative_control_model(2, 1.0)
        disc = find_dynamical_symmetries(model)
        assert not disc.nonzero()

    def test_xxz_coherence_route(self, xxz):
        model, answer, eig = xxz
        disc = find_dynamical_symmetries(model, eig=eig)
        assert disc.used_spectral_route
        a_reg = answer.symmetries[0].a_matrix
        a_reg = (a_reg / np.linalg.norm(a_reg)).reshape(-1)
        best = max(abs(np.vdot(e.A.matrix.reshape(-1), a_reg))
                   for e in disc.nonzero())
        assert best > 1 - 1e-8

    def test_traceless_and_conjugation(self, xxz):
        model, _, eig = xxz
        disc = find_dynamical_symmetries(model, eig=eig)
        for e in disc.nonzero():
            assert e.trace_defect <= 1e-10
            partners = [f for f in disc.entries if abs(f.omega + e.omega) < 1e-8]
            assert partners

    def test_spin1_gain_registry_recovery(self):
        model, answer = spin1_pure_gain(0.9, 0.4, 0.7)
        disc = find_dynamical_symmetries(model)
        assert disc.used_spectral_route
        for entry in answer.symmetries:
            a_reg = entry.a_matrix / np.linalg.norm(entry.a_matrix)
            best = max(abs(complex(np.vdot(e.A.matrix, a_reg)))
                       for e in disc.nonzero())
            assert best > 1 - 1e-8, entry.label


class TestLadder:
    def test_equal_indices_stationary(self, hubbard):
        model, answer, eig = hubbard
        sp = hubbard_spin_raising(2)
        stat = stationary_states(eig)
        rho = stat.proper[0].matrix
        res = ladder_eigenvalue(sp, rho, model, 1, 1)
        if not res.annihilated:
            assert abs(res.eigenvalue) < 1e-8 * eig.scale

    def test_first_rung_frequency(self, hubbard):
        model, answer, eig = hubbard
        b = answer.extras["field"]
        sp = hubbard_spin_raising(2)
        d = model.space.total_dim
        res = ladder_eigenvalue(sp, np.eye(d) / d, model, 1, 0)
        assert not res.annihilated
        assert abs(abs(res.eigenvalue.imag) - b) < 1e-9
        assert abs(res.eigenvalue.real) < 1e-9
        assert res.residual < 1e-9

    def test_ladder_terminates(self, hubbard):
        model, _, _ = hubbard
        sp = hubbard_spin_raising(2)
        d = model.space.total_dim
        # total spin raising on 2 sites annihilates after 2 applications
        res = ladder_eigenvalue(sp, np.eye(d) / d, model, 3, 0)
        assert res.annihilated


class TestCommutant:
    def test_free_static_system(self):
        space = HilbertSpace([2])
        model = LindbladModel(space, Operator(space, np.zeros((2, 2))), [])
        com = commutant(model)
        assert len(com.basis) == 4
        assert not com.is_trivial

    def test_sigma_pm_trivial(self):
        model = negative_control_model(2, 1.0)
        com = commutant(model)
        assert com.is_trivial

    def test_dephasing_hubbard_contains_sz(self):
        model, _ = hubbard_model(2, U=1.0, eps=0.0, B=0.7,
                                 gamma_minus=0.0, gamma_plus=0.0, gamma_z=0.5)
        com = commutant(model)
        assert not com.is_trivial
        _, up, down = __import__("liouville_sync.models", fromlist=["_hubbard_modes"])._hubbard_modes(2)
        sz = sum(0.5 * (up[j][1].matrix @ up[j][0].matrix
                        - down[j][1].matrix @ down[j][0].matrix) for j in range(2))
        cols = np.column_stack([b.matrix.reshape(-1) for b in com.basis])
        q, _ = np.linalg.qr(cols)
        v = sz.reshape(-1) / np.linalg.norm(sz)
        assert np.linalg.norm(q.conj().T @ v) > 1 - 1e-8


class TestAbsenceCertificate:
    def test_negative_control_certified(self):
        model = negative_control_model(3, 1.0)
        eig = eigensystem(assemble(model))
        cert = no_sync_certificate(model, eig=eig)
        assert cert.certified
        assert cert.peripheral_crosscheck
        peri = peripheral_spectrum(eig)
        assert peri.nonzero_frequencies(1e-8).size == 0

    def test_xxz_not_certified(self, xxz):
        model, _, eig = xxz
        cert = no_sync_certificate(model, eig=eig)
        assert not cert.certified
        assert not cert.full_rank_stationary

    def test_unital_nontrivial_commutant_not_certified(self):
        # pure dephasing with a conserved sigma_z: unital but commutant nontrivial
        space = HilbertSpace([2])
        model = LindbladModel(space, Operator(space, 0.5 * SIGMA_Z),
                              [Operator(space, 0.7 * SIGMA_Z)])
        cert = no_sync_certificate(model)
        assert cert.full_rank_stationary
        assert not cert.commutant_trivial
        assert not cert.certified

    def test_no_jumps_not_certified(self):
        space = HilbertSpace([2, 2])
        rng = np.random.default_rng(5)
        model = LindbladModel(space, Operator(space, random_hermitian(4, rng)), [])
        cert = no_sync_certificate(model)
        assert not cert.certified


class TestDualityInvariant:
    def test_hubbard_peripheral_matches_ladders(self, hubbard):
        # unital model: every nonzero peripheral frequency is omega*(n-m) of a
        # discovered symmetry, and surviving ladder states have purely
        # imaginary Rayleigh quotients
        model, answer, eig = hubbard
        b = answer.extras["field"]
        peri = peripheral_spectrum(eig)
        for f in peri.nonzero_frequencies():
            n_minus_m = round(f / b)
            assert abs(f - n_minus_m * b) < 1e-8
        sp = hubbard_spin_raising(2)
        d = model.space.total_dim
        for n in (1, 2):
            res = ladder_eigenvalue(sp, np.eye(d) / d, model, n, 0)
            if res.annihilated:
                continue
            assert abs(res.eigenvalue.real) < 1e-8
            # frequency present in the peripheral set
            assert np.abs(peri.frequencies - res.eigenvalue.imag).min() < 1e-8


def test_left_symmetry_operator_warns_on_singular():
    rng = np.random.default_rng(1)
    a = random_hermitian(4, rng)
    rho = np.diag([0.5, 0.5, 0.0, 0.0])
    faithful = np.diag([1 - 3e-13, 1e-13, 1e-13, 1e-13])
    with pytest.warns(UserWarning):
        left_symmetry_operator(a, rho, faithful)
