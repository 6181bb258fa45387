import numpy as np
import pytest
import scipy.linalg

from ndsf.model import (
    ID2,
    SX,
    SZ,
    ModelParams,
    dense_hamiltonian,
    hamiltonian_terms,
    local_operator_mps,
    product_state,
    state_vector,
    trotter_gates,
)


def kron_chain(mats):
    out = np.eye(1, dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


class TestModelParams:
    def test_rejects_gamma_out_of_range(self):
        with pytest.raises(ValueError):
            ModelParams(gamma=2.0, hz=0.0, length=4)

    def test_rejects_odd_length(self):
        with pytest.raises(ValueError):
            ModelParams(gamma=0.3, hz=0.0, length=5)

    def test_rejects_negative_field(self):
        with pytest.raises(ValueError):
            ModelParams(gamma=0.3, hz=-0.1, length=4)


class TestHamiltonianTerms:
    def test_pure_field_has_zero_bond_terms(self):
        terms = hamiltonian_terms(ModelParams(gamma=np.pi / 2, hz=0.0, length=4))
        bond_terms = [m for sites, m in terms if len(sites) == 2]
        assert len(bond_terms) == 3
        for m in bond_terms:
            np.testing.assert_allclose(m, 0.0, atol=1e-15)

    def test_pure_ising_has_zero_site_terms(self):
        terms = hamiltonian_terms(ModelParams(gamma=0.0, hz=0.0, length=4))
        for sites, m in terms:
            if len(sites) == 1:
                np.testing.assert_allclose(m, 0.0, atol=1e-15)
            else:
                np.testing.assert_allclose(m, -np.kron(SZ, SZ))

    def test_dense_assembly_matches_kronecker_oracle(self):
        params = ModelParams(gamma=np.pi / 4, hz=0.2, length=4)
        oracle = np.zeros((16, 16), dtype=complex)
        c, s = np.cos(params.gamma), np.sin(params.gamma)
        for i in range(3):
            ops = [ID2] * 4
            ops[i], ops[i + 1] = SZ, SZ
            oracle -= c * kron_chain(ops)
        for i in range(4):
            for mat, weight in ((SX, s), (SZ, params.hz)):
                ops = [ID2] * 4
                ops[i] = mat
                oracle -= weight * kron_chain(ops)
        np.testing.assert_allclose(dense_hamiltonian(params), oracle, atol=1e-14)

    def test_terms_hermitian(self):
        for _, m in hamiltonian_terms(ModelParams(gamma=0.7, hz=0.3, length=6)):
            np.testing.assert_array_equal(m, m.conj().T)

    def test_spin_flip_symmetry_without_longitudinal_field(self):
        params = ModelParams(gamma=0.9, hz=0.0, length=8)
        h = dense_hamiltonian(params)
        flip = kron_chain([SX] * 8)
        assert np.linalg.norm(h @ flip - flip @ h) < 1e-12


class TestTrotterGates:
    def test_all_gates_unitary(self):
        sched = trotter_gates(ModelParams(gamma=0.6, hz=0.1, length=6), 0.05)
        for layer in sched.layers:
            for _, g in layer:
                d = g.shape[0]
                assert np.max(np.abs(g.conj().T @ g - np.eye(d))) < 1e-12

    def test_rejects_nonpositive_step(self):
        with pytest.raises(ValueError):
            trotter_gates(ModelParams(gamma=0.6, hz=0.0, length=4), -0.01)

    def test_rejects_oversized_step(self):
        with pytest.raises(ValueError):
            trotter_gates(ModelParams(gamma=0.6, hz=0.0, length=4), 0.2)

    def test_ising_limit_field_free_gates_diagonal(self):
        # gamma=0, hz=0: only the coupling survives, so every gate commutes
        # with sigma^z x sigma^z and is diagonal in the z basis.
        sched = trotter_gates(ModelParams(gamma=0.0, hz=0.0, length=4), 0.05)
        for layer in sched.layers:
            for _, g in layer:
                np.testing.assert_allclose(g, np.diag(np.diag(g)), atol=1e-15)

    def test_step_error_third_order(self):
        params = ModelParams(gamma=np.pi / 8, hz=0.0, length=8)
        h = dense_hamiltonian(params)

        from ndsf.model import _embed

        def one_step_error(dt):
            exact = scipy.linalg.expm(-1j * h * dt)
            approx = np.eye(2**8, dtype=complex)
            sched = trotter_gates(params, dt, "forward")
            for layer in sched.layers:
                for sites, g in layer:
                    approx = _embed(g, sites, 8) @ approx
            return np.max(np.abs(exact - approx))

        err_coarse = one_step_error(0.05)
        err_fine = one_step_error(0.025)
        assert err_coarse <= 1e-4
        assert err_fine <= 1.3e-5
        # third-order per-step scaling: halving dt cuts the error ~8x
        assert err_coarse / err_fine > 6.0

    def test_forward_backward_round_trip(self):
        params = ModelParams(gamma=0.5, hz=0.2, length=6)
        fwd = trotter_gates(params, 0.05, "forward")
        bwd = trotter_gates(params, 0.05, "backward")
        rng = np.random.default_rng(7)
        psi = rng.standard_normal(2**6) + 1j * rng.standard_normal(2**6)
        psi /= np.linalg.norm(psi)
        from ndsf.model import _embed

        out = psi.copy()
        for sched in (fwd, bwd):
            for layer in sched.layers:
                for sites, g in layer:
                    out = _embed(g, sites, 6) @ out
        # backward layers mirror the forward ones, so the composite is exact
        np.testing.assert_allclose(out, psi, atol=1e-12)


class TestProductState:
    def test_fmz_expectations(self):
        state = product_state("FMZ", 8)
        np.testing.assert_allclose(state.expectation("z"), np.ones(8))

    def test_fmx_expectations(self):
        state = product_state("FMX", 8)
        np.testing.assert_allclose(state.expectation("x"), np.ones(8))
        np.testing.assert_allclose(state.expectation("z"), np.zeros(8), atol=1e-15)

    def test_neel_alternation(self):
        state = product_state("NEEL", 4)
        np.testing.assert_allclose(state.expectation("z"), [1, -1, 1, -1])

    def test_site_vectors_normalized(self):
        for kind in ("FMZ", "FMX", "NEEL"):
            state = product_state(kind, 6)
            for v in state.vectors:
                assert abs(np.linalg.norm(v) - 1.0) < 1e-14

    def test_rejects_odd_length(self):
        with pytest.raises(ValueError):
            product_state("FMZ", 5)


class TestLocalOperatorMps:
    def test_bond_extents_one(self):
        op = local_operator_mps("z", 3, 8)
        assert op.bond_dims() == [1] * 9
        assert op.time_stamp == 0.0
        assert op.accumulated_discard == 0.0

    def test_expectation_on_fmz(self):
        op = local_operator_mps("z", 3, 8)
        state = product_state("FMZ", 8)
        vec = state_vector(state)
        assert abs(np.vdot(vec, op.to_dense() @ vec) - 1.0) < 1e-13

    def test_dense_reconstruction(self):
        op = local_operator_mps("z", 2, 6)
        oracle = kron_chain([ID2, SZ, ID2, ID2, ID2, ID2])
        np.testing.assert_allclose(op.to_dense(), oracle, atol=1e-14)

    def test_rejects_out_of_range_site(self):
        with pytest.raises(ValueError):
            local_operator_mps("z", 9, 8)
