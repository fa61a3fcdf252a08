import numpy as np
import pytest

from rsedlab.rng import RngSeed, WordStream
from rsedlab.subsystem import (
    SubHamiltonian,
    SubUnitary,
    element_magnitude_stats,
    evolve,
    hadamard_layer,
    hadamard_sign_power,
    parent_hamiltonian,
    pauli_syk,
    random_sign_diag,
    random_sign_hadamard,
    unitary_power,
    walsh_hadamard,
)

X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)


def test_hadamard_entries():
    h1 = hadamard_layer(1)
    assert np.allclose(h1.matrix, np.array([[1, 1], [1, -1]]) / np.sqrt(2))
    h2 = hadamard_layer(2)
    # entry (3, 3): parity of 0b11 . 0b11 is even
    assert h2.matrix[3, 3] == pytest.approx(0.5)
    for k in range(1, 7):
        h = hadamard_layer(k)
        assert np.max(np.abs(h.matrix @ h.matrix - np.eye(h.dim))) < 1e-12


def test_random_sign_diag():
    p = random_sign_diag(4, RngSeed(8))
    assert np.max(np.abs(p.matrix @ p.matrix - np.eye(16))) == 0.0
    p2 = random_sign_diag(4, RngSeed(8))
    assert (p.matrix == p2.matrix).all()
    zero_bits = SubUnitary(2, np.eye(4, dtype=complex))
    assert np.allclose(zero_bits.matrix, np.eye(4))


def test_pauli_syk_k2_single_term():
    """Single quadruple chi1 chi2 chi3 chi4 = -Z1 Z2 with two same-site
    pairs (phase i^2); normalized spectrum is {-1,-1,+1,+1}."""
    h = pauli_syk(2, RngSeed(1))
    evals = np.sort(h.eigenvalues)
    assert np.allclose(evals, [-1.0, -1.0, 1.0, 1.0], atol=1e-12)
    zz = np.kron(Z, Z)  # Z on both qubits in either ordering
    assert np.allclose(np.abs(h.matrix), np.abs(zz))


def test_pauli_syk_hermitian_and_normalized():
    for k in (2, 3, 4):
        h = pauli_syk(k, RngSeed(20, k))
        assert np.max(np.abs(h.matrix - h.matrix.conj().T)) <= 1e-10
    for s in range(20):
        h = pauli_syk(5, RngSeed(21, s))
        lam = h.eigenvalues
        assert max(abs(lam[0]), abs(lam[-1])) == pytest.approx(1.0, abs=1e-9)
        assert lam[0] >= -1.0 - 1e-9 and lam[-1] <= 1.0 + 1e-9


def test_pauli_syk_requires_k2():
    with pytest.raises(ValueError):
        pauli_syk(1, RngSeed(0))


def test_pauli_syk_chaotic_matrix_elements():
    """e^{-i h t} has mean |entry|^2 = 1/K for t >= 1 (within factor 3)."""
    h = pauli_syk(4, RngSeed(22))
    for t in (1.0, 2.5, 4.0):
        u = evolve(h, t)
        _, mean, _ = element_magnitude_stats(u)
        assert mean * u.dim == pytest.approx(1.0, rel=2.0)


def test_parent_hamiltonian_identity_and_branch():
    h0 = parent_hamiltonian(SubUnitary(1, np.eye(2, dtype=complex)))
    assert np.max(np.abs(h0.matrix)) < 1e-12
    hb = parent_hamiltonian(SubUnitary(1, Z))
    assert np.allclose(np.sort(hb.eigenvalues), [0.0, 0.5], atol=1e-12)


def test_parent_hamiltonian_roundtrip():
    u = random_sign_hadamard(4, RngSeed(31))
    h = parent_hamiltonian(u)
    back = evolve(h, 2.0 * np.pi)
    assert np.max(np.abs(back.matrix - u.matrix)) < 1e-8


def test_nonunitary_rejected_at_construction():
    with pytest.raises(ValueError):
        SubUnitary(2, np.eye(4, dtype=complex) * 1.5)


def test_unitary_power_paths():
    u = random_sign_hadamard(3, RngSeed(41))
    assert np.allclose(unitary_power(u, 0).matrix, np.eye(8))
    assert (unitary_power(u, 1).matrix == u.matrix).all()
    h = hadamard_layer(4)
    eig2 = unitary_power(h, 2.0).matrix
    int2 = unitary_power(h, 2).matrix
    assert np.max(np.abs(eig2 - np.eye(16))) < 1e-9
    assert np.max(np.abs(int2 - np.eye(16))) < 1e-12
    assert np.max(np.abs(eig2 - int2)) < 1e-9


def test_unitary_power_paths_agree_random_sign_hadamard():
    for k in (2, 4, 6):
        u = random_sign_hadamard(k, RngSeed(42, k))
        for t in (2, 3, 4):
            a = unitary_power(u, t).matrix
            b = unitary_power(u, float(t)).matrix
            assert np.max(np.abs(a - b)) < 1e-8


def test_evolve_examples():
    hz = SubHamiltonian(1, Z)
    assert np.allclose(evolve(hz, 0.0).matrix, np.eye(2))
    assert np.max(np.abs(evolve(hz, np.pi).matrix + np.eye(2))) < 1e-12
    h = pauli_syk(4, RngSeed(43))
    lhs = evolve(h, 0.7).matrix @ evolve(h, 1.6).matrix
    rhs = evolve(h, 2.3).matrix
    assert np.max(np.abs(lhs - rhs)) < 1e-8
    dev = np.max(np.abs(evolve(h, 3.0).matrix @ evolve(h, 3.0).matrix.conj().T - np.eye(16)))
    assert dev < 1e-9


def test_element_magnitude_stats():
    h = hadamard_layer(3)
    mx, mean, frac = element_magnitude_stats(h, eps=0.5)
    assert mx == pytest.approx(2.0**-3)
    assert mean == pytest.approx(2.0**-3)
    assert frac == 0.0
    ident = SubUnitary(3, np.eye(8, dtype=complex))
    mx, mean, _ = element_magnitude_stats(ident)
    assert mx == 1.0 and mean == pytest.approx(2.0**-3)


def test_element_magnitude_tail_random_sign_hadamard():
    """(H^{x8}P)^4: fraction of |u|^2 >= K^{-1/2} stays below 1e-3."""
    fracs = []
    for s in range(5):
        u = hadamard_sign_power(8, RngSeed(44, s), 4)
        _, _, frac = element_magnitude_stats(u, eps=0.5)
        fracs.append(frac)
    assert max(fracs) < 1e-3


def test_walsh_hadamard_matches_dense():
    m = WordStream(RngSeed(45)).standard_normal(64 * 5).reshape(64, 5)
    dense = hadamard_layer(6).matrix.real @ m
    assert np.max(np.abs(walsh_hadamard(m) - dense)) < 1e-10


def test_hadamard_sign_power_matches_unitary_power():
    u = random_sign_hadamard(5, RngSeed(46))
    for t in (0, 1, 3):
        fast = hadamard_sign_power(5, RngSeed(46), t)
        slow = unitary_power(u, t)
        assert np.max(np.abs(fast.matrix - slow.matrix)) < 1e-10


def test_subhamiltonian_invariants():
    h = pauli_syk(3, RngSeed(47))
    recon = (h.eigenvectors * h.eigenvalues[None, :]) @ h.eigenvectors.conj().T
    assert np.max(np.abs(recon - h.matrix)) < 1e-8
    with pytest.raises(ValueError):
        SubHamiltonian(2, np.arange(16).reshape(4, 4).astype(complex))
