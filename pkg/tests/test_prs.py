from math import comb

import numpy as np
import pytest

from rsedlab.bitcore import SystemShape, join
from rsedlab.otoc import otoc_pauli_dense
from rsedlab.prs import (
    DensityMatrix,
    HadamardLayer,
    RandomClifford,
    TLayer,
    TypeVector,
    append_layer,
    coherence_rel_entropy,
    design_variance_condition,
    element_condition_check,
    entanglement_entropy,
    hybrid3_state,
    subset_phase_state,
    sym_projector_state,
    trace_distance,
)
from rsedlab.randomness import (
    identity_permutation,
    sample_permutation,
    sample_sign_function,
    zero_sign_function,
)
from rsedlab.rng import RngSeed, WordStream
from rsedlab.rsed import PauliString, StateVector, dense_matrix
from rsedlab.subsystem import hadamard_layer, hadamard_sign_power, random_sign_hadamard

LN2 = np.log(2.0)


def test_subset_phase_state_basics():
    shape = SystemShape(6, 4)
    p = sample_permutation(shape, RngSeed(1))
    f = sample_sign_function(shape, RngSeed(2))
    psi = subset_phase_state(p, f, 2, shape)
    assert abs(psi.norm - 1.0) < 1e-12
    support = np.abs(psi.amplitudes) > 1e-14
    assert support.sum() == shape.subdim
    assert coherence_rel_entropy(psi) == pytest.approx(shape.k * LN2, abs=1e-9)


def test_subset_phase_state_full_k_uniform():
    shape = SystemShape(3, 3)
    psi = subset_phase_state(identity_permutation(shape), zero_sign_function(shape), 0, shape)
    assert np.allclose(psi.amplitudes, 1 / np.sqrt(8))


def test_coherence_examples():
    shape = SystemShape(5, 2)
    basis = StateVector.basis(shape, 0)
    assert coherence_rel_entropy(basis) == 0.0
    uniform = StateVector(shape, np.full(32, 1 / np.sqrt(32), dtype=complex))
    assert coherence_rel_entropy(uniform) == pytest.approx(5 * LN2)
    assert coherence_rel_entropy(uniform, unit="bits") == pytest.approx(5.0)
    rho = DensityMatrix.pure(uniform.amplitudes)
    assert coherence_rel_entropy(rho) == pytest.approx(5 * LN2, abs=1e-8)


def test_type_vector():
    tv = TypeVector((1, 1, 3))
    assert tv.t == 3 and tv.distinct == 2
    with pytest.raises(ValueError):
        TypeVector((3, 1))


def test_hybrid3_small_cases():
    shape = SystemShape(2, 1)
    p = sample_permutation(shape, RngSeed(3))
    rho = hybrid3_state(p, 1, shape, 1)
    evals = np.linalg.eigvalsh(rho.entries)
    assert np.sum(evals > 1e-12) == 2
    assert evals[-1] == pytest.approx(0.5)
    shape = SystemShape(4, 2)
    rho2 = hybrid3_state(sample_permutation(shape, RngSeed(4)), 0, shape, 2)
    assert np.trace(rho2.entries).real == pytest.approx(1.0)
    assert rho2.min_eigenvalue() >= -1e-9


def test_hybrid3_full_vs_subset_basis():
    """The full-space matrix is the subset-basis matrix embedded at the
    permuted positions; trace distances agree."""
    shape = SystemShape(3, 2)
    p = sample_permutation(shape, RngSeed(5))
    t = 2
    full = hybrid3_state(p, 1, shape, t, basis="full")
    sub = hybrid3_state(p, 1, shape, t, basis="subset")
    xs = np.array([join(b, 1, shape) for b in range(shape.subdim)], dtype=np.uint32)
    pos = p.forward_array(xs)
    N = shape.dim
    tuple_idx = np.array([pos[b1] * N + pos[b2] for b1 in range(4) for b2 in range(4)])
    embedded = full.entries[np.ix_(tuple_idx, tuple_idx)]
    assert np.max(np.abs(embedded - sub.entries)) < 1e-12
    assert np.trace(embedded).real == pytest.approx(1.0)


def test_hybrid3_vs_sym_projector_bound():
    """TD(hybrid3, sym projector) = (missing diagonal-pair weight) which is
    well inside 4 t^2 / K at K=16, t=2."""
    shape = SystemShape(4, 4)
    p = identity_permutation(shape)
    t = 2
    hyb = hybrid3_state(p, 0, shape, t, basis="subset")
    sym = sym_projector_state(shape.subdim, t)
    td = trace_distance(hyb, sym)
    K = shape.subdim
    d_sym = comb(K + t - 1, t)
    d_types = comb(K, t)
    expected = 1.0 - d_types / d_sym  # uniform-mixture support mismatch
    assert td == pytest.approx(expected, abs=1e-10)
    assert td <= 4.0 * t**2 / K


def test_sym_projector_examples():
    s1 = sym_projector_state(3, 1)
    assert np.allclose(s1.entries, np.eye(3) / 3.0)
    s2 = sym_projector_state(2, 2)
    proj = s2.entries * 3.0  # triplet projector
    assert np.allclose(proj @ proj, proj, atol=1e-12)
    singlet = np.array([0.0, 1.0, -1.0, 0.0]) / np.sqrt(2)
    assert np.max(np.abs(proj @ singlet)) < 1e-12
    for d, t in ((2, 2), (2, 3), (4, 2)):
        s = sym_projector_state(d, t)
        rank = np.sum(np.linalg.eigvalsh(s.entries) > 1e-12)
        assert rank == comb(d + t - 1, t)


def test_trace_distance_properties():
    rho = sym_projector_state(2, 2)
    assert trace_distance(rho, rho) == pytest.approx(0.0, abs=1e-12)
    e0 = DensityMatrix.pure(np.array([1.0, 0.0], dtype=complex))
    e1 = DensityMatrix.pure(np.array([0.0, 1.0], dtype=complex))
    assert trace_distance(e0, e1) == pytest.approx(1.0)
    stream = WordStream(RngSeed(6))
    for _ in range(100):
        states = stream.standard_normal(12).reshape(3, 4)
        mats = []
        for row in states:
            v = row[:2] + 1j * row[2:]
            v = v / np.linalg.norm(v)
            mats.append(DensityMatrix.pure(v))
        a, b, c = mats
        assert trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-12


def test_design_variance_condition():
    h = hadamard_layer(3)
    res = design_variance_condition(h, 2, 0)
    assert res.value == pytest.approx(0.0, abs=1e-12) and not res.degenerate
    ident = np.eye(8, dtype=complex)
    from rsedlab.subsystem import SubUnitary

    res_i = design_variance_condition(SubUnitary(3, ident), 2, 0)
    assert res_i.degenerate


def test_design_variance_flat_vs_powered():
    """One application of H^{x6}P keeps |u|^2 flat, so Ybar = 0 exactly; the
    fourth power has chi-squared-product column statistics with Ybar = O(1)
    (E[(g1^2 g2^2 - 1)^2] = 8 for Gaussian entries), far above K^{-1/2};
    only flat-magnitude gates meet that threshold (see notes)."""
    flat = design_variance_condition(hadamard_sign_power(6, RngSeed(7), 1), 2, 5)
    assert flat.value == pytest.approx(0.0, abs=1e-12)
    vals = [design_variance_condition(hadamard_sign_power(6, RngSeed(7, s), 4), 2, 5).value for s in range(5)]
    assert all(v > (1 << 6) ** -0.5 for v in vals)
    assert 3.0 <= np.mean(vals) <= 20.0


def test_element_condition_check():
    assert element_condition_check(hadamard_layer(4), 0.9).passed
    from rsedlab.subsystem import SubUnitary

    res = element_condition_check(SubUnitary(3, np.eye(8, dtype=complex)), 0.5)
    assert not res.passed and res.max_column_fraction == pytest.approx(1.0 / 8)


def test_element_condition_statistics_k8():
    """(H^{x8}P)^4 at eps = 0.3 passes in at least 99/100 seeds; at the
    aggressive eps = 0.5 the exceed fraction stays tiny but stray entries do
    occur (see notes), so only the fraction is asserted there."""
    passes = 0
    fracs = []
    for s in range(100):
        u = hadamard_sign_power(8, RngSeed(8, s), 4)
        if element_condition_check(u, 0.3).passed:
            passes += 1
        fracs.append(element_condition_check(u, 0.5).max_column_fraction)
    assert passes >= 99
    assert np.mean(fracs) < 1e-2  # per-column worst case; global mean ~1e-4


def test_append_layer_examples():
    shape = SystemShape(4, 2)
    psi = StateVector.basis(shape, 0)
    same = append_layer(psi, HadamardLayer(()))
    assert (same.amplitudes == psi.amplitudes).all()
    full = append_layer(psi, HadamardLayer(tuple(range(4))))
    assert np.allclose(full.amplitudes, 1 / 4.0)
    assert coherence_rel_entropy(full) == pytest.approx(4 * LN2)
    t_layer = append_layer(full, TLayer((0, 2)))
    assert abs(t_layer.norm - 1.0) < 1e-12
    cliff = append_layer(psi, RandomClifford(RngSeed(9)))
    assert abs(cliff.norm - 1.0) < 1e-12


def test_coherence_enhancement_after_hadamard_layer():
    n, k = 10, 5
    shape = SystemShape(n, k)
    passes = 0
    for s in range(20):
        p = sample_permutation(shape, RngSeed(10, s))
        f = sample_sign_function(shape, RngSeed(11, s))
        psi = subset_phase_state(p, f, 0, shape)
        phi = append_layer(psi, HadamardLayer(tuple(range(n))))
        if coherence_rel_entropy(phi) >= 0.25 * n * LN2:
            passes += 1
    assert passes >= 19


def test_otoc_invariant_under_onsite_layer():
    """For U' = L U with L a tensor product of single-site gates,
    O(U', V, W) = O(U, L^dag V L, W); checked dense with L a T layer."""
    from rsedlab.circuits import GateCircuit, simulate_circuit
    from rsedlab.randomness import sample_permutation as sp, sample_sign_function as sf
    from rsedlab.rsed import RsedOperator

    n, k = 6, 3
    shape = SystemShape(n, k)
    op = RsedOperator(shape, sp(shape, RngSeed(12)), sf(shape, RngSeed(13)), random_sign_hadamard(k, RngSeed(14)))
    u = dense_matrix(op)
    t_site = 1
    l_circ = GateCircuit(n, (("T", t_site),))
    l_mat = simulate_circuit(l_circ, dense=True)
    v = PauliString(((t_site, "X"),))
    w = PauliString(((4, "Z"),))
    lhs = otoc_pauli_dense(l_mat @ u, v, w)
    # L^dag X L for a T gate rotates X in the XY plane; compare via dense
    vd = np.zeros((2**n, 2**n), dtype=complex)
    from rsedlab.rsed import pauli_action

    src, ph = pauli_action(v, n)
    vd[np.arange(2**n), src] = ph
    v_rot = l_mat.conj().T @ vd @ l_mat
    m = u @ _pauli_dense(w, n) @ u.conj().T
    g = v_rot @ m
    rhs = np.trace(g @ g) / 2**n
    assert abs(lhs - rhs) < 1e-9


def _pauli_dense(s, n):
    from rsedlab.rsed import pauli_action

    src, ph = pauli_action(s, n)
    m = np.zeros((2**n, 2**n), dtype=complex)
    m[np.arange(2**n), src] = ph
    return m


def test_entanglement_entropy_examples():
    shape = SystemShape(2, 1)
    product = StateVector(shape, np.kron([1, 0], [1 / np.sqrt(2), 1 / np.sqrt(2)]).astype(complex))
    assert entanglement_entropy(product, [0]) == pytest.approx(0.0, abs=1e-12)
    bell = StateVector(shape, np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2))
    assert entanglement_entropy(bell, [0]) == pytest.approx(LN2)
    assert entanglement_entropy(bell, [1]) == pytest.approx(LN2)
    shape4 = SystemShape(4, 2)
    psi = StateVector(shape4, WordStream(RngSeed(15)).standard_normal(16).astype(complex))
    psi = StateVector(shape4, psi.amplitudes / psi.norm)
    assert entanglement_entropy(psi, [0, 2]) == pytest.approx(entanglement_entropy(psi, [1, 3]), abs=1e-10)
    with pytest.raises(ValueError):
        entanglement_entropy(bell, [])
    with pytest.raises(ValueError):
        entanglement_entropy(bell, [0, 1])


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        DensityMatrix(2, np.array([[0.5, 0.5], [0.2, 0.5]]))
    with pytest.raises(ValueError):
        DensityMatrix(2, np.eye(2) * 0.7)
