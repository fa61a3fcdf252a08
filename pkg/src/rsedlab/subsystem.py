"""Embedded K x K unitaries and Hamiltonians: Hadamard layers, random-sign
Hadamard, the Pauli spin-SYK model, parent Hamiltonians, real-time powers."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.linalg import schur

from .rng import RngSeed, WordStream

MAX_SUB_QUBITS = 12  # dense K x K with K = 2**k capped at 4096

UNITARITY_TOL = 1e-10
HERMITICITY_TOL = 1e-10


def _check_k(k: int) -> None:
    if not 1 <= k <= MAX_SUB_QUBITS:
        raise ValueError(f"k must be in [1, {MAX_SUB_QUBITS}], got {k}")


@dataclass(frozen=True)
class SubUnitary:
    """Dense K x K unitary acting on the embedded subsystem."""

    k: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        _check_k(self.k)
        m = np.asarray(self.matrix, dtype=np.complex128)
        object.__setattr__(self, "matrix", m)
        K = 1 << self.k
        if m.shape != (K, K):
            raise ValueError(f"expected shape {(K, K)}, got {m.shape}")
        dev = np.max(np.abs(m.conj().T @ m - np.eye(K)))
        if dev > UNITARITY_TOL:
            raise ValueError(f"matrix is not unitary (deviation {dev:.3g})")

    @property
    def dim(self) -> int:
        return 1 << self.k

    def adjoint(self) -> "SubUnitary":
        return SubUnitary(self.k, self.matrix.conj().T)


@dataclass(frozen=True)
class SubHamiltonian:
    """Dense K x K Hermitian matrix with its eigendecomposition cached."""

    k: int
    matrix: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(init=False, repr=False)
    eigenvectors: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        _check_k(self.k)
        m = np.asarray(self.matrix, dtype=np.complex128)
        object.__setattr__(self, "matrix", m)
        K = 1 << self.k
        if m.shape != (K, K):
            raise ValueError(f"expected shape {(K, K)}, got {m.shape}")
        dev = np.max(np.abs(m - m.conj().T))
        if dev > HERMITICITY_TOL:
            raise ValueError(f"matrix is not Hermitian (deviation {dev:.3g})")
        lam, vec = np.linalg.eigh(m)
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "eigenvectors", vec)

    @property
    def dim(self) -> int:
        return 1 << self.k


def hadamard_layer(k: int) -> SubUnitary:
    """u = H tensor-power k: entries 2**(-k/2) * (-1)**(b . b')."""
    _check_k(k)
    h1 = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
    m = np.array([[1.0]])
    for _ in range(k):
        m = np.kron(m, h1)
    return SubUnitary(k, m.astype(np.complex128))


def random_sign_diag(k: int, seed: RngSeed) -> SubUnitary:
    """Diagonal P with entries (-1)**phi(b), phi seeded."""
    _check_k(k)
    bits = WordStream(seed).bits(1 << k)
    return SubUnitary(k, np.diag((1.0 - 2.0 * bits).astype(np.complex128)))


def random_sign_hadamard(k: int, seed: RngSeed) -> SubUnitary:
    """u = H^{tensor k} P, the workhorse non-chaotic embedded gate."""
    h = hadamard_layer(k).matrix
    p = random_sign_diag(k, seed).matrix
    return SubUnitary(k, h @ p)


def _single_site(op: np.ndarray, m: int, k: int) -> np.ndarray:
    """op on qubit m; bit m of the basis index addresses qubit m."""
    out = np.array([[1.0 + 0.0j]])
    for q in range(k - 1, -1, -1):
        out = np.kron(out, op if q == m else np.eye(2, dtype=np.complex128))
    return out


def pauli_syk(k: int, seed: RngSeed, couplings: np.ndarray | None = None) -> SubHamiltonian:
    """All-to-all four-body random Hamiltonian over Pauli Majorana labels.

    chi_{2m-1} = X_m, chi_{2m} = Y_m (labels 1-based), couplings J standard
    normal.  Each term carries i**eta with eta the number of same-site label
    pairs among the four (0, 1, or 2), which is exactly the phase needed to
    keep every term Hermitian.  The result is rescaled by 1/max(|E_min|,
    |E_max|) so the spectrum lies in [-1, 1] with one endpoint at magnitude 1.
    """
    if k < 2:
        raise ValueError(f"pauli_syk needs k >= 2, got k={k}")
    _check_k(k)
    n_maj = 2 * k
    K = 1 << k
    x = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
    y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)
    chi = []
    for label in range(1, n_maj + 1):
        site = (label + 1) // 2 - 1
        chi.append(_single_site(x if label % 2 == 1 else y, site, k))
    quads = list(combinations(range(1, n_maj + 1), 4))
    if couplings is None:
        couplings = WordStream(seed).standard_normal(len(quads))
    couplings = np.asarray(couplings, dtype=np.float64)
    if couplings.shape != (len(quads),):
        raise ValueError(f"expected {len(quads)} couplings, got {couplings.shape}")
    site_of = lambda label: (label + 1) // 2
    h = np.zeros((K, K), dtype=np.complex128)
    for J, (a, b, c, d) in zip(couplings, quads):
        eta = int(site_of(a) == site_of(b)) + int(site_of(b) == site_of(c)) + int(site_of(c) == site_of(d))
        h += J * (1j ** eta) * (chi[a - 1] @ chi[b - 1] @ chi[c - 1] @ chi[d - 1])
    lam = np.linalg.eigvalsh(h)
    scale = max(abs(lam[0]), abs(lam[-1]))
    if scale > 0:
        h = h / scale
    return SubHamiltonian(k, h)


def _unitary_eigh(u: SubUnitary) -> tuple[np.ndarray, np.ndarray]:
    """Eigenphases theta in (-pi, pi] and an orthonormal eigenbasis.

    Schur of a normal matrix is diagonal, so Z gives orthonormal eigenvectors
    even under degeneracies (unlike np.linalg.eig).
    """
    t_mat, z = schur(u.matrix, output="complex")
    ev = np.diag(t_mat)
    if np.max(np.abs(np.abs(ev) - 1.0)) > 1e-8:
        raise ValueError("input is not unitary to working precision")
    return np.angle(ev), z


def _phase_branch(theta: np.ndarray) -> np.ndarray:
    lam = -theta / (2.0 * np.pi)
    lam[np.isclose(lam, -0.5, atol=1e-12)] = 0.5
    return lam


def parent_hamiltonian(u: SubUnitary) -> SubHamiltonian:
    """h = (i/2pi) log u, branch fixed so exp(-2 pi i h) = u and the
    eigenvalue -1 maps to +1/2 (spectrum in (-1/2, 1/2])."""
    theta, z = _unitary_eigh(u)
    lam = _phase_branch(theta)
    h = (z * lam[None, :]) @ z.conj().T
    h = 0.5 * (h + h.conj().T)
    return SubHamiltonian(u.k, h)


def parent_spectrum(u: SubUnitary) -> np.ndarray:
    """Sorted eigenvalues of the parent Hamiltonian, without the dense
    reconstruction (same branch as parent_hamiltonian)."""
    m = u.matrix
    if np.max(np.abs(m.imag)) < 1e-14:
        m = m.real  # real orthogonal input: real eigensolver is ~4x faster
    ev = np.linalg.eigvals(m)
    if np.max(np.abs(np.abs(ev) - 1.0)) > 1e-8:
        raise ValueError("input is not unitary to working precision")
    return np.sort(_phase_branch(np.angle(ev)))


def unitary_power(u: SubUnitary, t) -> SubUnitary:
    """u**t: repeated multiplication for Python ints t >= 0, eigenpath
    V e^{i theta t} V^dagger (theta in (-pi, pi]) for real t."""
    if isinstance(t, (int, np.integer)):
        if t < 0:
            raise ValueError("integer powers must be >= 0")
        return SubUnitary(u.k, np.linalg.matrix_power(u.matrix, int(t)))
    theta, z = _unitary_eigh(u)
    m = (z * np.exp(1j * theta * float(t))[None, :]) @ z.conj().T
    return SubUnitary(u.k, m)


def evolve(h: SubHamiltonian, t: float) -> SubUnitary:
    """e^{-i h t} via the cached eigendecomposition."""
    phases = np.exp(-1j * h.eigenvalues * float(t))
    m = (h.eigenvectors * phases[None, :]) @ h.eigenvectors.conj().T
    return SubUnitary(h.k, m)


def _dense_h(k: int) -> np.ndarray:
    h1 = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
    m = np.array([[1.0]])
    for _ in range(k):
        m = np.kron(m, h1)
    return m


def walsh_hadamard(matrix: np.ndarray) -> np.ndarray:
    """H^{tensor k} @ matrix via a blocked tensor split (two BLAS calls).

    The row index splits into (high k1 bits, low k2 bits) and H^{tensor k}
    factorizes accordingly, so the transform is two dense multiplications by
    small Hadamard blocks instead of one K x K product.
    """
    m = np.asarray(matrix)
    K = m.shape[0]
    k = K.bit_length() - 1
    cols = m.reshape(K, -1).shape[1]
    k1 = k // 2
    k2 = k - k1
    K1, K2 = 1 << k1, 1 << k2
    if k1 == 0:
        return (_dense_h(k2) @ m.reshape(K, -1)).reshape(m.shape)
    t = _dense_h(k1) @ m.reshape(K1, K2 * cols)
    t = t.reshape(K1, K2, cols).transpose(1, 0, 2).reshape(K2, K1 * cols)
    t = _dense_h(k2) @ t
    out = t.reshape(K2, K1, cols).transpose(1, 0, 2).reshape(K, cols)
    return out.reshape(m.shape)


def hadamard_sign_power(k: int, seed: RngSeed, t: int) -> SubUnitary:
    """(H^{tensor k} P)^t for integer t via blocked transforms."""
    if t < 0:
        raise ValueError("t must be >= 0")
    K = 1 << k
    signs = 1.0 - 2.0 * WordStream(seed).bits(K).astype(np.float64)
    m = np.eye(K)
    for _ in range(t):
        m = walsh_hadamard(signs[:, None] * m)
    return SubUnitary(k, m)


def element_magnitude_stats(u: SubUnitary, eps: float | None = None):
    """Exact |u_{b,b'}|**2 statistics over all K**2 entries.

    Returns (max, mean, fraction exceeding K**-eps); the fraction is None
    when eps is not given.
    """
    m = np.abs(u.matrix) ** 2
    frac = None
    if eps is not None:
        frac = float(np.mean(m >= u.dim ** (-eps)))
    return float(m.max()), float(m.mean()), frac
