"""Pseudorandom-state diagnostics: coherence, subset-phase states, type-state
mixtures, symmetric-subspace references, trace distance, design-condition
checks, and resource layers (Clifford/T/Hadamard appending)."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, permutations
from math import comb, factorial
from typing import NamedTuple

import numpy as np

from .bitcore import SystemShape, join
from .circuits import random_clifford_gates
from .randomness import SignFunction, SubsetPermutation
from .rng import RngSeed
from .rsed import StateVector, gate_cx, gate_h, gate_phase
from .subsystem import SubUnitary

TCOPY_MAX_QUBITS = 16  # dense t-copy algebra capped at dimension 2**16

_LN2 = float(np.log(2.0))


@dataclass(frozen=True)
class DensityMatrix:
    """Dense d x d state container; Hermiticity and unit trace checked."""

    dim: int
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=np.complex128)
        object.__setattr__(self, "entries", m)
        if m.shape != (self.dim, self.dim):
            raise ValueError(f"expected shape {(self.dim, self.dim)}, got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > 1e-10:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > 1e-9 or abs(np.trace(m).imag) > 1e-9:
            raise ValueError(f"trace is {np.trace(m)}, expected 1")

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.entries)[0])

    @classmethod
    def from_states(cls, states: np.ndarray, weights: np.ndarray | None = None) -> "DensityMatrix":
        """Mixture sum_i w_i |s_i><s_i| from rows of `states`."""
        states = np.asarray(states, dtype=np.complex128)
        if weights is None:
            weights = np.full(states.shape[0], 1.0 / states.shape[0])
        m = (states.conj().T * weights[None, :]) @ states
        return cls(states.shape[1], m)

    @classmethod
    def pure(cls, psi: np.ndarray) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=np.complex128)
        return cls(len(psi), np.outer(psi, psi.conj()))


@dataclass(frozen=True)
class TypeVector:
    """Multiset of subsystem indices with counts summing to t."""

    indices: tuple[int, ...]  # sorted, one entry per copy

    def __post_init__(self):
        if len(self.indices) == 0:
            raise ValueError("type vector must have at least one entry")
        if tuple(sorted(self.indices)) != self.indices:
            raise ValueError("indices must be sorted")

    @property
    def t(self) -> int:
        return len(self.indices)

    @property
    def distinct(self) -> int:
        return len(set(self.indices))


def subset_phase_state(
    p: SubsetPermutation, f: SignFunction, a: int, shape: SystemShape
) -> StateVector:
    """psi = 2**(-k/2) sum_b (-1)^{f(join(b,a))} |p(join(b,a))>."""
    if not 0 <= a < shape.num_seeds:
        raise ValueError(f"seed {a} out of range [0, {shape.num_seeds})")
    xs = np.array([join(b, a, shape) for b in range(shape.subdim)], dtype=np.uint32)
    pos = p.forward_array(xs)
    sg = 1.0 - 2.0 * f.sign_array(xs).astype(np.float64)
    amps = np.zeros(shape.dim, dtype=np.complex128)
    amps[pos] = sg / np.sqrt(shape.subdim)
    return StateVector(shape, amps)


def _shannon(probs: np.ndarray) -> float:
    probs = probs[probs > 1e-300]
    return float(-np.sum(probs * np.log(probs)))


def coherence_rel_entropy(state, unit: str = "nats") -> float:
    """Relative entropy of coherence S(diag rho) - S(rho), >= 0."""
    if unit not in ("nats", "bits"):
        raise ValueError("unit must be 'nats' or 'bits'")
    if isinstance(state, StateVector):
        val = _shannon(np.abs(state.amplitudes) ** 2)
    elif isinstance(state, DensityMatrix):
        diag = np.real(np.diag(state.entries))
        eigs = np.linalg.eigvalsh(state.entries)
        eigs = np.clip(eigs, 0.0, None)
        val = _shannon(diag) - _shannon(eigs)
    else:
        raise TypeError(f"unsupported state type {type(state)!r}")
    return val / _LN2 if unit == "bits" else val


def _type_state(positions: np.ndarray, subset: tuple[int, ...], dim: int) -> np.ndarray:
    """Symmetrized distinct-index state over t copies, full dimension dim**t."""
    t = len(subset)
    amps = np.zeros(dim ** len(subset), dtype=np.complex128)
    for order in permutations(subset):
        idx = 0
        for b in order:
            idx = idx * dim + int(positions[b])
        amps[idx] += 1.0
    return amps / np.sqrt(factorial(t))


def hybrid3_state(
    p: SubsetPermutation, a: int, shape: SystemShape, t: int, basis: str = "full"
) -> DensityMatrix:
    """Uniform mixture over symmetrized t-tuples of distinct subset indices.

    basis='full' places copies in the 2**(n t)-dimensional computational
    space at positions p(join(b, a)); basis='subset' relabels the support to
    b in [0, K), giving the same matrix on K**t dimensions.
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    K = shape.subdim
    if t > K:
        raise ValueError("distinct-index types need t <= K")
    if basis == "full":
        if shape.n * t > TCOPY_MAX_QUBITS:
            raise ValueError(f"t-copy algebra capped at {TCOPY_MAX_QUBITS} qubits")
        dim = shape.dim
        xs = np.array([join(b, a, shape) for b in range(K)], dtype=np.uint32)
        positions = p.forward_array(xs)
    elif basis == "subset":
        if shape.k * t > TCOPY_MAX_QUBITS:
            raise ValueError(f"t-copy algebra capped at {TCOPY_MAX_QUBITS} qubits")
        dim = K
        positions = np.arange(K)
    else:
        raise ValueError(f"unknown basis {basis!r}")
    total = dim**t
    rho = np.zeros((total, total), dtype=np.complex128)
    count = comb(K, t)
    for subset in combinations(range(K), t):
        vec = _type_state(positions, subset, dim)
        rho += np.outer(vec, vec.conj())
    return DensityMatrix(total, rho / count)


def sym_projector_state(d: int, t: int) -> DensityMatrix:
    """Pi_sym / tr(Pi_sym) on t copies of a d-dimensional space."""
    if d**t > 2**TCOPY_MAX_QUBITS:
        raise ValueError("symmetric projector capped at dimension 2**16")
    total = d**t
    digits = np.empty((total, t), dtype=np.int64)
    rem = np.arange(total)
    for pos in range(t - 1, -1, -1):
        digits[:, pos] = rem % d
        rem //= d
    proj = np.zeros((total, total), dtype=np.complex128)
    idx = np.arange(total)
    for perm in permutations(range(t)):
        shuffled = digits[:, list(perm)]
        target = np.zeros(total, dtype=np.int64)
        for pos in range(t):
            target = target * d + shuffled[:, pos]
        proj[target, idx] += 1.0 / factorial(t)
    return DensityMatrix(total, proj / np.trace(proj))


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """(1/2) sum |eig(rho - sigma)|, in [0, 1]."""
    if rho.dim != sigma.dim:
        raise ValueError("dimension mismatch")
    eigs = np.linalg.eigvalsh(rho.entries - sigma.entries)
    return float(0.5 * np.sum(np.abs(eigs)))


class DesignVariance(NamedTuple):
    value: float
    degenerate: bool


def design_variance_condition(u: SubUnitary, t: int, b_star: int) -> DesignVariance:
    """Ybar = mean over distinct-index t-subsets of (X/Xbar - 1)**2, with
    X_b = prod_i |u_{b_i, b_star}|**2; flags Xbar = 0 instead of dividing."""
    K = u.dim
    if K > 64 or t > 3:
        raise ValueError("enumeration capped at K <= 64, t <= 3")
    if not 0 <= b_star < K:
        raise ValueError(f"b_star out of range [0, {K})")
    col = np.abs(u.matrix[:, b_star]) ** 2
    xs = np.array([np.prod(col[list(subset)]) for subset in combinations(range(K), t)])
    xbar = xs.mean()
    if xbar == 0.0:
        return DesignVariance(float("inf"), True)
    return DesignVariance(float(np.mean((xs / xbar - 1.0) ** 2)), False)


class ElementCondition(NamedTuple):
    max_column_fraction: float
    passed: bool


def element_condition_check(u: SubUnitary, eps: float) -> ElementCondition:
    """Exact scan of |u|**2 against the threshold K**-eps.

    Reports the worst per-column fraction of entries at or above threshold;
    passes only when no entry exceeds it.
    """
    mags = np.abs(u.matrix) ** 2
    exceed = mags >= u.dim ** (-eps)
    frac = exceed.mean(axis=0).max()
    return ElementCondition(float(frac), bool(not exceed.any()))


@dataclass(frozen=True)
class RandomClifford:
    seed: RngSeed
    length: int | None = None  # defaults to 3n


@dataclass(frozen=True)
class TLayer:
    pattern: tuple[int, ...]


@dataclass(frozen=True)
class HadamardLayer:
    pattern: tuple[int, ...]


def append_layer(psi: StateVector, layer) -> StateVector:
    """Apply a resource layer (RandomClifford / TLayer / HadamardLayer)."""
    n = psi.shape.n
    amps = psi.amplitudes.copy()
    if isinstance(layer, HadamardLayer):
        for q in layer.pattern:
            if not 0 <= q < n:
                raise ValueError(f"site {q} out of range [0, {n})")
            amps = gate_h(amps, q)
    elif isinstance(layer, TLayer):
        for q in layer.pattern:
            if not 0 <= q < n:
                raise ValueError(f"site {q} out of range [0, {n})")
            amps = gate_phase(amps, q, np.exp(1j * np.pi / 4.0))
    elif isinstance(layer, RandomClifford):
        for gate in random_clifford_gates(n, layer.seed, layer.length):
            if gate[0] == "H":
                amps = gate_h(amps, gate[1])
            elif gate[0] == "S":
                amps = gate_phase(amps, gate[1], 1j)
            else:
                amps = gate_cx(amps, gate[1], gate[2])
    else:
        raise TypeError(f"unsupported layer {type(layer)!r}")
    return StateVector(psi.shape, amps)


def entanglement_entropy(psi: StateVector, cut) -> float:
    """Von Neumann entropy (nats) of the reduced state across the cut."""
    n = psi.shape.n
    side_a = sorted(set(int(q) for q in cut))
    if any(not 0 <= q < n for q in side_a):
        raise ValueError("cut sites out of range")
    if len(side_a) == 0 or len(side_a) == n:
        raise ValueError("cut must be a proper nonempty subset of sites")
    side_b = [q for q in range(n) if q not in side_a]
    xs = np.arange(psi.shape.dim)
    ia = np.zeros(psi.shape.dim, dtype=np.int64)
    for pos, q in enumerate(side_a):
        ia |= ((xs >> q) & 1) << pos
    ib = np.zeros(psi.shape.dim, dtype=np.int64)
    for pos, q in enumerate(side_b):
        ib |= ((xs >> q) & 1) << pos
    m = np.zeros((1 << len(side_a), 1 << len(side_b)), dtype=np.complex128)
    m[ia, ib] = psi.amplitudes
    svals = np.linalg.svd(m, compute_uv=False)
    probs = svals**2
    probs = probs / probs.sum()
    return _shannon(probs)
