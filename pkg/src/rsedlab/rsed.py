"""The full-system operator U = sum_a O_a u O_a^dagger, applied blockwise.

Within seed block a, positions p(join(b, a)) for b in [0, K) carry an
embedded copy of u dressed by the signs (-1)^{f}.  Since p is a bijection on
all 2**n points, the blocks partition the full space and application costs
O(2**(n-k) * K**2) with no materialization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bitcore import SystemShape, check_index, split
from .randomness import SignFunction, SubsetPermutation
from .subsystem import SubUnitary, unitary_power

DENSE_MAX_N = 10

_AXES = ("X", "Y", "Z")


@dataclass(frozen=True)
class StateVector:
    """Complex amplitude array of dimension 2**n."""

    shape: SystemShape
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        object.__setattr__(self, "amplitudes", amps)
        if amps.shape != (self.shape.dim,):
            raise ValueError(f"expected {self.shape.dim} amplitudes, got {amps.shape}")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @classmethod
    def basis(cls, shape: SystemShape, x: int) -> "StateVector":
        check_index(x, shape)
        amps = np.zeros(shape.dim, dtype=np.complex128)
        amps[x] = 1.0
        return cls(shape, amps)


@dataclass(frozen=True)
class PauliString:
    """Product of single-site Paulis, at most one axis per site; squares to I."""

    sites: tuple[tuple[int, str], ...]

    def __post_init__(self):
        seen = set()
        for j, axis in self.sites:
            if axis not in _AXES:
                raise ValueError(f"axis must be one of {_AXES}, got {axis!r}")
            if j in seen:
                raise ValueError(f"site {j} repeated in Pauli string")
            seen.add(j)

    def masks(self, n: int) -> tuple[int, int, int]:
        """(flip mask from X/Y, Z-phase mask from Z/Y, number of Y sites)."""
        flip = phase = ny = 0
        for j, axis in self.sites:
            if not 0 <= j < n:
                raise ValueError(f"site {j} out of range [0, {n})")
            if axis in ("X", "Y"):
                flip |= 1 << j
            if axis in ("Z", "Y"):
                phase |= 1 << j
            if axis == "Y":
                ny += 1
        return flip, phase, ny


def _popcount(values: np.ndarray) -> np.ndarray:
    out = np.zeros(values.shape, dtype=np.int64)
    v = values.astype(np.int64).copy()
    while v.any():
        out += v & 1
        v >>= 1
    return out


def apply_pauli(s: PauliString, psi: StateVector) -> StateVector:
    """Signed basis permutation: X flips, Z phases, Y = i X Z per site."""
    n = psi.shape.n
    flip, zmask, ny = s.masks(n)
    xs = np.arange(psi.shape.dim)
    src = xs ^ flip
    # <x|S|x^flip>: each Z|Y site j contributes (-1)^{bit_j of the KET index}
    par = _popcount(src & zmask) & 1
    phase = (1j) ** (ny % 4) * (1.0 - 2.0 * par)
    return StateVector(psi.shape, phase * psi.amplitudes[src])


def pauli_action(s: PauliString, n: int) -> tuple[np.ndarray, np.ndarray]:
    """(source index array, phase array) with (S psi)[x] = phase[x] psi[src[x]]."""
    flip, zmask, ny = s.masks(n)
    xs = np.arange(1 << n)
    src = xs ^ flip
    par = _popcount(src & zmask) & 1
    return src, (1j) ** (ny % 4) * (1.0 - 2.0 * par)


def gate_h(amps: np.ndarray, q: int) -> np.ndarray:
    """Hadamard on qubit q of a dense amplitude array."""
    mask = 1 << q
    xs = np.arange(len(amps))
    lo = (xs & mask) == 0
    out = np.empty_like(amps)
    out[lo] = (amps[lo] + amps[~lo]) / np.sqrt(2.0)
    out[~lo] = (amps[lo] - amps[~lo]) / np.sqrt(2.0)
    return out


def gate_phase(amps: np.ndarray, q: int, phase: complex) -> np.ndarray:
    """diag(1, phase) on qubit q (S: phase=i, T: phase=e^{i pi/4})."""
    xs = np.arange(len(amps))
    out = amps.copy()
    out[(xs & (1 << q)) != 0] *= phase
    return out


def gate_x(amps: np.ndarray, q: int) -> np.ndarray:
    xs = np.arange(len(amps))
    return amps[xs ^ (1 << q)]


def gate_cx(amps: np.ndarray, c: int, q: int) -> np.ndarray:
    xs = np.arange(len(amps))
    src = np.where((xs & (1 << c)) != 0, xs ^ (1 << q), xs)
    return amps[src]


def gate_ccx(amps: np.ndarray, c1: int, c2: int, q: int) -> np.ndarray:
    xs = np.arange(len(amps))
    both = ((xs & (1 << c1)) != 0) & ((xs & (1 << c2)) != 0)
    src = np.where(both, xs ^ (1 << q), xs)
    return amps[src]


@dataclass(frozen=True)
class RsedOperator:
    """U = sum_a O_a u O_a^dagger for one (p, f, u) realization."""

    shape: SystemShape
    perm: SubsetPermutation
    sign: SignFunction
    sub: SubUnitary

    def __post_init__(self):
        if self.sub.k != self.shape.k:
            raise ValueError(f"sub unitary acts on k={self.sub.k}, shape has k={self.shape.k}")
        if self.perm.shape != self.shape or self.sign.shape != self.shape:
            raise ValueError("permutation/sign shapes do not match operator shape")

    def block_positions(self, seeds: np.ndarray) -> np.ndarray:
        """Row a of the result holds p(join(b, seeds[a])) over b in [0, K)."""
        seeds = np.asarray(seeds, dtype=np.uint32)
        K = self.shape.subdim
        xs = (seeds[:, None].astype(np.uint32) << np.uint32(self.shape.k)) | np.arange(K, dtype=np.uint32)[None, :]
        return self.perm.forward_array(xs.reshape(-1)).reshape(len(seeds), K)

    def block_signs(self, seeds: np.ndarray) -> np.ndarray:
        """Row a holds (-1)^{f(join(b, seeds[a]))} over b, as float."""
        seeds = np.asarray(seeds, dtype=np.uint32)
        K = self.shape.subdim
        xs = (seeds[:, None].astype(np.uint32) << np.uint32(self.shape.k)) | np.arange(K, dtype=np.uint32)[None, :]
        return 1.0 - 2.0 * self.sign.sign_array(xs.reshape(-1)).reshape(len(seeds), K).astype(np.float64)

    def with_sub(self, sub: SubUnitary) -> "RsedOperator":
        return RsedOperator(self.shape, self.perm, self.sign, sub)

    def adjoint(self) -> "RsedOperator":
        return self.with_sub(self.sub.adjoint())


def apply(op: RsedOperator, psi: StateVector) -> StateVector:
    """Gather each block, sign, act with u, sign, scatter back."""
    if psi.shape != op.shape:
        raise ValueError("state shape does not match operator shape")
    seeds = np.arange(op.shape.num_seeds)
    pos = op.block_positions(seeds)
    sg = op.block_signs(seeds)
    c = psi.amplitudes[pos] * sg
    d = c @ op.sub.matrix.T  # d[a, b'] = sum_b u[b', b] c[a, b]
    out = np.empty_like(psi.amplitudes)
    out[pos] = d * sg
    return StateVector(op.shape, out)


def apply_power(op: RsedOperator, t, psi: StateVector) -> StateVector:
    """apply with sub replaced by sub**t (U^t = sum_a O_a u^t O_a^dagger)."""
    return apply(op.with_sub(unitary_power(op.sub, t)), psi)


def evolve_basis_state(op: RsedOperator, x: int) -> tuple[np.ndarray, np.ndarray]:
    """U|x> as K sparse pairs: indices p(join(b', a)) and amplitudes
    u_{b', b} (-1)^{f(join(b, a)) + f(join(b', a))} with (b, a) = split(p^{-1}(x))."""
    check_index(x, op.shape)
    b, a = split(op.perm.invert(x), op.shape)
    seeds = np.asarray([a])
    pos = op.block_positions(seeds)[0]
    sg = op.block_signs(seeds)[0]
    amps = op.sub.matrix[:, b] * (sg[b] * sg)
    return pos.copy(), amps


def dense_matrix(op: RsedOperator) -> np.ndarray:
    """N x N materialization (oracle backend, n <= 10)."""
    if op.shape.n > DENSE_MAX_N:
        raise ValueError(f"dense materialization capped at n={DENSE_MAX_N}")
    N = op.shape.dim
    seeds = np.arange(op.shape.num_seeds)
    pos = op.block_positions(seeds)
    sg = op.block_signs(seeds)
    out = np.zeros((N, N), dtype=np.complex128)
    for a in range(op.shape.num_seeds):
        out[np.ix_(pos[a], pos[a])] = (sg[a][:, None] * sg[a][None, :]) * op.sub.matrix
    return out
