"""Seeded permutations p, sign functions f, and the bit-flip partner maps.

Two permutation backends:
  - ExplicitTable: forward + inverse uint32 arrays (Fisher-Yates), n <= 24
  - Feistel: 4-round alternating Feistel network over the n-bit index with a
    keyed counter-mixer round function; evaluated on demand, any n <= 30

Two sign-function backends:
  - ExplicitTable: bit array of length 2**n from the seeded stream
  - KeyedPrf: bit 63 of the keyed mixer at counter x, evaluated on demand
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .bitcore import SystemShape, check_index, flip_bit, join, split
from .rng import RngSeed, WordStream, _GAMMA, _M64, _finalize, fisher_yates

EXPLICIT_TABLE_MAX_N = 24
FEISTEL_ROUNDS = 4

PERM_MAGIC = b"RSEDPERM1"


def _prf_words(key: np.uint64, xs: np.ndarray) -> np.ndarray:
    """Keyed counter-mixer: word at counter x under key."""
    with np.errstate(over="ignore"):
        return _finalize((key + (xs.astype(np.uint64) + np.uint64(1)) * _GAMMA) & _M64)


@dataclass(frozen=True)
class FeistelSpec:
    """Alternating (unbalanced for odd n) Feistel network on n bits.

    The low ceil(n/2) bits form L, the high floor(n/2) bits form R.  Round i
    XORs a keyed mix of the untouched half into the other: even rounds update
    L from R, odd rounds update R from L.  Inversion replays rounds in
    reverse order.
    """

    n: int
    key: int
    rounds: int = FEISTEL_ROUNDS

    def _halves(self):
        n_low = (self.n + 1) // 2
        n_high = self.n - n_low
        return n_low, n_high

    def _round_key(self, i: int) -> np.uint64:
        return _finalize(np.uint64(self.key & 0xFFFFFFFFFFFFFFFF) ^ np.uint64(0xA076_1D64_78BD_642F + i))

    def forward(self, xs: np.ndarray) -> np.ndarray:
        return self._run(xs, range(self.rounds))

    def inverse(self, xs: np.ndarray) -> np.ndarray:
        return self._run(xs, reversed(range(self.rounds)))

    def round_step(self, i: int, xs: np.ndarray) -> np.ndarray:
        """Single round i as a standalone map (each round is an involution);
        composing rounds 0..r-1 reproduces forward().  Exposed so a
        network-backed permutation can be inspected per round."""
        if not 0 <= i < self.rounds:
            raise ValueError(f"round {i} out of range [0, {self.rounds})")
        return self._run(xs, [i])

    def _run(self, xs: np.ndarray, order) -> np.ndarray:
        n_low, n_high = self._halves()
        mask_low = np.uint64((1 << n_low) - 1)
        mask_high = np.uint64((1 << n_high) - 1) if n_high else np.uint64(0)
        x = np.asarray(xs, dtype=np.uint64)
        lo = x & mask_low
        hi = (x >> np.uint64(n_low)) & mask_high
        for i in order:
            if i % 2 == 0:
                lo = lo ^ (_prf_words(self._round_key(i), hi) & mask_low)
            else:
                hi = hi ^ (_prf_words(self._round_key(i), lo) & mask_high)
        return (lo | (hi << np.uint64(n_low))).astype(np.uint32)


@dataclass(frozen=True)
class SubsetPermutation:
    """Seeded bijection on [0, 2**n), by table or Feistel network."""

    shape: SystemShape
    table: np.ndarray | None = field(default=None, repr=False)
    inverse_table: np.ndarray | None = field(default=None, repr=False)
    feistel: FeistelSpec | None = None

    def __post_init__(self):
        if (self.table is None) == (self.feistel is None):
            raise ValueError("exactly one of table / feistel must be set")
        if self.table is not None and len(self.table) != self.shape.dim:
            raise ValueError("table length does not match shape")

    @property
    def backend(self) -> str:
        return "explicit" if self.table is not None else "feistel"

    def permute(self, x: int) -> int:
        check_index(x, self.shape)
        if self.table is not None:
            return int(self.table[x])
        return int(self.feistel.forward(np.asarray([x]))[0])

    def invert(self, y: int) -> int:
        check_index(y, self.shape)
        if self.inverse_table is not None:
            return int(self.inverse_table[y])
        return int(self.feistel.inverse(np.asarray([y]))[0])

    def forward_array(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs)
        if self.table is not None:
            return self.table[xs]
        return self.feistel.forward(xs)

    def inverse_array(self, ys: np.ndarray) -> np.ndarray:
        ys = np.asarray(ys)
        if self.inverse_table is not None:
            return self.inverse_table[ys]
        return self.feistel.inverse(ys)


@dataclass(frozen=True)
class SignFunction:
    """Deterministic sign bit f(x) on [0, 2**n)."""

    shape: SystemShape
    bits: np.ndarray | None = field(default=None, repr=False)
    key: int | None = None

    def __post_init__(self):
        if (self.bits is None) == (self.key is None):
            raise ValueError("exactly one of bits / key must be set")
        if self.bits is not None and len(self.bits) != self.shape.dim:
            raise ValueError("bit array length does not match shape")

    @property
    def backend(self) -> str:
        return "explicit" if self.bits is not None else "keyed_prf"

    def sign(self, x: int) -> int:
        check_index(x, self.shape)
        if self.bits is not None:
            return int(self.bits[x])
        return int(self.sign_array(np.asarray([x]))[0])

    def sign_array(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs)
        if self.bits is not None:
            return self.bits[xs]
        return (_prf_words(np.uint64(self.key & 0xFFFFFFFFFFFFFFFF), xs) >> np.uint64(63)).astype(np.uint8)


def sample_permutation(shape: SystemShape, seed: RngSeed, backend: str | None = None) -> SubsetPermutation:
    """Seeded random permutation; default backend is explicit for n <= 16."""
    if backend is None:
        backend = "explicit" if shape.n <= 16 else "feistel"
    if backend == "explicit":
        if shape.n > EXPLICIT_TABLE_MAX_N:
            raise ValueError(f"explicit table capped at n={EXPLICIT_TABLE_MAX_N}, got n={shape.n}")
        table = fisher_yates(shape.dim, seed)
        inv = np.empty_like(table)
        inv[table] = np.arange(shape.dim, dtype=np.uint32)
        return SubsetPermutation(shape, table=table, inverse_table=inv)
    if backend == "feistel":
        return SubsetPermutation(shape, feistel=FeistelSpec(shape.n, int(seed.state())))
    raise ValueError(f"unknown permutation backend {backend!r}")


def identity_permutation(shape: SystemShape) -> SubsetPermutation:
    table = np.arange(shape.dim, dtype=np.uint32)
    return SubsetPermutation(shape, table=table, inverse_table=table.copy())


def sample_sign_function(shape: SystemShape, seed: RngSeed, backend: str | None = None) -> SignFunction:
    if backend is None:
        backend = "explicit" if shape.n <= 16 else "keyed_prf"
    if backend == "explicit":
        if shape.n > EXPLICIT_TABLE_MAX_N:
            raise ValueError(f"explicit table capped at n={EXPLICIT_TABLE_MAX_N}, got n={shape.n}")
        return SignFunction(shape, bits=WordStream(seed).bits(shape.dim))
    if backend == "keyed_prf":
        return SignFunction(shape, key=int(seed.state()))
    raise ValueError(f"unknown sign backend {backend!r}")


def zero_sign_function(shape: SystemShape) -> SignFunction:
    return SignFunction(shape, bits=np.zeros(shape.dim, dtype=np.uint8))


def bitflip_partner(p: SubsetPermutation, b: int, a: int, j: int) -> tuple[int, int]:
    """(x_j, y_j) with p(x_j, y_j) = p(b, a) XOR e_j."""
    shape = p.shape
    x = join(b, a, shape)
    flipped = flip_bit(p.permute(x), j, shape)
    return split(p.invert(flipped), shape)


def count_seed_fixed_points(
    p: SubsetPermutation,
    j: int,
    shape: SystemShape,
    mode: str = "exact",
    samples: int = 4096,
    seed: RngSeed = RngSeed(0),
) -> tuple[float, float]:
    """Count of (b, a) with y_j(b, a) = a, i.e. seed-preserving bit flips.

    Returns (estimate, std_error); exact mode enumerates all 2**n points
    (n <= 20) with zero error, montecarlo mode is an unbiased uniform-sample
    estimate.
    """
    if not 0 <= j < shape.n:
        raise ValueError(f"site {j} out of range [0, {shape.n})")
    mask = np.uint32(1 << j)
    if mode == "exact":
        if shape.n > 20:
            raise ValueError("exact mode capped at n=20")
        xs = np.arange(shape.dim, dtype=np.uint32)
        pre = p.inverse_array(p.forward_array(xs) ^ mask)
        hits = (pre >> np.uint32(shape.k)) == (xs >> np.uint32(shape.k))
        return float(hits.sum()), 0.0
    if mode == "montecarlo":
        xs = WordStream(seed).integers(shape.dim, samples).astype(np.uint32)
        pre = p.inverse_array(p.forward_array(xs) ^ mask)
        hits = ((pre >> np.uint32(shape.k)) == (xs >> np.uint32(shape.k))).astype(np.float64)
        mean = hits.mean()
        se = hits.std(ddof=1) / np.sqrt(samples) if samples > 1 else 0.0
        return float(mean * shape.dim), float(se * shape.dim)
    raise ValueError(f"unknown mode {mode!r}")


def save_permutation(p: SubsetPermutation, path) -> None:
    """Binary sidecar: magic 'RSEDPERM1', u32 LE n, then 2**n u32 LE entries."""
    if p.table is None:
        raise ValueError("only explicit-table permutations are serialized")
    with open(path, "wb") as fh:
        fh.write(PERM_MAGIC)
        fh.write(struct.pack("<I", p.shape.n))
        fh.write(p.table.astype("<u4").tobytes())


def load_permutation(path, k: int) -> SubsetPermutation:
    with open(path, "rb") as fh:
        magic = fh.read(len(PERM_MAGIC))
        if magic != PERM_MAGIC:
            raise ValueError(f"bad magic {magic!r}, expected {PERM_MAGIC!r}")
        (n,) = struct.unpack("<I", fh.read(4))
        shape = SystemShape(n, k)
        table = np.frombuffer(fh.read(4 * shape.dim), dtype="<u4").astype(np.uint32)
    if len(table) != shape.dim:
        raise ValueError("truncated permutation file")
    inv = np.empty_like(table)
    inv[table] = np.arange(shape.dim, dtype=np.uint32)
    return SubsetPermutation(shape, table=table, inverse_table=inv)
