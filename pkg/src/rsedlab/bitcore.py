"""Basis-index arithmetic: bit layouts, subsystem/seed splits, single-bit flips.

Layout convention used everywhere in this package: a full-system basis index
x splits into a subsystem index b (the LOW k bits) and a seed index a (the
HIGH n-k bits), so x = b + a * 2**k.  Site j carries bit weight 2**j; sites
are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass

MAX_QUBITS = 30


@dataclass(frozen=True)
class SystemShape:
    """The (n, k) qubit split defining full and subsystem dimensions."""

    n: int
    k: int

    def __post_init__(self):
        if not 1 <= self.n <= MAX_QUBITS:
            raise ValueError(f"n must be in [1, {MAX_QUBITS}], got {self.n}")
        if not 1 <= self.k <= self.n:
            raise ValueError(f"k must be in [1, n={self.n}], got {self.k}")

    @property
    def dim(self) -> int:
        """Full Hilbert-space dimension N = 2**n."""
        return 1 << self.n

    @property
    def subdim(self) -> int:
        """Subsystem dimension K = 2**k."""
        return 1 << self.k

    @property
    def num_seeds(self) -> int:
        """Number of seed blocks A = 2**(n-k)."""
        return 1 << (self.n - self.k)


def check_index(x: int, shape: SystemShape) -> None:
    if not 0 <= x < shape.dim:
        raise ValueError(f"basis index {x} out of range [0, {shape.dim})")


def split(x: int, shape: SystemShape) -> tuple[int, int]:
    """Split full index x into (b, a): b = low k bits, a = high n-k bits."""
    check_index(x, shape)
    return x & (shape.subdim - 1), x >> shape.k


def join(b: int, a: int, shape: SystemShape) -> int:
    """Inverse of split: x = b + a * 2**k."""
    if not 0 <= b < shape.subdim:
        raise ValueError(f"subsystem index {b} out of range [0, {shape.subdim})")
    if not 0 <= a < shape.num_seeds:
        raise ValueError(f"seed index {a} out of range [0, {shape.num_seeds})")
    return b | (a << shape.k)


def flip_bit(x: int, j: int, shape: SystemShape) -> int:
    """XOR bit j into x; involutive."""
    check_index(x, shape)
    if not 0 <= j < shape.n:
        raise ValueError(f"site {j} out of range [0, {shape.n})")
    return x ^ (1 << j)


def get_bit(x: int, j: int, shape: SystemShape) -> int:
    """Bit j of x, in {0, 1}."""
    check_index(x, shape)
    if not 0 <= j < shape.n:
        raise ValueError(f"site {j} out of range [0, {shape.n})")
    return (x >> j) & 1
