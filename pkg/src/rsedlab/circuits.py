"""Gate-level synthesis of the RSED sandwich circuit and a text format.

The realized unitary is P F (u tensor I) F P^dagger with P the registered
permutation, F the diagonal sign layer, and u on the LOW k qubits; gates are
listed in application order, so a synthesized circuit reads

    PERM inv perm0 / PHASE_F f0 / <u gates> / PHASE_F f0 / PERM fwd perm0.

Text format ("RSEDCIRC 1"):  header line "RSEDCIRC 1 n=<n>", then one gate
per line: "H 0", "X 2", "S 1", "T 3", "CX 2 5", "CCX 0 1 2",
"PERM fwd|inv <name>", "PHASE_F <name>", "SUB <name>".  PERM/PHASE_F/SUB
references resolve against the circuit registry at simulation time.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .bitcore import SystemShape
from .randomness import (
    SignFunction,
    SubsetPermutation,
    sample_permutation,
    sample_sign_function,
)
from .rng import RngSeed, WordStream
from .rsed import StateVector, gate_ccx, gate_cx, gate_h, gate_phase, gate_x
from .subsystem import SubUnitary, random_sign_diag

HEADER = "RSEDCIRC 1"
DENSE_MAX_N = 10

_SINGLE = {"H", "X", "S", "T"}


class CircuitParseError(ValueError):
    pass


@dataclass(frozen=True)
class GateCircuit:
    n: int
    gates: tuple[tuple, ...]
    registry: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for gate in self.gates:
            name = gate[0]
            if name in _SINGLE:
                (q,) = gate[1:]
                self._check_qubits(q)
            elif name == "CX":
                self._check_qubits(*gate[1:])
            elif name == "CCX":
                self._check_qubits(*gate[1:])
            elif name == "PERM":
                direction, ref = gate[1:]
                if direction not in ("fwd", "inv"):
                    raise ValueError(f"bad PERM direction {direction!r}")
                self._check_ref(ref, SubsetPermutation)
            elif name == "PHASE_F":
                self._check_ref(gate[1], SignFunction)
            elif name == "SUB":
                self._check_ref(gate[1], SubUnitary)
            else:
                raise ValueError(f"unknown gate {name!r}")

    def _check_qubits(self, *qs):
        if len(set(qs)) != len(qs):
            raise ValueError(f"repeated qubit in gate args {qs}")
        for q in qs:
            if not 0 <= q < self.n:
                raise ValueError(f"qubit {q} out of range [0, {self.n})")

    def _check_ref(self, ref: str, kind) -> None:
        if ref in self.registry and not isinstance(self.registry[ref], kind):
            raise ValueError(f"reference {ref!r} is not a {kind.__name__}")

    def gate_counts(self) -> dict[str, int]:
        return dict(Counter(g[0] for g in self.gates))

    def with_registry(self, registry: dict) -> "GateCircuit":
        return GateCircuit(self.n, self.gates, registry)


def serialize(circuit: GateCircuit) -> str:
    lines = [f"{HEADER} n={circuit.n}"]
    for gate in circuit.gates:
        lines.append(" ".join(str(part) for part in gate))
    return "\n".join(lines) + "\n"


def parse(text: str, registry: dict | None = None) -> GateCircuit:
    lines = [ln for ln in text.splitlines()]
    if not lines:
        raise CircuitParseError("empty circuit text")
    head = lines[0].split()
    if len(head) != 3 or " ".join(head[:2]) != HEADER or not head[2].startswith("n="):
        raise CircuitParseError(f"line 1: bad header {lines[0]!r}")
    try:
        n = int(head[2][2:])
    except ValueError:
        raise CircuitParseError(f"line 1: bad qubit count in header {lines[0]!r}")
    gates = []
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        name = parts[0]
        try:
            if name in _SINGLE:
                gates.append((name, int(parts[1])) if len(parts) == 2 else _bad(parts))
            elif name == "CX":
                gates.append((name, int(parts[1]), int(parts[2])) if len(parts) == 3 else _bad(parts))
            elif name == "CCX":
                gates.append(
                    (name, int(parts[1]), int(parts[2]), int(parts[3])) if len(parts) == 4 else _bad(parts)
                )
            elif name == "PERM":
                gates.append((name, parts[1], parts[2]) if len(parts) == 3 else _bad(parts))
            elif name == "PHASE_F":
                gates.append((name, parts[1]) if len(parts) == 2 else _bad(parts))
            elif name == "SUB":
                gates.append((name, parts[1]) if len(parts) == 2 else _bad(parts))
            else:
                raise CircuitParseError(f"line {lineno}: unknown mnemonic {name!r}")
        except (IndexError, ValueError) as exc:
            if isinstance(exc, CircuitParseError):
                raise
            raise CircuitParseError(f"line {lineno}: malformed gate {line!r}") from exc
    return GateCircuit(n, tuple(gates), registry or {})


def _bad(parts):
    raise ValueError(f"malformed gate {' '.join(parts)!r}")


def synthesize_rsed_circuit(
    shape: SystemShape, u_spec, perm_seed: int, sign_seed: int
) -> GateCircuit:
    """PERM(inv) PHASE_F [u gates] PHASE_F PERM(fwd), realizing
    sum_a O_a u O_a^dagger.

    u_spec: "hadamard", ("random_sign_hadamard", seed), or a SubUnitary
    (kept as an opaque SUB block on the low k qubits).
    """
    registry = {
        "perm0": sample_permutation(shape, RngSeed(perm_seed)),
        "f0": sample_sign_function(shape, RngSeed(sign_seed)),
    }
    mid: list[tuple] = []
    if u_spec == "hadamard":
        mid = [("H", q) for q in range(shape.k)]
    elif isinstance(u_spec, tuple) and len(u_spec) == 2 and u_spec[0] == "random_sign_hadamard":
        phi = random_sign_diag(shape.k, RngSeed(u_spec[1]))
        bits = (np.real(np.diag(phi.matrix)) < 0).astype(np.uint8)
        registry["psign0"] = SignFunction(shape, bits=np.tile(bits, shape.num_seeds))
        mid = [("PHASE_F", "psign0")] + [("H", q) for q in range(shape.k)]
    elif isinstance(u_spec, SubUnitary):
        if u_spec.k != shape.k:
            raise ValueError("explicit sub-unitary does not match shape.k")
        registry["u0"] = u_spec
        mid = [("SUB", "u0")]
    else:
        raise ValueError(f"unsupported u_spec {u_spec!r}")
    gates = (
        [("PERM", "inv", "perm0"), ("PHASE_F", "f0")]
        + mid
        + [("PHASE_F", "f0"), ("PERM", "fwd", "perm0")]
    )
    return GateCircuit(shape.n, tuple(gates), registry)


def simulate_circuit(circuit: GateCircuit, psi: StateVector | None = None, dense: bool = False):
    """Left-to-right application; returns a StateVector, or the dense matrix
    of the circuit when dense=True (n <= 10)."""
    if dense:
        if circuit.n > DENSE_MAX_N:
            raise ValueError(f"dense mode capped at n={DENSE_MAX_N}")
        dim = 1 << circuit.n
        cols = np.eye(dim, dtype=np.complex128)
        out = np.empty((dim, dim), dtype=np.complex128)
        for x in range(dim):
            out[:, x] = _run(circuit, cols[:, x])
        return out
    if psi is None:
        raise ValueError("psi is required unless dense=True")
    if psi.shape.n != circuit.n:
        raise ValueError("state size does not match circuit")
    return StateVector(psi.shape, _run(circuit, psi.amplitudes))


def _resolve(circuit: GateCircuit, ref: str, kind):
    try:
        obj = circuit.registry[ref]
    except KeyError:
        raise KeyError(f"unresolved circuit reference {ref!r}")
    if not isinstance(obj, kind):
        raise TypeError(f"reference {ref!r} is not a {kind.__name__}")
    return obj


def _run(circuit: GateCircuit, amps: np.ndarray) -> np.ndarray:
    amps = amps.astype(np.complex128, copy=True)
    dim = 1 << circuit.n
    if len(amps) != dim:
        raise ValueError("amplitude length mismatch")
    for gate in circuit.gates:
        name = gate[0]
        if name == "H":
            amps = gate_h(amps, gate[1])
        elif name == "X":
            amps = gate_x(amps, gate[1])
        elif name == "S":
            amps = gate_phase(amps, gate[1], 1j)
        elif name == "T":
            amps = gate_phase(amps, gate[1], np.exp(1j * np.pi / 4.0))
        elif name == "CX":
            amps = gate_cx(amps, gate[1], gate[2])
        elif name == "CCX":
            amps = gate_ccx(amps, gate[1], gate[2], gate[3])
        elif name == "PERM":
            perm = _resolve(circuit, gate[2], SubsetPermutation)
            table = perm.forward_array(np.arange(dim, dtype=np.uint32))
            out = np.empty_like(amps)
            if gate[1] == "fwd":
                out[table] = amps
            else:
                out = amps[table]
            amps = out
        elif name == "PHASE_F":
            f = _resolve(circuit, gate[1], SignFunction)
            amps = amps * (1.0 - 2.0 * f.sign_array(np.arange(dim, dtype=np.uint32)).astype(np.float64))
        elif name == "SUB":
            u = _resolve(circuit, gate[1], SubUnitary)
            K = u.dim
            amps = (amps.reshape(-1, K) @ u.matrix.T).reshape(-1)
    return amps


def random_clifford_gates(n: int, seed: RngSeed, length: int | None = None) -> tuple[tuple, ...]:
    """Seeded sequence of {H, S, CX} gates; length defaults to 3n."""
    length = 3 * n if length is None else length
    stream = WordStream(seed)
    kinds = stream.integers(3, length)
    firsts = stream.integers(n, length)
    offsets = stream.integers(max(n - 1, 1), length)
    gates: list[tuple] = []
    for kind, q, off in zip(kinds.tolist(), firsts.tolist(), offsets.tolist()):
        if kind == 0:
            gates.append(("H", q))
        elif kind == 1:
            gates.append(("S", q))
        else:
            target = (q + 1 + off) % n if n > 1 else q
            if target != q:
                gates.append(("CX", q, target))
    return tuple(gates)


def random_clifford_circuit(n: int, seed: RngSeed, length: int | None = None) -> GateCircuit:
    return GateCircuit(n, random_clifford_gates(n, seed, length))


@dataclass(frozen=True)
class CircuitManifest:
    """Seeds and choices sufficient to regenerate a circuit exactly."""

    n: int
    k: int
    u_spec: dict
    perm_seed: int
    sign_seed: int
    gate_counts: dict

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "k": self.k,
                "u_spec": self.u_spec,
                "perm_seed": self.perm_seed,
                "sign_seed": self.sign_seed,
                "gate_counts": self.gate_counts,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "CircuitManifest":
        d = json.loads(text)
        return cls(d["n"], d["k"], d["u_spec"], d["perm_seed"], d["sign_seed"], d["gate_counts"])

    def regenerate(self) -> GateCircuit:
        shape = SystemShape(self.n, self.k)
        kind = self.u_spec["type"]
        if kind == "hadamard":
            spec = "hadamard"
        elif kind == "random_sign_hadamard":
            spec = ("random_sign_hadamard", self.u_spec["seed"])
        else:
            raise ValueError(f"manifest cannot regenerate u_spec {kind!r}")
        return synthesize_rsed_circuit(shape, spec, self.perm_seed, self.sign_seed)


def build_manifest(shape: SystemShape, u_spec, perm_seed: int, sign_seed: int) -> CircuitManifest:
    circuit = synthesize_rsed_circuit(shape, u_spec, perm_seed, sign_seed)
    if u_spec == "hadamard":
        spec_desc = {"type": "hadamard"}
    elif isinstance(u_spec, tuple) and u_spec[0] == "random_sign_hadamard":
        spec_desc = {"type": "random_sign_hadamard", "seed": u_spec[1]}
    else:
        raise ValueError("manifests cover named u_specs only")
    return CircuitManifest(shape.n, shape.k, spec_desc, perm_seed, sign_seed, circuit.gate_counts())
