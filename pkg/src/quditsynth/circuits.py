"""Gate intermediate representation for n-qudit circuits.

A gate is a controlled one-qudit operator: a d x d unitary ``v`` plus a
length-n control word over the alphabet {0..d-1} | {*} | {T} with exactly
one T (the target).  Numeric letters are control values; a gate fires on a
basis ket iff every numeric letter matches.  Plain controlled-increment
diagrams fire on |d-1>.

Circuits apply their gate list left to right to kets, so the circuit matrix
is the reversed product ``gates[-1] ... gates[0]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .linalg import as_complex, identity, max_norm

STAR = "*"
TARGET = "T"

LEVEL_CONTROLLED = "controlled"
LEVEL_TWO_QUDIT = "two-qudit"
LEVEL_CINC = "cinc-lowered"
LEVELS = (LEVEL_CONTROLLED, LEVEL_TWO_QUDIT, LEVEL_CINC)

PRIM_CINC = "CINC"
PRIM_CINC_INV = "CINC_INV"
PRIM_LOCAL = "LOCAL"
PRIM_PHASE = "PHASE"

#: Default cap on d**n for dense expansion.
DENSE_CAP = 4096


class CircuitError(ValueError):
    pass


def prim_inc_power(k: int) -> str:
    return f"INC_POWER({k})"


def prim_flip(j: int, k: int) -> str:
    return f"FLIP({j},{k})"


def dits_of_index(index: int, d: int, n: int) -> tuple[int, ...]:
    """Big-endian base-d digits of a basis index (first qudit most significant)."""
    out = []
    for _ in range(n):
        out.append(index % d)
        index //= d
    return tuple(reversed(out))


def index_of_dits(dits, d: int) -> int:
    idx = 0
    for c in dits:
        idx = idx * d + c
    return idx


def inc_matrix(d: int, power: int = 1) -> np.ndarray:
    """Modular increment |j> -> |j + power mod d>."""
    return np.roll(identity(d), power % d, axis=0)


def flip_matrix(d: int, j: int, k: int) -> np.ndarray:
    m = identity(d)
    m[[j, k]] = m[[k, j]]
    return m


@dataclass(frozen=True)
class ControlWord:
    """Length-n word over {0..d-1, *, T} with exactly one target letter."""

    letters: tuple

    def __post_init__(self):
        ts = [i for i, let in enumerate(self.letters) if let == TARGET]
        if len(ts) != 1:
            raise CircuitError(f"control word needs exactly one target, got {len(ts)}")
        for let in self.letters:
            if let not in (STAR, TARGET) and not (isinstance(let, int) and let >= 0):
                raise CircuitError(f"bad control letter {let!r}")

    def __len__(self) -> int:
        return len(self.letters)

    @property
    def target(self) -> int:
        return self.letters.index(TARGET)

    @property
    def controls(self) -> dict[int, int]:
        return {i: let for i, let in enumerate(self.letters) if isinstance(let, int)}

    @property
    def num_controls(self) -> int:
        return sum(1 for let in self.letters if isinstance(let, int))

    def matches(self, dits) -> bool:
        return all(dits[i] == v for i, v in self.controls.items())

    def qudits(self) -> tuple[int, ...]:
        """Positions the gate touches: controls plus target."""
        return tuple(i for i, let in enumerate(self.letters) if let != STAR)

    def to_string(self, d: int) -> str:
        toks = [str(let) for let in self.letters]
        return " ".join(toks) if d > 10 else "".join(toks)

    @staticmethod
    def from_string(s: str) -> "ControlWord":
        toks = s.split() if " " in s else list(s)
        letters = tuple(
            tok if tok in (STAR, TARGET) else int(tok) for tok in toks
        )
        return ControlWord(letters)


def word(*letters) -> ControlWord:
    return ControlWord(tuple(letters))


def single_target_word(n: int, target: int, controls: dict[int, int] | None = None) -> ControlWord:
    letters: list = [STAR] * n
    letters[target] = TARGET
    for pos, val in (controls or {}).items():
        letters[pos] = int(val)
    return ControlWord(tuple(letters))


@dataclass(frozen=True)
class Gate:
    word: ControlWord
    v: np.ndarray
    level: str = LEVEL_CONTROLLED
    primitive: str | None = None
    elidable: bool = False

    def __post_init__(self):
        if self.level not in LEVELS:
            raise CircuitError(f"unknown gate level {self.level!r}")
        if self.level in (LEVEL_TWO_QUDIT, LEVEL_CINC) and self.word.num_controls > 1:
            raise CircuitError(f"{self.level} gates allow at most one control")
        if self.level == LEVEL_CINC and self.primitive not in (PRIM_CINC, PRIM_CINC_INV,
                                                               PRIM_LOCAL):
            raise CircuitError("cinc-lowered gates must be CINC, CINC_INV, or LOCAL")

    def adjoint(self) -> "Gate":
        prim = self.primitive
        if prim == PRIM_CINC:
            prim = PRIM_CINC_INV
        elif prim == PRIM_CINC_INV:
            prim = PRIM_CINC
        return replace(self, v=np.conj(self.v).T, primitive=prim)

    @property
    def num_controls(self) -> int:
        return self.word.num_controls


def local_gate(n: int, target: int, v, primitive: str | None = PRIM_LOCAL,
               level: str = LEVEL_CONTROLLED, elidable: bool = False) -> Gate:
    return Gate(single_target_word(n, target), as_complex(v), level, primitive, elidable)


def controlled_gate(n: int, target: int, controls: dict[int, int], v,
                    level: str = LEVEL_CONTROLLED, primitive: str | None = None) -> Gate:
    return Gate(single_target_word(n, target, controls), as_complex(v), level, primitive)


def cinc_gate(d: int, n: int, control: int, target: int, inverse: bool = False,
              level: str = LEVEL_CINC) -> Gate:
    v = inc_matrix(d, d - 1 if inverse else 1)
    return Gate(single_target_word(n, target, {control: d - 1}), v, level,
                PRIM_CINC_INV if inverse else PRIM_CINC)


@dataclass
class Circuit:
    d: int
    n: int
    gates: list[Gate] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.d < 2 or self.n < 1:
            raise CircuitError("need d >= 2 and n >= 1")

    def append(self, gate: Gate) -> None:
        if len(gate.word) != self.n:
            raise CircuitError("gate word length does not match circuit")
        self.gates.append(gate)

    def extend(self, gates) -> None:
        for g in gates:
            self.append(g)

    def adjoint(self) -> "Circuit":
        return Circuit(self.d, self.n, [g.adjoint() for g in reversed(self.gates)],
                       dict(self.metadata))

    def without_elidable(self) -> "Circuit":
        return Circuit(self.d, self.n, [g for g in self.gates if not g.elidable],
                       dict(self.metadata))

    def qudits_touched(self) -> set[int]:
        used: set[int] = set()
        for g in self.gates:
            used.update(g.word.qudits())
        return used


def _apply_gate_tensor(gate: Gate, tensor: np.ndarray, d: int, n: int) -> None:
    """Apply a gate in place to an array whose first n axes are qudit axes."""
    wl = gate.word.letters
    sel = tuple(slice(None) if let in (STAR, TARGET) else let for let in wl)
    axis = sum(1 for let in wl[: gate.word.target] if let in (STAR, TARGET))
    sub = tensor[sel]
    moved = np.moveaxis(sub, axis, -1)
    tensor[sel] = np.moveaxis(moved @ gate.v.T, -1, axis)


def apply_gate(gate: Gate, psi: np.ndarray, d: int, n: int) -> np.ndarray:
    """Apply one gate to a state vector of dimension d**n."""
    psi = as_complex(psi)
    if psi.shape != (d**n,):
        raise CircuitError(f"state dimension {psi.shape} does not match d**n = {d**n}")
    if len(gate.word) != n:
        raise CircuitError("gate word length does not match register")
    t = psi.reshape((d,) * n).copy()
    _apply_gate_tensor(gate, t, d, n)
    return t.reshape(-1)


def apply_circuit(circ: Circuit, psi: np.ndarray) -> np.ndarray:
    psi = as_complex(psi)
    t = psi.reshape((circ.d,) * circ.n).copy()
    for g in circ.gates:
        _apply_gate_tensor(g, t, circ.d, circ.n)
    return t.reshape(-1)


def gate_matrix(gate: Gate, d: int, n: int) -> np.ndarray:
    dim = d**n
    m = identity(dim).reshape((d,) * n + (dim,))
    _apply_gate_tensor(gate, m, d, n)
    return m.reshape(dim, dim)


def circuit_unitary(circ: Circuit, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense matrix of the circuit (gates[0] applied first)."""
    dim = circ.d**circ.n
    if dim > cap:
        raise CircuitError(f"dimension {dim} exceeds the dense cap {cap}")
    m = identity(dim).reshape((circ.d,) * circ.n + (dim,))
    for g in circ.gates:
        _apply_gate_tensor(g, m, circ.d, circ.n)
    return m.reshape(dim, dim)


def swap_conjugate(gate: Gate, j: int, n: int) -> Gate:
    """Relabel a gate so the swap of qudits j and n conjugates it back to the original."""
    letters = list(gate.word.letters)
    if not (0 <= j < n <= len(letters)):
        raise CircuitError("swap positions out of range")
    letters[j], letters[n - 1] = letters[n - 1], letters[j]
    return replace(gate, word=ControlWord(tuple(letters)))


def swap_matrix(d: int, n: int, j: int, k: int) -> np.ndarray:
    """Permutation matrix exchanging qudits j and k (0-based)."""
    dim = d**n
    m = np.zeros((dim, dim), dtype=np.complex128)
    for idx in range(dim):
        dits = list(dits_of_index(idx, d, n))
        dits[j], dits[k] = dits[k], dits[j]
        m[index_of_dits(dits, d), idx] = 1.0
    return m


def inc_conjugate_gate(gate: Gate, m_dits, d: int) -> Gate:
    """Conjugate by the increment-power layer that relabels |0...0> to |m>.

    Numeric control letters shift by the matching dit of m; the one-qudit
    operator is conjugated by the increment power at the target position.
    """
    letters = []
    for i, let in enumerate(gate.word.letters):
        letters.append((let + m_dits[i]) % d if isinstance(let, int) else let)
    shift = m_dits[gate.word.target] % d
    if shift == 0:
        return replace(gate, word=ControlWord(tuple(letters)))
    inc = inc_matrix(d, shift)
    v = inc @ gate.v @ np.conj(inc).T
    return replace(gate, word=ControlWord(tuple(letters)), v=v)


@dataclass(frozen=True)
class GateCounts:
    """Tallies of non-elidable gates by control arity and primitive tag."""

    per_arity: dict[int, int]
    cinc: int
    cinc_inv: int
    local: int
    elided: int

    @property
    def total(self) -> int:
        return sum(self.per_arity.values())


def gate_counts(circ: Circuit) -> GateCounts:
    per_arity: dict[int, int] = {}
    cinc = cinc_inv = local = elided = 0
    for g in circ.gates:
        if g.elidable:
            elided += 1
            continue
        k = g.num_controls
        per_arity[k] = per_arity.get(k, 0) + 1
        if g.primitive == PRIM_CINC:
            cinc += 1
        elif g.primitive == PRIM_CINC_INV:
            cinc_inv += 1
        elif k == 0:
            local += 1
    return GateCounts(per_arity, cinc, cinc_inv, local, elided)


def is_identity_gate(v: np.ndarray, tol: float = 1e-12) -> bool:
    return max_norm(as_complex(v) - identity(v.shape[0])) < tol
