"""State synthesis: reduce an n-qudit state onto a basis ket with
(d**n - 1)/(d - 1) two-qudit gates.

The reduction walks the club sequence; each term contributes one
singly-controlled (or uncontrolled) Householder acting on the fiber the
term names.  Collapse onto a nonzero target ket |m> conjugates every gate
by increment-power layers, which only relabels control values and the
one-qudit operator.  The synthesis must simulate as it goes because each
reflection is built from the current partial state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import clubseq
from .circuits import (
    Circuit,
    Gate,
    LEVEL_TWO_QUDIT,
    PRIM_LOCAL,
    apply_gate,
    dits_of_index,
    inc_conjugate_gate,
    index_of_dits,
    is_identity_gate,
    single_target_word,
)
from .clubseq import ClubTerm, control_word_for_term
from .linalg import LinalgError, as_complex, householder_to_e0, identity

#: A fiber with norm below this is left untouched (its reflection is moot).
FIBER_ZERO_TOL = 1e-300
ELISION_TOL = 1e-12


@dataclass
class SynthesisStep:
    term: ClubTerm
    gate: Gate
    post_state: np.ndarray | None


@dataclass
class SynthesisTrace:
    """Per-step record of a reduction, kept in the collapse-onto-zero frame."""

    steps: list[SynthesisStep]
    target_dits: tuple[int, ...]
    residual_phase: complex


def single_club_householder(term: ClubTerm, psi_j: np.ndarray, d: int, n: int,
                            elision_tol: float = ELISION_TOL) -> Gate:
    """One reduction gate: word from the term, reflection from the current state.

    The one-qudit operator zeroes the fiber indexed by the term's numeric
    prefix, varying the target dit with zeros after it.
    """
    psi_j = as_complex(psi_j)
    cw = control_word_for_term(term, n)
    ell = term.club_start
    prefix = term.prefix
    fiber_idx = [index_of_dits(prefix + (k,) + (0,) * (n - ell - 1), d) for k in range(d)]
    fiber = psi_j[fiber_idx]
    if float(np.linalg.norm(fiber)) < FIBER_ZERO_TOL:
        v = identity(d)
    else:
        v = householder_to_e0(fiber)
    elidable = is_identity_gate(v, elision_tol)
    primitive = PRIM_LOCAL if cw.num_controls == 0 else None
    return Gate(cw, v, LEVEL_TWO_QUDIT, primitive, elidable)


def club_householder(psi: np.ndarray, m, d: int, n: int,
                     keep_states: bool = False,
                     fix_phase: bool = False) -> tuple[Circuit, SynthesisTrace]:
    """Reduction circuit W with W psi = s |m>, |s| = ||psi||.

    ``m`` may be an index or a dit tuple.  The returned circuit has exactly
    one gate per club term (identity steps carry an elidable flag); the trace
    snapshots are kept in the shifted frame where the collapse target is
    |0...0>.  The leftover unit phase of s is recorded in the trace; with
    ``fix_phase`` a local phase gate is appended so W psi = ||psi|| |m>.
    """
    psi = as_complex(psi).reshape(-1)
    if psi.shape[0] != d**n:
        raise LinalgError(f"state dimension {psi.shape[0]} is not d**n = {d**n}")
    norm = float(np.linalg.norm(psi))
    if norm == 0.0:
        raise LinalgError("cannot synthesize the zero vector")
    m_dits = tuple(m) if not isinstance(m, int) else dits_of_index(m, d, n)
    if len(m_dits) != n or any(not 0 <= c < d for c in m_dits):
        raise LinalgError("target ket out of range")

    # Shift frame so the collapse target becomes |0...0>: work[x] = psi[x + m].
    work = psi.reshape((d,) * n)
    for q, dq in enumerate(m_dits):
        work = np.roll(work, -dq, axis=q)
    work = work.reshape(-1)

    seq = clubseq.make_club_sequence(d, n)
    circ = Circuit(d, n, metadata={"kind": "state-reduction", "target": list(m_dits)})
    steps: list[SynthesisStep] = []
    for term in seq.terms:
        gate = single_club_householder(term, work, d, n)
        work = apply_gate(gate, work, d, n)
        steps.append(SynthesisStep(term, gate, work.copy() if keep_states else None))
        circ.append(inc_conjugate_gate(gate, m_dits, d))

    s = complex(work[0])
    phase = s / abs(s) if abs(s) > 0 else 1.0 + 0.0j
    if fix_phase and abs(phase - 1.0) > 1e-15:
        fix = identity(d)
        fix[m_dits[0], m_dits[0]] = np.conj(phase)
        circ.append(Gate(single_target_word(n, 0), fix, LEVEL_TWO_QUDIT, PRIM_LOCAL))
        phase = 1.0 + 0.0j
    circ.metadata["residual_phase"] = [phase.real, phase.imag]
    return circ, SynthesisTrace(steps, m_dits, phase)


def state_prep_circuit(psi: np.ndarray, d: int, n: int, fix_phase: bool = False) -> Circuit:
    """Circuit mapping |0...0> to psi/||psi|| up to (optionally fixed) global phase."""
    reduction, trace = club_householder(psi, 0, d, n)
    prep = reduction.adjoint()
    prep.metadata = {"kind": "state-preparation",
                     "residual_phase": reduction.metadata["residual_phase"]}
    if fix_phase:
        fix = identity(d) * trace.residual_phase
        prep.gates.insert(0, Gate(single_target_word(n, 0), fix, LEVEL_TWO_QUDIT, PRIM_LOCAL))
    return prep
