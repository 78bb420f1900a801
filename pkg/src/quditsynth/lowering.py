"""Ancilla-free lowering of controlled gates.

Three layers, all on the qudits of the input gate only:

* a singly-controlled one-qudit unitary becomes locals plus exactly d CINC
  and d CINC^-1 via the eigenphase gadget (one controlled geometric-sequence
  diagonal per eigenvalue);
* a k-controlled unitary recurses through the d-th-root identity
  controlled(k, V) = controlled(k-1, X) [controlled(k-1, INC) one_ctrl(X')]^(d-1)
  controlled(k-1, INC) one_ctrl(X^(d-1)) with X = V^(1/d), cycling the last
  control through every dit value;
* k-controlled increments with a spare line available instead use the
  halving rule controlled(k, INC) = [A B]^d where A targets the spare.

Controls on values other than d-1 are normalized by local increment-power
conjugation, which adds no two-qudit gates.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, log2

import numpy as np

from .circuits import (
    Circuit,
    Gate,
    LEVEL_CINC,
    LEVEL_TWO_QUDIT,
    PRIM_CINC,
    PRIM_CINC_INV,
    PRIM_LOCAL,
    CircuitError,
    cinc_gate,
    controlled_gate,
    flip_matrix,
    gate_counts,
    inc_matrix,
    local_gate,
    prim_flip,
    prim_inc_power,
)
from .linalg import (
    adjoint,
    as_complex,
    assert_unitary,
    householder_to_e0,
    identity,
    max_norm,
    normal_eigendecomposition,
    unitary_root,
)


@dataclass
class LoweringReport:
    description: str
    circuit: Circuit
    counts: object
    bound_check: dict
    root_chain: list[float]


def _control_wrap(gate: Gate, d: int):
    """Pre/post increment locals turning every control value into d-1."""
    n = len(gate.word)
    pre: list[Gate] = []
    post: list[Gate] = []
    for pos, val in gate.word.controls.items():
        if val == d - 1:
            continue
        up = (d - 1 - val) % d
        down = (val + 1) % d
        pre.append(local_gate(n, pos, inc_matrix(d, up), prim_inc_power(up), LEVEL_TWO_QUDIT))
        post.append(local_gate(n, pos, inc_matrix(d, down), prim_inc_power(down), LEVEL_TWO_QUDIT))
    return pre, post


def lower_singly_controlled(gate: Gate, d: int) -> Circuit:
    """Lower a one-control gate to locals plus d CINC and d CINC^-1.

    One gadget per eigenvalue of the target operator: with xi the d-th root
    of the eigenphase and D the geometric diagonal diag(xi**j), the sequence
    D^-1, CINC^-1, D, CINC, (phase xi on the control) applies the eigenphase
    to the |0> component, and the Householder taking |0> to the eigenket
    conjugates it into place.  All d gadgets are always emitted, so the
    CINC/CINC^-1 counts are input-independent.
    """
    n = len(gate.word)
    controls = gate.word.controls
    if len(controls) != 1:
        raise CircuitError("lower_singly_controlled expects exactly one control")
    v = assert_unitary(gate.v, what="controlled operator")
    (ctrl,) = controls
    tgt = gate.word.target
    pre, post = _control_wrap(gate, d)

    eig = normal_eigendecomposition(v, "unitary")
    circ = Circuit(d, n, metadata={"kind": "one-control-lowering"})
    circ.extend(pre)
    for k in range(d):
        theta = float(np.angle(eig.eigenvalues[k]))
        wk = householder_to_e0(eig.eigenvectors[:, k])
        xi = np.exp(1j * theta / d)
        diag = np.diag(xi ** np.arange(d))
        ctrl_phase = identity(d)
        ctrl_phase[d - 1, d - 1] = xi
        circ.append(local_gate(n, tgt, adjoint(wk), PRIM_LOCAL, LEVEL_CINC))
        circ.append(local_gate(n, tgt, np.conj(diag), PRIM_LOCAL, LEVEL_CINC))
        circ.append(cinc_gate(d, n, ctrl, tgt, inverse=True))
        circ.append(local_gate(n, tgt, diag, PRIM_LOCAL, LEVEL_CINC))
        circ.append(cinc_gate(d, n, ctrl, tgt, inverse=False))
        circ.append(local_gate(n, ctrl, ctrl_phase, PRIM_LOCAL, LEVEL_CINC))
        circ.append(local_gate(n, tgt, wk, PRIM_LOCAL, LEVEL_CINC))
    circ.extend(post)
    for i, g in enumerate(circ.gates):
        if g.num_controls == 0 and g.level != LEVEL_CINC:
            circ.gates[i] = Gate(g.word, g.v, LEVEL_CINC, PRIM_LOCAL)
    return circ


def expand_cinc_to_flips(circ: Circuit) -> Circuit:
    """Rewrite CINC and CINC^-1 as d-1 controlled flips of adjacent dit pairs."""
    d = circ.d
    out = Circuit(circ.d, circ.n, metadata=dict(circ.metadata))
    for g in circ.gates:
        if g.primitive not in (PRIM_CINC, PRIM_CINC_INV):
            out.append(g)
            continue
        pairs = list(range(d - 2, -1, -1))  # application order for INC
        if g.primitive == PRIM_CINC_INV:
            pairs.reverse()
        for j in pairs:
            out.append(Gate(g.word, flip_matrix(d, j, j + 1), LEVEL_TWO_QUDIT,
                            prim_flip(j, j + 1)))
    out.metadata["kind"] = "controlled-flip-lowering"
    return out


def lower_controlled_flip_form(gate: Gate, d: int) -> Circuit:
    """Alternative lowering into 2d(d-1) controlled flips plus locals."""
    return expand_cinc_to_flips(lower_singly_controlled(gate, d))


def _inc_root(d: int) -> np.ndarray:
    return unitary_root(inc_matrix(d), d)


class _Emitter:
    """Shared recursion state for multi-control lowering."""

    def __init__(self, circ: Circuit, d: int, span, epsilon: float):
        self.circ = circ
        self.d = d
        self.span = tuple(span)
        self.epsilon = epsilon
        self.inc_root = _inc_root(d)

    def two(self, ctrl: int, tgt: int, v: np.ndarray) -> None:
        self.circ.append(controlled_gate(self.circ.n, tgt, {ctrl: self.d - 1}, v,
                                         LEVEL_TWO_QUDIT))

    def controlled_v(self, ctrls: tuple[int, ...], tgt: int, v: np.ndarray) -> None:
        d = self.d
        if not ctrls:
            self.circ.append(local_gate(self.circ.n, tgt, v, PRIM_LOCAL, LEVEL_TWO_QUDIT))
            return
        if len(ctrls) == 1:
            self.two(ctrls[0], tgt, v)
            return
        if self.epsilon > 0 and max_norm(v - identity(d)) < self.epsilon:
            return
        x = unitary_root(v, d)
        cyc, rest = ctrls[-1], ctrls[:-1]
        self.two(cyc, tgt, np.linalg.matrix_power(x, d - 1))
        self.inc(rest, cyc)
        for _ in range(d - 1):
            self.two(cyc, tgt, adjoint(x))
            self.inc(rest, cyc)
        self.controlled_v(rest, tgt, x)

    def inc(self, ctrls: tuple[int, ...], tgt: int) -> None:
        d = self.d
        if not ctrls:
            self.circ.append(local_gate(self.circ.n, tgt, inc_matrix(d),
                                        prim_inc_power(1), LEVEL_TWO_QUDIT))
            return
        if len(ctrls) == 1:
            self.circ.append(cinc_gate(d, self.circ.n, ctrls[0], tgt, level=LEVEL_TWO_QUDIT))
            return
        free = [q for q in self.span if q not in ctrls and q != tgt]
        if len(ctrls) >= 3 and free:
            spare = free[0]
            a = ceil((len(ctrls) + 1) / 2)
            first, second = ctrls[:a], tuple(sorted(ctrls[a:] + (spare,)))
            for _ in range(d):
                self.inc(first, spare)
                self.inc(second, tgt)
            return
        # Width-constrained or base case: the root identity with V = INC.
        x = self.inc_root
        cyc, rest = ctrls[-1], ctrls[:-1]
        self.two(cyc, tgt, np.linalg.matrix_power(x, d - 1))
        self.inc(rest, cyc)
        for _ in range(d - 1):
            self.two(cyc, tgt, adjoint(x))
            self.inc(rest, cyc)
        self.controlled_v(rest, tgt, x)


def root_chain(v: np.ndarray, d: int, levels: int) -> list[float]:
    """Max-norm distances to the identity along successive d-th roots."""
    chain = [max_norm(as_complex(v) - identity(v.shape[0]))]
    x = as_complex(v)
    for _ in range(levels):
        x = unitary_root(x, d)
        chain.append(max_norm(x - identity(x.shape[0])))
    return chain


def lower_multi_controlled(gate: Gate, d: int, epsilon: float = 0.0) -> Circuit:
    """Lower a k-controlled one-qudit gate (k >= 2) to single-control gates.

    Output touches only the k+1 qudits of the input word; increments needed
    by the recursion borrow the gate's own lines as workspace.
    """
    n = len(gate.word)
    controls = gate.word.controls
    if len(controls) < 2:
        raise CircuitError("lower_multi_controlled expects at least two controls")
    v = assert_unitary(gate.v, what="controlled operator")
    tgt = gate.word.target
    ctrls = tuple(sorted(controls))
    span = tuple(sorted(controls) + [tgt])

    circ = Circuit(d, n, metadata={"kind": "multi-control-lowering",
                                   "root_chain": root_chain(v, d, len(ctrls) - 1)})
    pre, post = _control_wrap(gate, d)
    circ.extend(pre)
    _Emitter(circ, d, span, epsilon).controlled_v(ctrls, tgt, v)
    circ.extend(post)
    return circ


def lower_k_controlled_inc(k: int, d: int, n_ambient: int) -> Circuit:
    """Circuit for a k-controlled increment inside an n_ambient register.

    Controls sit on lines 0..k-1 and the target on line k; remaining ambient
    lines serve as halving workspace.  With no spare line the root identity
    is used instead, preserving the no-extra-qudit guarantee.
    """
    if k < 1:
        raise CircuitError("need at least one control")
    if n_ambient < k + 1:
        raise CircuitError(f"ambient width {n_ambient} cannot hold a {k}-controlled gate")
    circ = Circuit(d, n_ambient, metadata={"kind": "k-controlled-increment", "k": k})
    _Emitter(circ, d, tuple(range(n_ambient)), 0.0).inc(tuple(range(k)), k)
    return circ


def lower_circuit(circ: Circuit, level: str, epsilon: float = 0.0) -> Circuit:
    """Lower every gate of a circuit to the requested library level.

    Levels: "two-qudit" removes multi-controls, "cinc" additionally expands
    generic single-control gates through the eigenphase gadget, "cinc-only"
    then rewrites each CINC^-1 as d-1 CINC.  Elidable gates are dropped.
    """
    if level not in ("two-qudit", "cinc", "cinc-only"):
        raise CircuitError(f"unknown lowering level {level!r}")
    d, n = circ.d, circ.n
    stage1 = Circuit(d, n, metadata={"kind": f"lowered-{level}"})
    for g in circ.gates:
        if g.elidable:
            continue
        if g.num_controls >= 2:
            stage1.gates.extend(lower_multi_controlled(g, d, epsilon).gates)
        else:
            stage1.append(g)
    if level == "two-qudit":
        return stage1
    out = Circuit(d, n, metadata=dict(stage1.metadata))
    for g in stage1.gates:
        if g.num_controls == 1 and g.primitive not in (PRIM_CINC, PRIM_CINC_INV):
            out.gates.extend(lower_singly_controlled(g, d).gates)
        elif g.num_controls == 0:
            out.append(Gate(g.word, g.v, LEVEL_CINC, PRIM_LOCAL))
        else:
            out.append(Gate(g.word, g.v, LEVEL_CINC, g.primitive))
    if level == "cinc-only":
        out = cinc_only_rewrite(out)
    return out


def cinc_only_rewrite(circ: Circuit) -> Circuit:
    """Replace each CINC^-1 with d-1 CINC (the inverse is the d-1 power)."""
    d = circ.d
    out = Circuit(circ.d, circ.n, metadata=dict(circ.metadata))
    for g in circ.gates:
        if g.primitive == PRIM_CINC_INV:
            for _ in range(d - 1):
                out.append(cinc_gate(d, circ.n, next(iter(g.word.controls)), g.word.target))
        else:
            out.append(g)
    out.metadata["cinc_only"] = True
    return out


def closed_form_counts_b(k: int, d: int) -> dict:
    """CINC / CINC^-1 counts for a k-controlled increment, with bounds.

    Recurrence b_k = d (b_ceil((k+1)/2) + b_floor((k+1)/2)) for k >= 3 with
    b_1 = 1, b_2 = d^2 + 2d (and 0, d^2 + d for the inverse count); the
    closed-form overestimate is (d^2+2d)(2d)(k+2)^(1+log2 d).
    """
    memo_b = {1: 1, 2: d * d + 2 * d}
    memo_bt = {1: 0, 2: d * d + d}

    def get(memo, i):
        if i not in memo:
            hi, lo = (i + 2) // 2, (i + 1) // 2
            memo[i] = d * (get(memo, hi) + get(memo, lo))
        return memo[i]

    b = get(memo_b, k)
    bt = get(memo_bt, k)
    bound = (d * d + 2 * d) * (2 * d) * (k + 2) ** (1 + log2(d))
    bound_t = (d * d + d) * (2 * d) * (k + 2) ** (1 + log2(d))
    return {"cinc": b, "cinc_inv": bt, "bound_cinc": bound, "bound_cinc_inv": bound_t,
            "within_bounds": b <= bound and bt <= bound_t}


def closed_form_counts_c(n: int, d: int) -> dict:
    """CINC / CINC^-1 counts for an (n-1)-controlled one-qudit unitary.

    Recurrence c_k = d b_(k-1) + c_(k-1) + d^2 with c_1 = d (similarly for
    the inverse counts), plus the displayed closed-form overestimates.
    """
    k = n - 1
    if k < 1:
        return {"cinc": 0, "cinc_inv": 0, "bound_cinc": 0.0, "bound_cinc_inv": 0.0,
                "within_bounds": True}
    c, ct = d, d
    for i in range(2, k + 1):
        bb = closed_form_counts_b(i - 1, d)
        c = d * bb["cinc"] + c + d * d
        ct = d * bb["cinc_inv"] + ct + d * d
    e = 2 + log2(d)
    pref = (2 * d * d) / e
    bound = pref * (d * d + 2 * d) * ((n + 1) ** e - 4 * d * d) + (n - 2) * d * d + 2 * d
    bound_t = pref * (d * d + d) * ((n + 1) ** e - 4 * d * d) + (n - 2) * d * d + d
    within = (k < 2) or (c <= bound and ct <= bound_t)
    return {"cinc": c, "cinc_inv": ct, "bound_cinc": bound, "bound_cinc_inv": bound_t,
            "within_bounds": within}


def lowering_report(gate: Gate, d: int, level: str = "cinc",
                    epsilon: float = 0.0) -> LoweringReport:
    """Lower one gate and package counts and closed-form bound checks."""
    k = gate.num_controls
    base = Circuit(d, len(gate.word), [gate])
    lowered = lower_circuit(base, level, epsilon)
    counts = gate_counts(lowered)
    bound: dict = {}
    if k >= 2:
        cf = closed_form_counts_c(k + 1, d)
        bound = {
            "expected_cinc": cf["cinc"],
            "expected_cinc_inv": cf["cinc_inv"],
            "bound_cinc": cf["bound_cinc"],
            "bound_cinc_inv": cf["bound_cinc_inv"],
            "measured_matches": counts.cinc == cf["cinc"] and counts.cinc_inv == cf["cinc_inv"],
            "within_bounds": counts.cinc <= cf["bound_cinc"]
            and counts.cinc_inv <= cf["bound_cinc_inv"],
        }
    elif k == 1 and level in ("cinc", "cinc-only"):
        bound = {"expected_cinc": d, "expected_cinc_inv": d,
                 "measured_matches": counts.cinc == d and counts.cinc_inv == d}
    chain = root_chain(gate.v, d, max(k - 1, 0)) if k >= 1 else []
    word = gate.word.to_string(d)
    return LoweringReport(f"word {word}, {k} controls", lowered, counts, bound, chain)
