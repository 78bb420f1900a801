"""Acceptance suite: one test per criterion, one printed verdict line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the verdict lines.
Tolerances are fixed here and nowhere else.
"""

import time

import numpy as np
import pytest

from quditsynth.circuits import (
    Circuit,
    PRIM_CINC,
    PRIM_CINC_INV,
    PRIM_LOCAL,
    apply_circuit,
    circuit_unitary,
    controlled_gate,
    gate_counts,
    gate_matrix,
    index_of_dits,
)
from quditsynth.clubseq import make_club_sequence, orbit_closure_check, transition_check, zero_pattern_sets
from quditsynth.counts import (
    REFERENCE_CELLS,
    ell_s_bound,
    ell_t_bound,
    f_count,
    g_count,
    h_count,
    sequence_length,
    spectral_predicted,
    table_report,
    triangle_predicted,
)
from quditsynth.linalg import haar_unitary, identity, max_norm_distance, phase_distance, random_density, random_state
from quditsynth.lowering import (
    closed_form_counts_b,
    closed_form_counts_c,
    lower_circuit,
    lower_controlled_flip_form,
    lower_k_controlled_inc,
    lower_multi_controlled,
    lower_singly_controlled,
)
from quditsynth.statesynth import club_householder
from quditsynth.unitarysynth import spectral_synthesize, triangle
from quditsynth.verify import expectation_value, gate_set_membership, subspace_expectation

SEED = 987654321

STATE_CASES = [(2, 2), (2, 3), (2, 4), (2, 5), (3, 2), (3, 3), (3, 4), (4, 2), (4, 3), (5, 2)]
ORACLE_CASES = [(2, 4), (3, 3), (4, 2)]
MULTI_CASES = [(2, 2), (2, 3), (3, 2)]
UNITARY_CASES = [(2, 2), (2, 3), (3, 2), (4, 2)]
EXPECT_DIMS = [(2, 2), (2, 3), (3, 2), (3, 3)]  # d**n in {4, 8, 9, 27}


def verdict(num: int, label: str, ok: bool, detail: str = "") -> None:
    tag = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"[{tag}] criterion {num}: {label}{suffix}")
    assert ok, f"criterion {num} failed: {label} {suffix}"


def cinc_library_ok(circ: Circuit, cinc_only: bool = False) -> bool:
    allowed = {PRIM_CINC, PRIM_LOCAL} if cinc_only else {PRIM_CINC, PRIM_CINC_INV, PRIM_LOCAL}
    return all(g.primitive in allowed and g.num_controls <= 1 for g in circ.gates)


def test_criterion_1_and_3_state_synthesis():
    rng = np.random.default_rng(SEED)
    start = time.monotonic()
    histogram_exact = True
    for d, n in STATE_CASES:
        dim = d**n
        p = sequence_length(d, n)
        for _ in range(20):
            psi = random_state(dim, rng)
            m = int(rng.integers(dim))
            circ, _ = club_householder(psi, m, d, n)
            out = apply_circuit(circ, psi)
            mask = np.ones(dim, dtype=bool)
            mask[m] = False
            assert np.max(np.abs(out[mask])) < 1e-9, (d, n)
            assert abs(abs(out[m]) - 1.0) < 1e-9
            assert len(circ.gates) == p
            assert all(g.num_controls <= 1 for g in circ.gates)
            counts = gate_counts(circ)
            histogram_exact &= counts.per_arity == {0: n, 1: p - n}
    elapsed = time.monotonic() - start
    verdict(1, "state synthesis collapses with p gates, <=1 control",
            elapsed < 10.0, f"200 states, {elapsed:.2f}s")
    verdict(3, "control histogram is exactly h(n,0)=n, h(n,1)=p-n", histogram_exact)


def test_criterion_2_zero_pattern_oracle():
    rng = np.random.default_rng(SEED + 1)
    start = time.monotonic()
    ok = True
    for d, n in ORACLE_CASES:
        seq = make_club_sequence(d, n)
        dim = d**n
        # Set-level checks, exhaustively over the sequence.
        for j in range(1, len(seq)):
            ok &= transition_check(seq, j)["ok"]
        for j in range(1, len(seq) + 1):
            ok &= orbit_closure_check(seq, j)
        survivors = [
            {index_of_dits(s, d) for s in zero_pattern_sets(seq, j).union}
            for j in range(1, len(seq) + 1)
        ]
        # Amplitude-level check on 20 seeded states.
        for _ in range(20):
            psi = random_state(dim, rng)
            _, trace = club_householder(psi, 0, d, n, keep_states=True)
            for j, step in enumerate(trace.steps, start=1):
                if j < len(seq):
                    outside = [i for i in range(dim) if i not in survivors[j]]
                else:
                    outside = list(range(1, dim))
                if outside:
                    ok &= bool(np.max(np.abs(step.post_state[outside])) < 1e-10)
    elapsed = time.monotonic() - start
    verdict(2, "zero-pattern sets, transitions, orbits, amplitudes",
            ok and elapsed < 5.0, f"{elapsed:.2f}s")


def test_criterion_4_single_control_lowering():
    rng = np.random.default_rng(SEED + 2)
    ok = True
    membership = True
    for d in (2, 3, 4, 5):
        for _ in range(100):
            v = haar_unitary(d, rng)
            gate = controlled_gate(2, 1, {0: d - 1}, v)
            low = lower_singly_controlled(gate, d)
            ok &= max_norm_distance(circuit_unitary(low), gate_matrix(gate, d, 2)) < 1e-8
            counts = gate_counts(low)
            ok &= counts.cinc == d and counts.cinc_inv == d
            membership &= cinc_library_ok(low)
            flips = lower_controlled_flip_form(gate, d)
            n_flips = sum(1 for g in flips.gates
                          if g.primitive and g.primitive.startswith("FLIP"))
            ok &= n_flips == 2 * d * (d - 1)
    verdict(4, "one-control lowering: 1e-8 equality, d CINC + d CINC^-1, 2d(d-1) flips",
            ok and membership)


def test_criterion_5_multi_control_lowering():
    rng = np.random.default_rng(SEED + 3)
    ok = True
    membership = True
    for d, k in MULTI_CASES:
        n = k + 1
        v = haar_unitary(d, rng)
        gate = controlled_gate(n, k, {i: d - 1 for i in range(k)}, v)
        low = lower_multi_controlled(gate, d)
        expected = identity(d**n)
        expected[-d:, -d:] = v
        ok &= max_norm_distance(circuit_unitary(low), expected) < 1e-7
        ok &= low.qudits_touched() <= set(range(n))
        full = lower_circuit(Circuit(d, n, [gate]), "cinc")
        counts = gate_counts(full)
        cf = closed_form_counts_c(n, d)
        ok &= (counts.cinc, counts.cinc_inv) == (cf["cinc"], cf["cinc_inv"])
        ok &= counts.cinc <= cf["bound_cinc"] and counts.cinc_inv <= cf["bound_cinc_inv"]
        membership &= cinc_library_ok(full)
        # The k-controlled increment follows its own recurrence.
        inc_counts = gate_counts(lower_circuit(lower_k_controlled_inc(k, d, k + 2), "cinc"))
        bf = closed_form_counts_b(k, d)
        ok &= (inc_counts.cinc, inc_counts.cinc_inv) == (bf["cinc"], bf["cinc_inv"])
        ok &= bf["within_bounds"]
    verdict(5, "ancilla-free multi-control: 1e-7 equality, exact b/c recurrences, bounds",
            ok and membership)


def test_criterion_6_unitary_synthesis():
    rng = np.random.default_rng(SEED + 4)
    ok = True
    membership = True
    bounds_ok = True
    for d, n in UNITARY_CASES:
        dim = d**n
        for i in range(50):
            u = haar_unitary(dim, rng)
            ct = triangle(u, d, n)
            et, _ = phase_distance(circuit_unitary(ct), u)
            ok &= et < 1e-7
            ok &= ct.metadata["reduction_offdiag"] < 1e-8
            cs = spectral_synthesize(u, d, n)
            es, _ = phase_distance(circuit_unitary(cs), u)
            ok &= es < 1e-7
            if i == 0:
                for circ, bound in ((ct, ell_t_bound(d, n)), (cs, ell_s_bound(d, n))):
                    low = lower_circuit(circ, "cinc")
                    membership &= cinc_library_ok(low)
                    membership &= cinc_library_ok(lower_circuit(circ, "cinc-only"),
                                                  cinc_only=True)
                    bounds_ok &= gate_counts(low).cinc <= bound
    verdict(6, "triangle and spectral reconstruct within 1e-7, reduction diagonal 1e-8",
            ok and membership and bounds_ok)


def test_criterion_7_count_accounting(capsys=None):
    # Closed formulas, exact integers.
    ok = True
    for d in (2, 3, 4):
        for n in range(1, 9):
            p = sequence_length(d, n)
            ok &= h_count(n, 0, d) == n and h_count(n, 1, d) == p - n
            ok &= all(h_count(n, k, d) == 0 for k in range(2, n + 1))
            for k in range(n):
                ok &= f_count(n, k, d) == (g_count(n, k, d) + f_count(n - 1, k, d)
                                           + (d - 1) * f_count(n - 1, k - 1, d)) or k == 0
            ok &= f_count(n, 0, d) == 1
        for n in (3, 4, 5):
            ok &= g_count(n, n - 1, d) >= d**n - d ** (n - 1)
    # Lemma bound f(n,k) <= d^(2n-k+4) for d=2..4, n <= 10.
    for d in (2, 3, 4):
        for n in range(1, 11):
            for k in range(n):
                ok &= f_count(n, k, d) <= d ** (2 * n - k + 4)
    # Measured fully lowered counts sit under the closed-form bound displays.
    rng = np.random.default_rng(SEED + 5)
    for d, n in UNITARY_CASES:
        u = haar_unitary(d**n, rng)
        mt = gate_counts(lower_circuit(triangle(u, d, n), "cinc")).cinc
        ms = gate_counts(lower_circuit(spectral_synthesize(u, d, n), "cinc")).cinc
        ok &= mt <= ell_t_bound(d, n) and ms <= ell_s_bound(d, n)
    verdict(7, "h/g/f exact, lemma bound (d<=4, n<=10), measured within ell_T/ell_S", ok)

    # Published-table comparison: report and diff, exact match not required.
    rows = table_report([2, 3], [2, 3], measure_cap=32, seed=SEED)
    tie = next(r for r in rows if (r["d"], r["n"], r["algo"]) == (2, 2, "triangle"))
    print(f"    table (2,2): measured {tie['cinc']}/{tie['cinc_inv']} "
          f"vs published {tie['paper_cinc']}/{tie['paper_cinc_inv']} "
          f"({'tie reproduced' if tie['match'] else 'diff'})")
    winners_agree = True
    mismatched_cells = []
    for (d, n), (pc, pci, tri) in sorted(REFERENCE_CELLS.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        t, s = triangle_predicted(d, n), spectral_predicted(d, n)
        our = "triangle" if sum(t) <= sum(s) else "spectral"
        paper = "triangle" if tri else "spectral"
        winners_agree &= our == paper
        measured = t if paper == "triangle" else s
        if measured != (pc, pci):
            mismatched_cells.append((d, n, measured, (pc, pci)))
    print(f"    winner pattern (triangle best at n=2 and (2,3) only): "
          f"{'agrees at all ' + str(len(REFERENCE_CELLS)) + ' cells' if winners_agree else 'MISMATCH'}")
    print(f"    cell diffs under our conventions: {len(mismatched_cells)}/{len(REFERENCE_CELLS)}")
    for d, n, ours, paper in mismatched_cells:
        print(f"      (d={d}, n={n}): ours {ours[0]}/{ours[1]} vs published {paper[0]}/{paper[1]}")
    verdict(7, "table comparison: (2,2) tie 18/18 and winner pattern reproduced",
            bool(tie["match"]) and winners_agree,
            f"{len(mismatched_cells)} cells differ, itemized above")


def test_criterion_8_expectation_pipeline():
    rng = np.random.default_rng(SEED + 6)
    ok = True
    pair_count = 0
    for d, n in EXPECT_DIMS:
        dim = d**n
        for i in range(5):
            pair_count += 1
            a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
            if i % 2 == 0:
                a = (a + a.conj().T) / 2  # Hermitian path
            rho = random_density(dim, rng)
            res = expectation_value(a, rho, d, n, algo="triangle" if i % 2 else "spectral")
            ok &= abs(res.value - np.trace(a @ rho)) < 1e-8
            # Subspace variant against the direct projector trace.
            ah = (a + a.conj().T) / 2
            k = max(1, dim // 3)
            w, vecs = np.linalg.eigh(ah)
            order = sorted(range(dim), key=lambda q: (-abs(w[q]), np.angle(w[q] + 0j)))
            direct = sum(w[order[j]] * np.real(np.conj(vecs[:, order[j]]) @ rho @ vecs[:, order[j]])
                         for j in range(k))
            sub = subspace_expectation(ah, rho, k, d, n)
            ok &= abs(sub.value - direct) < 1e-8
    verdict(8, "circuit expectation matches Tr[A rho] within 1e-8 incl. split and subspace",
            ok, f"{pair_count} seeded pairs, dims 4/8/9/27")


def test_criterion_9_gate_set_universality():
    # Syntactic membership over the circuit families of criteria 4-6.
    rng = np.random.default_rng(SEED + 7)
    ok = True
    for d in (2, 3, 4, 5):
        gate = controlled_gate(2, 1, {0: d - 1}, haar_unitary(d, rng))
        ok &= cinc_library_ok(lower_singly_controlled(gate, d))
    for d, k in MULTI_CASES:
        gate = controlled_gate(k + 1, k, {i: d - 1 for i in range(k)}, haar_unitary(d, rng))
        ok &= cinc_library_ok(lower_circuit(Circuit(d, k + 1, [gate]), "cinc"))
    for d, n in UNITARY_CASES:
        u = haar_unitary(d**n, rng)
        for synth in (triangle, spectral_synthesize):
            circ = synth(u, d, n)
            low = lower_circuit(circ, "cinc")
            ok &= cinc_library_ok(low)
            member, _ = gate_set_membership(low, "cinc")
            ok &= member
            only = lower_circuit(circ, "cinc-only")
            ok &= cinc_library_ok(only, cinc_only=True)
            member_only, _ = gate_set_membership(only, "cinc-only")
            ok &= member_only
    verdict(9, "lowered circuits carry only LOCAL + CINC (+ CINC^-1) primitives", ok)
