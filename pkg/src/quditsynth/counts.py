"""Analytic gate-count accounting for the two unitary synthesizers.

All integer formulas are evaluated exactly (Python integers):

  h(n,k)  controls in the state-synthesis walk: n uncontrolled gates, the
          rest singly controlled, none with two or more controls;
  g(n,k)  k-controlled operations a triangular reduction spends below the
          block diagonal, including the once-per-column clear gate;
  f(n,k)  the full reduction via f(n,k) = g(n,k) + f(n-1,k) + (d-1) f(n-1,k-1);
  ell_T / ell_S  CINC totals for the triangle and spectral compilers,
          combining f/h with the per-arity lowering costs.

``reference_table`` embeds the published per-cell (CINC, CINC^-1) pairs for
the better algorithm so reports can diff measured counts against them.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import log2

from .lowering import closed_form_counts_c


def sequence_length(d: int, n: int) -> int:
    return (d**n - 1) // (d - 1)


def h_count(n: int, k: int, d: int) -> int:
    if k == 0:
        return n
    if k == 1:
        return sequence_length(d, n) - n
    return 0


def g_count(n: int, k: int, d: int) -> int:
    if n < 2 or k < 1:
        return 0
    total = 0
    if k == n - 1:
        total += d**n - d ** (n - 1)
    total += (d * (d - 1) * d ** (n - 1) // 2) * h_count(n - 1, k - 1, d)
    return total


def f_count(n: int, k: int, d: int) -> int:
    if k == 0:
        return 1
    if n <= 1 or k < 0:
        return 0
    return g_count(n, k, d) + f_count(n - 1, k, d) + (d - 1) * f_count(n - 1, k - 1, d)


def arity_cost(k: int, d: int) -> tuple[int, int]:
    """(CINC, CINC^-1) cost of one k-controlled gate after full lowering."""
    if k == 0:
        return 0, 0
    if k == 1:
        return d, d
    cf = closed_form_counts_c(k + 1, d)
    return cf["cinc"], cf["cinc_inv"]


def triangle_predicted(d: int, n: int) -> tuple[int, int]:
    """Exact CINC / CINC^-1 totals of the triangle compiler on a generic input."""
    cn1, cn1t = arity_cost(n - 1, d)
    cinc = d**n * cn1
    cinc_inv = d**n * cn1t
    for k in range(n):
        ck, ckt = arity_cost(k, d)
        fk = f_count(n, k, d)
        cinc += ck * fk
        cinc_inv += ckt * fk
    return cinc, cinc_inv


def spectral_predicted(d: int, n: int) -> tuple[int, int]:
    """Exact CINC / CINC^-1 totals of the spectral compiler on a generic input."""
    cn1, cn1t = arity_cost(n - 1, d)
    per_build = d * h_count(n, 1, d)
    return d**n * (2 * per_build + cn1), d**n * (2 * per_build + cn1t)


def ell_t_bound(d: int, n: int) -> float:
    """Closed-form overestimate of the triangle CINC total."""
    return 2 * (n + 1) ** (2 + log2(d)) * d ** (n + 4) + 26 * d ** (8 + 2 * n)


def ell_s_bound(d: int, n: int) -> float:
    """Closed-form overestimate of the spectral CINC total."""
    return 2 * d ** (n + 1) * (sequence_length(d, n) - n) \
        + (n + 1) ** (2 + log2(d)) * d ** (n + 4)


def f_bound_holds(d: int, n_max: int) -> bool:
    """Check f(n,k) <= d**(2n-k+4) for all 1 <= n <= n_max, 0 <= k <= n-1."""
    for n in range(1, n_max + 1):
        for k in range(n):
            if f_count(n, k, d) > d ** (2 * n - k + 4):
                return False
    return True


@dataclass(frozen=True)
class CountModel:
    d: int
    n: int
    h: dict[int, int]
    g: dict[int, int]
    f: dict[int, int]
    ell_t: int
    ell_s: int
    ell_t_bound: float
    ell_s_bound: float
    f_bound_ok: bool


def count_model(d: int, n: int) -> CountModel:
    if d < 2 or n < 1:
        raise ValueError("need d >= 2 and n >= 1")
    ks = range(n)
    lt = triangle_predicted(d, n)[0]
    ls = spectral_predicted(d, n)[0]
    return CountModel(
        d=d,
        n=n,
        h={k: h_count(n, k, d) for k in ks},
        g={k: g_count(n, k, d) for k in ks},
        f={k: f_count(n, k, d) for k in ks},
        ell_t=lt,
        ell_s=ls,
        ell_t_bound=ell_t_bound(d, n),
        ell_s_bound=ell_s_bound(d, n),
        f_bound_ok=all(f_count(n, k, d) <= d ** (2 * n - k + 4) for k in ks),
    )


# Published best-algorithm (CINC, CINC^-1) pairs, keyed by (d, n); the flag
# marks cells credited to the triangle compiler.
REFERENCE_CELLS: dict[tuple[int, int], tuple[int, int, bool]] = {
    (2, 2): (18, 18, True), (3, 2): (78, 78, True), (4, 2): (220, 220, True),
    (5, 2): (495, 495, True), (6, 2): (996, 996, True), (7, 2): (1708, 1708, True),
    (8, 2): (2808, 2808, True), (9, 2): (4365, 4365, True), (10, 2): (6490, 6490, True),
    (2, 3): (192, 154, True), (3, 3): (2025, 1944, False), (4, 3): (10752, 10496, False),
    (5, 3): (39375, 38750, False), (6, 3): (114048, 112752, False),
    (7, 3): (280917, 278516, False), (8, 3): (614400, 610304, False),
    (9, 3): (1226907, 1220346, False), (10, 3): (2280000, 2270000, False),
    (2, 4): (1152, 1056, False), (3, 4): (23085, 22113, False),
    (4, 4): (200704, 195584, False), (5, 4): (1096875, 1078125, False),
    (6, 4): (4447872, 4393440, False), (7, 4): (14638897, 14504441, False),
    (8, 4): (41287680, 40992768, False), (9, 4): (103394799, 102804309, False),
    (10, 4): (235600000, 234500000, False),
    (2, 5): (5504, 4928, False), (3, 5): (223074, 211410, False),
    (4, 5): (3317760, 3215360, False), (5, 5): (27875000, 27312500, False),
    (6, 5): (161523072, 159236928, False), (7, 5): (720717774, 713188238, False),
    (8, 5): (2649227264, 2627993600, False), (9, 5): (8386138980, 8332994880, False),
    (10, 5): (23574000000, 23453000000, False),
    (2, 6): (23296, 21120, False), (3, 6): (1931121, 1856763, False),
    (4, 6): (50003968, 49070080, False),
    (2, 7): (92672, 84224, False), (3, 7): (16605891, 16087572, False),
    (2, 8): (353280, 324096, False), (3, 8): (141599502, 138627369, False),
    (2, 9): (1333248, 1246208, False), (3, 9): (1224144819, 1209914010, False),
    (2, 10): (5025792, 4786176, False), (3, 10): (10741839786, 10680015483, False),
    (2, 11): (19128320, 18452480, False), (3, 11): (95432986134, 95147070876, False),
    (2, 12): (73515008, 71639040, False),
}


def reference_cell(d: int, n: int) -> tuple[int, int, bool] | None:
    return REFERENCE_CELLS.get((d, n))


def table_report(d_values, n_values, measure_cap: int = 64, seed: int = 7) -> list[dict]:
    """Per-(d, n, algorithm) count rows diffed against the published cells.

    Instances with d**n within ``measure_cap`` run both compilers on a seeded
    random unitary and tally the fully lowered primitives; larger cells fall
    back to the exact symbolic accounting (flagged in the row).  Reference
    values attach to the rows of the algorithm the published table credits.
    """
    import numpy as np

    from .circuits import gate_counts
    from .linalg import haar_unitary
    from .lowering import lower_circuit
    from .unitarysynth import spectral_synthesize, triangle

    rows: list[dict] = []
    for d in d_values:
        for n in n_values:
            dim = d**n
            measured: dict[str, tuple[int, int]] = {}
            mode = "measured" if dim <= measure_cap else "symbolic"
            if mode == "measured":
                rng = np.random.default_rng(seed + 1000 * d + n)
                u = haar_unitary(dim, rng)
                for algo, synth in (("triangle", triangle), ("spectral", spectral_synthesize)):
                    lowered = lower_circuit(synth(u, d, n), "cinc")
                    counts = gate_counts(lowered)
                    measured[algo] = (counts.cinc, counts.cinc_inv)
            else:
                measured["triangle"] = triangle_predicted(d, n)
                measured["spectral"] = spectral_predicted(d, n)
            totals = {a: sum(v) for a, v in measured.items()}
            our_winner = min(totals, key=lambda a: (totals[a], a))
            if totals["triangle"] == totals["spectral"]:
                our_winner = "triangle"
            ref = reference_cell(d, n)
            paper_winner = None if ref is None else ("triangle" if ref[2] else "spectral")
            for algo in ("triangle", "spectral"):
                cinc, cinc_inv = measured[algo]
                row = {
                    "d": d, "n": n, "algo": algo, "mode": mode,
                    "cinc": cinc, "cinc_inv": cinc_inv,
                    "paper_cinc": None, "paper_cinc_inv": None, "match": None,
                    "our_winner": our_winner, "paper_winner": paper_winner,
                    "winner_agrees": None if paper_winner is None else our_winner == paper_winner,
                    "ell_bound": ell_t_bound(d, n) if algo == "triangle" else ell_s_bound(d, n),
                }
                row["within_bound"] = cinc <= row["ell_bound"]
                if ref is not None and paper_winner == algo:
                    row["paper_cinc"], row["paper_cinc_inv"] = ref[0], ref[1]
                    row["match"] = (cinc == ref[0] and cinc_inv == ref[1])
                rows.append(row)
    return rows


def table_report_csv(rows: list[dict]) -> str:
    cols = ["d", "n", "algo", "cinc", "cinc_inv", "paper_cinc", "paper_cinc_inv",
            "match", "mode", "our_winner", "paper_winner", "winner_agrees", "within_bound"]
    out = [",".join(cols)]
    for row in rows:
        out.append(",".join("" if row[c] is None else str(row[c]) for c in cols))
    return "\n".join(out) + "\n"
