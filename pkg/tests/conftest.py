import numpy as np
import pytest

from quditsynth.circuits import dits_of_index, index_of_dits


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def apply_gate_reference(letters, v, psi, d, n):
    """Independent brute-force gate application used as a simulation oracle.

    Walks every basis index, checks the numeric letters, and mixes the
    target fiber explicitly; shares no code with the vectorized path.
    """
    psi = np.asarray(psi, dtype=complex)
    dim = d**n
    out = np.empty(dim, dtype=complex)
    tgt = letters.index("T")
    controls = {i: let for i, let in enumerate(letters) if isinstance(let, int)}
    for idx in range(dim):
        dits = dits_of_index(idx, d, n)
        if all(dits[i] == val for i, val in controls.items()):
            acc = 0.0 + 0.0j
            for j in range(d):
                src = list(dits)
                src[tgt] = j
                acc += v[dits[tgt], j] * psi[index_of_dits(src, d)]
            out[idx] = acc
        else:
            out[idx] = psi[idx]
    return out


def controlled_matrix_reference(letters, v, d, n):
    """Dense matrix of a controlled gate from the brute-force oracle."""
    dim = d**n
    cols = []
    for c in range(dim):
        e = np.zeros(dim, dtype=complex)
        e[c] = 1.0
        cols.append(apply_gate_reference(letters, v, e, d, n))
    return np.stack(cols, axis=1)
