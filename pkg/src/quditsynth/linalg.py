"""Dense complex linear algebra for qudit circuit synthesis.

Everything here operates on plain ``numpy`` arrays of ``complex128``:
matrices are 2-d row-major arrays, state vectors are 1-d arrays.  All
functions are pure; inputs are never mutated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Default tolerance for unitarity / hermiticity checks.
UNITARY_TOL = 1e-10
#: Default threshold below which a Householder input counts as already collapsed.
DEGENERATE_TOL = 1e-12
#: Eigenvalues closer than this are treated as one degenerate eigenspace.
DEGENERACY_GROUP_TOL = 1e-8


class LinalgError(ValueError):
    """Raised when a matrix violates a precondition (non-unitary, zero vector, ...)."""


def as_complex(a) -> np.ndarray:
    return np.asarray(a, dtype=np.complex128)


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=np.complex128)


def adjoint(m: np.ndarray) -> np.ndarray:
    return np.conj(m).T


def kron(*mats: np.ndarray) -> np.ndarray:
    out = as_complex(mats[0])
    for m in mats[1:]:
        out = np.kron(out, as_complex(m))
    return out


def max_norm(m: np.ndarray) -> float:
    """Largest entry magnitude, the repo-wide distance measure."""
    m = np.asarray(m)
    return 0.0 if m.size == 0 else float(np.max(np.abs(m)))


def max_norm_distance(a: np.ndarray, b: np.ndarray) -> float:
    return max_norm(as_complex(a) - as_complex(b))


def phase_distance(a: np.ndarray, b: np.ndarray) -> tuple[float, complex]:
    """Distance between a and e^{i phi} b minimized over the unit scalar.

    Returns ``(error, phase)`` with ``error <= max_norm_distance(a, b)``;
    the candidate set always contains phase 1 so the inequality is exact.
    """
    a = as_complex(a)
    b = as_complex(b)
    candidates = [1.0 + 0.0j]
    tr = complex(np.trace(adjoint(b) @ a)) if a.ndim == 2 else complex(np.vdot(b, a))
    if abs(tr) > 0:
        candidates.append(tr / abs(tr))
    flat = np.argmax(np.abs(b))
    bv = b.reshape(-1)[flat]
    av = a.reshape(-1)[flat]
    if abs(bv) > 0 and abs(av) > 0:
        q = av / bv
        candidates.append(q / abs(q))
    best = None
    best_phase = 1.0 + 0.0j
    for ph in candidates:
        err = max_norm(a - ph * b)
        if best is None or err < best:
            best, best_phase = err, complex(ph)
    return float(best), best_phase


def is_unitary(m: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    m = as_complex(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return max_norm(adjoint(m) @ m - identity(m.shape[0])) < tol


def assert_unitary(m: np.ndarray, tol: float = UNITARY_TOL, what: str = "matrix") -> np.ndarray:
    m = as_complex(m)
    if not is_unitary(m, tol):
        raise LinalgError(f"{what} is not unitary within {tol:g}")
    return m


def is_hermitian(m: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    m = as_complex(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and max_norm(m - adjoint(m)) < tol


def householder_to_e0(psi: np.ndarray, degenerate_tol: float = DEGENERATE_TOL) -> np.ndarray:
    """Householder reflection W with W psi proportional to the first basis vector.

    The reflector is built from eta = psi_hat - mu e0 where psi_hat is the
    unit-normalized input and mu aligns the phase of its first component
    (mu = 1 when that component vanishes, the deterministic 0/0 convention).
    When psi is already proportional to e0 within ``degenerate_tol`` the
    identity is returned, the unique continuous completion.

    Raises:
        LinalgError: for a zero input vector.
    """
    psi = as_complex(psi).reshape(-1)
    d = psi.shape[0]
    norm = float(np.linalg.norm(psi))
    if norm == 0.0:
        raise LinalgError("zero vector has no reflection")
    psi_hat = psi / norm
    mu = 1.0 + 0.0j
    if abs(psi_hat[0]) > 0:
        mu = psi_hat[0] / abs(psi_hat[0])
    eta = psi_hat.copy()
    eta[0] -= mu
    eta_sq = float(np.real(np.vdot(eta, eta)))
    if eta_sq < degenerate_tol**2:
        return identity(d)
    return identity(d) - (2.0 / eta_sq) * np.outer(eta, np.conj(eta))


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues paired with orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def residual(self, m: np.ndarray) -> float:
        m = as_complex(m)
        res = m @ self.eigenvectors - self.eigenvectors * self.eigenvalues[None, :]
        return float(np.max(np.linalg.norm(res, axis=0))) if res.size else 0.0

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues[None, :]) @ adjoint(v)


def _regroup_degenerate(values: np.ndarray, vectors: np.ndarray, other: np.ndarray,
                        group_tol: float) -> np.ndarray:
    """Rediagonalize ``other`` inside each degenerate eigenspace of ``values``."""
    order = np.argsort(values)
    values = values[order]
    vectors = vectors[:, order]
    start = 0
    n = len(values)
    for i in range(1, n + 1):
        if i == n or values[i] - values[i - 1] > group_tol:
            if i - start > 1:
                block = vectors[:, start:i]
                sub = adjoint(block) @ other @ block
                sub = (sub + adjoint(sub)) / 2
                _, s = np.linalg.eigh(sub)
                vectors[:, start:i] = block @ s
            start = i
    return vectors


def normal_eigendecomposition(m: np.ndarray, mode: str,
                              tol: float = UNITARY_TOL,
                              group_tol: float = DEGENERACY_GROUP_TOL) -> EigenSystem:
    """Eigendecomposition of a Hermitian or unitary matrix with orthonormal vectors.

    mode "hermitian" uses a direct Hermitian solve and returns real
    eigenvalues.  mode "unitary" diagonalizes the commuting Hermitian pair
    (M+M')/2 and (M-M')/2i, rediagonalizing inside degenerate eigenspaces of
    the first so that degenerate unitary spectra still yield an orthonormal
    basis.
    """
    m = as_complex(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise LinalgError("eigendecomposition requires a square matrix")
    if mode == "hermitian":
        if not is_hermitian(m, tol):
            raise LinalgError(f"matrix is not Hermitian within {tol:g}")
        w, v = np.linalg.eigh((m + adjoint(m)) / 2)
        return EigenSystem(w.astype(np.complex128).real + 0j, v)
    if mode != "unitary":
        raise LinalgError(f"unknown eigendecomposition mode {mode!r}")
    assert_unitary(m, tol)
    h = (m + adjoint(m)) / 2
    k = (m - adjoint(m)) / 2j
    w, v = np.linalg.eigh(h)
    v = _regroup_degenerate(w, v, k, group_tol)
    lam = np.einsum("ij,jk,ki->i", adjoint(v), m, v)
    return EigenSystem(lam, v)


def unitary_root(v: np.ndarray, d: int, tol: float = UNITARY_TOL) -> np.ndarray:
    """Principal d-th root of a unitary: eigenphases divided by d on (-pi, pi]."""
    eig = normal_eigendecomposition(v, "unitary", tol=tol)
    phases = np.angle(eig.eigenvalues)
    roots = np.exp(1j * phases / d)
    w = eig.eigenvectors
    return (w * roots[None, :]) @ adjoint(w)


def qr_one_qudit(u: np.ndarray, tol: float = UNITARY_TOL,
                 degenerate_tol: float = DEGENERATE_TOL) -> tuple[list[np.ndarray], list[complex]]:
    """Householder QR of a one-qudit unitary.

    Returns ``(reflections, phases)`` with reflections[k-1] ... reflections[0]
    @ u equal to diag(phases); each reflection is Hermitian and embeds a
    subspace Householder as I oplus H.  Already collapsed columns emit no
    reflection, so the identity yields an empty list.
    """
    u = assert_unitary(u, tol)
    d = u.shape[0]
    work = u.copy()
    reflections: list[np.ndarray] = []
    for j in range(d - 1):
        sub = work[j:, j]
        below = float(np.linalg.norm(sub[1:]))
        if below < degenerate_tol:
            continue
        r = identity(d)
        r[j:, j:] = householder_to_e0(sub, degenerate_tol)
        work = r @ work
        reflections.append(r)
    return reflections, [complex(work[j, j]) for j in range(d)]


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed random unitary via QR with the phase fix of the R diagonal."""
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))[None, :]


def random_state(dim: int, rng: np.random.Generator, normalize: bool = True) -> np.ndarray:
    psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return psi / np.linalg.norm(psi) if normalize else psi


def random_density(dim: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = a @ adjoint(a)
    return rho / np.trace(rho).real
