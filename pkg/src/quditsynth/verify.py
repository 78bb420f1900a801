"""Verification harness and the measurement-style expectation pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circuits import (
    Circuit,
    DENSE_CAP,
    LEVEL_CINC,
    PRIM_CINC,
    PRIM_CINC_INV,
    PRIM_LOCAL,
    apply_circuit,
    circuit_unitary,
)
from .linalg import (
    adjoint,
    as_complex,
    is_hermitian,
    max_norm,
    max_norm_distance,
    normal_eigendecomposition,
    phase_distance,
)
from .statesynth import club_householder
from .unitarysynth import spectral_synthesize, triangle

#: Verdict tiers reported by verify_circuit.
DEFAULT_TIERS = (1e-7, 1e-8, 1e-10, 1e-12)


class VerifyError(ValueError):
    pass


def check_density_matrix(rho: np.ndarray, trace_tol: float = 1e-10,
                         herm_tol: float = 1e-10, psd_tol: float = 1e-9) -> np.ndarray:
    """Validate trace one, hermiticity, and positive semidefiniteness."""
    rho = as_complex(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise VerifyError("density matrix must be square")
    if abs(np.trace(rho) - 1.0) > trace_tol:
        raise VerifyError(f"density matrix trace {np.trace(rho):.6f} is not 1")
    if not is_hermitian(rho, herm_tol):
        raise VerifyError("density matrix is not Hermitian")
    w = np.linalg.eigvalsh((rho + adjoint(rho)) / 2)
    if w.min() < -psd_tol:
        raise VerifyError(f"density matrix has negative eigenvalue {w.min():.3e}")
    return rho


@dataclass
class VerificationResult:
    max_norm_error: float
    phase_adjusted_error: float
    global_phase: complex
    passes: dict[float, bool]
    gate_set_ok: bool
    gate_set_detail: str
    ok: bool = field(init=False)

    def __post_init__(self):
        self.ok = self.gate_set_ok and any(self.passes.values())


def gate_set_membership(circ: Circuit, level: str | None = None) -> tuple[bool, str]:
    """Syntactic library check against a declared lowering level.

    cinc-lowered circuits may contain only LOCAL, CINC and CINC^-1 tags (or
    only LOCAL and CINC after the cinc-only rewrite); two-qudit circuits may
    not contain gates with two or more controls.
    """
    level = level or circ.metadata.get("level") or circ.metadata.get("kind")
    cinc_only = bool(circ.metadata.get("cinc_only"))
    for i, g in enumerate(circ.gates):
        k = g.num_controls
        if level in ("cinc", "cinc-only", "cinc-lowered", LEVEL_CINC):
            allowed = {PRIM_CINC, PRIM_LOCAL} if cinc_only else {PRIM_CINC, PRIM_CINC_INV, PRIM_LOCAL}
            if g.primitive not in allowed:
                return False, f"gate {i} has primitive {g.primitive!r}, outside {sorted(allowed)}"
            if k > 1:
                return False, f"gate {i} has {k} controls at cinc level"
        elif level in ("two-qudit",):
            if k > 1:
                return False, f"gate {i} has {k} controls at two-qudit level"
    return True, "ok"


def verify_circuit(circ: Circuit, target: np.ndarray, up_to_phase: bool = True,
                   tiers=DEFAULT_TIERS, level: str | None = None,
                   cap: int = DENSE_CAP) -> VerificationResult:
    """Compare a circuit's matrix against a target with tiered verdicts."""
    target = as_complex(target)
    dim = circ.d**circ.n
    if target.shape != (dim, dim):
        raise VerifyError(f"target shape {target.shape} does not match circuit dim {dim}")
    u = circuit_unitary(circ, cap=cap)
    raw = max_norm_distance(u, target)
    adjusted, phase = phase_distance(u, target)
    err = adjusted if up_to_phase else raw
    ok, detail = gate_set_membership(circ, level)
    return VerificationResult(
        max_norm_error=raw,
        phase_adjusted_error=adjusted,
        global_phase=phase,
        passes={t: err < t for t in tiers},
        gate_set_ok=ok,
        gate_set_detail=detail,
    )


def _diagonalizer_circuit(h: np.ndarray, d: int, n: int, algo: str) -> tuple[Circuit, np.ndarray]:
    """Synthesize the map sending eigenvectors of h onto basis kets."""
    eig = normal_eigendecomposition(h, "hermitian")
    u = adjoint(eig.eigenvectors)
    synth = triangle if algo == "triangle" else spectral_synthesize
    return synth(u, d, n), eig.eigenvalues.real


@dataclass
class ExpectationResult:
    value: complex
    populations: list[np.ndarray]
    eigenvalues: list[np.ndarray]

    @property
    def real_value(self) -> float:
        return float(self.value.real)


def expectation_value(a: np.ndarray, rho: np.ndarray, d: int, n: int,
                      algo: str = "triangle", herm_tol: float = 1e-10) -> ExpectationResult:
    """Expectation of an operator through the synthesized-measurement pipeline.

    Hermitian operators run once: diagonalize, compile the diagonalizing
    unitary, conjugate the state, and weight the diagonal populations by the
    eigenvalues.  General operators split into Hermitian and anti-Hermitian
    parts, each handled the same way.
    """
    a = as_complex(a)
    dim = d**n
    if a.shape != (dim, dim):
        raise VerifyError(f"operator shape {a.shape} does not match d**n = {dim}")
    rho = check_density_matrix(rho)
    parts: list[tuple[np.ndarray, complex]] = []
    if is_hermitian(a, herm_tol):
        parts.append((a, 1.0 + 0.0j))
    else:
        parts.append(((a + adjoint(a)) / 2, 1.0 + 0.0j))
        parts.append(((a - adjoint(a)) / 2j, 1.0j))
    total = 0.0 + 0.0j
    pops: list[np.ndarray] = []
    eigs: list[np.ndarray] = []
    for h, weight in parts:
        circ, lam = _diagonalizer_circuit(h, d, n, algo)
        uc = circuit_unitary(circ)
        p = np.real(np.diagonal(uc @ rho @ adjoint(uc))).copy()
        total += weight * complex(np.dot(lam, p))
        pops.append(p)
        eigs.append(lam)
    return ExpectationResult(total, pops, eigs)


def subspace_expectation(a: np.ndarray, rho: np.ndarray, k: int, d: int, n: int,
                         herm_tol: float = 1e-10) -> ExpectationResult:
    """Weight of the state on the top-k eigenspace of a Hermitian operator.

    Eigenpairs are ordered by descending magnitude, ties broken by phase on
    (-pi, pi]; each kept eigenvector gets its own state-synthesis circuit
    collapsing it onto the matching basis ket.
    """
    a = as_complex(a)
    dim = d**n
    if not 0 <= k <= dim:
        raise VerifyError("subspace size out of range")
    if not is_hermitian(a, herm_tol):
        raise VerifyError("subspace expectation requires a Hermitian operator")
    rho = check_density_matrix(rho)
    eig = normal_eigendecomposition(a, "hermitian")
    lam = eig.eigenvalues.real
    order = sorted(range(dim), key=lambda i: (-abs(lam[i]), np.angle(lam[i] + 0j)))
    total = 0.0 + 0.0j
    pops = np.zeros(dim)
    for j in range(k):
        idx = order[j]
        circ, _ = club_householder(eig.eigenvectors[:, idx], j, d, n)
        uc = circuit_unitary(circ)
        p = float(np.real((uc @ rho @ adjoint(uc))[j, j]))
        pops[j] = p
        total += lam[idx] * p
    return ExpectationResult(total, [pops], [lam[order]])


def simulate_state(circ: Circuit, psi: np.ndarray) -> np.ndarray:
    psi = as_complex(psi).reshape(-1)
    if psi.shape[0] != circ.d**circ.n:
        raise VerifyError("state dimension does not match circuit")
    return apply_circuit(circ, psi)


def simulate_density(circ: Circuit, rho: np.ndarray, cap: int = DENSE_CAP) -> np.ndarray:
    rho = check_density_matrix(rho)
    u = circuit_unitary(circ, cap=cap)
    return u @ rho @ adjoint(u)


def sample_populations(p: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Multinomial shot sampling over measured populations (demo mode)."""
    p = np.clip(np.real(p), 0.0, None)
    total = p.sum()
    if total <= 0:
        raise VerifyError("populations sum to zero")
    return rng.multinomial(shots, p / total)
