"""FastAPI service wrapping the synthesis package.

Every endpoint is a stateless wrapper over the core modules; the CLI is a
thin client of this app.  Domain errors surface as 400s with the original
message.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__
from ..circuits import Circuit, CircuitError, dits_of_index, gate_counts
from ..clubseq import ClubError, make_club_sequence, sequence_length
from ..counts import count_model, table_report, table_report_csv
from ..jsonio import (
    FORMAT_VERSION,
    FormatError,
    circuit_from_json,
    circuit_to_json,
    matrix_from_json,
    matrix_to_json,
    vector_from_json,
    vector_to_json,
)
from ..linalg import LinalgError
from ..lowering import closed_form_counts_c, lower_circuit
from ..statesynth import club_householder, state_prep_circuit
from ..unitarysynth import fix_global_phase, spectral_synthesize, synthesize_isometry, triangle
from ..verify import (
    VerifyError,
    expectation_value,
    sample_populations,
    simulate_density,
    simulate_state,
    subspace_expectation,
    verify_circuit,
)
from . import schemas

DOMAIN_ERRORS = (LinalgError, CircuitError, ClubError, FormatError, VerifyError, ValueError)

app = FastAPI(title="quditsynth", version=__version__)


def _counts_dict(circ: Circuit) -> dict:
    c = gate_counts(circ)
    return {
        "per_arity": {str(k): v for k, v in sorted(c.per_arity.items())},
        "cinc": c.cinc,
        "cinc_inv": c.cinc_inv,
        "local": c.local,
        "elided": c.elided,
        "total": c.total,
    }


def _infer_register(dim: int, d: int | None, n: int | None) -> tuple[int, int]:
    if d is not None and n is not None:
        if d**n != dim:
            raise ValueError(f"d**n = {d**n} does not match dimension {dim}")
        return d, n
    if d is not None:
        n = 0
        size = 1
        while size < dim:
            size *= d
            n += 1
        if size != dim:
            raise ValueError(f"dimension {dim} is not a power of d={d}")
        return d, n
    # Smallest d >= 2 with an exact power wins (prefers qubits for 2**k).
    for cand in range(2, dim + 1):
        size, count = 1, 0
        while size < dim:
            size *= cand
            count += 1
        if size == dim:
            return cand, count
    raise ValueError(f"cannot infer (d, n) for dimension {dim}")


@app.get("/version", response_model=schemas.VersionResponse)
def version() -> schemas.VersionResponse:
    return schemas.VersionResponse(tool="quditsynth", version=__version__,
                                   format_version=FORMAT_VERSION)


@app.post("/club-sequence", response_model=schemas.ClubSequenceResponse)
def club_sequence(req: schemas.ClubSequenceRequest) -> schemas.ClubSequenceResponse:
    try:
        if req.count_only:
            return schemas.ClubSequenceResponse(d=req.d, n=req.n,
                                                length=sequence_length(req.d, req.n))
        seq = make_club_sequence(req.d, req.n)
    except DOMAIN_ERRORS as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    terms = [t.to_string(pretty=req.pretty) for t in seq.terms]
    return schemas.ClubSequenceResponse(d=req.d, n=req.n, length=len(seq), terms=terms)


def _parse_target(target, d: int, n: int) -> tuple[int, ...]:
    """Dit string ('120', '1 2 0') or plain index, normalized to dits."""
    if isinstance(target, int):
        return dits_of_index(target, d, n)
    s = target.strip()
    if " " in s:
        return tuple(int(t) for t in s.split())
    if len(s) == n and all(c.isdigit() and int(c) < d for c in s):
        return tuple(int(c) for c in s)
    return dits_of_index(int(s or "0"), d, n)


@app.post("/synth/state", response_model=schemas.CircuitResponse)
def synth_state(req: schemas.StateSynthRequest) -> schemas.CircuitResponse:
    try:
        psi = vector_from_json(req.psi)
        d, n = _infer_register(psi.shape[0], None, None)
        m = _parse_target(req.target, d, n)
        if req.prepare:
            circ = state_prep_circuit(psi, d, n, fix_phase=req.fix_phase)
        else:
            circ, _ = club_householder(psi, m, d, n, fix_phase=req.fix_phase)
    except DOMAIN_ERRORS as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return schemas.CircuitResponse(circuit=circuit_to_json(circ), counts=_counts_dict(circ))


@app.post("/synth/unitary", response_model=schemas.CircuitResponse)
def synth_unitary(req: schemas.UnitarySynthRequest) -> schemas.CircuitResponse:
    try:
        u = matrix_from_json(req.u)
        d, n = _infer_register(u.shape[0], req.d, req.n)
        if req.algo == "triangle":
            circ = triangle(u, d, n)
        elif req.algo == "spectral":
            circ = spectral_synthesize(u, d, n)
        else:
            raise ValueError(f"unknown algorithm {req.algo!r}")
        if req.fix_phase:
            circ = fix_global_phase(circ, u)
    except DOMAIN_ERRORS as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return schemas.CircuitResponse(circuit=circuit_to_json(circ), counts=_counts_dict(circ))


@app.post("/synth/isometry", response_model=schemas.CircuitResponse)
def synth_isometry(req: schemas.IsometrySynthRequest) -> schemas.CircuitResponse:
    try:
        cols = matrix_from_json(req.columns)
        d, n = _infer_register(cols.shape[0], req.d, req.n)
        circ = synthesize_isometry(cols, req.ell, d, n)
    except DOMAIN_ERRORS as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return schemas.CircuitResponse(circuit=circuit_to_json(circ), counts=_counts_dict(circ))


@app.post("/lower", response_model=schemas.LowerResponse)
def lower(req: schemas.LowerRequest) -> schemas.LowerResponse:
    try:
        circ = circuit_from_json(req.circuit)
        lowered = lower_circuit(circ, req.level, req.epsilon)
    except DOMAIN_ERRORS as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    counts = _counts_dict(lowered)
    report = {
        "level": req.level,
        "epsilon": req.epsilon,
        "input_gates": len(circ.gates),
        "output_gates": len(lowered.gates),
        "closed_form_full_control": closed_form_counts_c(circ.n, circ.d),
    }
    return schemas.LowerResponse(circuit=circuit_to_json(lowered), counts=counts, report=report)


@app.post("/verify", response_model=schemas.VerifyResponse)
def verify(req: schemas.VerifyRequest) -> schemas.VerifyResponse:
    try:
        circ = circuit_from_json(req.circuit)
        target = matrix_from_json(req.target)
        res = verify_circuit(circ, target, up_to_phase=req.up_to_phase,
                             level=req.level, cap=req.cap)
    except DOMAIN_ERRORS as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return schemas.VerifyResponse(
        max_norm_error=res.max_norm_error,
        phase_adjusted_error=res.phase_adjusted_error,
        global_phase=[res.global_phase.real, res.global_phase.imag],
        passes={f"{t:.0e}": ok for t, ok in res.passes.items()},
        gate_set_ok=res.gate_set_ok,
        gate_set_detail=res.gate_set_detail,
        ok=res.ok,
    )


@app.post("/counts", response_model=schemas.CountsResponse)
def counts(req: schemas.CountsRequest) -> schemas.CountsResponse:
    model = count_model(req.d, req.n)
    return schemas.CountsResponse(
        d=model.d, n=model.n,
        h={str(k): v for k, v in model.h.items()},
        g={str(k): v for k, v in model.g.items()},
        f={str(k): v for k, v in model.f.items()},
        ell_t=model.ell_t, ell_s=model.ell_s,
        ell_t_bound=model.ell_t_bound, ell_s_bound=model.ell_s_bound,
        f_bound_ok=model.f_bound_ok,
    )


@app.post("/counts/table", response_model=schemas.TableResponse)
def counts_table(req: schemas.TableRequest) -> schemas.TableResponse:
    rows = table_report(req.d_values, req.n_values, req.measure_cap, req.seed)
    return schemas.TableResponse(rows=rows, csv=table_report_csv(rows))


@app.post("/expect", response_model=schemas.ExpectResponse)
def expect(req: schemas.ExpectRequest) -> schemas.ExpectResponse:
    try:
        a = matrix_from_json(req.a)
        rho = matrix_from_json(req.rho)
        d, n = _infer_register(a.shape[0], req.d, req.n)
        if req.subspace_k is None:
            res = expectation_value(a, rho, d, n, algo=req.algo)
        else:
            res = subspace_expectation(a, rho, req.subspace_k, d, n)
    except DOMAIN_ERRORS as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return schemas.ExpectResponse(
        value_re=float(res.value.real),
        value_im=float(res.value.imag),
        populations=[p.tolist() for p in res.populations],
        eigenvalues=[np.asarray(e, dtype=float).tolist() for e in res.eigenvalues],
    )


@app.post("/simulate", response_model=schemas.SimulateResponse)
def simulate(req: schemas.SimulateRequest) -> schemas.SimulateResponse:
    try:
        circ = circuit_from_json(req.circuit)
        if (req.state is None) == (req.rho is None):
            raise ValueError("provide exactly one of 'state' or 'rho'")
        if req.state is not None:
            out = simulate_state(circ, vector_from_json(req.state))
            pops = np.abs(out) ** 2
            state_obj, rho_obj = vector_to_json(out), None
        else:
            rho_out = simulate_density(circ, matrix_from_json(req.rho))
            pops = np.real(np.diagonal(rho_out))
            state_obj, rho_obj = None, matrix_to_json(rho_out)
        samples = None
        if req.shots:
            rng = np.random.default_rng(req.seed)
            samples = sample_populations(pops, req.shots, rng).tolist()
    except DOMAIN_ERRORS as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return schemas.SimulateResponse(state=state_obj, rho=rho_obj,
                                    populations=[float(x) for x in pops], samples=samples)
