"""Pydantic request/response models for the synthesis service.

Matrix, vector, and circuit payloads reuse the shared JSON formats and are
validated by the core loaders, so the wire format matches file I/O exactly.
"""

from __future__ import annotations

from pydantic import BaseModel, Field


class VersionResponse(BaseModel):
    tool: str
    version: str
    format_version: str


class ClubSequenceRequest(BaseModel):
    d: int = Field(ge=2)
    n: int = Field(ge=1)
    pretty: bool = False
    count_only: bool = False


class ClubSequenceResponse(BaseModel):
    d: int
    n: int
    length: int
    terms: list[str] | None = None


class StateSynthRequest(BaseModel):
    psi: dict
    target: str | int = 0
    fix_phase: bool = False
    prepare: bool = False


class UnitarySynthRequest(BaseModel):
    u: dict
    d: int | None = None
    n: int | None = None
    algo: str = "triangle"
    fix_phase: bool = False


class IsometrySynthRequest(BaseModel):
    columns: dict
    ell: int
    d: int | None = None
    n: int | None = None


class CircuitResponse(BaseModel):
    circuit: dict
    counts: dict | None = None


class LowerRequest(BaseModel):
    circuit: dict
    level: str = "cinc"
    epsilon: float = 0.0


class LowerResponse(BaseModel):
    circuit: dict
    counts: dict
    report: dict


class VerifyRequest(BaseModel):
    circuit: dict
    target: dict
    up_to_phase: bool = True
    level: str | None = None
    cap: int = 4096


class VerifyResponse(BaseModel):
    max_norm_error: float
    phase_adjusted_error: float
    global_phase: list[float]
    passes: dict[str, bool]
    gate_set_ok: bool
    gate_set_detail: str
    ok: bool


class CountsRequest(BaseModel):
    d: int = Field(ge=2)
    n: int = Field(ge=1)


class CountsResponse(BaseModel):
    d: int
    n: int
    h: dict[str, int]
    g: dict[str, int]
    f: dict[str, int]
    ell_t: int
    ell_s: int
    ell_t_bound: float
    ell_s_bound: float
    f_bound_ok: bool


class TableRequest(BaseModel):
    d_values: list[int]
    n_values: list[int]
    measure_cap: int = 64
    seed: int = 7


class TableResponse(BaseModel):
    rows: list[dict]
    csv: str


class ExpectRequest(BaseModel):
    a: dict
    rho: dict
    d: int | None = None
    n: int | None = None
    algo: str = "triangle"
    subspace_k: int | None = None


class ExpectResponse(BaseModel):
    value_re: float
    value_im: float
    populations: list[list[float]]
    eigenvalues: list[list[float]]


class SimulateRequest(BaseModel):
    circuit: dict
    state: dict | None = None
    rho: dict | None = None
    shots: int | None = None
    seed: int = 0


class SimulateResponse(BaseModel):
    state: dict | None = None
    rho: dict | None = None
    populations: list[float]
    samples: list[int] | None = None
