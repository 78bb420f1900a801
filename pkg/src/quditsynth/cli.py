"""Command-line front end.

The CLI is a thin client of the FastAPI service: every subcommand builds a
JSON request, posts it to the app (in process by default, or to a remote
instance via --server), and writes the response to stdout or files.

Exit codes: 0 success, 1 verification failure, 2 input or transport error.
"""

from __future__ import annotations

import asyncio
import json
import sys

import click
import httpx

from . import __version__
from .jsonio import FORMAT_VERSION, load, dump


class ClientError(Exception):
    pass


class ServiceClient:
    """Posts requests either in process (ASGI) or to a remote server."""

    def __init__(self, server: str | None = None):
        self.server = server

    def _request(self, method: str, path: str, payload: dict | None = None) -> dict:
        if self.server:
            with httpx.Client(base_url=self.server, timeout=300.0) as client:
                resp = client.request(method, path, json=payload)
        else:
            from .service import app

            async def go():
                transport = httpx.ASGITransport(app=app)
                async with httpx.AsyncClient(transport=transport,
                                             base_url="http://quditsynth.local",
                                             timeout=300.0) as client:
                    return await client.request(method, path, json=payload)

            resp = asyncio.run(go())
        if resp.status_code >= 400:
            try:
                detail = resp.json().get("detail", resp.text)
            except Exception:
                detail = resp.text
            raise ClientError(f"{path}: {detail}")
        return resp.json()

    def get(self, path: str) -> dict:
        return self._request("GET", path)

    def post(self, path: str, payload: dict) -> dict:
        return self._request("POST", path, payload)


def _client(ctx: click.Context) -> ServiceClient:
    return ServiceClient(ctx.obj.get("server"))


def _fail(message: str, code: int = 2) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _print_version(ctx, param, value):
    if not value or ctx.resilient_parsing:
        return
    click.echo(f"qsynth {__version__} (format {FORMAT_VERSION})")
    ctx.exit()


def parse_range(spec: str) -> list[int]:
    """'2..5' -> [2,3,4,5]; '3' -> [3]; '2,4' -> [2,4]."""
    values: list[int] = []
    for part in spec.split(","):
        if ".." in part:
            lo, hi = part.split("..")
            values.extend(range(int(lo), int(hi) + 1))
        else:
            values.append(int(part))
    return values


@click.group()
@click.option("--server", default=None, metavar="URL",
              help="Remote service URL (default: run the service in process).")
@click.option("--version", is_flag=True, callback=_print_version, expose_value=False,
              is_eager=True, help="Print tool and format version.")
@click.pass_context
def main(ctx, server):
    """Qudit circuit synthesis, lowering, counting, and verification."""
    ctx.ensure_object(dict)
    ctx.obj["server"] = server


@main.command("club-seq")
@click.option("-d", "--d", "d", type=int, required=True)
@click.option("-n", "--n", "n", type=int, required=True)
@click.option("--pretty", is_flag=True, help="Use the club suit glyph instead of 'c'.")
@click.option("--count-only", is_flag=True, help="Print only the sequence length.")
@click.pass_context
def club_seq(ctx, d, n, pretty, count_only):
    """Emit the club sequence, one term per line."""
    try:
        resp = _client(ctx).post("/club-sequence", {
            "d": d, "n": n, "pretty": pretty, "count_only": count_only})
    except (ClientError, httpx.HTTPError) as exc:
        _fail(str(exc))
    if count_only:
        click.echo(str(resp["length"]))
    else:
        for term in resp["terms"]:
            click.echo(term)


@main.group()
def synth():
    """State, unitary, and isometry synthesis."""


@synth.command("state")
@click.option("--in", "infile", required=True, type=click.Path(exists=True))
@click.option("--target", default="0", help="Collapse target as a dit string or index.")
@click.option("--out", "outfile", required=True, type=click.Path())
@click.option("--fix-phase", is_flag=True)
@click.option("--prepare", is_flag=True,
              help="Emit the preparation circuit |0...0> -> psi instead of the reduction.")
@click.pass_context
def synth_state(ctx, infile, target, outfile, fix_phase, prepare):
    try:
        psi = load(infile)
        resp = _client(ctx).post("/synth/state", {
            "psi": psi, "target": target, "fix_phase": fix_phase, "prepare": prepare})
    except (ClientError, httpx.HTTPError, OSError, ValueError) as exc:
        _fail(str(exc))
    dump(resp["circuit"], outfile)
    click.echo(f"wrote {outfile}: {len(resp['circuit']['gates'])} gates")


@synth.command("unitary")
@click.option("--algo", type=click.Choice(["triangle", "spectral"]), default="triangle")
@click.option("--in", "infile", required=True, type=click.Path(exists=True))
@click.option("--out", "outfile", required=True, type=click.Path())
@click.option("--fix-phase", is_flag=True)
@click.pass_context
def synth_unitary(ctx, algo, infile, outfile, fix_phase):
    try:
        u = load(infile)
        resp = _client(ctx).post("/synth/unitary", {
            "u": u, "algo": algo, "fix_phase": fix_phase})
    except (ClientError, httpx.HTTPError, OSError, ValueError) as exc:
        _fail(str(exc))
    dump(resp["circuit"], outfile)
    click.echo(f"wrote {outfile}: {len(resp['circuit']['gates'])} gates")


@synth.command("isometry")
@click.option("--in", "infile", required=True, type=click.Path(exists=True))
@click.option("--ell", type=int, required=True)
@click.option("--out", "outfile", required=True, type=click.Path())
@click.pass_context
def synth_isometry(ctx, infile, ell, outfile):
    try:
        cols = load(infile)
        resp = _client(ctx).post("/synth/isometry", {"columns": cols, "ell": ell})
    except (ClientError, httpx.HTTPError, OSError, ValueError) as exc:
        _fail(str(exc))
    dump(resp["circuit"], outfile)
    click.echo(f"wrote {outfile}: {len(resp['circuit']['gates'])} gates")


@main.command("lower")
@click.option("--level", type=click.Choice(["two-qudit", "cinc", "cinc-only"]), required=True)
@click.option("--in", "infile", required=True, type=click.Path(exists=True))
@click.option("--out", "outfile", required=True, type=click.Path())
@click.option("--report", "reportfile", default=None, type=click.Path())
@click.option("--epsilon", type=float, default=0.0,
              help="Optional early-truncation threshold for the root recursion.")
@click.pass_context
def lower(ctx, level, infile, outfile, reportfile, epsilon):
    try:
        circ = load(infile)
        resp = _client(ctx).post("/lower", {
            "circuit": circ, "level": level, "epsilon": epsilon})
    except (ClientError, httpx.HTTPError, OSError, ValueError) as exc:
        _fail(str(exc))
    dump(resp["circuit"], outfile)
    if reportfile:
        dump({"counts": resp["counts"], "report": resp["report"]}, reportfile)
    counts = resp["counts"]
    click.echo(f"wrote {outfile}: cinc={counts['cinc']} cinc_inv={counts['cinc_inv']} "
               f"local={counts['local']} total={counts['total']}")


@main.command("verify")
@click.option("--circuit", "circuitfile", required=True, type=click.Path(exists=True))
@click.option("--target", "targetfile", required=True, type=click.Path(exists=True))
@click.option("--up-to-phase/--exact", default=True)
@click.option("--tol", type=float, default=1e-7)
@click.option("--level", default=None)
@click.option("--cap", type=int, default=4096)
@click.pass_context
def verify(ctx, circuitfile, targetfile, up_to_phase, tol, level, cap):
    """Check a circuit against a target matrix; exit 1 on failure."""
    try:
        resp = _client(ctx).post("/verify", {
            "circuit": load(circuitfile), "target": load(targetfile),
            "up_to_phase": up_to_phase, "level": level, "cap": cap})
    except (ClientError, httpx.HTTPError, OSError, ValueError) as exc:
        _fail(str(exc))
    err = resp["phase_adjusted_error"] if up_to_phase else resp["max_norm_error"]
    ok = err < tol and resp["gate_set_ok"]
    click.echo(json.dumps(resp, indent=2))
    if not ok:
        sys.exit(1)


@main.command("counts")
@click.option("-d", "--d", "d_spec", default=None, help="Dimension or range, e.g. 3 or 2..5.")
@click.option("-n", "--n", "n_spec", default=None, help="Qudit count or range.")
@click.option("--table", is_flag=True, help="Emit the per-cell comparison table.")
@click.option("--out", "outfile", default=None, type=click.Path())
@click.option("--measure-cap", type=int, default=64)
@click.option("--seed", type=int, default=7)
@click.pass_context
def counts(ctx, d_spec, n_spec, table, outfile, measure_cap, seed):
    """Analytic count model, or the measured-vs-published table as CSV."""
    if d_spec is None or n_spec is None:
        _fail("counts requires -d and -n")
    try:
        if table:
            resp = _client(ctx).post("/counts/table", {
                "d_values": parse_range(d_spec), "n_values": parse_range(n_spec),
                "measure_cap": measure_cap, "seed": seed})
            csv = resp["csv"]
            if outfile:
                with open(outfile, "w", encoding="utf-8") as fh:
                    fh.write(csv)
                click.echo(f"wrote {outfile} ({len(resp['rows'])} rows)")
            else:
                click.echo(csv, nl=False)
        else:
            (d,), (n,) = parse_range(d_spec), parse_range(n_spec)
            resp = _client(ctx).post("/counts", {"d": d, "n": n})
            click.echo(json.dumps(resp, indent=2))
    except (ClientError, httpx.HTTPError, OSError, ValueError) as exc:
        _fail(str(exc))


@main.command("expect")
@click.option("--a", "afile", required=True, type=click.Path(exists=True))
@click.option("--rho", "rhofile", required=True, type=click.Path(exists=True))
@click.option("--algo", type=click.Choice(["triangle", "spectral"]), default="triangle")
@click.option("--subspace", "subspace_k", type=int, default=None)
@click.pass_context
def expect(ctx, afile, rhofile, algo, subspace_k):
    """Expectation value via the synthesized-measurement pipeline."""
    try:
        resp = _client(ctx).post("/expect", {
            "a": load(afile), "rho": load(rhofile), "algo": algo,
            "subspace_k": subspace_k})
    except (ClientError, httpx.HTTPError, OSError, ValueError) as exc:
        _fail(str(exc))
    click.echo(json.dumps(resp, indent=2))


@main.command("simulate")
@click.option("--circuit", "circuitfile", required=True, type=click.Path(exists=True))
@click.option("--state", "statefile", default=None, type=click.Path(exists=True))
@click.option("--rho", "rhofile", default=None, type=click.Path(exists=True))
@click.option("--out", "outfile", default=None, type=click.Path())
@click.option("--shots", type=int, default=None)
@click.option("--seed", type=int, default=0)
@click.pass_context
def simulate(ctx, circuitfile, statefile, rhofile, outfile, shots, seed):
    """Apply a circuit to a state vector or density matrix."""
    try:
        payload: dict = {"circuit": load(circuitfile), "shots": shots, "seed": seed}
        if statefile:
            payload["state"] = load(statefile)
        if rhofile:
            payload["rho"] = load(rhofile)
        resp = _client(ctx).post("/simulate", payload)
    except (ClientError, httpx.HTTPError, OSError, ValueError) as exc:
        _fail(str(exc))
    if outfile:
        dump(resp["state"] if resp.get("state") else resp["rho"], outfile)
        click.echo(f"wrote {outfile}")
    else:
        click.echo(json.dumps(resp, indent=2))


@main.command("serve")
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
def serve(host, port):
    """Run the synthesis service."""
    import uvicorn

    uvicorn.run("quditsynth.service:app", host=host, port=port)


if __name__ == "__main__":
    main()
