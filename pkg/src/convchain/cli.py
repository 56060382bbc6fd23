"""Command line interface: a thin client of the HTTP service.

Every subcommand marshals its flags into the service request schema and sends
it through the HTTP layer; by default an in-process ASGI transport is used
(no server needed), and --server redirects the same requests to a running
instance.  Outputs are CSV or JSON on stdout or --out; --manifest appends a
one-line JSON run record.

Exit codes: 0 success, 2 domain error, 3 resource-budget error, 64 usage.
"""

from __future__ import annotations

import json
import os
import sys
import time
from typing import Optional

import click
import httpx

from . import __version__

EXIT_DOMAIN = 2
EXIT_BUDGET = 3
EXIT_USAGE = 64


class ServiceClient:
    def __init__(self, server: Optional[str]):
        if server:
            self._client = httpx.Client(base_url=server, timeout=None)
        else:
            # in-process transport: same HTTP interface, no server required
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore", DeprecationWarning)
                from fastapi.testclient import TestClient

            from .service import app

            self._client = TestClient(app, raise_server_exceptions=False)

    def post(self, path: str, payload: dict) -> dict:
        resp = self._client.post(path, json=payload)
        if resp.status_code >= 400:
            try:
                body = resp.json()
            except ValueError:
                body = {}
            err = body.get("error") or {}
            kind = err.get("kind", "domain")
            message = err.get("message") or body.get("detail") or resp.text
            click.echo(f"error ({kind}): {message}", err=True)
            sys.exit(EXIT_BUDGET if kind == "budget" else EXIT_DOMAIN)
        return resp.json()

    def close(self):
        self._client.close()


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        click.echo(text)


def _manifest(path: Optional[str], command: str, payload: dict, started: float) -> None:
    if not path:
        return
    record = {
        "command": command,
        "parameters": payload,
        "seed": payload.get("seed"),
        "versions": {"convchain": __version__,
                     "python": sys.version.split()[0]},
        "wall_time_s": round(time.time() - started, 6),
    }
    with open(path, "a") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")


def _params_payload(kind, z1, z2, z, y, lam, tol) -> dict:
    payload = {"kind": kind, "lam": lam, "truncation_tolerance": tol}
    if z1 is not None:
        payload["z1"] = z1
    if z2 is not None:
        payload["z2"] = z2
    if z is not None:
        payload["z"] = z
    if y is not None:
        payload["y"] = y
    return payload


def params_options(fn):
    fn = click.option("--kind", type=click.Choice(["endpoint", "length", "mixed"]),
                      default="endpoint", show_default=True)(fn)
    fn = click.option("--z1", type=float, default=None, help="endpoint weight base for x1")(fn)
    fn = click.option("--z2", type=float, default=None, help="endpoint weight base for x2 (defaults to z1)")(fn)
    fn = click.option("--z", type=float, default=None, help="length/mixed weight base")(fn)
    fn = click.option("--y", type=float, default=None, help="mixed coordinate-sum base")(fn)
    fn = click.option("--lam", "--lambda", "lam", type=float, default=1.0,
                      show_default=True, help="vertex penalization")(fn)
    fn = click.option("--tol", type=float, default=1e-12, show_default=True,
                      help="truncation tolerance")(fn)
    return fn


def common_options(fn):
    fn = click.option("--out", type=click.Path(dir_okay=False), default=None,
                      help="write the output here instead of stdout")(fn)
    fn = click.option("--manifest", type=click.Path(dir_okay=False), default=None,
                      help="append a JSON run manifest to this file")(fn)
    return fn


@click.group(name="convchain")
@click.version_option(version=__version__)
@click.option("--server", default=None, envvar="CONVCHAIN_SERVER",
              help="base URL of a running service; defaults to in-process")
@click.pass_context
def cli(ctx, server):
    """Convex lattice chains: exact counts, ensembles, constants, shapes."""
    ctx.obj = {"server": server}


def _client(ctx) -> ServiceClient:
    return ServiceClient(ctx.obj.get("server"))


@cli.command("count-exact")
@click.option("--n1", type=int, required=True)
@click.option("--n2", type=int, required=True)
@click.option("--budget", type=int, default=60, show_default=True)
@click.option("--json", "as_json", is_flag=True, help="JSON output")
@click.option("--csv", "as_csv", is_flag=True, help="CSV output (default)")
@common_options
@click.pass_context
def count_exact_cmd(ctx, n1, n2, budget, as_json, as_csv, out, manifest):
    """Exact table of chain counts by vertex number (decimal bigints)."""
    started = time.time()
    payload = {"n1": n1, "n2": n2, "budget": budget}
    data = _client(ctx).post("/count/exact", payload)
    if as_json:
        text = json.dumps({"counts": data["counts"]})
    else:
        lines = ["vertices,count"]
        lines += [f"{k},{v}" for k, v in sorted(data["counts"].items(), key=lambda kv: int(kv[0]))]
        text = "\n".join(lines)
    _emit(text, out)
    _manifest(manifest, "count-exact", payload, started)


@cli.command("count-estimate")
@click.option("--n1", type=int, required=True)
@click.option("--n2", type=int, required=True)
@click.option("--vertices", "-N", type=int, required=True)
@params_options
@click.option("--replicas", type=int, default=100_000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--threads", type=int,
              default=lambda: int(os.environ.get("CONVCHAIN_THREADS", "1")),
              help="worker threads for replica blocks [env CONVCHAIN_THREADS]")
@common_options
@click.pass_context
def count_estimate_cmd(ctx, n1, n2, vertices, kind, z1, z2, z, y, lam, tol,
                       replicas, seed, threads, out, manifest):
    """Monte Carlo count estimate via the exact factorization identity."""
    started = time.time()
    if z1 is None and kind == "endpoint":
        click.echo("error (domain): count-estimate needs --z1", err=True)
        sys.exit(EXIT_DOMAIN)
    payload = {
        "n1": n1, "n2": n2, "vertices": vertices,
        "params": _params_payload(kind, z1, z2, z, y, lam, tol),
        "replicas": replicas, "seed": seed, "threads": threads,
    }
    data = _client(ctx).post("/count/estimate", payload)
    _emit(json.dumps(data, indent=2), out)
    _manifest(manifest, "count-estimate", payload, started)


@cli.command("constants")
@click.option("--lam", "--lambda", "lam", type=float, default=None,
              help="single penalization value")
@click.option("--sweep", default=None,
              help="from,to,points: log-spaced sweep of lambda")
@click.option("--json", "as_json", is_flag=True)
@common_options
@click.pass_context
def constants_cmd(ctx, lam, sweep, as_json, out, manifest):
    """Asymptotic constants (lambda, delta, c, e, c_J, e_J); CSV by default."""
    started = time.time()
    payload: dict = {}
    if sweep is not None:
        try:
            lo, hi, pts = sweep.split(",")
            payload["sweep"] = {"start": float(lo), "stop": float(hi),
                                "points": int(pts), "log": True}
        except ValueError:
            raise click.UsageError("--sweep expects from,to,points")
    if lam is not None:
        payload["lam"] = lam
    if not payload:
        raise click.UsageError("provide --lambda or --sweep")
    data = _client(ctx).post("/constants", payload)
    if as_json:
        text = json.dumps(data, indent=2)
    else:
        lines = ["lambda,delta,c,e,c_j,e_j"]
        for r in data["rows"]:
            lines.append(
                f"{r['lam']:.6g},{r['delta']:.6f},{r['c']:.6f},"
                f"{r['e']:.6f},{r['c_j']:.6f},{r['e_j']:.6f}"
            )
        text = "\n".join(lines)
    _emit(text, out)
    _manifest(manifest, "constants", payload, started)


@cli.command("calibrate")
@click.option("--kind", type=click.Choice(["endpoint", "length", "mixed"]),
              default="endpoint", show_default=True)
@click.option("--n", type=int, required=True)
@click.option("--lam", "--lambda", "lam", type=float, default=None)
@click.option("--c", type=float, default=None, help="vertex-constant target")
@click.option("--s", type=float, default=None, help="few-vertex exponent")
@click.option("--length-ratio", "-L", "length_ratio", type=float, default=None)
@click.option("--no-refine", is_flag=True, help="first-order parameters only")
@common_options
@click.pass_context
def calibrate_cmd(ctx, kind, n, lam, c, s, length_ratio, no_refine, out, manifest):
    """Solve ensemble parameters for the requested expectation targets."""
    started = time.time()
    payload = {"kind": kind, "n": n, "refine": not no_refine}
    if lam is not None:
        payload["lam"] = lam
    if c is not None:
        payload["c"] = c
    if s is not None:
        payload["s"] = s
    if length_ratio is not None:
        payload["L"] = length_ratio
    data = _client(ctx).post("/calibrate", payload)
    _emit(json.dumps(data, indent=2), out)
    _manifest(manifest, "calibrate", payload, started)


@cli.command("moments")
@params_options
@common_options
@click.pass_context
def moments_cmd(ctx, kind, z1, z2, z, y, lam, tol, out, manifest):
    """Exact truncated moment sums of an ensemble."""
    started = time.time()
    payload = {"params": _params_payload(kind, z1, z2, z, y, lam, tol)}
    data = _client(ctx).post("/moments", payload)
    _emit(json.dumps(data, indent=2), out)
    _manifest(manifest, "moments", payload, started)


@cli.command("sample")
@params_options
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--count", type=int, default=1, show_default=True)
@click.option("--endpoint", default=None, help="n1,n2 conditioning target")
@click.option("--vertices", type=int, default=None, help="vertex-count target")
@click.option("--length", default=None, help="lo,hi total-length interval")
@click.option("--window", type=float, default=None,
              help="soft window in standard deviations (omit for exact)")
@click.option("--max-attempts", type=int, default=10_000_000, show_default=True)
@click.option("--csv", "as_csv", is_flag=True, help="chain vertices as CSV")
@common_options
@click.pass_context
def sample_cmd(ctx, kind, z1, z2, z, y, lam, tol, seed, count, endpoint,
               vertices, length, window, max_attempts, as_csv, out, manifest):
    """Draw chains from an ensemble, optionally conditioned."""
    started = time.time()
    payload: dict = {
        "params": _params_payload(kind, z1, z2, z, y, lam, tol),
        "seed": seed, "count": count, "max_attempts": max_attempts,
    }
    constraint: dict = {}
    if endpoint is not None:
        a, b = endpoint.split(",")
        constraint["endpoint"] = (int(a), int(b))
    if vertices is not None:
        constraint["vertices"] = vertices
    if length is not None:
        lo, hi = length.split(",")
        constraint["length"] = (float(lo), float(hi))
    if constraint:
        payload["constraint"] = constraint
        if window is not None:
            payload["window"] = window
    data = _client(ctx).post("/sample", payload)
    if as_csv:
        blocks = []
        for item in data["samples"]:
            blocks.append("\n".join(f"{x},{y_}" for x, y_ in item["chain"]))
        text = "\n\n".join(blocks)
    else:
        text = json.dumps(data, indent=2)
    _emit(text, out)
    _manifest(manifest, "sample", payload, started)


@cli.command("shape")
@click.option("--L", "-L", "length_ratio", type=float, default=None,
              help="family curve C_L")
@click.option("--parabola", "kind_flag", flag_value="parabola")
@click.option("--circle", "kind_flag", flag_value="circle")
@click.option("--points", type=int, default=10_001, show_default=True)
@click.option("--csv", "as_csv", is_flag=True, help="x,y rows (default JSON)")
@common_options
@click.pass_context
def shape_cmd(ctx, length_ratio, kind_flag, points, as_csv, out, manifest):
    """Limit-shape curve polylines (parabola, circle, or the C_L family)."""
    started = time.time()
    if kind_flag is None and length_ratio is None:
        raise click.UsageError("provide --L, --parabola or --circle")
    payload: dict = {"kind": kind_flag or "family", "points": points}
    if length_ratio is not None:
        payload["L"] = length_ratio
    data = _client(ctx).post("/shape", payload)
    if as_csv:
        text = "\n".join(f"{x:.12g},{y_:.12g}" for x, y_ in data["points"])
    else:
        text = json.dumps(data)
    _emit(text, out)
    _manifest(manifest, "shape", payload, started)


@cli.command("jarnik")
@click.option("--lam", "--lambda", "lam", type=float, default=1.0, show_default=True)
@common_options
@click.pass_context
def jarnik_cmd(ctx, lam, out, manifest):
    """Length-constrained (Jarnik-regime) constants."""
    started = time.time()
    payload = {"lam": lam}
    data = _client(ctx).post("/jarnik", payload)
    _emit(json.dumps(data, indent=2), out)
    _manifest(manifest, "jarnik", payload, started)


@cli.command("random-model")
@click.option("--k", type=int, required=True)
@click.option("--trials", type=int, default=1_000_000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@common_options
@click.pass_context
def random_model_cmd(ctx, k, trials, seed, out, manifest):
    """Monte Carlo check of the k-point convexity probability 1/(k!(k+1)!)."""
    started = time.time()
    payload = {"k": k, "trials": trials, "seed": seed}
    data = _client(ctx).post("/random-model", payload)
    _emit(json.dumps(data, indent=2), out)
    _manifest(manifest, "random-model", payload, started)


@cli.command("dbound")
@common_options
@click.pass_context
def dbound_cmd(ctx, out, manifest):
    """Numerical bound on the longest chain in the random-point model."""
    started = time.time()
    data = _client(ctx).post("/dbound", {})
    _emit(f"d = {data['d']:.3f}", out)
    _manifest(manifest, "dbound", {}, started)


@cli.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve_cmd(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        sys.exit(EXIT_USAGE)
    except click.ClickException as exc:
        exc.show()
        sys.exit(exc.exit_code)
    except click.Abort:
        sys.exit(130)
    return 0


if __name__ == "__main__":
    sys.exit(main())
