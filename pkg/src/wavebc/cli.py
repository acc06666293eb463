"""Command-line client for the reconstruction service.

Every command builds a request and posts it to the service API, then writes
any files locally from the JSON response.  With ``--server`` the request
goes to a running instance; without it an in-process application handles it,
so no server is needed for local use.

A plain-text config file (``key = value`` per line, ``#`` comments) can seed
the global options; explicit flags win.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .experiments import ExperimentReport, emit_report

GLOBAL_DEFAULTS = {"nx": 500, "t_final": 5.0, "dt_ratio": 0.1}


def read_config(path: str | None) -> dict:
    if not path:
        return {}
    values = {}
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise click.ClickException(f"bad config line (want key = value): {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


class ServiceClient:
    """POSTs to a remote server or to the in-process application."""

    def __init__(self, server: str | None):
        if server:
            import httpx
            self._client = httpx.Client(base_url=server, timeout=None)
        else:
            from fastapi.testclient import TestClient

            from .service import create_app
            self._client = TestClient(create_app())

    def post(self, path: str, payload: dict) -> dict:
        response = self._client.post(path, json=payload)
        if response.status_code != 200:
            raise click.ClickException(
                f"{path} failed with status {response.status_code}: {response.text}")
        return response.json()


def _grid_params(ctx) -> dict:
    cfg = ctx.obj["config"]
    out = {}
    for key, default in GLOBAL_DEFAULTS.items():
        flag = ctx.obj.get(key)
        if flag is not None:
            out[key] = flag
        elif key in cfg:
            out[key] = type(default)(cfg[key])
        else:
            out[key] = default
    return out


def _out_dir(ctx, fallback: str) -> Path:
    out = ctx.obj.get("out") or ctx.obj["config"].get("out") or fallback
    return Path(out)


def _print_check(report: dict) -> None:
    for item in report["items"]:
        status = "pass" if item["passed"] else "FAIL"
        click.echo(f"  [{status}] {item['name']}: value={item['value']:.4g} "
                   f"allowed=[{item['lower']:g}, {item['upper']:g}]")
    click.echo(f"{report['name']}: {'PASS' if report['passed'] else 'FAIL'}")


def _finish_check(ctx, report: dict, filename: str) -> None:
    _print_check(report)
    out = ctx.obj.get("out") or ctx.obj["config"].get("out")
    if out:
        path = Path(out)
        path.mkdir(parents=True, exist_ok=True)
        (path / filename).write_text(json.dumps(report, indent=1))
        click.echo(f"wrote {path / filename}")
    if not report["passed"]:
        sys.exit(1)


@click.group()
@click.option("--nx", type=int, default=None, help="Number of spatial intervals.")
@click.option("--t-final", type=float, default=None, help="Control horizon T.")
@click.option("--dt-ratio", type=float, default=None, help="dt as a fraction of dx.")
@click.option("--out", type=click.Path(), default=None, help="Output directory.")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="Plain-text key = value config file.")
@click.option("--server", default=None,
              help="Base URL of a running service; default runs in-process.")
@click.pass_context
def main(ctx, nx, t_final, dt_ratio, out, config_path, server):
    """Boundary-control reconstruction toolkit."""
    ctx.ensure_object(dict)
    ctx.obj.update(nx=nx, t_final=t_final, dt_ratio=dt_ratio, out=out,
                   config=read_config(config_path), server=server)


@main.command("identity-check")
@click.option("--pairs", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.pass_context
def identity_check_cmd(ctx, pairs, seed):
    """Residuals of the wave-pairing, accelerated, and free-parameter identities."""
    client = ServiceClient(ctx.obj["server"])
    report = client.post("/checks/identity",
                         {**_grid_params(ctx), "n_pairs": pairs, "seed": seed})
    _finish_check(ctx, report, "identity_check.json")


@main.command("control-check")
@click.option("--modes", type=int, default=10, show_default=True)
@click.pass_context
def control_check_cmd(ctx, modes):
    """Steering error of every boundary control, both kinds."""
    client = ServiceClient(ctx.obj["server"])
    report = client.post("/checks/control",
                         {**_grid_params(ctx), "n_modes": modes})
    _finish_check(ctx, report, "control_check.json")


@main.command("frechet-check")
@click.option("--eps", type=float, default=0.01, show_default=True)
@click.pass_context
def frechet_check_cmd(ctx, eps):
    """Quadratic-remainder ratio of the linearized map."""
    client = ServiceClient(ctx.obj["server"])
    report = client.post("/checks/frechet", {**_grid_params(ctx), "eps": eps})
    _finish_check(ctx, report, "frechet_check.json")


@main.command("operator-check")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--traces", type=int, default=100, show_default=True)
@click.pass_context
def operator_check_cmd(ctx, seed, traces):
    """Involution, filter bound, symmetry, and derivative-surrogate checks."""
    client = ServiceClient(ctx.obj["server"])
    report = client.post("/checks/operators",
                         {**_grid_params(ctx), "seed": seed, "n_traces": traces})
    _finish_check(ctx, report, "operator_check.json")


@main.command()
@click.option("--modes", type=int, default=10, show_default=True)
@click.option("--noise", type=float, default=0.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--truth", type=click.IntRange(1, 3), default=1, show_default=True,
              help="Which experiment's perturbation generates the data.")
@click.pass_context
def reconstruct(ctx, modes, noise, seed, truth):
    """One reconstruction at a given noise level and seed."""
    client = ServiceClient(ctx.obj["server"])
    payload = {**_grid_params(ctx), "truth_id": truth, "n_modes": modes,
               "noise_level": noise, "seed": seed}
    data = client.post("/reconstruct", payload)
    report = ExperimentReport.from_dict(data)
    out = _out_dir(ctx, f"recon_truth{truth}")
    written = emit_report(report, out)
    level = report.levels[0]
    click.echo(f"relative L2 error: {level.errors[0]:.4%}")
    for path in written:
        click.echo(f"wrote {path}")


@main.command()
@click.argument("experiment_id", type=click.IntRange(1, 3))
@click.option("--noise", "noise_levels", type=float, multiple=True,
              help="Noise level; repeat for several (default 0, 0.01, 0.05).")
@click.option("--seeds", type=int, default=10, show_default=True,
              help="Seeds per noisy level.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--modes", type=int, default=10, show_default=True)
@click.pass_context
def experiment(ctx, experiment_id, noise_levels, seeds, seed, modes):
    """Run a full experiment and write its report files."""
    client = ServiceClient(ctx.obj["server"])
    payload = {**_grid_params(ctx), "experiment_id": experiment_id,
               "n_modes": modes, "seed": seed, "n_seeds": seeds}
    if noise_levels:
        payload["noise_levels"] = list(noise_levels)
    data = client.post("/experiments/run", payload)
    report = ExperimentReport.from_dict(data)
    out = _out_dir(ctx, f"experiment{experiment_id}")
    written = emit_report(report, out)
    for level in report.levels:
        click.echo(f"noise {level.level:g}: median relative error "
                   f"{level.median_error:.4%} over {len(level.seeds)} seed(s)")
    for path in written:
        click.echo(f"wrote {path}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("wavebc.service:app", host=host, port=port)


if __name__ == "__main__":
    main()
