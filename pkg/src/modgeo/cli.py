"""Command-line client for the verification suites.

Arguments are parsed into the same request models the HTTP service uses;
by default the handler runs in-process, while --server URL sends the
identical payload to a running service, so the report bytes agree either
way.  A flat `key = value` config file supplies defaults; explicit flags
override it.

Exit codes: 0 every instance passed; 1 at least one residual exceeded
its tolerance; 2 a computation failed (non-convergence or an internal
error); 64 malformed input (usage).  Verbosity is controlled by the
MODGEO_LOG environment variable (debug, info, warning, error).
"""
from __future__ import annotations

import json
import logging
import os
import sys
from dataclasses import dataclass

import click
import httpx
from pydantic import BaseModel, ValidationError

from . import __version__
from .errors import NonConvergenceError
from .experiments import exit_code_for, histogram_csv
from .service.app import dispatch
from .service.models import REQUEST_MODELS

log = logging.getLogger("modgeo.cli")

_ENDPOINTS = {
    "thm1": "/verify/thm1",
    "katok": "/verify/katok",
    "thm2": "/verify/thm2",
    "periods": "/verify/periods",
    "coeffs": "/coeffs",
    "histogram": "/histogram",
}


def _setup_logging() -> None:
    name = os.environ.get("MODGEO_LOG", "warning").strip().lower()
    level = {"debug": logging.DEBUG, "info": logging.INFO,
             "warning": logging.WARNING, "error": logging.ERROR}.get(
                 name, logging.WARNING)
    logging.basicConfig(level=level,
                        format="%(levelname)s %(name)s: %(message)s")


# ---------------------------------------------------------------------------
# flag/config parsing
# ---------------------------------------------------------------------------

def _ints(text: str, what: str) -> list[int]:
    try:
        return [int(p) for p in str(text).replace(",", " ").split()]
    except ValueError:
        raise click.UsageError(f"{what}: expected integers, got {text!r}")


def _matrix(text: str) -> list[int]:
    vals = _ints(text, "matrix")
    if len(vals) != 4:
        raise click.UsageError(f"matrix needs 4 entries a,b,c,d: {text!r}")
    return vals


def _cusp(text: str) -> list[int]:
    parts = str(text).split("/")
    if len(parts) != 2:
        raise click.UsageError(f"cusp must look like d/c, got {text!r}")
    return _ints(parts[0], "cusp")[:1] + _ints(parts[1], "cusp")[:1]


def _number(text, caster, what):
    try:
        return caster(text)
    except (TypeError, ValueError):
        raise click.UsageError(f"{what}: expected a number, got {text!r}")


def load_config(path: str | None) -> dict[str, str]:
    """Flat `key = value` lines; blank lines and # comments ignored."""
    if not path:
        return {}
    out: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for ln, raw in enumerate(fh, 1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise click.UsageError(
                        f"{path}:{ln}: expected key = value, got {line!r}")
                key, _, val = line.partition("=")
                out[key.strip().replace("-", "_")] = val.strip()
    except OSError as exc:
        raise click.UsageError(f"cannot read config {path}: {exc}")
    return out


def _pick(flag, config: dict, key: str, parse, *, default=None):
    """Flag value if given, else config value, else default."""
    if flag is not None and flag != ():
        return parse(flag) if parse else flag
    if key in config:
        return parse(config[key]) if parse else config[key]
    return default


def _pick_many(flags: tuple, config: dict, key: str, parse_one) -> list:
    if flags:
        vals = flags
    elif key in config:
        vals = config[key].replace(";", " ").split()
    else:
        return []
    out = []
    for v in vals:
        out.append(parse_one(v))
    return out


def _pick_int_list(flags: tuple, config: dict, key: str,
                   what: str) -> list[int]:
    out: list[int] = []
    for chunk in (flags if flags else ([config[key]] if key in config
                                       else [])):
        out.extend(_ints(chunk, what))
    return out


# ---------------------------------------------------------------------------
# execution
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    """A fully validated run: command, request payload, output, transport."""

    command: str
    request: BaseModel
    out: str = "-"
    server: str | None = None


def build_request(command: str, payload: dict) -> BaseModel:
    try:
        return REQUEST_MODELS[command](**payload)
    except ValidationError as exc:
        first = exc.errors()[0]
        loc = ".".join(str(p) for p in first["loc"]) or "request"
        raise click.UsageError(f"{loc}: {first['msg']}")


def execute(cfg: ExperimentConfig) -> dict:
    """Run locally or against a server; either way, the same report."""
    if cfg.server:
        url = cfg.server.rstrip("/") + _ENDPOINTS[cfg.command]
        log.info("POST %s", url)
        resp = httpx.post(url, json=cfg.request.model_dump(), timeout=600.0)
        if resp.status_code == 422:
            raise click.UsageError(f"server rejected request: {resp.text}")
        resp.raise_for_status()
        return resp.json()
    try:
        return dispatch(cfg.command, cfg.request)
    except ValueError as exc:
        raise click.UsageError(str(exc))


def _dump(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _write_out(text: str, out: str) -> None:
    if out == "-":
        click.echo(text, nl=False)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _run_verify(ctx, command: str, kw: dict) -> int:
    config = load_config(kw.pop("config"))
    payload: dict = {
        "k": _pick_int_list(kw["k"], config, "k", "--k"),
        "tol": _pick(kw["tol"], config, "tol",
                     lambda v: _number(v, float, "--tol")),
        "height": _pick(kw["height"], config, "height",
                        lambda v: _number(v, int, "--height")),
        "max_doublings": _pick(kw["max_doublings"], config, "max_doublings",
                               lambda v: _number(v, int, "--max-doublings")),
        "jobs": _pick(kw["jobs"], config, "jobs",
                      lambda v: _number(v, int, "--jobs")),
    }
    if command in ("thm1", "katok"):
        payload["gamma_disc"] = _pick(
            kw["gamma_disc"], config, "gamma_disc",
            lambda v: _number(v, int, "--gamma-disc"))
        payload["gamma_matrix"] = _pick(kw["gamma_matrix"], config,
                                        "gamma_matrix", _matrix)
        payload["sigma_matrices"] = _pick_many(kw["sigma_matrix"], config,
                                               "sigma_matrix", _matrix)
        payload["sigma_traces"] = _pick_int_list(kw["sigma_trace"], config,
                                                 "sigma_trace",
                                                 "--sigma-trace")
    elif command == "thm2":
        payload["discs"] = _pick_int_list(kw["disc"], config, "disc",
                                          "--disc")
        payload["dc"] = _pick_many(kw["dc"], config, "dc", _cusp)
    elif command == "periods":
        payload["discs"] = _pick_int_list(kw["disc"], config, "disc",
                                          "--disc")
        payload["radius"] = _pick(kw["radius"], config, "radius",
                                  lambda v: _number(v, int, "--radius"))
    payload = {k: v for k, v in payload.items() if v not in (None, [])}
    if not payload.get("k"):
        raise click.UsageError("--k: at least one weight is required")
    if command == "thm2" and not payload.get("dc"):
        raise click.UsageError("--dc: at least one cusp d/c is required")
    if command in ("thm2", "periods") and not payload.get("discs"):
        raise click.UsageError("--disc: at least one discriminant is "
                               "required")

    cfg = ExperimentConfig(command=command,
                           request=build_request(command, payload),
                           out=_pick(kw["out"], config, "out", str,
                                     default="-"),
                           server=ctx.obj.get("server")
                           or config.get("server"))
    report = execute(cfg)
    _write_out(_dump(report), cfg.out)
    code = exit_code_for(report)
    c = report["counts"]
    log.info("%s: %d instance(s): pass=%d fail=%d error=%d -> exit %d",
             command, len(report["instances"]), c["pass"], c["fail"],
             c["error"], code)
    return code


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _policy_options(f):
    for opt in reversed([
        click.option("--tol", default=None, metavar="X",
                     help="pass/fail tolerance on residuals"),
        click.option("--height", default=None, metavar="H",
                     help="starting truncation height"),
        click.option("--max-doublings", default=None, metavar="N",
                     help="doubling-schedule cap"),
        click.option("--jobs", default=None, metavar="N",
                     help="worker processes"),
        click.option("--out", default=None, metavar="PATH",
                     help="report path ('-' = stdout)"),
        click.option("--config", default=None, metavar="PATH",
                     help="flat key = value defaults; flags override"),
    ]):
        f = opt(f)
    return f


def _gamma_options(f):
    for opt in reversed([
        click.option("--gamma-disc", default=None, metavar="D",
                     help="class discriminant (first primitive class)"),
        click.option("--gamma-matrix", default=None, metavar="a,b,c,d",
                     help="explicit hyperbolic matrix"),
    ]):
        f = opt(f)
    return f


@click.group()
@click.version_option(__version__, prog_name="modgeo")
@click.option("--server", default=None, metavar="URL",
              help="send requests to a running service instead of "
                   "computing in-process")
@click.pass_context
def cli(ctx, server):
    """Verification suites for closed-geodesic identities."""
    _setup_logging()
    ctx.ensure_object(dict)
    ctx.obj["server"] = server


@cli.group()
def verify():
    """Check an identity family instance by instance."""


@verify.command("thm1")
@click.option("--k", multiple=True, metavar="K[,K..]")
@_gamma_options
@click.option("--sigma-matrix", multiple=True, metavar="a,b,c,d")
@click.option("--sigma-trace", multiple=True, metavar="T[,T..]")
@_policy_options
@click.pass_context
def verify_thm1(ctx, **kw):
    """Homogenized cycle integral against the crossing sum."""
    return _run_verify(ctx, "thm1", kw)


@verify.command("katok")
@click.option("--k", multiple=True, metavar="K[,K..]")
@_gamma_options
@click.option("--sigma-matrix", multiple=True, metavar="a,b,c,d")
@click.option("--sigma-trace", multiple=True, metavar="T[,T..]")
@_policy_options
@click.pass_context
def verify_katok(ctx, **kw):
    """Single-period cycle integral against the crossing sum."""
    return _run_verify(ctx, "katok", kw)


@verify.command("thm2")
@click.option("--k", multiple=True, metavar="K[,K..]")
@click.option("--disc", multiple=True, metavar="D[,D..]")
@click.option("--dc", multiple=True, metavar="d/c")
@_policy_options
@click.pass_context
def verify_thm2(ctx, **kw):
    """Central L-value against the vertical-crossing sum."""
    return _run_verify(ctx, "thm2", kw)


@verify.command("periods")
@click.option("--k", multiple=True, metavar="K[,K..]")
@click.option("--disc", multiple=True, metavar="D[,D..]")
@click.option("--radius", default=None, metavar="R",
              help="form-zeta lattice radius")
@_policy_options
@click.pass_context
def verify_periods(ctx, **kw):
    """Period-polynomial ratio constancy, rationality, symmetry."""
    return _run_verify(ctx, "periods", kw)


@cli.command("coeffs")
@click.option("--k", default=None, metavar="K")
@_gamma_options
@click.option("--n-max", default=None, metavar="N")
@click.option("--y", default=None, metavar="Y")
@_policy_options
@click.pass_context
def coeffs_cmd(ctx, **kw):
    """Fourier coefficient table of the signed series."""
    config = load_config(kw.pop("config"))
    payload = {
        "k": _pick(kw["k"], config, "k", lambda v: _ints(v, "--k")[0]),
        "gamma_disc": _pick(kw["gamma_disc"], config, "gamma_disc",
                            lambda v: _number(v, int, "--gamma-disc")),
        "gamma_matrix": _pick(kw["gamma_matrix"], config, "gamma_matrix",
                              _matrix),
        "n_max": _pick(kw["n_max"], config, "n_max",
                       lambda v: _number(v, int, "--n-max")),
        "y": _pick(kw["y"], config, "y", lambda v: _number(v, float, "--y")),
        "tol": _pick(kw["tol"], config, "tol",
                     lambda v: _number(v, float, "--tol")),
        "height": _pick(kw["height"], config, "height",
                        lambda v: _number(v, int, "--height")),
        "max_doublings": _pick(kw["max_doublings"], config, "max_doublings",
                               lambda v: _number(v, int, "--max-doublings")),
    }
    payload = {k: v for k, v in payload.items() if v is not None}
    if "k" not in payload:
        raise click.UsageError("--k is required")
    cfg = ExperimentConfig(command="coeffs",
                           request=build_request("coeffs", payload),
                           out=_pick(kw["out"], config, "out", str,
                                     default="-"),
                           server=ctx.obj.get("server")
                           or config.get("server"))
    try:
        report = execute(cfg)
    except NonConvergenceError as exc:
        click.echo(f"computation failed: {exc}", err=True)
        return 2
    if cfg.out.endswith(".csv"):
        lines = ["n,re,im"] + [f"{c['n']},{c['re']!r},{c['im']!r}"
                               for c in report["coeffs"]]
        _write_out("\n".join(lines) + "\n", cfg.out)
    else:
        _write_out(_dump(report), cfg.out)
    return 0


@cli.command("histogram")
@click.option("--gamma-disc", default=None, metavar="D",
              help="discriminant of the fixed class")
@click.option("--disc", multiple=True, metavar="D[,D..]",
              help="discriminant ladder to cross against")
@click.option("--bins", default=None, metavar="N")
@click.option("--out", default=None, metavar="PATH",
              help="CSV path ('-' = stdout); a .summary.json lands beside "
                   "a file path")
@click.option("--config", default=None, metavar="PATH")
@click.pass_context
def histogram_cmd(ctx, **kw):
    """Crossing-angle cosines against a discriminant ladder, with binned
    counts and the KS distance to the uniform law (demo statistic)."""
    config = load_config(kw.pop("config"))
    payload = {
        "gamma_disc": _pick(kw["gamma_disc"], config, "gamma_disc",
                            lambda v: _number(v, int, "--gamma-disc")),
        "discs": _pick_int_list(kw["disc"], config, "disc", "--disc"),
        "bins": _pick(kw["bins"], config, "bins",
                      lambda v: _number(v, int, "--bins")),
    }
    payload = {k: v for k, v in payload.items() if v not in (None, [])}
    if "discs" not in payload:
        raise click.UsageError("--disc: at least one discriminant is "
                               "required")
    cfg = ExperimentConfig(command="histogram",
                           request=build_request("histogram", payload),
                           out=_pick(kw["out"], config, "out", str,
                                     default="-"),
                           server=ctx.obj.get("server")
                           or config.get("server"))
    report = execute(cfg)
    csv_text = histogram_csv(report)
    _write_out(csv_text, cfg.out)
    if cfg.out != "-":
        summary = {k: v for k, v in report.items() if k != "rows"}
        with open(cfg.out + ".summary.json", "w", encoding="utf-8") as fh:
            fh.write(_dump(summary))
    return 0


def _main(argv=None) -> int:
    try:
        rv = cli.main(args=argv, standalone_mode=False, obj={})
        return int(rv) if isinstance(rv, int) else 0
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return 64
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.exceptions.Abort:
        return 130
    except NonConvergenceError as exc:
        click.echo(f"computation failed: {exc}", err=True)
        return 2
    except httpx.HTTPError as exc:
        click.echo(f"transport failure: {exc}", err=True)
        return 2


def main(argv=None) -> None:
    sys.exit(_main(argv))


if __name__ == "__main__":
    main()
