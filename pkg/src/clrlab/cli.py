"""Command-line interface.

    clrlab table --dims 3..9 --alpha 1
    clrlab optimize --gamma 3 --cells 2,3
    clrlab mgamma --gamma 2.5
    clrlab constant --d 3 --alpha 0.5
    clrlab cwikel --p 4
    clrlab bound --symbol T.json --profile V.json
    clrlab check --only sandwich

Exit codes: 0 success, 1 failed checks, 2 invalid input, 3 convergence failure.
"""

from __future__ import annotations

import functools
import json
import math
import os
import sys
from dataclasses import dataclass, field, replace

import click

from . import constants, kinetic
from .checks import SUITES, run_checks
from .errors import ConvergenceError, InvalidInputError, SchemaError
from .numerics import QuadratureSpec, SearchSpec
from .optimize import DEFAULT_CELLS, best_upper, optimize_trial, parse_cells
from .report import build_report, format_number, render

__all__ = ["main", "CliConfig", "load_config"]

EXIT_CHECKS, EXIT_INPUT, EXIT_CONVERGENCE = 1, 2, 3
FORMATS = ("md", "csv", "json")
CONFIG_ENV = "CLR_LAB_CONFIG"


@dataclass(frozen=True)
class CliConfig:
    output_format: str = "md"
    seed: int = 42
    digits: int = 6
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    search: SearchSpec = field(default_factory=SearchSpec)
    n_cap: int = constants.N_CAP


def load_config(path: str | None) -> CliConfig:
    """Read a JSON config mirroring :class:`CliConfig`; missing keys keep defaults."""
    if not path:
        return CliConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InvalidInputError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"config {path}: invalid JSON ({exc.msg})") from None
    if not isinstance(data, dict):
        raise SchemaError("config must be a JSON object")
    known = {"output_format", "seed", "digits", "quadrature", "search", "n_cap"}
    extra = sorted(set(data) - known)
    if extra:
        raise SchemaError(f"unknown config keys: {', '.join(extra)}")
    try:
        quad = QuadratureSpec(**data.get("quadrature", {}))
        search = SearchSpec(**data.get("search", {}))
    except TypeError as exc:
        raise SchemaError(f"config: {exc}") from None
    cfg = CliConfig(
        output_format=data.get("output_format", "md"),
        seed=int(data.get("seed", search.seed)),
        digits=int(data.get("digits", 6)),
        quadrature=quad,
        search=search,
        n_cap=int(data.get("n_cap", constants.N_CAP)),
    )
    if cfg.output_format not in FORMATS:
        raise SchemaError(f"output_format must be one of {', '.join(FORMATS)}")
    return cfg


def _common(fn):
    """Options shared by every subcommand; command-line values override the config."""
    options = [
        click.option("--format", "fmt", type=click.Choice(FORMATS), default=None, help="Output format."),
        click.option("--seed", type=click.IntRange(min=0), default=None, help="Seed for optimizer restarts."),
        click.option("--digits", type=click.IntRange(1, 17), default=None, help="Significant digits printed."),
        click.option("--provenance", is_flag=True, help="Append the source of every column."),
        click.option("--config", "config_path", type=click.Path(), default=None,
                     help=f"JSON config file (default: ${CONFIG_ENV})."),
        click.option("--quad-rel-tol", type=float, default=None, help="Quadrature relative tolerance."),
        click.option("--quad-method", type=click.Choice(["adaptive-interval", "double-exponential"]),
                     default=None, help="Quadrature method."),
        click.option("--restarts", type=click.IntRange(min=1), default=None, help="Optimizer restarts per cell."),
    ]
    for opt in reversed(options):
        fn = opt(fn)

    @functools.wraps(fn)
    def wrapper(fmt, seed, digits, provenance, config_path, quad_rel_tol, quad_method, restarts, **kwargs):
        cfg = load_config(config_path or os.environ.get(CONFIG_ENV))
        quad = cfg.quadrature
        if quad_rel_tol is not None or quad_method is not None:
            quad = QuadratureSpec(
                rel_tol=quad.rel_tol if quad_rel_tol is None else quad_rel_tol,
                abs_tol=quad.abs_tol, max_subdivisions=quad.max_subdivisions,
                method=quad.method if quad_method is None else quad_method,
            )
        search = cfg.search.replace(
            seed=cfg.seed if seed is None else seed,
            restarts=cfg.search.restarts if restarts is None else restarts,
        )
        cfg = replace(
            cfg,
            output_format=fmt or cfg.output_format,
            digits=cfg.digits if digits is None else digits,
            quadrature=quad,
            search=search,
            seed=search.seed,
        )
        return fn(cfg=cfg, provenance=provenance, **kwargs)

    return wrapper


def _num(x, cfg):
    return format_number(x, cfg.digits)


def _json_num(x, cfg):
    if x is None or isinstance(x, int):
        return x
    if not math.isfinite(x):
        return None
    return float(format_number(x, cfg.digits))


def _emit_mapping(title: str, items: list[tuple[str, object]], cfg: CliConfig, notes=(), provenance=None):
    """Print key/value output in the configured format, keys kept in order."""
    if cfg.output_format == "json":
        doc = {k: (_json_num(v, cfg) if isinstance(v, (int, float)) and not isinstance(v, bool) else v)
               for k, v in items}
        if notes:
            doc["notes"] = list(notes)
        if provenance:
            doc["provenance"] = provenance
        click.echo(json.dumps(doc, indent=2))
        return
    text = [(k, _num(v, cfg) if isinstance(v, float) else ("" if v is None else str(v))) for k, v in items]
    if cfg.output_format == "csv":
        click.echo(",".join(k for k, _ in text))
        click.echo(",".join(v for _, v in text))
        for n in notes:
            click.echo(f"# {n}")
        for k, v in (provenance or {}).items():
            click.echo(f"# {k}: {v}")
        return
    click.echo(f"## {title}\n")
    click.echo("| quantity | value |")
    click.echo("|---|---|")
    for k, v in text:
        click.echo(f"| {k} | {v} |")
    if notes:
        click.echo("")
        for i, n in enumerate(notes, 1):
            click.echo(f"[{i}] {n}")
    if provenance:
        click.echo("\nSources:")
        for k, v in provenance.items():
            click.echo(f"- {k}: {v}")


def _parse_dims(text: str) -> list[int]:
    text = text.strip()
    try:
        if ".." in text:
            lo, hi = (int(x) for x in text.split("..", 1))
            if hi < lo:
                raise InvalidInputError(f"empty range {text!r}")
            return list(range(lo, hi + 1))
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InvalidInputError(f"dimensions must look like '3..9' or '3,5,7', got {text!r}") from None


def _check_gamma(gamma: float):
    if not (gamma > 2 and math.isfinite(gamma)):
        raise InvalidInputError(f"gamma must be a finite real > 2, got {gamma:g}")


def _cells(values, sweep):
    if sweep:
        return DEFAULT_CELLS
    return parse_cells(values) if values else None


class _Group(click.Group):
    """Maps library errors to exit codes."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except (InvalidInputError, SchemaError) as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(EXIT_INPUT)
        except ConvergenceError as exc:
            click.echo(f"convergence failure: {exc}", err=True)
            if exc.partial is not None:
                click.echo(f"best so far: {exc.partial}", err=True)
            ctx.exit(EXIT_CONVERGENCE)


@click.group(cls=_Group, context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(package_name="clrlab")
def main():
    """Constants of Cwikel-Lieb-Rozenblum type bounds."""


@main.command()
@click.option("--dims", required=True, help="Dimensions, e.g. 3..9 or 3,5.")
@click.option("--alpha", "alpha_order", type=float, default=1.0, show_default=True, help="Kinetic order alpha.")
@click.option("--mode", type=click.Choice(["optimize", "sweep", "reference"]), default="optimize",
              show_default=True, help="Optimize the reference cell, sweep all cells, or evaluate reference parameters.")
@click.option("--cells", multiple=True, help="Cells 'p,q' searched in optimize mode.")
@_common
def table(cfg, provenance, dims, alpha_order, mode, cells):
    """Constant table for a range of dimensions."""
    rows = build_report(_parse_dims(dims), alpha_order, cfg.search, cells=parse_cells(cells) if cells else None,
                        quad=cfg.quadrature, mode=mode, n_cap=cfg.n_cap)
    click.echo(render(rows, cfg.output_format, cfg.digits, provenance), nl=False)


@main.command()
@click.option("--d", "d", type=int, required=True, help="Dimension.")
@click.option("--alpha", "alpha_order", type=float, default=1.0, show_default=True)
@click.option("--mode", type=click.Choice(["optimize", "sweep", "reference"]), default="optimize", show_default=True)
@_common
def constant(cfg, provenance, d, alpha_order, mode):
    """Every constant for a single dimension."""
    rows = build_report([d], alpha_order, cfg.search, quad=cfg.quadrature, mode=mode, n_cap=cfg.n_cap)
    click.echo(render(rows, cfg.output_format, cfg.digits, provenance), nl=False)


@main.command()
@click.option("--gamma", type=float, required=True)
@click.option("--cells", multiple=True, help="Cells 'p,q' to search (default: all sixteen).")
@_common
def optimize(cfg, provenance, gamma, cells):
    """Optimize the Gamma trial family at one gamma."""
    _check_gamma(gamma)
    opt = optimize_trial(gamma, parse_cells(cells) if cells else DEFAULT_CELLS, spec=cfg.search, quad=cfg.quadrature)
    b = opt.breakdown
    items = [
        ("gamma", float(gamma)), ("p", opt.params.p), ("q", opt.params.q),
        ("alpha", opt.params.alpha), ("beta", opt.params.beta),
        ("norm1", b.norm1), ("norm2", b.norm2), ("mu", b.mu), ("tail", b.tail),
        ("objective", b.objective), ("c_gamma", opt.c_gamma),
        ("converged", opt.converged), ("evaluations", opt.evaluations),
    ]
    prov = {
        "objective": "mu^(gamma-2) * I_gamma over the Gamma trial family",
        "c_gamma": "gamma^(gamma+1) / (4 (gamma-2)^(gamma-2)) * objective",
    } if provenance else None
    _emit_mapping("Trial optimum", items, cfg, provenance=prov)
    if not opt.converged:
        click.echo("convergence failure: simplex search hit its iteration limit", err=True)
        sys.exit(EXIT_CONVERGENCE)


@main.command()
@click.option("--gamma", type=float, required=True)
@click.option("--cells", multiple=True, help="Cells 'p,q' (default: the reference cell).")
@click.option("--sweep", is_flag=True, help="Search all sixteen default cells.")
@_common
def mgamma(cfg, provenance, gamma, cells, sweep):
    """Best upper bound on M_gamma, with the closed-form sandwich."""
    _check_gamma(gamma)
    ub = best_upper(gamma, cfg.search, _cells(cells, sweep), cfg.quadrature)
    items = [
        ("gamma", float(gamma)), ("m_upper", ub.value), ("source", ub.source),
        ("m_lower", constants.m_lower(gamma)), ("m_simple", constants.m_simple(gamma)),
        ("c_gamma", constants.c_gamma(gamma, ub.value)),
    ]
    if ub.optimum is not None:
        items += [("p", ub.optimum.params.p), ("q", ub.optimum.params.q),
                  ("alpha", ub.optimum.params.alpha), ("beta", ub.optimum.params.beta)]
    prov = {
        "m_lower": "2 / (gamma (gamma-1) (gamma-2))",
        "m_simple": "8 / (gamma (gamma-2) (gamma+2)), attained by min(t, 1/t)",
        "m_upper": "min(trial optimum, m_simple)",
    } if provenance else None
    _emit_mapping("M_gamma", items, cfg, provenance=prov)


@main.command()
@click.option("--p", "p", type=float, required=True, help="Weak Schatten exponent p > 2.")
@_common
def cwikel(cfg, provenance, p):
    """Weak-Schatten (Cwikel) constants and the comparison ratio."""
    _check_gamma(p)
    ratio = constants.frank_ratio(p)
    items = [
        ("p", float(p)), ("cwikel_simple", constants.cwikel_simple(p)),
        ("cwikel_general_min_kernel", constants.cwikel_general(p, 1.0, constants.m_simple(p))),
        ("frank_cwikel", constants.frank_cwikel(p)), ("ratio", ratio), ("ratio_formula", "(p+2)/4"),
    ]
    notes = [f"ratio from the two constants is (p+2)/4 = {_num((p + 2) / 4, cfg)}; "
             f"a factor (p+2)/2 = {_num((p + 2) / 2, cfg)} is not supported by the formulas"]
    prov = {
        "cwikel_simple": "2 (p-2)/(p+2) (p/(p-2))^p",
        "frank_cwikel": "(p/2) (p/(p-2))^(p-1)",
    } if provenance else None
    _emit_mapping("Cwikel constants", items, cfg, notes, prov)


@main.command()
@click.option("--symbol", "symbol_path", required=True, type=click.Path(), help="Symbol JSON file.")
@click.option("--profile", "profile_path", required=True, type=click.Path(), help="Profile JSON file.")
@_common
def bound(cfg, provenance, symbol_path, profile_path):
    """Evaluate the phase-space bound for T(P) + V."""
    if not os.path.exists(symbol_path):
        raise InvalidInputError(f"no such file: {symbol_path}")
    if not os.path.exists(profile_path):
        raise InvalidInputError(f"no such file: {profile_path}")
    profile = kinetic.load_profile(profile_path)
    T = kinetic.load_symbol(symbol_path, profile.d)
    res = kinetic.bound_opt(T, profile, cfg.search)
    items = [("d", profile.d), ("symbol", T.kind), ("samples", len(profile.samples)),
             ("lambda_star", res.lambda_star), ("bound", res.bound)]
    notes = []
    if res.unbounded:
        notes.append(res.note)
        items[-1] = ("bound", "unbounded (weak-coupling regime)")
    elif T.kind == "power":
        lam, closed = kinetic.power_bound_closed(profile.d, T.alpha_order, profile)
        items += [("closed_form", closed), ("delta", abs(res.bound - closed) / closed),
                  ("lambda_closed_form", lam)]
    prov = {
        "bound": "min over lambda of lambda^-2 sum_i w_i G_T((lambda+1)^2 u_i)",
        "closed_form": "c_simple(gamma) |B_1^d| / (2 pi)^d sum_i w_i u_i^(gamma/2)",
    } if provenance else None
    _emit_mapping("Phase-space bound", items, cfg, notes, prov)


@main.command()
@click.option("--only", multiple=True, type=click.Choice(list(SUITES)), help="Run only these suites.")
@_common
def check(cfg, provenance, only):
    """Run the self-check suites."""
    results = run_checks(only or None, cfg.quadrature, cfg.search)
    failed = [r for r in results if not r.passed]
    if cfg.output_format == "json":
        doc = {"passed": len(results) - len(failed), "failed": len(failed),
               "results": [r.as_dict() for r in results]}
        click.echo(json.dumps(doc, indent=2))
    else:
        for r in results:
            click.echo(f"{'PASS' if r.passed else 'FAIL'} [{r.suite}] {r.name}: {r.detail}")
        click.echo(f"{len(results) - len(failed)} passed, {len(failed)} failed")
    if failed:
        sys.exit(EXIT_CHECKS)


if __name__ == "__main__":  # pragma: no cover
    main()
