"""Per-dimension constant reports and their md / csv / json renderings."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import constants
from .errors import InvalidInputError
from .numerics import QuadratureSpec, SearchSpec
from .optimize import DEFAULT_CELLS, UpperBound, best_upper, reference_cells
from .trial import TrialParams, trial_objective

__all__ = [
    "ConstantReport",
    "REPORT_FIELDS",
    "CSV_FIELDS",
    "PROVENANCE",
    "build_report",
    "format_number",
    "render",
]

# serialization order; the csv keeps the ten computed columns
REPORT_FIELDS = (
    "d", "alpha_order", "gamma", "m_upper", "c_gamma", "c_lower", "c_simple", "c_op",
    "semiclassical_factor", "coefficient", "reference_lieb", "reference_flseiringer",
)
CSV_FIELDS = REPORT_FIELDS[:10]

PROVENANCE = {
    "d": "input dimension",
    "alpha_order": "input kinetic order alpha",
    "gamma": "d / alpha",
    "m_upper": "min(trial optimum, 8 / (gamma (gamma-2) (gamma+2)))",
    "c_gamma": "gamma^(gamma+1) / (4 (gamma-2)^(gamma-2)) * m_upper",
    "c_lower": "gamma^gamma / (2 (gamma-1) (gamma-2)^(gamma-1))",
    "c_simple": "2 gamma^gamma / ((gamma-2)^(gamma-1) (gamma+2))",
    "c_op": "min(c_gamma, min over 3 <= n <= min(d, n_cap) of C_n); c_gamma unless alpha = 1",
    "semiclassical_factor": "|B_1^d| / (2 pi)^d",
    "coefficient": "c_op * semiclassical_factor",
    "reference_lieb": "literature: Lieb's method, scalar potentials",
    "reference_flseiringer": "literature: Frank-Lieb-Seiringer, operator-valued potentials",
}


@dataclass(frozen=True)
class ConstantReport:
    d: int
    alpha_order: float
    gamma: float
    m_upper: float
    c_gamma: float
    c_lower: float
    c_simple: float
    c_op: float
    semiclassical_factor: float
    coefficient: float
    reference_lieb: float | None = None
    reference_flseiringer: float | None = None
    source: str = "trial"
    params: TrialParams | None = None
    notes: tuple = field(default=(), compare=False)

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in REPORT_FIELDS}


def _upper(gamma, mode, search, cells, quad) -> UpperBound:
    if mode == "reference":
        d = int(round(gamma))
        if gamma != d or d not in constants.REFERENCE_PARAMETERS:
            raise InvalidInputError(f"no reference parameters for gamma = {gamma:g}")
        params = TrialParams(*constants.REFERENCE_PARAMETERS[d])
        value = trial_objective(params, gamma, quad).objective
        simple = constants.m_simple(gamma)
        if value < simple:
            return UpperBound(gamma, value, "reference", None)
        return UpperBound(gamma, simple, "simple", None)
    if mode == "sweep":
        return best_upper(gamma, search, DEFAULT_CELLS, quad)
    if mode == "optimize":
        return best_upper(gamma, search, cells, quad)
    raise InvalidInputError(f"unknown report mode {mode!r}")


def build_report(
    dims: Iterable[int],
    alpha_order: float = 1.0,
    search: SearchSpec | None = None,
    cells: Sequence[tuple] | None = None,
    quad: QuadratureSpec | None = None,
    mode: str = "optimize",
    n_cap: int = constants.N_CAP,
) -> list[ConstantReport]:
    """One :class:`ConstantReport` per dimension.

    ``mode`` selects how M_gamma is bounded: ``"optimize"`` searches
    ``cells`` (default: the reference cell for each gamma), ``"sweep"`` all
    sixteen default cells, ``"reference"`` evaluates the stored reference
    parameters without searching.
    """
    dims = [int(d) for d in dims]
    if not dims:
        raise InvalidInputError("no dimensions given")
    if not (alpha_order > 0 and math.isfinite(alpha_order)):
        raise InvalidInputError(f"alpha must be a positive real, got {alpha_order!r}")
    for d in dims:
        if d < 1 or not d / alpha_order > 2:
            raise InvalidInputError(f"gamma = d / alpha must exceed 2 (d = {d}, alpha = {alpha_order:g})")

    cache: dict[float, UpperBound] = {}

    def upper(gamma):
        if gamma not in cache:
            cache[gamma] = _upper(gamma, mode, search, cells, quad)
        return cache[gamma]

    rows = []
    for d in dims:
        gamma = d / alpha_order
        ub = upper(gamma)
        cg = constants.c_gamma(gamma, ub.value)
        c_op = cg
        if alpha_order == 1.0 and d >= 3:
            # dimension induction only uses C_n from lower integer dimensions
            per_n = {n: constants.c_gamma(n, upper(float(n)).value) for n in range(3, min(d, n_cap) + 1)}
            c_op = min(cg, constants.c_op_table(d, per_n, n_cap)[d])
        sf = constants.semiclassical_factor(d)
        notes = []
        lieb = fls = None
        if alpha_order == 1.0:
            lieb = constants.REFERENCE.lieb_scalar.get(d)
            fls = constants.REFERENCE.fls_opvalued
        if alpha_order == 0.5 and d == 3:
            ref = constants.REFERENCE.daubechies_relativistic
            verdict = "better than" if cg < ref else "not better than"
            notes.append(f"C = {cg:.6g} is {verdict} the Daubechies constant {ref} for N(|P| + V) "
                         "(both read as dimensionless constants)")
        rows.append(ConstantReport(
            d=d, alpha_order=float(alpha_order), gamma=gamma, m_upper=ub.value, c_gamma=cg,
            c_lower=constants.c_lower(gamma), c_simple=constants.c_simple(gamma), c_op=c_op,
            semiclassical_factor=sf, coefficient=c_op * sf,
            reference_lieb=lieb, reference_flseiringer=fls,
            source=ub.source, params=ub.optimum.params if ub.optimum and ub.source == "trial" else None,
            notes=tuple(notes),
        ))
    return rows


def format_number(value, digits: int = 6) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.{digits}g}"


def _json_value(value, digits):
    if value is None or isinstance(value, int):
        return value
    if not math.isfinite(value):
        return None
    return float(format_number(value, digits))


def render(rows: Sequence[ConstantReport], fmt: str = "md", digits: int = 6, provenance: bool = False) -> str:
    """Render reports; output is a pure function of the inputs."""
    if fmt == "json":
        items = []
        for r in rows:
            obj = {k: _json_value(v, digits) for k, v in r.as_dict().items()}
            obj["source"] = r.source
            if r.notes:
                obj["notes"] = list(r.notes)
            items.append(obj)
        doc = {"rows": items}
        if provenance:
            doc["provenance"] = dict(PROVENANCE)
        return json.dumps(doc, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for r in rows:
            writer.writerow([format_number(getattr(r, k), digits) for k in CSV_FIELDS])
        if provenance:
            for k in CSV_FIELDS:
                writer.writerow([f"# {k}", PROVENANCE[k]])
        return buf.getvalue()
    if fmt == "md":
        lines = ["| " + " | ".join(REPORT_FIELDS) + " |", "|" + "---|" * len(REPORT_FIELDS)]
        footnotes = []
        for r in rows:
            cells = [format_number(getattr(r, k), digits) for k in REPORT_FIELDS]
            for note in r.notes:
                footnotes.append(note)
                cells[4] += f" [{len(footnotes)}]"
            lines.append("| " + " | ".join(cells) + " |")
        out = "\n".join(lines) + "\n"
        if footnotes:
            out += "\n" + "\n".join(f"[{i}] {n}" for i, n in enumerate(footnotes, 1)) + "\n"
        if provenance:
            out += "\nColumns:\n" + "\n".join(f"- {k}: {PROVENANCE[k]}" for k in REPORT_FIELDS) + "\n"
        return out
    raise InvalidInputError(f"unknown format {fmt!r}")
