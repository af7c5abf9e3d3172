"""``korngate`` command line.

Exit codes: 0 when the expected verdict is reproduced, 1 on a verdict
mismatch, 2 on an input error.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from . import reports
from .dofs import build_dofs, unisolvence
from .elements import REGISTRY, UnknownElementError, get_element, table_rows
from .geometry import BUILTIN_MESHES, GeometryError, Mesh, parse_mesh, reference_simplex
from .korn import PwSpace, dof_coverage_test, korn_kernel_test
from .rational import q_str
from .sharpness import case_name, run_case

PRINTED_KORN = {"1": ["Yes", "Yes", "Yes", "Yes", "No", "No"], "2": ["Yes", "Yes", "No", "No"]}

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    element: str | None = None
    mesh: str | None = None
    format: str = "text"
    include_phi: bool = True
    out: str | None = None
    domain: str | None = None
    k: int | None = None


# commands ----------------------------------------------------------------------------

def cmd_list_elements() -> tuple[dict, str, int]:
    data = {"elements": [e.describe() for e in REGISTRY.values()]}
    lines = [f"{'name':<12} {'dim':>3}  {'base':<5} {'enrich':<6} {'korn':<4}  dofs"]
    for e in REGISTRY.values():
        lines.append(f"{e.name:<12} {e.dimension:>3}  {e.base_space:<5} {e.enrichment:<6} "
                     f"{'Yes' if e.korn_expected else 'No':<4}  {e.dof_set_id}")
    return data, "\n".join(lines), EXIT_OK


def element_unisolvence(element):
    T = reference_simplex(element.dimension)
    return unisolvence(element.space(T), build_dofs(element.dofs, T))


def cmd_reproduce_tables() -> tuple[dict, str, int]:
    tables, lines, all_match = [], [], True
    for t in ("1", "2"):
        rows = []
        for e, printed in zip(table_rows(t), PRINTED_KORN[t]):
            rep = dof_coverage_test(e)
            uni = element_unisolvence(e)
            korn = "Yes" if rep.holds else "No"
            row = {"element": e.name, "row": e.row, "korn": korn, "printed": printed,
                   "match": korn == printed, "unisolvent": uni.unisolvent,
                   "kernel_dim": rep.kernel_dim, "expected": rep.expected_kernel_dim}
            if uni.determinant is not None:
                row["determinant"] = q_str(uni.determinant)
            if rep.witness is not None:
                row["witness"] = reports.field_text(rep.witness)
                row["residuals"] = reports._exact(rep.residuals)
            rows.append(row)
        col = [r["korn"] for r in rows]
        match = all(r["match"] and r["unisolvent"] for r in rows)
        all_match &= match
        tables.append({"table": t, "rows": rows, "korn_column": col, "printed_column": PRINTED_KORN[t],
                       "match": match})
        lines.append(f"Table {t}: Korn column {'/'.join(col)} (printed {'/'.join(PRINTED_KORN[t])}) "
                     f"{'MATCH' if match else 'MISMATCH'}")
        for r in rows:
            lines.append(f"  row {r['row']} {r['element']:<12} korn={r['korn']:<3} printed={r['printed']:<3} "
                         f"unisolvent={r['unisolvent']} det={r.get('determinant', '-')}")
            if not r["match"] and "witness" in r:
                lines.append(f"    witness: {r['witness']}")
    return {"tables": tables, "all_match": all_match}, "\n".join(lines), EXIT_OK if all_match else EXIT_MISMATCH


def _sharpness_text(d: dict) -> str:
    lines = [f"case {d['case']} ({d['dimension']}D), violated condition: {d['violated']}",
             "coefficients:"]
    lines += [f"  {k} = {v}" for k, v in d["coefficients"].items()]
    lines.append("residuals:")
    for k, v in d["residuals"].items():
        role = "violated" if k == d["violated"] else "retained"
        lines.append(f"  {k:<15} {v:>8}  ({role})")
    lines.append(f"strain_norm_sq = {d['strain_norm_sq']}")
    lines.append(f"h1_seminorm_sq = {d['h1_seminorm_sq']}")
    lines.append(f"phi_moments = [{', '.join(d['phi_moments'])}]")
    lines.append("checks:")
    lines += [f"  {k:<17} {'pass' if v else 'FAIL'}" for k, v in d["checks"].items()]
    lines.append(f"  {'generic_check':<17} {'pass' if d['generic_check'] else 'FAIL'}")
    pr = d["printed_recipe"]
    lines.append(f"printed recipe {pr['bars']}: {'pass' if pr['passes'] else 'fails ' + ', '.join(pr['failed_checks'])}")
    if d["notes"]:
        lines.append(f"note: {d['notes']}")
    lines.append(f"verdict: {'PASS' if d['passed'] else 'FAIL'}")
    return "\n".join(lines)


def cmd_counterexample(domain: str, k: int) -> tuple[dict, str, int]:
    try:
        name = case_name(domain, k)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    d = reports.sharpness_report_dict(run_case(name))
    return d, _sharpness_text(d), EXIT_OK if d["passed"] else EXIT_MISMATCH


def load_mesh(spec: str) -> Mesh:
    if spec in BUILTIN_MESHES:
        return BUILTIN_MESHES[spec]()
    path = Path(spec)
    if not path.exists():
        raise InputError(f"mesh {spec!r} is neither a file nor a built-in ({', '.join(BUILTIN_MESHES)})")
    try:
        return parse_mesh(path.read_text())
    except GeometryError as exc:
        raise InputError(f"{spec}: {exc}") from exc


def cmd_korn_kernel(element: str, mesh: str | None, include_phi: bool) -> tuple[dict, str, int]:
    try:
        e = get_element(element)
    except UnknownElementError as exc:
        raise InputError(f"{exc}\nrun `korngate list-elements` for the registry") from None
    m = load_mesh(mesh or f"two-cell-{e.dimension}d")
    if m.dim != e.dimension:
        raise InputError(f"element {e.name} is {e.dimension}D but the mesh is {m.dim}D")
    if any(c.kind != "simplex" for c in m.cells):
        raise InputError("element spaces need a simplicial mesh")
    space = PwSpace.from_builder(m, e.space, e.name)
    rep = korn_kernel_test(space, include_phi=include_phi, jump_control="none", continuity="dofs",
                           dof_specs=e.dofs, element=e.name)
    d = reports.korn_report_dict(rep)
    expected = "holds" if e.korn_expected else "fails"
    d["expected_verdict"] = expected
    d["matches_expected"] = rep.verdict == expected
    lines = [f"element {e.name} on {mesh or 'two-cell configuration'} (phi={'on' if include_phi else 'off'})",
             f"verdict: {rep.verdict} (expected {expected})",
             f"kernel_dim = {rep.kernel_dim}, expected kernel dim = {rep.expected_kernel_dim}"]
    if "witness" in d:
        lines.append("witness:")
        lines += [f"  cell {i}: ({', '.join(c)})" for i, c in enumerate(d["witness"])]
        lines.append(f"  |witness|_H1^2 = {d['witness_h1_sq']}")
    return d, "\n".join(lines), EXIT_OK if d["matches_expected"] else EXIT_MISMATCH


# argument handling -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="korngate", description="Exact Korn-compatibility checks for finite elements.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--out", help="write the report here instead of stdout")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("list-elements", parents=[common], help="list the element registry")
    sub.add_parser("reproduce-tables", parents=[common], help="recompute the Korn columns of both tables")
    ce = sub.add_parser("counterexample", parents=[common], help="build and verify one sharpness counterexample")
    ce.add_argument("--domain", choices=("2d", "3d"), required=True)
    ce.add_argument("--k", type=int, required=True)
    kk = sub.add_parser("korn-kernel", parents=[common], help="kernel test of an element on a mesh")
    kk.add_argument("--element", required=True)
    kk.add_argument("--mesh", help=f"mesh file or built-in name ({', '.join(BUILTIN_MESHES)})")
    kk.add_argument("--phi", dest="include_phi", action=argparse.BooleanOptionalAction, default=True)
    return p


def run(cfg: RunConfig) -> tuple[dict, str, int]:
    if cfg.command == "list-elements":
        return cmd_list_elements()
    if cfg.command == "reproduce-tables":
        return cmd_reproduce_tables()
    if cfg.command == "counterexample":
        return cmd_counterexample(cfg.domain, cfg.k)
    if cfg.command == "korn-kernel":
        return cmd_korn_kernel(cfg.element, cfg.mesh, cfg.include_phi)
    raise InputError(f"unknown command {cfg.command!r}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(**{k: v for k, v in vars(args).items() if k in RunConfig.__dataclass_fields__})
    try:
        data, text, code = run(cfg)
    except InputError as exc:
        print(f"korngate: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    body = reports.dumps(data) if cfg.format == "json" else text
    if cfg.out:
        Path(cfg.out).write_text(body + "\n")
    else:
        print(body)
    return code


if __name__ == "__main__":
    sys.exit(main())
