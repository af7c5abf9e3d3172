"""Registry of the named local elements: space builder, DOF families and the
expected Korn verdict for each."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .dofs import DofSpec
from .geometry import Cell
from .spaces import (
    SpaceBasis, assemble_enriched, basis_BDM1, basis_CR, basis_MTW, basis_RT1, basis_V1,
    basis_Y, basis_enrichedCR,
)


@dataclass(frozen=True)
class Element:
    name: str
    dimension: int
    base_space: str
    enrichment: str
    dofs: tuple
    builder: Callable[[Cell], SpaceBasis] = field(repr=False, compare=False)
    korn_expected: bool = True
    table: str = ""  # "1", "2" or "" when the element is not part of a table
    row: int = 0
    label: str = ""

    @property
    def dof_set_id(self) -> str:
        return "+".join(f"{s.selector}:{s.weights}@{s.domain}" for s in self.dofs)

    def space(self, T: Cell) -> SpaceBasis:
        return self.builder(T)

    def describe(self) -> dict:
        return {
            "name": self.name,
            "dimension": self.dimension,
            "base_space": self.base_space,
            "enrichment": self.enrichment,
            "dof_set_id": self.dof_set_id,
            "dofs": [s.as_dict() for s in self.dofs],
            "korn_expected": self.korn_expected,
            "table": self.table or None,
            "row": self.row or None,
            "label": self.label,
        }


def _enriched(base, kind):
    def build(T: Cell) -> SpaceBasis:
        return assemble_enriched(base(T), basis_Y(kind, T), T)
    return build


NORMAL_P1 = DofSpec("normal", "P1")
TANG_MEAN = DofSpec("tangential2d", "P0")
CROSS_RT0 = DofSpec("cross_normal3d", "RT0")
CROSS_P0 = DofSpec("cross_normal3d", "P0t")
INTERIOR = DofSpec("interior", "const", "cell")
FACE_MEAN = DofSpec("full_vector", "const")

_RT_2D = (NORMAL_P1, INTERIOR, TANG_MEAN)
_BDM_2D = (NORMAL_P1, TANG_MEAN)


def _registry() -> dict[str, Element]:
    items = [
        Element("t1-fem1-2d", 2, "RT1", "Y1", _RT_2D, _enriched(basis_RT1, "Y1"), True, "1", 1,
                "Table 1, 1st FEM (2D)"),
        Element("t1-fem2-2d", 2, "BDM1", "Y1", _BDM_2D, _enriched(basis_BDM1, "Y1"), True, "1", 2,
                "Table 1, 2nd FEM (2D)"),
        Element("t1-fem1-3d", 3, "RT1", "Y2", (NORMAL_P1, INTERIOR, CROSS_RT0),
                _enriched(basis_RT1, "Y2"), True, "1", 3, "Table 1, 1st FEM (3D)"),
        Element("t1-fem2-3d", 3, "BDM1", "Y2", (NORMAL_P1, CROSS_RT0),
                _enriched(basis_BDM1, "Y2"), True, "1", 4, "Table 1, 2nd FEM (3D)"),
        Element("t1-fem3-3d", 3, "RT1", "Y3", (NORMAL_P1, INTERIOR, CROSS_P0),
                _enriched(basis_RT1, "Y3"), False, "1", 5, "Table 1, 3rd FEM (3D)"),
        Element("t1-fem4-3d", 3, "BDM1", "Y3", (NORMAL_P1, CROSS_P0),
                _enriched(basis_BDM1, "Y3"), False, "1", 6, "Table 1, 4th FEM (3D)"),
        Element("t2-fem1-2d", 2, "RT1", "Y4", _RT_2D, _enriched(basis_RT1, "Y4"), True, "2", 1,
                "Table 2, 1st FEM (2D)"),
        Element("t2-fem2-2d", 2, "BDM1", "Y4", _BDM_2D, _enriched(basis_BDM1, "Y4"), True, "2", 2,
                "Table 2, 2nd FEM (2D)"),
        Element("t2-fem3-3d", 3, "RT1", "Y5", (NORMAL_P1, INTERIOR, CROSS_P0),
                _enriched(basis_RT1, "Y5"), False, "2", 3, "Table 2, 3rd FEM (3D)"),
        Element("t2-fem4-3d", 3, "BDM1", "Y5", (NORMAL_P1, CROSS_P0),
                _enriched(basis_BDM1, "Y5"), False, "2", 4, "Table 2, 4th FEM (3D)"),
        Element("mtw-2d", 2, "MTW", "none", _BDM_2D, basis_MTW, True, label="cubic, div in P0, linear normal trace"),
        Element("ecr-psi-2d", 2, "CR", "psi", _BDM_2D, lambda T: basis_enrichedCR(T, 2, "psi"), True,
                label="CR^2 + edge-bubble psi fields"),
        Element("ecr-curl-2d", 2, "CR", "Y1", _BDM_2D, lambda T: basis_enrichedCR(T, 2, "curl"), True,
                label="CR^2 + curl(b_T P1)"),
        Element("ecr-curl-3d", 3, "CR", "Y2", (NORMAL_P1, CROSS_RT0), lambda T: basis_enrichedCR(T, 3, "curl"),
                True, label="CR^3 + curl(b_T (P1)^3)"),
        Element("v1-3d", 3, "BDM1", "Q*", (NORMAL_P1, CROSS_RT0), basis_V1, True,
                label="BDM1 + curl(b_T Q*)"),
        Element("cr-2d", 2, "CR", "none", (FACE_MEAN,), lambda T: basis_CR(T), False,
                label="classical Crouzeix-Raviart"),
        Element("cr-3d", 3, "CR", "none", (FACE_MEAN,), lambda T: basis_CR(T), False,
                label="classical Crouzeix-Raviart"),
    ]
    return {e.name: e for e in items}


REGISTRY: dict[str, Element] = _registry()


class UnknownElementError(KeyError):
    def __str__(self):
        return f"unknown element {self.args[0]!r}; known: {', '.join(sorted(REGISTRY))}"


def get_element(name: str) -> Element:
    try:
        return REGISTRY[name]
    except KeyError:
        raise UnknownElementError(name) from None


def table_rows(table: str) -> list[Element]:
    return sorted((e for e in REGISTRY.values() if e.table == table), key=lambda e: e.row)
