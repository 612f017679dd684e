"""Mixed-integer linear programs with exact coefficients.

Coefficients and bounds are ints or :class:`fractions.Fraction`; evaluation
and feasibility checks never touch floating point.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Optional, Sequence

LE, EQ, GE = "<=", "=", ">="


@dataclass(frozen=True)
class Variable:
    id: int
    name: str
    lower: Fraction | int = 0
    upper: Optional[Fraction | int] = None  # None means unbounded above
    integral: bool = True


@dataclass(frozen=True)
class LinExpr:
    """Sparse linear expression ``sum(coef * x[id]) + constant``.

    ``terms`` is kept sorted by variable id with duplicates merged and zero
    coefficients dropped, so two equal expressions compare equal.
    """

    terms: tuple[tuple[int, Fraction | int], ...] = ()
    constant: Fraction | int = 0

    @classmethod
    def of(cls, pairs=(), constant=0) -> "LinExpr":
        acc: dict[int, Fraction | int] = {}
        for vid, coef in pairs:
            acc[vid] = acc.get(vid, 0) + coef
        return cls(tuple(sorted((v, c) for v, c in acc.items() if c != 0)), constant)

    def value(self, x: Sequence) -> Fraction | int:
        return sum((c * x[v] for v, c in self.terms), self.constant)

    def coef(self, vid: int):
        for v, c in self.terms:
            if v == vid:
                return c
        return 0


@dataclass(frozen=True)
class Constraint:
    """``expr <relation> 0``."""

    expr: LinExpr
    relation: str
    name: str

    def holds(self, x: Sequence) -> bool:
        v = self.expr.value(x)
        if self.relation == LE:
            return v <= 0
        if self.relation == GE:
            return v >= 0
        return v == 0


@dataclass(frozen=True)
class MilpProblem:
    """Minimize ``objective`` over ``variables`` subject to ``constraints``."""

    variables: tuple[Variable, ...]
    constraints: tuple[Constraint, ...]
    objective: LinExpr
    name: str = "problem"
    _by_name: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        for k, v in enumerate(self.variables):
            if v.id != k:
                raise ValueError(f"variable {v.name} has id {v.id}, expected dense id {k}")
            if v.upper is not None and v.lower > v.upper:
                raise ValueError(f"variable {v.name}: lower {v.lower} > upper {v.upper}")
        n = len(self.variables)
        for expr, where in [(self.objective, "objective")] + [(c.expr, c.name) for c in self.constraints]:
            for vid, _ in expr.terms:
                if not 0 <= vid < n:
                    raise ValueError(f"{where} references unknown variable id {vid}")
        object.__setattr__(self, "_by_name", {v.name: v.id for v in self.variables})

    def var_id(self, name: str) -> int:
        return self._by_name[name]

    def with_bounds(self, bounds: Mapping[int, tuple]) -> "MilpProblem":
        """Copy with ``{id: (lower, upper)}`` bound overrides."""
        variables = list(self.variables)
        for vid, (lo, hi) in bounds.items():
            variables[vid] = replace(variables[vid], lower=lo, upper=hi)
        return MilpProblem(tuple(variables), self.constraints, self.objective, self.name)


class MissingValue(ValueError):
    pass


def _check_length(problem: MilpProblem, assignment: Sequence):
    if len(assignment) != len(problem.variables):
        raise MissingValue(
            f"assignment has {len(assignment)} values for {len(problem.variables)} variables")
    for k, v in enumerate(assignment):
        if v is None:
            raise MissingValue(f"no value for variable {problem.variables[k].name}")


def evaluate(problem: MilpProblem, assignment: Sequence):
    """Objective value of ``assignment``, exact."""
    _check_length(problem, assignment)
    return problem.objective.value(assignment)


def check_feasible(problem: MilpProblem, assignment: Sequence) -> list[str]:
    """Names of violated constraints, bounds (``bound:<var>``) and integrality marks (``int:<var>``)."""
    _check_length(problem, assignment)
    bad = []
    for v in problem.variables:
        x = assignment[v.id]
        if x < v.lower or (v.upper is not None and x > v.upper):
            bad.append(f"bound:{v.name}")
        if v.integral and Fraction(x).denominator != 1:
            bad.append(f"int:{v.name}")
    bad.extend(c.name for c in problem.constraints if not c.holds(assignment))
    return bad
