"""Build the placement MILP from an instance and decode solutions back into placements.

Variables, in dense id order:

* ``n_a`` servers in the public cloud, ``n_p[i]`` at primary sites,
  ``n_s[i,j]`` at secondary sites;
* ``S_a[i]``, ``S_p[i]``, ``S_s[i,j]`` clients of branch ``i`` served from
  the cloud, the primary and each secondary;
* ``F_pp[i,j]`` clients handed from primary ``i`` to primary ``j``, only when
  the topology has inter-primary links.

The objective is the hourly cost split into six parts: cloud servers (A),
primary servers (B), secondary servers (C), secondary-to-primary transfer (D),
cloud transfer (E) and inter-primary transfer (F). Money is in milli-cents.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .milp import EQ, LE, Constraint, LinExpr, MilpProblem, Variable
from .netmodel import CostParams, Demand, Topology, VariantFlags, validate

TERMS = ("A", "B", "C", "D", "E", "F")


class InvalidInstance(ValueError):
    def __init__(self, violations):
        super().__init__("invalid instance: " + "; ".join(violations))
        self.violations = list(violations)


@dataclass(frozen=True)
class VarIndex:
    topology: Topology
    n_a: int
    n_p: tuple[int, ...]
    n_s: dict
    S_a: tuple[int, ...]
    S_p: tuple[int, ...]
    S_s: dict
    F_pp: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return 1 + 2 * len(self.n_p) + len(self.S_a) + 2 * len(self.n_s) + len(self.F_pp)


@dataclass(frozen=True)
class Placement:
    """Integral server counts and client flows, with the hourly cost breakdown."""

    n_a: int
    n_p: tuple[int, ...]
    n_s: tuple[tuple[int, ...], ...]
    S_a: tuple[int, ...]
    S_p: tuple[int, ...]
    S_s: tuple[tuple[int, ...], ...]
    F_pp: tuple[tuple[int, ...], ...]
    breakdown: dict = field(default_factory=dict, compare=False)

    @property
    def total_cost(self) -> int:
        return sum(self.breakdown.values())

    @property
    def np_total(self) -> int:
        return sum(self.n_p)

    @property
    def ns_total(self) -> int:
        return sum(sum(row) for row in self.n_s)

    def with_breakdown(self, breakdown: dict) -> "Placement":
        return Placement(self.n_a, self.n_p, self.n_s, self.S_a, self.S_p, self.S_s,
                         self.F_pp, dict(breakdown))


def _name(prefix, *idx):
    return f"{prefix}[{','.join(str(k + 1) for k in idx)}]"


def build(topology: Topology, params: CostParams, demand: Demand,
          flags: VariantFlags = VariantFlags()) -> tuple[MilpProblem, VarIndex]:
    violations = validate(topology, params, demand, flags)
    if violations:
        raise InvalidInstance(violations)

    U = params.server_capacity
    total = demand.total
    P = range(topology.primary_count)
    sec = list(topology.secondary_sites())
    pairs = topology.primary_pairs()

    variables: list[Variable] = []

    def add(name, upper):
        variables.append(Variable(len(variables), name, 0, upper, True))
        return variables[-1].id

    n_a = add("n_a", -(-total // U))
    n_p = tuple(add(_name("n_p", i), topology.primary_capacity) for i in P)
    n_s = {(i, j): add(_name("n_s", i, j), topology.secondary_capacity) for i, j in sec}
    S_a = tuple(add(_name("S_a", i), total) for i in P)
    S_p = tuple(add(_name("S_p", i), total) for i in P)
    S_s = {(i, j): add(_name("S_s", i, j), total) for i, j in sec}
    F_pp = {(i, j): add(_name("F_pp", i, j), total) for i, j in pairs}
    index = VarIndex(topology, n_a, n_p, n_s, S_a, S_p, S_s, F_pp)

    cons: list[Constraint] = []
    cons.append(Constraint(LinExpr.of([(v, 1) for v in S_a] + [(n_a, -U)]), LE, "C1"))
    for i in P:
        cons.append(Constraint(LinExpr.of([(S_p[i], 1), (n_p[i], -U)]), LE, _name("C2", i)))
    for i, j in sec:
        cons.append(Constraint(LinExpr.of([(S_s[i, j], 1), (n_s[i, j], -U)]), LE, _name("C3", i, j)))
    for i in P:
        served = [(S_a[i], 1), (S_p[i], 1)]
        served += [(S_s[i, j], 1) for j in range(topology.secondaries_per_primary[i])]
        served += [(F_pp[i, j], 1) for j in P if (i, j) in F_pp]
        served += [(F_pp[j, i], -1) for j in P if (j, i) in F_pp]
        arriving = demand.clients_primary[i] + sum(demand.clients_secondary[i])
        cons.append(Constraint(LinExpr.of(served, -arriving), EQ, _name("C4", i)))
    c5 = LE if flags.allow_secondary_redirect else EQ
    for i, j in sec:
        cons.append(Constraint(LinExpr.of([(S_s[i, j], 1)], -demand.clients_secondary[i][j]),
                               c5, _name("C5", i, j)))

    # variant restrictions, each an extra named equality
    if not flags.inter_primary_redirect:
        for i, j in pairs:
            cons.append(Constraint(LinExpr.of([(F_pp[i, j], 1)]), EQ, _name("NoFpp", i, j)))
    if not flags.deploy_to_secondary:
        for i, j in sec:
            cons.append(Constraint(LinExpr.of([(S_s[i, j], 1)]), EQ, _name("NoSs", i, j)))
    if not flags.allow_cloud:
        cons.append(Constraint(LinExpr.of([(n_a, 1)]), EQ, "NoCloud"))
    if flags.cloud_only:
        for i in P:
            cons.append(Constraint(LinExpr.of([(n_p[i], 1)]), EQ, _name("CloudOnlyP", i)))
        for i, j in sec:
            cons.append(Constraint(LinExpr.of([(n_s[i, j], 1)]), EQ, _name("CloudOnlyS", i, j)))

    obj = [(n_a, params.server_cloud)]
    obj += [(n_p[i], params.primary_price(i)) for i in P]
    obj += [(n_s[i, j], params.secondary_price(i, j)) for i, j in sec]
    obj += [(S_s[i, j], -params.secondary_link(i, j)) for i, j in sec]
    obj += [(S_a[i], params.cloud_link(i)) for i in P]
    obj += [(F_pp[i, j], params.inter_primary_link(i, j)) for i, j in pairs]
    offset = sum(demand.clients_secondary[i][j] * params.secondary_link(i, j) for i, j in sec)

    problem = MilpProblem(tuple(variables), tuple(cons), LinExpr.of(obj, offset), "placement")
    return problem, index


def breakdown(placement: Placement, params: CostParams, demand: Demand,
              topology: Topology) -> dict:
    """Cost terms A-F in milli-cents per hour, computed directly from the placement."""
    P = range(topology.primary_count)
    sec = list(topology.secondary_sites())
    _check_shape(placement, topology)
    return {
        "A": placement.n_a * params.server_cloud,
        "B": sum(placement.n_p[i] * params.primary_price(i) for i in P),
        "C": sum(placement.n_s[i][j] * params.secondary_price(i, j) for i, j in sec),
        "D": sum((demand.clients_secondary[i][j] - placement.S_s[i][j]) * params.secondary_link(i, j)
                 for i, j in sec),
        "E": sum(placement.S_a[i] * params.cloud_link(i) for i in P),
        "F": sum(placement.F_pp[i][j] * params.inter_primary_link(i, j)
                 for i in P for j in P if i != j),
    }


def cost_of(placement: Placement, params: CostParams, demand: Demand, topology: Topology) -> int:
    """Total hourly cost in milli-cents."""
    return sum(breakdown(placement, params, demand, topology).values())


def decode(index: VarIndex, assignment, params: CostParams, demand: Demand) -> Placement:
    for x in assignment:
        if int(x) != x:
            raise ValueError(f"non-integral assignment value {x}")
    x = [int(v) for v in assignment]
    topo = index.topology
    P = range(topo.primary_count)
    sap = topo.secondaries_per_primary
    placement = Placement(
        n_a=x[index.n_a],
        n_p=tuple(x[index.n_p[i]] for i in P),
        n_s=tuple(tuple(x[index.n_s[i, j]] for j in range(sap[i])) for i in P),
        S_a=tuple(x[index.S_a[i]] for i in P),
        S_p=tuple(x[index.S_p[i]] for i in P),
        S_s=tuple(tuple(x[index.S_s[i, j]] for j in range(sap[i])) for i in P),
        F_pp=tuple(tuple(x[index.F_pp[i, j]] if (i, j) in index.F_pp else 0 for j in P) for i in P),
    )
    return placement.with_breakdown(breakdown(placement, params, demand, topo))


def encode(index: VarIndex, placement: Placement) -> list[int]:
    """Inverse of :func:`decode`. Inter-primary flows must be zero where no link variable exists."""
    x = [0] * index.size
    topo = index.topology
    x[index.n_a] = placement.n_a
    for i in range(topo.primary_count):
        x[index.n_p[i]] = placement.n_p[i]
        x[index.S_a[i]] = placement.S_a[i]
        x[index.S_p[i]] = placement.S_p[i]
        for j in range(topo.primary_count):
            if (i, j) in index.F_pp:
                x[index.F_pp[i, j]] = placement.F_pp[i][j]
            elif i != j and placement.F_pp[i][j]:
                raise ValueError(f"placement routes clients over missing link {_name('F_pp', i, j)}")
    for i, j in topo.secondary_sites():
        x[index.n_s[i, j]] = placement.n_s[i][j]
        x[index.S_s[i, j]] = placement.S_s[i][j]
    return x


def conservation_gaps(placement: Placement, demand: Demand, topology: Topology) -> list[int]:
    """Per-branch ``arriving - served`` (all zero for a placement that serves everyone)."""
    P = range(topology.primary_count)
    gaps = []
    for i in P:
        inbound = sum(placement.F_pp[j][i] for j in P if j != i)
        outbound = sum(placement.F_pp[i][j] for j in P if j != i)
        arriving = demand.clients_primary[i] + sum(demand.clients_secondary[i]) + inbound
        served = placement.S_a[i] + placement.S_p[i] + sum(placement.S_s[i]) + outbound
        gaps.append(arriving - served)
    return gaps


def _check_shape(placement: Placement, topology: Topology):
    n = topology.primary_count
    sap = topology.secondaries_per_primary
    ok = (len(placement.n_p) == n and len(placement.S_a) == n and len(placement.S_p) == n
          and [len(r) for r in placement.n_s] == list(sap)
          and [len(r) for r in placement.S_s] == list(sap)
          and len(placement.F_pp) == n and all(len(r) == n for r in placement.F_pp))
    if not ok:
        raise ValueError("placement shape does not match topology")
