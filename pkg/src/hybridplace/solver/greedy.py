"""Local-first placement heuristic, used as a warm upper bound."""
from __future__ import annotations

from fractions import Fraction

from ..builder import InvalidInstance, Placement, breakdown
from ..netmodel import CostParams, Demand, Topology, VariantFlags, validate
from .bnb import InfeasibleModel


def _ceil_div(a, b):
    return -(-a // b)


def greedy_bound(topology: Topology, params: CostParams, demand: Demand,
                 flags: VariantFlags = VariantFlags()) -> Placement:
    """Serve every site locally up to capacity, then push overflow down the cheapest open path.

    Overflow from a secondary always crosses its link to the primary first;
    from there each client goes to the cheapest of: the own primary, another
    primary with spare slots, or the cloud, priced per client-hour including
    the per-client share of a server. The result satisfies every model
    constraint but is not necessarily optimal.
    """
    violations = validate(topology, params, demand, flags)
    if violations:
        raise InvalidInstance(violations)
    U = params.server_capacity
    n = topology.primary_count
    P = range(n)
    sap = topology.secondaries_per_primary
    internal = not flags.cloud_only
    prim_slots = topology.primary_capacity * U if internal else 0
    sec_slots = topology.secondary_capacity * U if internal and flags.deploy_to_secondary else 0
    pairs = set(topology.primary_pairs()) if flags.inter_primary_redirect else set()

    S_p = [min(demand.clients_primary[i], prim_slots) for i in P]
    S_s = [[min(demand.clients_secondary[i][j], sec_slots) for j in range(sap[i])] for i in P]
    S_a = [0] * n
    F = [[0] * n for _ in P]
    free = [prim_slots - S_p[i] for i in P]

    sources = []  # (branch, clients, reaches-primary-over-secondary-link)
    for i in P:
        sources.append((i, demand.clients_primary[i] - S_p[i]))
        for j in range(sap[i]):
            spill = demand.clients_secondary[i][j] - S_s[i][j]
            if spill and not flags.allow_secondary_redirect:
                raise InfeasibleModel(f"secondary [{i + 1},{j + 1}] cannot serve its clients locally")
            sources.append((i, spill))

    for i, amount in sources:
        while amount:
            options = []
            if free[i]:
                options.append((Fraction(params.primary_price(i), U), 0, i))
            for j in P:
                if (i, j) in pairs and free[j]:
                    cost = params.inter_primary_link(i, j) + Fraction(params.primary_price(j), U)
                    options.append((cost, 1, j))
            if flags.allow_cloud:
                options.append((params.cloud_link(i) + Fraction(params.server_cloud, U), 2, -1))
            if not options:
                raise InfeasibleModel("not enough capacity to serve all clients")
            _, kind, j = min(options)
            if kind == 2:
                S_a[i] += amount
                amount = 0
                continue
            take = min(amount, free[j])
            free[j] -= take
            amount -= take
            if kind == 0:
                S_p[i] += take
            else:
                F[i][j] += take
                S_p[j] += take

    placement = Placement(
        n_a=_ceil_div(sum(S_a), U),
        n_p=tuple(_ceil_div(S_p[i], U) for i in P),
        n_s=tuple(tuple(_ceil_div(v, U) for v in row) for row in S_s),
        S_a=tuple(S_a),
        S_p=tuple(S_p),
        S_s=tuple(tuple(row) for row in S_s),
        F_pp=tuple(tuple(row) for row in F),
    )
    return placement.with_breakdown(breakdown(placement, params, demand, topology))
