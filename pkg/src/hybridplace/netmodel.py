"""Topologies, prices, demand snapshots and deployment variants.

Prices are held as integer milli-cents per hour (1 cent = 1000 units) so that
every value in the reference price tables is exact. Indices are 0-based in
code; names rendered for people (``n_s[1,2]``) are 1-based.
"""
from __future__ import annotations

from dataclasses import dataclass, fields
from decimal import Decimal
from typing import Union

MILLI = 1000  # money units per cent

Price = Union[int, tuple]


def to_millicents(value) -> int:
    """Convert a cents amount (int, str, Decimal or float) to integer milli-cents."""
    if isinstance(value, bool):
        raise TypeError("price must be a number, not bool")
    if isinstance(value, float):
        value = repr(value)
    scaled = Decimal(value) * MILLI
    if scaled != scaled.to_integral_value():
        raise ValueError(f"price {value} has more than 3 decimals of a cent")
    return int(scaled)


def to_cents(millicents) -> Decimal:
    return Decimal(millicents) / MILLI


def to_usd(millicents) -> Decimal:
    """USD per hour rounded to two decimals."""
    return (Decimal(millicents) / (MILLI * 100)).quantize(Decimal("0.01"))


@dataclass(frozen=True)
class Topology:
    primary_count: int
    secondaries_per_primary: tuple[int, ...]
    primary_capacity: int = 800
    secondary_capacity: int = 100
    inter_primary_links: bool = True

    def __post_init__(self):
        object.__setattr__(self, "secondaries_per_primary", tuple(self.secondaries_per_primary))

    def secondary_sites(self):
        """Yield ``(i, j)`` for every secondary site, branch by branch."""
        for i, count in enumerate(self.secondaries_per_primary):
            for j in range(count):
                yield i, j

    def primary_pairs(self):
        """Ordered pairs ``(i, j)``, ``i != j``, that may carry inter-primary traffic."""
        if not self.inter_primary_links:
            return []
        n = self.primary_count
        return [(i, j) for i in range(n) for j in range(n) if i != j]


@dataclass(frozen=True)
class CostParams:
    """Unit prices in milli-cents per hour.

    Per-site fields accept either a scalar, broadcast to every site, or a
    tuple shaped like the topology: ``server_primary[i]``,
    ``server_secondary[i][j]``, ``link_cloud[i]``,
    ``link_inter_primary[i][j]`` (diagonal ignored) and
    ``link_secondary[i][j]``.
    """

    server_cloud: int
    server_primary: Price
    server_secondary: Price
    link_cloud: Price
    link_inter_primary: Price
    link_secondary: Price
    server_capacity: int

    def __post_init__(self):
        for f in fields(self):
            object.__setattr__(self, f.name, _freeze(getattr(self, f.name)))

    @classmethod
    def from_cents(cls, *, server_cloud, server_primary, server_secondary, link_cloud,
                   link_inter_primary, link_secondary, server_capacity):
        conv = _map_nested(to_millicents)
        return cls(
            server_cloud=to_millicents(server_cloud),
            server_primary=conv(server_primary),
            server_secondary=conv(server_secondary),
            link_cloud=conv(link_cloud),
            link_inter_primary=conv(link_inter_primary),
            link_secondary=conv(link_secondary),
            server_capacity=server_capacity,
        )

    def primary_price(self, i: int) -> int:
        return _pick(self.server_primary, i)

    def secondary_price(self, i: int, j: int) -> int:
        return _pick(self.server_secondary, i, j)

    def cloud_link(self, i: int) -> int:
        return _pick(self.link_cloud, i)

    def inter_primary_link(self, i: int, j: int) -> int:
        return _pick(self.link_inter_primary, i, j)

    def secondary_link(self, i: int, j: int) -> int:
        return _pick(self.link_secondary, i, j)

    def scaled(self, k: int) -> "CostParams":
        """Every price multiplied by the positive integer ``k``."""
        mul = _map_nested(lambda v: v * k)
        return CostParams(
            server_cloud=self.server_cloud * k,
            server_primary=mul(self.server_primary),
            server_secondary=mul(self.server_secondary),
            link_cloud=mul(self.link_cloud),
            link_inter_primary=mul(self.link_inter_primary),
            link_secondary=mul(self.link_secondary),
            server_capacity=self.server_capacity,
        )


@dataclass(frozen=True)
class Demand:
    clients_primary: tuple[int, ...]
    clients_secondary: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "clients_primary", tuple(self.clients_primary))
        object.__setattr__(self, "clients_secondary",
                           tuple(tuple(row) for row in self.clients_secondary))

    @property
    def total(self) -> int:
        return sum(self.clients_primary) + sum(sum(row) for row in self.clients_secondary)

    @classmethod
    def zero(cls, topology: Topology) -> "Demand":
        return cls((0,) * topology.primary_count,
                   tuple((0,) * k for k in topology.secondaries_per_primary))


@dataclass(frozen=True)
class VariantFlags:
    """Deployment variants. The defaults give the unrestricted hybrid model."""

    inter_primary_redirect: bool = True
    deploy_to_secondary: bool = True
    allow_secondary_redirect: bool = True
    allow_cloud: bool = True
    cloud_only: bool = False


# Names accepted on the command line and in reports.
VARIANTS = {
    "no-inter-primary": ("inter_primary_redirect", False),
    "no-secondary": ("deploy_to_secondary", False),
    "no-redirect": ("allow_secondary_redirect", False),
    "no-cloud": ("allow_cloud", False),
    "cloud-only": ("cloud_only", True),
}


def apply_variants(flags: VariantFlags, names) -> VariantFlags:
    changes = {}
    for name in names:
        if name not in VARIANTS:
            raise ValueError(f"unknown variant {name!r}; choose from {', '.join(VARIANTS)}")
        attr, value = VARIANTS[name]
        changes[attr] = value
    return VariantFlags(**{**flags.__dict__, **changes})


def validate(topology: Topology, params: CostParams, demand: Demand,
             flags: VariantFlags = VariantFlags()) -> list[str]:
    """Return every shape or sign violation as ``"path: message"``; empty when well-formed."""
    out = []

    def need(cond, path, msg):
        if not cond:
            out.append(f"{path}: {msg}")

    n = topology.primary_count
    sap = topology.secondaries_per_primary
    need(_is_int(n) and n >= 1, "topology.primary_count", "must be an integer >= 1")
    shape_ok = _is_int(n) and len(sap) == n
    need(shape_ok, "topology.secondaries_per_primary", f"expected {n} entries, got {len(sap)}")
    for i, k in enumerate(sap):
        need(_is_int(k) and k >= 0, f"topology.secondaries_per_primary[{i + 1}]",
             "must be an integer >= 0")
    need(_is_int(topology.primary_capacity) and topology.primary_capacity >= 0,
         "topology.primary_capacity", "must be an integer >= 0")
    need(_is_int(topology.secondary_capacity) and topology.secondary_capacity >= 0,
         "topology.secondary_capacity", "must be an integer >= 0")
    if not shape_ok or any(not _is_int(k) or k < 0 for k in sap):
        return out

    need(_is_int(params.server_capacity) and params.server_capacity >= 1,
         "params.server_capacity", "must be an integer >= 1")
    need(_is_int(params.server_cloud) and params.server_cloud >= 0,
         "params.server_cloud", "must be >= 0")
    primary_shape = (None,) * n
    secondary_shape = tuple(sap)
    pair_shape = (n,) * n
    _check_price(out, "params.server_primary", params.server_primary, primary_shape)
    _check_price(out, "params.server_secondary", params.server_secondary, secondary_shape)
    _check_price(out, "params.link_cloud", params.link_cloud, primary_shape)
    _check_price(out, "params.link_inter_primary", params.link_inter_primary, pair_shape)
    _check_price(out, "params.link_secondary", params.link_secondary, secondary_shape)

    cp, cs = demand.clients_primary, demand.clients_secondary
    if len(cp) != n:
        out.append(f"demand.clients_primary: expected {n} entries, got {len(cp)}")
    for i, c in enumerate(cp):
        need(_is_int(c) and c >= 0, f"demand.clients_primary[{i + 1}]", "must be an integer >= 0")
    if len(cs) != n:
        out.append(f"demand.clients_secondary: expected {n} rows, got {len(cs)}")
    for i, row in enumerate(cs):
        if i < n and len(row) != sap[i]:
            out.append(f"demand.clients_secondary[{i + 1}]: expected {sap[i]} entries, got {len(row)}")
        for j, c in enumerate(row):
            need(_is_int(c) and c >= 0, f"demand.clients_secondary[{i + 1},{j + 1}]",
                 "must be an integer >= 0")

    if flags.cloud_only and not flags.allow_cloud:
        out.append("variant: cloud_only and allow_cloud=false are mutually exclusive")
    return out


def reference_topology(kind: str) -> Topology:
    """Three branches of one primary and two secondaries each, with or without a primary mesh."""
    if kind not in ("fig6a", "fig6b"):
        raise ValueError(f"unknown reference topology {kind!r}")
    return Topology(3, (2, 2, 2), 800, 100, inter_primary_links=(kind == "fig6a"))


def reference_demand(kind: str) -> Demand:
    """Reference client distributions over the three-branch topology.

    ``fig7_equal`` puts 1,050,000 clients on every primary and 641,900 on
    every secondary. ``fig6_split`` loads branches 1 and 3 with 3.5M clients
    each (1.4M at the primary, 1.05M per secondary) and leaves branch 2 idle.
    The intra-branch split of ``fig6_split`` is reverse-engineered: it is the
    round-number split that reproduces the published comparison totals.
    """
    if kind == "fig7_equal":
        return Demand((1_050_000,) * 3, ((641_900, 641_900),) * 3)
    if kind == "fig6_split":
        busy = (1_050_000, 1_050_000)
        return Demand((1_400_000, 0, 1_400_000), (busy, (0, 0), busy))
    raise ValueError(f"unknown reference demand {kind!r}")


def default_params(effective: bool = True) -> CostParams:
    """Reference prices.

    ``effective=False`` returns the table as printed (secondary link 1.26,
    cloud link 1.512 cents per client-hour). ``effective=True`` swaps in 1.2
    and 1.5, the only link prices under which the published result tables
    come out exactly.
    """
    return CostParams.from_cents(
        server_cloud=10,
        server_primary=6,
        server_secondary=8,
        link_cloud="1.5" if effective else "1.512",
        link_inter_primary="1.0",
        link_secondary="1.2" if effective else "1.26",
        server_capacity=300,
    )


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _freeze(v):
    if isinstance(v, (list, tuple)):
        return tuple(_freeze(x) for x in v)
    return v


def _map_nested(fn):
    def go(v):
        if isinstance(v, (list, tuple)):
            return tuple(go(x) for x in v)
        return fn(v)
    return go


def _pick(value, *idx):
    for k in idx:
        if not isinstance(value, tuple):
            return value
        value = value[k]
    return value


def _check_price(out, path, value, shape):
    """Scalars broadcast; tuples need one row per entry of ``shape``, a row being
    a scalar when its shape entry is None and a tuple of that width otherwise."""
    if not isinstance(value, tuple):
        if not _is_int(value) or value < 0:
            out.append(f"{path}: must be >= 0")
        return
    if len(value) != len(shape):
        out.append(f"{path}: expected {len(shape)} entries, got {len(value)}")
        return
    for i, (row, width) in enumerate(zip(value, shape)):
        if (width is None) == isinstance(row, tuple):
            out.append(f"{path}[{i + 1}]: wrong nesting")
        elif isinstance(row, tuple):
            if len(row) != width:
                out.append(f"{path}[{i + 1}]: expected {width} entries, got {len(row)}")
            for j, v in enumerate(row):
                if not _is_int(v) or v < 0:
                    out.append(f"{path}[{i + 1},{j + 1}]: must be >= 0")
        elif not _is_int(row) or row < 0:
            out.append(f"{path}[{i + 1}]: must be >= 0")
