"""JSON instance documents.

Top-level keys: ``topology`` and ``demand`` (required), ``params`` and
``variant`` (optional; effective reference prices and the unrestricted
model are used when absent). Field names follow the dataclasses in
:mod:`hybridplace.netmodel`. Prices are decimal cents per hour, scalar or
per site.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, fields
from decimal import Decimal

from .netmodel import (CostParams, Demand, Topology, VariantFlags, default_params, to_cents,
                       to_millicents)

PRICE_FIELDS = ("server_cloud", "server_primary", "server_secondary", "link_cloud",
                "link_inter_primary", "link_secondary")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Instance:
    topology: Topology
    params: CostParams
    demand: Demand
    flags: VariantFlags = VariantFlags()


def _int(value, path):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    return value


def _ints(value, path, depth):
    if depth == 0:
        return _int(value, path)
    if not isinstance(value, list):
        raise ConfigError(f"{path}: expected a list")
    return tuple(_ints(v, f"{path}[{k + 1}]", depth - 1) for k, v in enumerate(value))


def _price(value, path):
    if isinstance(value, list):
        return tuple(_price(v, f"{path}[{k + 1}]") for k, v in enumerate(value))
    if isinstance(value, bool) or not isinstance(value, (int, Decimal)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    try:
        return to_millicents(value)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _section(doc, key, allowed):
    sec = doc[key]
    if not isinstance(sec, dict):
        raise ConfigError(f"{key}: expected an object")
    unknown = set(sec) - set(allowed)
    if unknown:
        raise ConfigError(f"{key}: unknown field(s) {', '.join(sorted(unknown))}")
    return sec


def parse_config(doc: dict) -> Instance:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - {"topology", "params", "demand", "variant"}
    if unknown:
        raise ConfigError(f"unknown top-level key(s) {', '.join(sorted(unknown))}")
    for key in ("topology", "demand"):
        if key not in doc:
            raise ConfigError(f"missing {key!r}")
    try:
        t = _section(doc, "topology", [f.name for f in fields(Topology)])
        links = t.get("inter_primary_links", True)
        if not isinstance(links, bool):
            raise ConfigError("topology.inter_primary_links: expected true or false")
        topology = Topology(
            _int(t["primary_count"], "topology.primary_count"),
            _ints(t["secondaries_per_primary"], "topology.secondaries_per_primary", 1),
            _int(t.get("primary_capacity", 800), "topology.primary_capacity"),
            _int(t.get("secondary_capacity", 100), "topology.secondary_capacity"),
            links,
        )
        d = _section(doc, "demand", [f.name for f in fields(Demand)])
        demand = Demand(_ints(d["clients_primary"], "demand.clients_primary", 1),
                        _ints(d["clients_secondary"], "demand.clients_secondary", 2))
        if "params" in doc:
            p = _section(doc, "params", [f.name for f in fields(CostParams)])
            kwargs = {name: _price(p[name], f"params.{name}") for name in PRICE_FIELDS}
            params = CostParams(server_capacity=_int(p["server_capacity"], "params.server_capacity"),
                                **kwargs)
        else:
            params = default_params(effective=True)
        flags = VariantFlags()
        if "variant" in doc:
            v = _section(doc, "variant", [f.name for f in fields(VariantFlags)])
            for name, value in v.items():
                if not isinstance(value, bool):
                    raise ConfigError(f"variant.{name}: expected true or false")
            flags = VariantFlags(**v)
    except KeyError as exc:
        raise ConfigError(f"missing field {exc.args[0]!r}") from None
    return Instance(topology, params, demand, flags)


def loads(text: str) -> Instance:
    try:
        doc = json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from None
    return parse_config(doc)


def load(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def _price_out(value):
    if isinstance(value, tuple):
        return [_price_out(v) for v in value]
    cents = to_cents(value)
    return int(cents) if cents == cents.to_integral_value() else float(cents)


def to_document(instance: Instance) -> dict:
    t, p, d, f = instance.topology, instance.params, instance.demand, instance.flags
    return {
        "topology": {
            "primary_count": t.primary_count,
            "secondaries_per_primary": list(t.secondaries_per_primary),
            "primary_capacity": t.primary_capacity,
            "secondary_capacity": t.secondary_capacity,
            "inter_primary_links": t.inter_primary_links,
        },
        "params": {**{name: _price_out(getattr(p, name)) for name in PRICE_FIELDS},
                   "server_capacity": p.server_capacity},
        "demand": {
            "clients_primary": list(d.clients_primary),
            "clients_secondary": [list(row) for row in d.clients_secondary],
        },
        "variant": {fl.name: getattr(f, fl.name) for fl in fields(VariantFlags)},
    }


def dumps(instance: Instance) -> str:
    return json.dumps(to_document(instance), indent=2) + "\n"


def instance_hash(instance: Instance) -> str:
    canonical = json.dumps(to_document(instance), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()
