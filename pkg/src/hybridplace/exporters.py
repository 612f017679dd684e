"""Model exporters: AMPL model/data text and CPLEX-style LP files.

The AMPL pair is write-only and mirrors the placement formulation symbol for
symbol; prices in the data file are cents per hour. The LP writer works on
any :class:`MilpProblem` (objective in milli-cents for built models) and has
a matching reader so a file can be checked against the problem it came from.
"""
from __future__ import annotations

import re
from decimal import Decimal
from fractions import Fraction

from .builder import InvalidInstance
from .milp import EQ, GE, LE, Constraint, LinExpr, MilpProblem, Variable
from .netmodel import CostParams, Demand, Topology, VariantFlags, to_cents, validate

AMPL_MODEL = """\
# Hybrid streaming-server placement: public cloud, primary and secondary sites.

param Pnum integer > 0;
set P := 1..Pnum;
param SAP {P} integer >= 0;
set S := {i in P, j in 1..SAP[i]};
set PP within {P, P};  # inter-primary links

param U > 0;            # clients per server
param Pa >= 0;          # cloud server price
param Pp {P} >= 0;      # primary server price
param Ps {S} >= 0;      # secondary server price
param Cp {P} >= 0;      # clients at primary sites
param Cs {S} >= 0;      # clients at secondary sites
param La {P} >= 0;      # cloud transfer price per client
param Lpp {PP} >= 0;    # inter-primary transfer price per client
param Ls {S} >= 0;      # secondary-to-primary transfer price per client
param CapP >= 0;        # server capacity of a primary site
param CapS >= 0;        # server capacity of a secondary site

var na integer >= 0;
var np {P} integer >= 0;
var ns {S} integer >= 0;
var Sa {P} integer >= 0;
var Sp {P} integer >= 0;
var Ss {S} integer >= 0;
var Fpp {PP} integer >= 0;
# C6: every variable above is a non-negative integer.

minimize TotalCost:
    Pa * na
  + sum {i in P} Pp[i] * np[i]
  + sum {(i,j) in S} Ps[i,j] * ns[i,j]
  + sum {(i,j) in S} (Cs[i,j] - Ss[i,j]) * Ls[i,j]
  + sum {i in P} La[i] * Sa[i]
  + sum {(i,k) in PP} Lpp[i,k] * Fpp[i,k];

subject to C1: sum {i in P} Sa[i] <= U * na;
subject to C2 {i in P}: Sp[i] <= U * np[i];
subject to C3 {(i,j) in S}: Ss[i,j] <= U * ns[i,j];
subject to C4 {i in P}:
    Sa[i] + Sp[i] + sum {j in 1..SAP[i]} Ss[i,j]
  + sum {(i,k) in PP} Fpp[i,k] - sum {(k,i) in PP} Fpp[k,i]
  = Cp[i] + sum {j in 1..SAP[i]} Cs[i,j];
subject to C5 {(i,j) in S}: Ss[i,j] {c5} Cs[i,j];
subject to C7 {i in P}: np[i] <= CapP;
subject to C7s {(i,j) in S}: ns[i,j] <= CapS;
"""

VARIANT_BLOCKS = {
    "inter_primary_redirect": "subject to NoFpp {(i,k) in PP}: Fpp[i,k] = 0;\n",
    "deploy_to_secondary": "subject to NoSs {(i,j) in S}: Ss[i,j] = 0;\n",
    "allow_cloud": "subject to NoCloud: na = 0;\n",
}
CLOUD_ONLY_BLOCK = ("subject to CloudOnlyP {i in P}: np[i] = 0;\n"
                    "subject to CloudOnlyS {(i,j) in S}: ns[i,j] = 0;\n")


def _num(value) -> str:
    d = Decimal(value)
    return format(d.normalize(), "f") if d else "0"


def _cents(millicents) -> str:
    return _num(to_cents(millicents))


def _check(topology, params, demand, flags):
    violations = validate(topology, params, demand, flags)
    if violations:
        raise InvalidInstance(violations)


def ampl_model(flags: VariantFlags = VariantFlags()) -> str:
    text = AMPL_MODEL.replace("{c5}", "<=" if flags.allow_secondary_redirect else "=")
    extra = ""
    for attr, block in VARIANT_BLOCKS.items():
        if not getattr(flags, attr):
            extra += block
    if flags.cloud_only:
        extra += CLOUD_ONLY_BLOCK
    if extra:
        text += "\n# deployment variant\n" + extra
    return text


def ampl_data(topology: Topology, params: CostParams, demand: Demand) -> str:
    P = range(topology.primary_count)
    sec = list(topology.secondary_sites())
    pairs = topology.primary_pairs()
    lines = [f"param Pnum := {topology.primary_count};"]

    def table(name, keys, fn):
        body = "".join(f"\n  {' '.join(str(k + 1) for k in key)} {fn(*key)}" for key in keys)
        lines.append(f"param {name} :={body};")

    table("SAP", [(i,) for i in P], lambda i: topology.secondaries_per_primary[i])
    lines.append("set PP :=" + "".join(f" ({i + 1},{j + 1})" for i, j in pairs) + ";")
    lines.append(f"param U := {params.server_capacity};")
    lines.append(f"param Pa := {_cents(params.server_cloud)};")
    table("Pp", [(i,) for i in P], lambda i: _cents(params.primary_price(i)))
    table("Ps", sec, lambda i, j: _cents(params.secondary_price(i, j)))
    table("Cp", [(i,) for i in P], lambda i: demand.clients_primary[i])
    table("Cs", sec, lambda i, j: demand.clients_secondary[i][j])
    table("La", [(i,) for i in P], lambda i: _cents(params.cloud_link(i)))
    table("Lpp", pairs, lambda i, j: _cents(params.inter_primary_link(i, j)))
    table("Ls", sec, lambda i, j: _cents(params.secondary_link(i, j)))
    lines.append(f"param CapP := {topology.primary_capacity};")
    lines.append(f"param CapS := {topology.secondary_capacity};")
    return "\n".join(lines) + "\n"


def export_ampl(topology: Topology, params: CostParams, demand: Demand,
                flags: VariantFlags = VariantFlags()) -> tuple[str, str]:
    """Return ``(model text, data text)`` for one instance."""
    _check(topology, params, demand, flags)
    return ampl_model(flags), ampl_data(topology, params, demand)


# ---- LP format ------------------------------------------------------------

_RELS = {LE: "<=", GE: ">=", EQ: "="}
_TERM = re.compile(r"([+-])\s*(\S+)\s+(\S+)|([+-])\s*(\S+)")


def lp_name(name: str) -> str:
    """``n_s[1,2]`` -> ``n_s(1,2)``: square brackets are not legal in LP names."""
    return name.replace("[", "(").replace("]", ")")


def _from_lp_name(name: str) -> str:
    return name.replace("(", "[").replace(")", "]")


def _lp_num(value) -> str:
    f = Fraction(value)
    if f.denominator == 1:
        return str(f.numerator)
    d = Decimal(f.numerator) / Decimal(f.denominator)
    if Fraction(d) != f:
        raise ValueError(f"coefficient {f} has no exact decimal form")
    return _num(d)


def _linear(terms, names) -> str:
    parts = []
    for vid, coef in terms:
        sign = "-" if coef < 0 else "+"
        parts.append(f"{sign} {_lp_num(abs(coef))} {names[vid]}")
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def export_lp(problem: MilpProblem) -> str:
    names = [lp_name(v.name) for v in problem.variables]
    out = [f"\\ Problem: {problem.name}", "Minimize"]
    obj = _linear(problem.objective.terms, names)
    k = problem.objective.constant
    if k:
        obj = (obj + " " if obj else "") + ("- " if k < 0 else "+ ") + _lp_num(abs(k))
    if not obj:
        obj = f"0 {names[0]}" if names else "0"
    out.append(f" obj: {obj}")
    out.append("Subject To")
    for c in problem.constraints:
        lhs = _linear(c.expr.terms, names) or (f"0 {names[0]}" if names else "0")
        out.append(f" {lp_name(c.name)}: {lhs} {_RELS[c.relation]} {_lp_num(-c.expr.constant)}")
    out.append("Bounds")
    for v, name in zip(problem.variables, names):
        upper = "+inf" if v.upper is None else _lp_num(v.upper)
        out.append(f" {_lp_num(v.lower)} <= {name} <= {upper}")
    ints = [name for v, name in zip(problem.variables, names) if v.integral]
    if ints:
        out.append("Generals")
        for k in range(0, len(ints), 8):
            out.append(" " + " ".join(ints[k:k + 8]))
    out.append("End")
    return "\n".join(out) + "\n"


class LpParseError(ValueError):
    pass


def _parse_linear(text: str, ids: dict, allow_constant=False):
    text = text.strip()
    if text and text[0] not in "+-":
        text = "+ " + text
    terms, constant = [], Fraction(0)
    pos = 0
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m:
            raise LpParseError(f"cannot parse expression near {text[pos:]!r}")
        if m.group(1):
            sign, num, name = m.group(1), m.group(2), m.group(3)
            if name not in ids:
                raise LpParseError(f"unknown variable {name!r}")
            coef = Fraction(num) * (-1 if sign == "-" else 1)
            terms.append((ids[name], coef))
        else:
            if not allow_constant:
                raise LpParseError(f"unexpected constant in {text!r}")
            constant += Fraction(m.group(5)) * (-1 if m.group(4) == "-" else 1)
        pos = m.end()
        while pos < len(text) and text[pos] == " ":
            pos += 1
    return [(v, _narrow(c)) for v, c in terms], _narrow(constant)


def _narrow(f: Fraction):
    return f.numerator if f.denominator == 1 else f


def read_lp(text: str) -> MilpProblem:
    """Parse text written by :func:`export_lp` back into a problem."""
    lines = text.splitlines()
    name = "problem"
    sections: dict[str, list[str]] = {}
    current = None
    for line in lines:
        if line.startswith("\\ Problem: "):
            name = line[len("\\ Problem: "):]
            continue
        if not line.strip() or line.startswith("\\"):
            continue
        if not line.startswith(" "):
            current = line.strip()
            sections[current] = []
            continue
        if current is None:
            raise LpParseError("content before the first section")
        sections[current].append(line.strip())
    order = [s for s in ("Minimize", "Subject To", "Bounds", "Generals", "End") if s in sections]
    required = {"Minimize", "Subject To", "Bounds", "End"}
    if list(sections) != order or not required <= set(sections):
        raise LpParseError(f"unexpected section layout {list(sections)}")

    variables = []
    for line in sections["Bounds"]:
        m = re.fullmatch(r"(\S+) <= (\S+) <= (\S+)", line)
        if not m:
            raise LpParseError(f"bad bound line {line!r}")
        lo, vname, hi = m.groups()
        upper = None if hi == "+inf" else _narrow(Fraction(hi))
        variables.append([vname, _narrow(Fraction(lo)), upper])
    ids = {v[0]: k for k, v in enumerate(variables)}
    integral = set()
    for line in sections.get("Generals", []):
        for vname in line.split():
            if vname not in ids:
                raise LpParseError(f"unknown integer variable {vname!r}")
            integral.add(vname)
    var_objs = tuple(Variable(k, _from_lp_name(n), lo, hi, n in integral)
                     for k, (n, lo, hi) in enumerate(variables))

    (obj_line,) = sections["Minimize"]
    obj_terms, obj_const = _parse_linear(obj_line.split(":", 1)[1], ids, allow_constant=True)
    constraints = []
    for line in sections["Subject To"]:
        cname, body = line.split(":", 1)
        m = re.fullmatch(r"(.*) (<=|>=|=) (\S+)", body.strip())
        if not m:
            raise LpParseError(f"bad constraint line {line!r}")
        terms, _ = _parse_linear(m.group(1), ids)
        rel = {"<=": LE, ">=": GE, "=": EQ}[m.group(2)]
        rhs = _narrow(Fraction(m.group(3)))
        constraints.append(Constraint(LinExpr.of(terms, _narrow(-Fraction(rhs))), rel,
                                      _from_lp_name(cname)))
    return MilpProblem(var_objs, tuple(constraints), LinExpr.of(obj_terms, obj_const), name)
