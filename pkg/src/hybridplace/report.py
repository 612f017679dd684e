"""Solution reports in JSON, CSV and plain text."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass
from decimal import Decimal
from fractions import Fraction

from .builder import TERMS, Placement
from .config import Instance, instance_hash
from .netmodel import MILLI, to_cents, to_usd
from .solver import SolverConfig, SolveStats

try:
    from importlib.metadata import version as _version
    VERSION = _version("artifact")
except Exception:  # not installed
    VERSION = "0.1.0"

TERM_LABELS = {
    "A": "cloud servers",
    "B": "primary servers",
    "C": "secondary servers",
    "D": "secondary-to-primary transfer",
    "E": "cloud transfer",
    "F": "inter-primary transfer",
}


@dataclass
class RunReport:
    instance_sha256: str
    placement: Placement
    stats: SolveStats
    solver_config: SolverConfig
    version: str = VERSION

    @classmethod
    def create(cls, instance: Instance, placement, stats, solver_config) -> "RunReport":
        return cls(instance_hash(instance), placement, stats, solver_config)

    @property
    def breakdown(self) -> dict:
        return dict(self.placement.breakdown)

    @property
    def total(self) -> int:
        """Milli-cents per hour; always the sum of the breakdown."""
        return sum(self.breakdown[t] for t in TERMS)

    def variables(self) -> list[tuple[str, int]]:
        p = self.placement
        rows = [("n_a", p.n_a)]
        rows += [(f"n_p[{i + 1}]", v) for i, v in enumerate(p.n_p)]
        rows += [(f"n_s[{i + 1},{j + 1}]", v) for i, r in enumerate(p.n_s) for j, v in enumerate(r)]
        rows += [(f"S_a[{i + 1}]", v) for i, v in enumerate(p.S_a)]
        rows += [(f"S_p[{i + 1}]", v) for i, v in enumerate(p.S_p)]
        rows += [(f"S_s[{i + 1},{j + 1}]", v) for i, r in enumerate(p.S_s) for j, v in enumerate(r)]
        rows += [(f"F_pp[{i + 1},{j + 1}]", v) for i, r in enumerate(p.F_pp) for j, v in enumerate(r)
                 if i != j]
        return rows

    def to_dict(self) -> dict:
        stats = asdict(self.stats)
        for key in ("best_bound", "incumbent"):  # objective values, reported in cents
            if stats[key] is not None:
                stats[key] = str(Fraction(stats[key]) / MILLI)
        return {
            "instance_sha256": self.instance_sha256,
            "version": self.version,
            "total_cents_per_h": str(to_cents(self.total)),
            "total_usd_per_h": str(to_usd(self.total)),
            "breakdown_cents_per_h": {t: str(to_cents(self.breakdown[t])) for t in TERMS},
            "variables": dict(self.variables()),
            "stats": stats,
            "solver_config": asdict(self.solver_config),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["variable", "value"])
        w.writerows(self.variables())
        return buf.getvalue()

    def to_text(self) -> str:
        lines = [f"Total cost: {to_usd(self.total):.2f} USD/h", ""]
        for t in TERMS:
            lines.append(f"  {t} {TERM_LABELS[t]:<30} {to_usd(self.breakdown[t]):>14.2f}")
        lines.append("")
        lines += [f"  {name:<12} {value}" for name, value in self.variables() if value]
        lines.append("")
        s = self.stats
        lines.append(f"nodes {s.nodes}, LP iterations {s.lp_iterations}, "
                     f"{'optimal' if s.proven_optimal else 'not proven optimal'}, {s.wall_time:.3f} s")
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        return {"json": self.to_json, "csv": self.to_csv, "text": self.to_text}[fmt]()


def usd(millicents) -> str:
    return f"{to_usd(millicents):.2f}"


def pct(fraction: Decimal) -> str:
    return f"{fraction * 100:.2f}%"
