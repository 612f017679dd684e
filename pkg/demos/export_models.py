"""Write the reference instance as AMPL model/data and as an LP file.

The LP file is read back and compared with the in-memory model.
Run: python demos/export_models.py [outdir]
"""
import sys
from pathlib import Path

from hybridplace.builder import build
from hybridplace.exporters import export_ampl, export_lp, read_lp
from hybridplace.netmodel import VariantFlags, default_params, reference_demand, reference_topology

out = Path(sys.argv[1] if len(sys.argv) > 1 else "export")
out.mkdir(exist_ok=True)
topo, params, demand = reference_topology("fig6a"), default_params(), reference_demand("fig7_equal")

mod, dat = export_ampl(topo, params, demand, VariantFlags(inter_primary_redirect=False))
(out / "placement.mod").write_text(mod)
(out / "placement.dat").write_text(dat)

problem, _ = build(topo, params, demand)
lp = export_lp(problem)
(out / "placement.lp").write_text(lp)
assert read_lp(lp) == problem
print(f"wrote {len(problem.variables)} variables, {len(problem.constraints)} constraints to {out}/")
