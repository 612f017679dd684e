"""Hourly cost at one primary site as its audience grows past what the site can host.

Below 240,000 clients (800 servers x 300 clients) everything is served
locally. Past that point the overflow goes to the public cloud, and each
extra client also pays the cloud transfer price, so the curve turns sharply.
Run: python demos/cloud_bursting_curve.py
"""
from hybridplace.scenarios import run_figure8, to_csv

sweep = run_figure8((0, 400_000), 40_000)
print(f"{'clients':>8} {'hybrid':>10} {'cloud only':>11} {'no cloud':>10}")
for row in sweep:
    t = row.totals
    no_cloud = "-" if t["no_cloud"] is None else t["no_cloud"]
    print(f"{row.x:>8} {t['hybrid']:>10} {t['cloud_only']:>11} {no_cloud:>10}")

with open("figure8.csv", "w") as fh:
    fh.write(to_csv(sweep))
