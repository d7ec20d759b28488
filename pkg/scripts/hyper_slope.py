"""Log-log slope of alpha(t, q)^(1/2) against t over a sweep of q and time windows.

    python3 scripts/hyper_slope.py --out hyper_slopes.csv
"""
import csv
import sys
from dataclasses import dataclass, field

import click

from qgauss.kernels import alpha_slope


@dataclass
class Config:
    qs: tuple = (-0.9, -0.8, -0.5, -0.3, 0.0, 0.3, 0.5, 0.8, 0.9)
    windows: list = field(default_factory=lambda: [(1e-3, 1e-1), (1e-4, 1e-2), (1e-6, 1e-4)])
    points: int = 9


@click.command()
@click.option("--out", default="-", help="CSV path, '-' for stdout")
def main(out):
    cfg = Config()
    fh = sys.stdout if out == "-" else open(out, "w", newline="")
    w = csv.writer(fh)
    w.writerow(["q", "tmin", "tmax", "slope"])
    for q in cfg.qs:
        for tmin, tmax in cfg.windows:
            slope, _, _ = alpha_slope(q, tmin, tmax, cfg.points)
            w.writerow([q, tmin, tmax, f"{slope:.4f}"])
    if fh is not sys.stdout:
        fh.close()


if __name__ == "__main__":
    main()
