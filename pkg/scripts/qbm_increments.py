"""Dependence of q-Brownian increments: E[(X2-X1)^a X1^b] - E[(X2-X1)^a] E[X1^b] across q.

The a = b = 2 statistic vanishes identically in q; a = 4, b = 2 does not.
"""
from math import comb

import click
import numpy as np

from qgauss.sampler import fock_time_ordered_moment, sample_paths


def increment_moment(q, a, b):
    return sum(comb(a, k) * (-1) ** (a - k) * fock_time_ordered_moment("bm", q, [1, 2], [a - k + b, k])
               for k in range(a + 1))


@click.command()
@click.option("--paths", "n_paths", default=100_000)
@click.option("--seed", default=21)
def main(n_paths, seed):
    click.echo("q      a b  exact gap  mc gap     z(gap)  z(mc-exact)")
    for q in (-0.8, -0.5, 0.0, 0.5, 0.8):
        x1, x2 = sample_paths("bm", q, [1, 2], n_paths, seed).paths.T
        inc = x2 - x1
        for a, b in ((2, 2), (4, 2)):
            exact = increment_moment(q, a, b) - increment_moment(q, a, 0) * increment_moment(q, 0, b)
            A, B = inc**a, x1**b
            gap = np.mean(A * B) - np.mean(A) * np.mean(B)
            infl = A * B - A * B.mean() - A.mean() * B
            se = infl.std(ddof=1) / np.sqrt(n_paths)
            click.echo(f"{q:+.1f}  {a} {b}  {exact:+.6f}  {gap:+.6f}  {gap / se:+7.2f}  {(gap - exact) / se:+7.2f}")


if __name__ == "__main__":
    main()
