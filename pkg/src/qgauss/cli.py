"""Command-line front end: ``qgauss {verify,density,kernel,hyper,paths,moments,fermionic}``.

Exit codes: 0 success, 1 failed verification, 2 usage or configuration error.
A JSON file given with ``--config`` supplies per-command defaults; flags win.
"""
from __future__ import annotations

import csv
import json
import math
import sys
from contextlib import contextmanager

import click
import numpy as np

from . import kernels, processes, qhermite, sampler, verify as suites


def _parse_list(value, cast=float, name="list"):
    if value is None or isinstance(value, (list, tuple)):
        return value
    try:
        return [cast(v) for v in str(value).replace(" ", "").split(",") if v]
    except ValueError:
        raise click.BadParameter(f"could not parse {name} {value!r}") from None


def _load_config(ctx, param, path):
    if path is None:
        return None
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise click.BadParameter(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise click.BadParameter("config must be a JSON object")
    ctx.default_map = {**(ctx.default_map or {}), **data}
    return path


@contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _covariance(kind, cov_grid):
    if cov_grid:
        try:
            cov = processes.read_covariance_grid(cov_grid)
        except (OSError, ValueError) as exc:
            raise click.BadParameter(f"malformed covariance grid {cov_grid}: {exc}", param_hint="--cov-grid") from None
        return cov
    return processes.CovarianceSpec.builtin(kind)


def _check_times(cov, times):
    if times != sorted(times):
        raise click.BadParameter("times must be sorted", param_hint="--times")
    lo, hi = cov.domain
    if any(not lo <= t <= hi for t in times):
        raise click.BadParameter(f"times outside the domain [{lo}, {hi}] of {cov.kind}", param_hint="--times")


def _q(q, allow_fermionic=False):
    if allow_fermionic and q == -1:
        return -1.0
    if not -1 < q < 1:
        raise click.BadParameter("q must lie in (-1, 1)" + (" or equal -1" if allow_fermionic else ""), param_hint="--q")
    return q


q_option = click.option("--q", type=float, default=0.0, show_default=True, help="deformation parameter")
kind_option = click.option("--kind", type=click.Choice(processes.BUILTINS), default="bm", show_default=True)
grid_option = click.option("--cov-grid", type=click.Path(), default=None,
                           help="CSV of sampled covariance rows t_i,t_j,c (overrides --kind)")
times_option = click.option("--times", default="0.5,1,2", show_default=True, help="comma-separated sorted times")
out_option = click.option("--out", default="-", show_default=True, help="output path ('-' for stdout)")
seed_option = click.option("--seed", type=int, default=0, show_default=True)
paths_option = click.option("--paths", "n_paths", type=int, default=10000, show_default=True)
quad_option = click.option("--quad-points", type=int, default=200, show_default=True)


@click.group()
@click.option("--config", type=click.Path(), callback=_load_config, is_eager=True, expose_value=False,
              help="JSON file with default flag values per command")
def main():
    """Numerics for q-Gaussian processes."""


@main.command()
@kind_option
@grid_option
@times_option
@click.option("--expect-markov", is_flag=True, help="also require the given covariance to be Markov on --times")
@click.option("--d", "d", type=int, default=2, show_default=True, help="one-particle dimension for the Fock checks")
@click.option("--N", "N", type=int, default=4, show_default=True, help="Fock truncation degree for the Fock checks")
@click.option("--tol", type=float, default=1e-10, show_default=True)
@click.option("--suite", "suite_names", multiple=True, type=click.Choice(list(suites.SUITES)),
              help="restrict to these suites (default: all)")
def verify(kind, cov_grid, times, expect_markov, d, N, tol, suite_names):
    """Run the invariant suites and print a pass/fail table."""
    if not 1 <= d <= 4 or not 2 <= N <= 10:
        raise click.BadParameter("need 1 <= d <= 4 and 2 <= N <= 10")
    results = []
    for name in suite_names or suites.SUITES:
        suite = suites.SUITES[name]
        results.extend(suite(tol, d=d, N=N) if name == "fock" else suite(tol))
    if expect_markov:
        cov = _covariance(kind, cov_grid)
        grid = _parse_list(times, name="times") if not cov_grid else sorted({t for t in _grid_times(cov_grid)})
        if len(grid) < 3:
            raise click.BadParameter("the Markov check needs at least three times", param_hint="--times")
        check = processes.is_markov(cov, grid, tol=max(tol, 1e-9))
        results.append((f"input covariance ({cov.kind}) is Markov", check.ok,
                        f"violation {check.violation:.3e} at {check.worst}"))
    width = max(len(r[0]) for r in results)
    for name, ok, detail in results:
        click.echo(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {detail}")
    failed = sum(1 for r in results if not r[1])
    click.echo(f"{len(results) - failed}/{len(results)} checks passed")
    sys.exit(1 if failed else 0)


def _grid_times(path):
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                yield float(row[0])
                yield float(row[1])
            except (ValueError, IndexError):
                continue


@main.command()
@q_option
@click.option("--points", type=int, default=401, show_default=True)
@out_option
def density(q, points, out):
    """Tabulate the density of nu_q: columns x, density."""
    q = _q(q)
    e = qhermite.edge(q)
    x = np.linspace(-e, e, points)
    dens = qhermite.nu_density(q, x)
    with _output(out) as fh:
        fh.write(f"# qgauss density v1 q={q}\n")
        w = csv.writer(fh)
        w.writerow(["x", "density"])
        for a, b in zip(x, dens):
            w.writerow([repr(float(a)), repr(float(b))])


@main.command()
@q_option
@kind_option
@grid_option
@click.option("--s", "s", type=float, default=1.0, show_default=True)
@click.option("--t", "t", type=float, default=2.0, show_default=True)
@click.option("--points", type=int, default=41, show_default=True, help="grid points per axis")
@out_option
def kernel(q, kind, cov_grid, s, t, points, out):
    """Tabulate the transition density k_{s,t}(x, dy)/dy: columns x, y, density."""
    q = _q(q)
    cov = _covariance(kind, cov_grid)
    _check_times(cov, [s, t])
    try:
        K = kernels.TransitionKernel.from_covariance(q, cov, s, t)
    except ValueError as exc:
        raise click.BadParameter(str(exc)) from None
    if K.degenerate:
        raise click.BadParameter("lambda_(s,t) = +-1: the kernel is deterministic, nothing to tabulate")
    xs = np.linspace(*K.source_support, points)
    ys = np.linspace(*K.target_support, points)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    D = K.density(X, Y)
    with _output(out) as fh:
        fh.write(f"# qgauss kernel v1 q={q} kind={cov.kind} s={s} t={t}\n")
        w = csv.writer(fh)
        w.writerow(["x", "y", "density"])
        for a, b, c in zip(X.ravel(), Y.ravel(), D.ravel()):
            w.writerow([repr(float(a)), repr(float(b)), repr(float(c))])


@main.command()
@q_option
@click.option("--tmin", type=float, default=1e-3, show_default=True)
@click.option("--tmax", type=float, default=1e-1, show_default=True)
@click.option("--n", "n", type=int, default=9, show_default=True)
@out_option
def hyper(q, tmin, tmax, n, out):
    """alpha(t, q) over a log grid: columns t, alpha, alpha^(1/2); prints the log-log slope."""
    q = _q(q)
    if not 0 < tmin < tmax:
        raise click.BadParameter("need 0 < tmin < tmax")
    slope, ts, a = kernels.alpha_slope(q, tmin, tmax, n)
    with _output(out) as fh:
        fh.write(f"# qgauss hyper v1 q={q} slope={slope!r}\n")
        w = csv.writer(fh)
        w.writerow(["t", "alpha", "alpha_sqrt"])
        for tt, aa in zip(ts, a):
            w.writerow([repr(float(tt)), repr(float(aa)), repr(math.sqrt(aa))])
    click.echo(f"slope of log alpha^(1/2) vs log t: {slope:.4f}", err=True)


@main.command()
@q_option
@kind_option
@grid_option
@times_option
@paths_option
@seed_option
@out_option
def paths(q, kind, cov_grid, times, n_paths, seed, out):
    """Sample paths of the classical version: header t_0..t_{n-1}, one row per path.
    With --q -1 the two-state fermionic chain is sampled."""
    q = _q(q, allow_fermionic=True)
    cov = _covariance(kind, cov_grid)
    times = _parse_list(times, name="times")
    _check_times(cov, times)
    try:
        if q == -1:
            ens = sampler.sample_fermionic_paths(cov, times, n_paths, seed)
        else:
            ens = sampler.sample_paths(cov, q, times, n_paths, seed)
    except ValueError as exc:
        raise click.BadParameter(str(exc)) from None
    with _output(out) as fh:
        ens.to_csv(fh)


@main.command()
@q_option
@kind_option
@grid_option
@times_option
@click.option("--exponents", default="1,2,1", show_default=True, help="comma-separated monomial exponents")
@paths_option
@seed_option
@quad_option
@click.option("--N", "N", type=int, default=10, show_default=True, help="Fock truncation; must cover the total degree")
@click.option("--tol", type=float, default=1e-6, show_default=True, help="allowed |Fock - quadrature|")
@out_option
def moments(q, kind, cov_grid, times, exponents, n_paths, seed, quad_points, N, tol, out):
    """Three-way time-ordered moment report (Fock, kernel quadrature, Monte Carlo) as JSON.
    Exits 1 if Fock and quadrature differ by more than --tol or Monte Carlo is off by more
    than 4 standard errors."""
    q = _q(q)
    cov = _covariance(kind, cov_grid)
    times = _parse_list(times, name="times")
    exps = _parse_list(exponents, cast=int, name="exponents")
    _check_times(cov, times)
    if len(exps) != len(times):
        raise click.BadParameter("need one exponent per time", param_hint="--exponents")
    if sum(exps) > N:
        raise click.BadParameter(f"total degree {sum(exps)} exceeds --N {N}")
    try:
        rep = sampler.classical_version_report(cov, q, times, exps, n_paths, seed, m=quad_points)
    except ValueError as exc:
        raise click.BadParameter(str(exc)) from None
    with _output(out) as fh:
        fh.write(rep.to_json() + "\n")
    z = rep.z_score
    if abs(rep.fock_minus_quadrature) > tol or (not math.isnan(z) and abs(z) > 4):
        sys.exit(1)


@main.command()
@kind_option
@click.option("--s", "s", type=float, default=0.25, show_default=True)
@click.option("--t", "t", type=float, default=0.75, show_default=True)
@out_option
def fermionic(kind, s, t, out):
    """Two-state q = -1 transition table: columns from, to, probability."""
    cov = processes.CovarianceSpec.builtin(kind)
    _check_times(cov, [s, t])
    try:
        K = kernels.fermionic_kernel(cov, s, t)
    except ValueError as exc:
        raise click.BadParameter(str(exc)) from None
    with _output(out) as fh:
        fh.write(f"# qgauss fermionic v1 kind={kind} s={s} t={t}\n")
        w = csv.writer(fh)
        w.writerow(["from", "to", "probability"])
        for i, a in enumerate(K.source_states):
            for j, b in enumerate(K.target_states):
                w.writerow([repr(a), repr(b), repr(float(K.matrix[i, j]))])


if __name__ == "__main__":
    main()
