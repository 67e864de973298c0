"""Config-driven experiment runner.

Each subcommand runs one experiment family, writes CSV tables plus a JSON
manifest (config echo, library version, wall time), and exits 0 exactly
when every configured assertion holds.  Exit code 2 flags configuration
or validation errors, exit 1 flags assertion failures.  All orderings are
fixed and worker counts never change the summation order, so a rerun with
the same config yields byte-identical CSVs.
"""

from __future__ import annotations

import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click
import numpy as np

from . import __version__
from .arcs import verify_disjointness
from .gauss_sums import averaged_gauss_sum, gauss_bound, gauss_sum_all_b
from .multiplier import dft_coefficients, fourier_coeff_closed_form, nu_j_grid_values
from .quadform import QuadraticForm
from .radon_op import PeriodicGrid, apply_spectral_periodic, cyclic_convolve_direct
from .representations import asymptotic_fit, error_term_constant, rep_table
from .sharpness import (
    SharpnessConfig,
    condition_i_probe,
    condition_ii_probe,
    theorem_region,
)
from .theta import theta_direct, theta_via_inversion

EXIT_FAIL = 1
EXIT_INVALID = 2


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, float):
        return format(x, ".17e")
    return str(x)


def _write_csv(path: Path, header: list[str], rows: list[tuple]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _load_config(config_path, defaults: dict) -> dict:
    params = dict(defaults)
    if config_path is not None:
        try:
            loaded = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            click.echo(f"config error: {exc}", err=True)
            raise SystemExit(EXIT_INVALID)
        if not isinstance(loaded, dict):
            click.echo("config error: top level must be a JSON object", err=True)
            raise SystemExit(EXIT_INVALID)
        unknown = sorted(set(loaded) - set(defaults))
        if unknown:
            click.echo(f"config error: unknown keys {unknown}", err=True)
            raise SystemExit(EXIT_INVALID)
        params.update(loaded)
    return params


def _form_of(matrix) -> QuadraticForm:
    try:
        return QuadraticForm(tuple(tuple(int(v) for v in row) for row in matrix))
    except (TypeError, ValueError) as exc:
        click.echo(f"form error: {exc}", err=True)
        raise SystemExit(EXIT_INVALID)


def _pmap(fn, items, threads: int):
    """Ordered map; the worker count never changes result order or values."""
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _finish(
    out: Path, name: str, params: dict, t0: float, passed: bool, summary: str
) -> None:
    manifest = {
        "experiment": name,
        "config": params,
        "version": __version__,
        "wall_time_s": time.time() - t0,
        "passed": passed,
    }
    (out / f"{name}_manifest.json").write_text(
        json.dumps(manifest, indent=2, default=str) + "\n", encoding="utf-8"
    )
    click.echo(f"{name}: {summary} -> {'PASS' if passed else 'FAIL'}")
    if not passed:
        raise SystemExit(EXIT_FAIL)


def _common(fn):
    fn = click.option("--config", type=click.Path(), default=None)(fn)
    fn = click.option("--out", type=click.Path(), default=".")(fn)
    fn = click.option("--threads", type=int, default=1)(fn)
    fn = click.option("--tolerance-scale", type=float, default=1.0)(fn)
    return fn


@click.group()
def main() -> None:
    """Experiment runner for the lattice Radon-transform library."""


@main.command()
@_common
def gauss(config, out, threads, tolerance_scale) -> None:
    """Gauss-sum cancellation bound and averaged closed form."""
    params = _load_config(
        config,
        {
            "forms": [[[2]], [[2, 0], [0, 2]]],
            "q_max": 50,
            "avg_l": [1, 1],
            "rel_tol": 1e-9,
        },
    )
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    forms = [_form_of(m) for m in params["forms"]]
    rel_tol = params["rel_tol"] * tolerance_scale
    rows, passed = [], True

    def bound_rows(item):
        form, q = item
        res = []
        bound = gauss_bound(form, q)
        for a in range(1, q + 1):
            if math.gcd(a, q) != 1:
                continue
            peak = float(np.abs(gauss_sum_all_b(form, a, q)).max())
            res.append((form.dim, q, a, peak, bound, peak / bound))
        return res

    items = [(form, q) for form in forms for q in range(1, params["q_max"] + 1)]
    for chunk in _pmap(bound_rows, items, threads):
        rows.extend(chunk)
    passed &= all(row[5] <= 1.0 + 1e-12 for row in rows)
    _write_csv(
        out / "gauss_bounds.csv",
        ["k", "q", "a", "max_abs", "bound", "ratio"],
        rows,
    )

    avg_rows = []
    l1 = int(params["avg_l"][0])
    for form in forms:
        l2 = tuple([int(params["avg_l"][1])] * form.dim)
        for q in range(1, params["q_max"] + 1):
            direct, closed = averaged_gauss_sum(form, q, l1, l2)
            scale = max(abs(closed), 1.0)
            rel = abs(direct - closed) / scale
            size_bound = 2.0 * q ** (form.dim + 1)
            avg_rows.append(
                (form.dim, q, l1, l2[0], abs(direct), rel, size_bound,
                 abs(direct) / size_bound)
            )
            passed &= rel <= rel_tol and abs(direct) <= size_bound
    _write_csv(
        out / "gauss_averaged.csv",
        ["k", "q", "l1", "l2", "abs_value", "rel_err", "size_bound", "ratio"],
        avg_rows,
    )
    _finish(out, "gauss", params, t0,
            passed, f"{len(rows)} bound rows, {len(avg_rows)} averaged rows")


@main.command("theta-check")
@_common
def theta_check(config, out, threads, tolerance_scale) -> None:
    """Direct theta sums against the inversion identity at random arc points."""
    params = _load_config(
        config,
        {
            "form": [[2]],
            "n_points": 100,
            "q_max": 64,
            "seed": 1234,
            "abs_tol": 1e-9,
        },
    )
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    form = _form_of(params["form"])
    k = form.dim
    rng = np.random.default_rng(int(params["seed"]))
    points = []
    for _ in range(int(params["n_points"])):
        y = float(2.0 ** rng.uniform(-20.0, -1.0))
        q = int(rng.integers(1, params["q_max"] + 1))
        coprime = [a for a in range(1, q + 1) if math.gcd(a, q) == 1]
        a = int(coprime[rng.integers(0, len(coprime))])
        b = tuple(int(v) for v in rng.integers(1, q + 1, size=k))
        alpha = float((2.0 * rng.random() - 1.0) * min(y, 0.5 / (q * q)))
        beta = tuple(
            float((2.0 * rng.random() - 1.0) * min(math.sqrt(y), 0.5 / q))
            for _ in range(k)
        )
        theta = a / q + alpha
        phi = tuple(bj / q + be for bj, be in zip(b, beta))
        points.append((y, theta, phi, a, b, q))

    def check(point):
        y, theta, phi, a, b, q = point
        direct = theta_direct(form, y, theta, phi).value
        inv = theta_via_inversion(form, y, theta, phi, a, b, q).value
        return (y, theta, q, a, direct.real, direct.imag,
                inv.real, inv.imag, abs(direct - inv))

    rows = _pmap(check, points, threads)
    worst = max(row[-1] for row in rows)
    passed = worst <= params["abs_tol"] * tolerance_scale
    _write_csv(
        out / "theta_check.csv",
        ["y", "theta", "q", "a", "direct_re", "direct_im",
         "inversion_re", "inversion_im", "abs_diff"],
        rows,
    )
    _finish(out, "theta-check", params, t0, passed, f"max |diff| = {worst:.3e}")


@main.command()
@_common
def arcs(config, out, threads, tolerance_scale) -> None:
    """Exact disjointness of the arc dissection and the r-shell tiling."""
    params = _load_config(
        config,
        {
            "j_list": [21, 30, 40],
            "s_list": [0, 1, 2, 3, 4, 5, 6, 7, 8],
            "n_samples": 100000,
            "seed": 1234,
        },
    )
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    rows, passed = [], True
    for j in params["j_list"]:
        j = int(j)
        ok, _ = verify_disjointness("fixed_j", j=j)
        # negative control: arcs are separated by ~2^{j/2 - s} times their
        # width, so widening by 2^{j/2} must create an overlap whenever at
        # least two denominator classes exist (j//2 >= 11)
        wide_ok, _ = verify_disjointness("fixed_j", j=j, widen=2 ** (j // 2))
        rows.append(("fixed_j", j, ok, not wide_ok))
        passed &= ok and (not wide_ok or j // 2 < 11)
    for s in params["s_list"]:
        s = int(s)
        ok, _ = verify_disjointness("fixed_s", s=s)
        wide_ok, _ = verify_disjointness("fixed_s", s=s, widen=2 ** (s + 11))
        rows.append(("fixed_s", s, ok, not wide_ok))
        # s = 0 has the single fraction 1/1, so no overlap can be forced
        passed &= ok and (not wide_ok or s == 0)
    _write_csv(
        out / "arcs_disjointness.csv",
        ["mode", "index", "disjoint", "widened_control_violates"],
        rows,
    )

    rng = np.random.default_rng(int(params["seed"]))
    alphas = rng.uniform(1e-15, 0.5, size=int(params["n_samples"]))
    js = np.arange(0, 64)
    hits = (
        (alphas[:, None] > 2.0 ** -(js[None, :] + 1))
        & (alphas[:, None] <= 2.0 ** -js[None, :])
    ).sum(axis=1)
    tiling_ok = bool(np.all(hits == 1))
    passed &= tiling_ok
    _write_csv(
        out / "arcs_tiling.csv",
        ["n_samples", "violations"],
        [(int(params["n_samples"]), int(np.sum(hits != 1)))],
    )
    _finish(out, "arcs", params, t0, passed,
            f"{len(rows)} disjointness rows, tiling ok = {tiling_ok}")


@main.command()
@_common
def multiplier(config, out, threads, tolerance_scale) -> None:
    """Grid-DFT Fourier coefficients of the level-j multiplier piece
    against the closed form."""
    params = _load_config(
        config,
        {
            "form": [[2]],
            "lam": [0.6, 0.0],
            "j": 12,
            "n_theta": 16384,
            "n_phi": 128,
            "l1_max": 9,
            "l2_max": 3,
            "matched_tol": 1e-3,
            "unmatched_tol": 1e-6,
        },
    )
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    form = _form_of(params["form"])
    if form.dim != 1:
        click.echo("multiplier experiment supports k = 1 only", err=True)
        raise SystemExit(EXIT_INVALID)
    lam = complex(params["lam"][0], params["lam"][1])
    j = int(params["j"])
    rows, passed = [], True
    for n_theta in (int(params["n_theta"]) // 2, int(params["n_theta"])):
        values = nu_j_grid_values(form, lam, j, n_theta, int(params["n_phi"]))
        coeffs = dft_coefficients(
            values, int(params["l1_max"]), int(params["l2_max"])
        )
        for (l1, l2), est in sorted(coeffs.items()):
            closed = fourier_coeff_closed_form(form, lam, j, l1, l2)
            matched = l1 == -form(l2)
            diff = abs(est - closed)
            rows.append((n_theta, l1, l2[0], closed.real, closed.imag,
                         est.real, est.imag, diff, matched))
            if n_theta == int(params["n_theta"]):
                if matched:
                    passed &= diff <= params["matched_tol"] * tolerance_scale
                else:
                    passed &= abs(est) <= params["unmatched_tol"] * tolerance_scale
    _write_csv(
        out / "multiplier_coeffs.csv",
        ["n_theta", "l1", "l2", "closed_re", "closed_im",
         "grid_re", "grid_im", "abs_diff", "matched"],
        rows,
    )
    _finish(out, "multiplier", params, t0, passed, f"{len(rows)} coefficients")


@main.command("operator")
@_common
def operator_cmd(config, out, threads, tolerance_scale) -> None:
    """Spectral evaluation against the cyclic-convolution oracle on random data."""
    params = _load_config(
        config,
        {
            "cases": [
                {"form": [[2]], "n": 16, "m": 64},
                {"form": [[2, 0], [0, 2]], "n": 16, "m": 64},
            ],
            "lams": [[0.3, 0.0], [0.6, 0.2]],
            "seed": 1234,
            "abs_tol": 1e-10,
        },
    )
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    rows, passed = [], True
    rng = np.random.default_rng(int(params["seed"]))
    for case in params["cases"]:
        form = _form_of(case["form"])
        n, m = int(case["n"]), int(case["m"])
        shape = (n,) * form.dim + (m,)
        data = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        grid = PeriodicGrid(n, m, data)
        for lam_pair in params["lams"]:
            lam = complex(lam_pair[0], lam_pair[1])
            spec = apply_spectral_periodic(form, lam, grid, n // 2)
            oracle = cyclic_convolve_direct(form, lam, grid, n // 2)
            diff = float(np.abs(spec.values - oracle.values).max())
            rows.append((form.dim, n, m, lam.real, lam.imag, diff))
            passed &= diff <= params["abs_tol"] * tolerance_scale
    _write_csv(
        out / "operator_equivalence.csv",
        ["k", "n", "m", "lam_re", "lam_im", "max_abs_diff"],
        rows,
    )
    worst = max(row[-1] for row in rows)
    _finish(out, "operator", params, t0, passed, f"max |diff| = {worst:.3e}")


@main.command()
@_common
def representations(config, out, threads, tolerance_scale) -> None:
    """Cumulative representation counts against the c N^{k/2} asymptotic."""
    params = _load_config(
        config,
        {
            "cases": [
                {"form": [[2, 0], [0, 2]], "n_max": 100000,
                 "exp_range": [0.99, 1.01], "const_over_pi": [0.99, 1.01]},
                {"form": [[2, 0, 0, 0], [0, 2, 0, 0], [0, 0, 2, 0],
                          [0, 0, 0, 2]], "n_max": 10000,
                 "exp_range": [1.98, 2.02], "const_over_pi": None},
            ],
        },
    )
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    rows, passed = [], True
    for case in params["cases"]:
        form = _form_of(case["form"])
        table = rep_table(form, int(case["n_max"]))
        constant, exponent, max_rel = asymptotic_fit(table)
        err_const = error_term_constant(table, constant)
        lo, hi = case["exp_range"]
        ok = lo <= exponent <= hi
        if case.get("const_over_pi"):
            clo, chi = case["const_over_pi"]
            ok &= clo <= constant / math.pi <= chi
        rows.append((form.dim, int(case["n_max"]), constant, exponent,
                     constant / math.pi, max_rel, err_const, ok))
        passed &= ok
    _write_csv(
        out / "representations_fit.csv",
        ["k", "n_max", "constant", "exponent", "constant_over_pi",
         "max_rel_err", "error_term_constant", "pass"],
        rows,
    )
    _finish(out, "representations", params, t0, passed, f"{len(rows)} fits")


@main.command()
@_common
def sharpness(config, out, threads, tolerance_scale) -> None:
    """Necessity probes for both boundary conditions of the exponent region."""
    params = _load_config(
        config,
        {
            "form_ii": [[2, 0], [0, 2]],
            "lams": [0.15, 0.3, 0.45],
            "qs": [1.2, 1.6, 2.0],
            "t_max": 100000,
            "window_ii": 0.05,
            "form_i": [[2]],
            "cond_i": {"lam": 0.5, "p": 2.0, "q": 2.0,
                       "t_list": [256, 512, 1024, 2048, 4096]},
            "window_i": 0.07,
        },
    )
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    passed = True

    form2 = _form_of(params["form_ii"])
    t_max = int(params["t_max"])
    t_list = tuple(int(t_max * 2.0**-i) for i in range(6, -1, -1))
    table = rep_table(form2, t_list[-1])
    rows = []
    for lam in params["lams"]:
        for qq in params["qs"]:
            cfg = SharpnessConfig(form2, float(lam), p=2.0, q=float(qq),
                                  t_list=t_list)
            rep = condition_ii_probe(
                cfg, table=table,
                window=params["window_ii"] * tolerance_scale,
            )
            rows.append((float(lam), float(qq), rep.regime,
                         rep.fitted_exponent if rep.fitted_exponent is not None
                         else float("nan"),
                         rep.target if rep.target is not None else float("nan"),
                         rep.passed))
            passed &= rep.passed
    _write_csv(
        out / "sharpness_condition_ii.csv",
        ["lam", "q", "regime", "fitted", "target", "pass"],
        rows,
    )

    ci = params["cond_i"]
    form1 = _form_of(params["form_i"])
    cfg = SharpnessConfig(
        form1, float(ci["lam"]), p=float(ci["p"]), q=float(ci["q"]),
        t_list=tuple(int(t) for t in ci["t_list"]),
    )
    rep = condition_i_probe(cfg, window=params["window_i"] * tolerance_scale)
    passed &= rep.passed
    _write_csv(
        out / "sharpness_condition_i.csv",
        ["lam", "p", "q", "alpha", "fitted", "target",
         "min_pointwise_ratio", "pass"],
        [(cfg.lam, cfg.p, cfg.q, cfg.alpha, rep.fitted_exponent, rep.target,
          rep.details["min_pointwise_ratio"], rep.passed)],
    )

    region_rows = []
    for k, lam, p, q in [(2, 0.75, 2.0, 8.0 / 3.0), (1, 0.5, 2.0, 4.0),
                         (2, 0.5, 4.0, 1.5)]:
        r = theorem_region(k, lam, p, q)
        region_rows.append((k, lam, p, q, r.condition_i, r.condition_ii,
                            r.region, r.crossover_lambda))
    _write_csv(
        out / "sharpness_region.csv",
        ["k", "lam", "p", "q", "condition_i", "condition_ii",
         "region", "crossover_lambda"],
        region_rows,
    )
    _finish(out, "sharpness", params, t0, passed,
            f"{len(rows)} condition-(ii) probes, condition-(i) "
            f"fit {rep.fitted_exponent:.4f} vs {rep.target:.4f}")


if __name__ == "__main__":
    main()
