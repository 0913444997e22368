"""Command-line front end: ``polyfalconer {norm,gen,km,build,report}``.

Exit codes: 0 success, 2 invalid norm, 3 sampling exhausted or parameter
collision, 4 budget exceeded, 5 I/O error, 6 schedule infeasible.
"""
from __future__ import annotations

import functools
import time
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

import click

from . import errors
from .cantor import THEOREM1, THEOREM4, build_stages, dimension_estimates, make_schedule
from .dioph import GammaVector, km_margin_curve
from .distset import c0_bound, cover_distance_set, decay_holds, decay_report
from .exact import Budget, format_rational, parse_rational
from .polynorm import PolygonalNorm, default_slopes, from_slopes, normalize_slopes, parse_slopes, x_radius_bound
from .reports import aggregate, dimension_csv, write_json, write_manifest, write_text
from .sepset import PowerSpec, build_power_set, certify, default_exponents, sample_good_set

EXIT_CODES = [
    (errors.DuplicateSlope, 2),
    (errors.DegenerateBall, 2),
    (errors.ExhaustedTries, 3),
    (errors.ParameterCollision, 3),
    (errors.RepresentationCollision, 3),
    (errors.BudgetExceeded, 4),
    (OSError, 5),
    (errors.ScheduleInfeasible, 6),
    (errors.NonMonotone, 6),
]


class RationalType(click.ParamType):
    name = "p/q"

    def convert(self, value, param, ctx):
        if isinstance(value, Fraction):
            return value
        try:
            return parse_rational(value)
        except ValueError as exc:
            self.fail(str(exc), param, ctx)


class IntListType(click.ParamType):
    name = "i,j,..."

    def convert(self, value, param, ctx):
        if isinstance(value, list):
            return value
        try:
            return [int(t) for t in str(value).split(",") if t.strip()]
        except ValueError:
            self.fail(f"not a comma-separated integer list: {value!r}", param, ctx)


class RationalListType(click.ParamType):
    name = "p/q,..."

    def convert(self, value, param, ctx):
        if isinstance(value, list):
            return value
        try:
            return [parse_rational(t) for t in str(value).split(",") if t.strip()]
        except ValueError as exc:
            self.fail(str(exc), param, ctx)


RATIONAL = RationalType()
INTS = IntListType()
RATIONALS = RationalListType()


class _Group(click.Group):
    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except tuple(cls for cls, _ in EXIT_CODES) as exc:
            code = next(c for cls, c in EXIT_CODES if isinstance(exc, cls))
            click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
            ctx.exit(code)


class Run:
    """Shared per-invocation settings and the files written so far."""

    def __init__(self, seed, threads, budget, out, timing):
        self.seed = seed
        self.threads = threads
        self.budget = budget
        self.out = Path(out)
        self.timing = timing
        self.started = time.perf_counter()
        self.files: list[Path] = []

    def json(self, name: str, doc) -> Path:
        p = write_json(self.out / name, doc)
        self.files.append(p)
        return p

    def text(self, name: str, text: str) -> Path:
        p = write_text(self.out / name, text)
        self.files.append(p)
        return p

    def manifest(self, command: str, config: dict) -> Path:
        config = dict(config, threads=self.threads, budget=vars(self.budget))
        wall = time.perf_counter() - self.started if self.timing else None
        return write_manifest(self.out, command, _jsonable(config), self.seed, self.files, wall)


_GLOBAL_OPTIONS = [
    click.option("--seed", type=int, default=None, help="Seed for every random choice."),
    click.option("--threads", type=int, default=None, help="Worker cap (recorded; enumeration is vectorized in-process)."),
    click.option("--budget-points", type=int, default=None),
    click.option("--budget-values", type=int, default=None),
    click.option("--budget-km", type=int, default=None),
    click.option("--out", type=click.Path(file_okay=False), default=None),
    click.option("--timing/--no-timing", default=None, help="Record wall time in the manifest (breaks byte-identity)."),
]


def run_options(fn):
    """Accept the global flags after the subcommand too; later values win."""

    @functools.wraps(fn)
    def wrapper(*args, seed, threads, budget_points, budget_values, budget_km, out, timing, **kwargs):
        run = click.get_current_context().find_object(Run)
        if seed is not None:
            run.seed = seed
        if threads is not None:
            run.threads = threads
        if budget_points is not None:
            run.budget = replace(run.budget, points=budget_points)
        if budget_values is not None:
            run.budget = replace(run.budget, values=budget_values)
        if budget_km is not None:
            run.budget = replace(run.budget, km_vectors=budget_km)
        if out is not None:
            run.out = Path(out)
        if timing is not None:
            run.timing = timing
        return fn(run, *args, **kwargs)

    for opt in reversed(_GLOBAL_OPTIONS):
        wrapper = opt(wrapper)
    return wrapper


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _load_norm(slopes: str | None, norm_file: str | None, K: int | None) -> PolygonalNorm:
    if norm_file:
        import json

        return PolygonalNorm.from_json(json.loads(Path(norm_file).read_text()))
    if slopes:
        return from_slopes(parse_slopes(slopes))
    if K is None:
        raise click.UsageError("give --slopes, --norm or --K")
    return from_slopes(default_slopes(K))


@click.group(cls=_Group)
@click.option("--seed", type=int, default=7, show_default=True, help="Seed for every random choice.")
@click.option("--threads", type=int, default=1, show_default=True, help="Worker cap (recorded; enumeration is vectorized in-process).")
@click.option("--budget-points", type=int, default=1 << 20, show_default=True)
@click.option("--budget-values", type=int, default=1 << 26, show_default=True)
@click.option("--budget-km", type=int, default=1 << 24, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), default="out", show_default=True)
@click.option("--timing/--no-timing", default=False, help="Record wall time in the manifest (breaks byte-identity).")
@click.pass_context
def main(ctx, seed, threads, budget_points, budget_values, budget_km, out, timing):
    """Exact finite-scale checks for Cantor-type sets under polygonal norms."""
    ctx.obj = Run(seed, threads, Budget(budget_points, budget_values, budget_km), out, timing)


@main.command("norm")
@click.option("--slopes", required=True, help="Comma-separated slopes, e.g. 0,1,inf,13/8.")
@click.option("--normalize", "norm_idx", type=INTS, default=None, help="Indices i1,i2,i3 sent to 0,1,inf.")
@run_options
def cmd_norm(run: Run, slopes, norm_idx):
    """Build a polygonal norm from side slopes."""
    sl = parse_slopes(slopes)
    if norm_idx is not None:
        if len(norm_idx) != 3:
            raise click.UsageError("--normalize takes exactly three indices")
        sl = normalize_slopes(sl, *norm_idx)
    norm = from_slopes(sl)
    c0 = c0_bound(norm)
    doc = norm.to_json()
    doc["slopes"] = [str(s) for s in sl]
    doc["c0_bound"] = format_rational(c0)
    run.json("norm.json", doc)
    click.echo(f"K={norm.K} slopes={','.join(str(s) for s in sl)}")
    click.echo(f"c0 <= {format_rational(c0)} (~{float(c0):.10f}); r = {format_rational(x_radius_bound(norm))}")
    run.manifest("norm", {"slopes": slopes, "normalize": norm_idx})


@main.group("gen")
def cmd_gen():
    """Generate and certify a separated set."""


def _emit_set(run: Run, A, eps):
    alpha, beta = default_exponents(A, eps)
    rep = certify(A, alpha, beta)
    run.json("set.json", A.to_json())
    run.text("points.csv", A.points_csv())
    run.json("cert.json", rep.to_json())
    click.echo(f"n={A.n} proj_counts={list(A.proj_counts)} min_distance={format_rational(A.min_distance)}")
    click.echo(f"C={float(rep.C):.6f} t={float(rep.t):.6f} (alpha={alpha}, beta={beta})")


@cmd_gen.command("lattice")
@click.option("--K", "K", type=int, required=True)
@click.option("--N", "N", type=int, required=True)
@click.option("--t", "t_target", type=RATIONAL, default=Fraction(0), show_default=True)
@click.option("--max-tries", type=int, default=100, show_default=True)
@click.option("--slopes", default=None)
@click.option("--norm", "norm_file", type=click.Path(dir_okay=False), default=None)
@run_options
def cmd_gen_lattice(run: Run, K, N, t_target, max_tries, slopes, norm_file):
    """Lattice set with rejection-sampled parameters u."""
    norm = _load_norm(slopes, norm_file, K)
    _, A = sample_good_set(norm, K, N, t_target, max_tries, run.seed, budget=run.budget)
    _emit_set(run, A, None)
    run.manifest("gen", {"kind": "lattice", "K": K, "N": N, "t": t_target, "max_tries": max_tries,
                         "norm": norm.to_json()})


@cmd_gen.command("power")
@click.option("--gamma", type=RATIONALS, required=True)
@click.option("--L", "L", type=int, required=True)
@click.option("--N", "N", type=int, required=True)
@click.option("--eps", type=RATIONAL, default=None)
@run_options
def cmd_gen_power(run: Run, gamma, L, N, eps):
    """Power set built from the Diophantine vector gamma."""
    A = build_power_set(PowerSpec(len(gamma), L, N, tuple(gamma)), run.budget)
    _emit_set(run, A, eps)
    run.manifest("gen", {"kind": "power", "gamma": gamma, "L": L, "N": N, "eps": eps})


@main.command("km")
@click.option("--gamma", type=RATIONALS, required=True)
@click.option("--L", "L", type=int, required=True)
@click.option("--bounds", type=INTS, required=True)
@click.option("--eps", type=RATIONAL, default=None, help="Defaults to 1/L.")
@run_options
def cmd_km(run: Run, gamma, L, bounds, eps):
    """Finite-scale margins of power sums in gamma."""
    reports = km_margin_curve(GammaVector(tuple(gamma)), L, bounds, eps, run.budget)
    passed = all(r.passed for r in reports)
    run.json("km.json", {"gamma": [format_rational(g) for g in gamma], "passed": passed,
                         "reports": [r.to_json() for r in reports]})
    for r in reports:
        flag = "pass" if r.passed else "FAIL"
        click.echo(f"B={r.coeff_bound} margin={format_rational(r.margin)} rhs={format_rational(r.rhs)} "
                   f"witness={list(r.witness)} {flag}")
    run.manifest("km", {"gamma": gamma, "L": L, "bounds": bounds, "eps": eps})


@main.command("build")
@click.option("--mode", type=click.Choice([THEOREM1, THEOREM4]), default=THEOREM1, show_default=True)
@click.option("--K", "K", type=int, default=None, help="Number of side pairs (theorem1).")
@click.option("--N", "N", type=int, default=2, show_default=True)
@click.option("--depth", type=int, default=2, show_default=True)
@click.option("--c", "c", type=RATIONAL, default=None, help="Contraction constant; chosen automatically if absent.")
@click.option("--t", "t_target", type=RATIONAL, default=Fraction(0), show_default=True)
@click.option("--max-tries", type=int, default=100, show_default=True)
@click.option("--growing/--constant", default=False, help="theorem1: level j uses N = 2^j instead of a fixed N.")
@click.option("--slopes", default=None)
@click.option("--norm", "norm_file", type=click.Path(dir_okay=False), default=None)
@click.option("--gamma", type=RATIONALS, default=None, help="theorem4: gamma_1,...,gamma_d.")
@click.option("--L", "L", type=int, default=2, show_default=True)
@run_options
def cmd_build(run: Run, mode, K, N, depth, c, t_target, max_tries, growing, slopes, norm_file, gamma, L):
    """Iterate the construction, cover its distance sets and report the decay."""
    if mode == THEOREM4:
        if not gamma:
            raise click.UsageError("theorem4 mode needs --gamma")
        spec = PowerSpec(len(gamma), L, N, tuple(gamma))
        norm = from_slopes(spec.slopes())
        K = norm.K
        gens = [build_power_set(spec, run.budget)] * depth if depth else []
    else:
        if K is None and not (slopes or norm_file):
            K = 4
        norm = _load_norm(slopes, norm_file, K)
        K = norm.K
        gens = []
        cache = {}
        for j in range(1, depth + 1):
            Nj = 2 ** j if growing else N
            if Nj not in cache:
                seed = run.seed + (j - 1 if growing else 0)
                cache[Nj] = sample_good_set(norm, K, Nj, t_target, max_tries, seed, budget=run.budget)[1]
            gens.append(cache[Nj])

    config = {"mode": mode, "K": K, "N": N, "depth": depth, "c": c, "t": t_target,
              "growing": growing, "gamma": gamma, "L": L, "norm": norm.to_json()}
    decay_doc = {"mode": mode, "K": K, "c0_bound": format_rational(c0_bound(norm))}

    if depth == 0:
        from .cantor import zero_stage

        stage = zero_stage(K)
        cover = cover_distance_set(stage, norm)
        run.json("stage_0.json", stage.to_json())
        run.text("cover_0.csv", cover.to_csv())
        decay_doc.update(levels=[], dimension_estimates=[],
                         stage0_cover=[[format_rational(a), format_rational(b)] for a, b in cover.intervals])
        run.json("decay.json", decay_doc)
        click.echo(f"stage 0 cover = [0, {format_rational(cover.intervals[0][1])}]")
        run.manifest("build", config)
        return

    schedule = make_schedule(K, gens, c, mode)
    stages = build_stages(schedule, depth, run.budget)
    rows = decay_report(schedule, norm, depth, run.budget, stages)
    dims = dimension_estimates(schedule)

    run.json("schedule.json", schedule.to_json())
    for st in stages:
        run.json(f"stage_{st.j}.json", st.to_json())
        run.text(f"proj_sets_{st.j}.csv", st.proj_sets_csv())
    for st in stages[1:]:
        run.text(f"cover_{st.j}.csv", cover_distance_set(st, norm).to_csv())
    run.text("dimension.csv", dimension_csv(dims, schedule.target_dimension))
    ratio = schedule.c * schedule.C_bar
    decay_doc.update(
        c=format_rational(schedule.c),
        C_bar=format_rational(schedule.C_bar),
        ratio=format_rational(ratio),
        holds=decay_holds(rows, schedule),
        levels=[r.to_json() for r in rows],
        dimension_estimates=[{"j": j, "estimate": f"{e:.20f}"} for j, e in dims],
        target_dimension=format_rational(schedule.target_dimension),
    )
    if mode == THEOREM4:
        decay_doc["eps"] = [format_rational(lv.eps) for lv in schedule.levels]
    run.json("decay.json", decay_doc)

    click.echo(f"mode={mode} K={K} c={format_rational(schedule.c)} C_bar={format_rational(schedule.C_bar)} "
               f"c*C_bar={float(ratio):.6f}")
    for r, (_, e) in zip(rows, dims):
        click.echo(f"j={r.j} |cover|={float(r.total_length):.6e} bound={float(r.bound):.6e} "
                   f"intervals={r.intervals} dim_est={float(e):.6f}")
    run.manifest("build", config)


@main.command("report")
@click.argument("files", nargs=-1, required=True)
@run_options
def cmd_report(run: Run, files):
    """Aggregate JSON outputs into one document plus plot-ready CSV."""
    doc, csv_text = aggregate([Path(f) for f in files])
    run.json("aggregate.json", doc)
    run.text("plot_data.csv", csv_text)
    click.echo(f"aggregated {len(files)} files into {run.out / 'aggregate.json'}")
    run.manifest("report", {"files": list(files)})


if __name__ == "__main__":
    main()
