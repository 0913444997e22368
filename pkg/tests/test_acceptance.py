"""Acceptance criteria, one test each, at their stated tolerances.

Each test appends a PASS/FAIL line that the session summary prints.
"""
import time
from decimal import Decimal
from fractions import Fraction
from itertools import product
from pathlib import Path

import numpy as np
from click.testing import CliRunner

from conftest import ACCEPTANCE_LINES
from polyfalconer.cantor import (
    build_stages, children, make_schedule, natural_measure, plan_schedule, dimension_estimates,
)
from polyfalconer.cli import main
from polyfalconer.dioph import GammaVector, km_margin, separation_floor
from polyfalconer.distset import c0_bound, cover_distance_set, decay_report
from polyfalconer.errors import RepresentationCollision, ScheduleInfeasible
from polyfalconer.polynorm import Point2, default_slopes, eval_norm, from_slopes
from polyfalconer.sepset import (
    PowerSpec, build_power_set, power_base_set, sample_good_set,
)


def record(num: int, ok: bool, detail: str) -> None:
    line = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def _brute_km(gamma, L, B):
    mono = [gamma ** l for l in range(L)]
    best = None
    for vec in product(range(-B, B + 1), repeat=L):
        if any(vec):
            v = abs(sum(c * m for c, m in zip(vec, mono)))
            best = v if best is None else min(best, v)
    return best


def test_criterion_01_lattice_bounds():
    t0 = time.perf_counter()
    norm = from_slopes(default_slopes(4))
    details, ok = [], True
    for N in (2, 3):
        _, A = sample_good_set(norm, 4, N, Fraction(0), 100, 7)
        cap = (2 * N) ** 3
        ok &= A.n == N ** 4 and all(c <= cap for c in A.proj_counts)
        details.append(f"N={N}: n={A.n} counts={list(A.proj_counts)} cap={cap}")
    dt = time.perf_counter() - t0
    ok &= dt < 10
    record(1, ok, "; ".join(details) + f" ({dt:.2f}s)")


def test_criterion_02_square_oracle(square_set):
    # independent enumeration: points (j2/16, j1/16)
    pts = [Point2(Fraction(j2, 16), Fraction(j1, 16)) for j1 in (1, 2) for j2 in (1, 2)]
    bs = [Point2(1, 0), Point2(0, 1)]
    diffs = [p - q for p in pts for q in pts]
    counts = tuple(len({d.dot(b) for d in diffs}) for b in bs)
    pairs = [(p, q) for i, p in enumerate(pts) for q in pts[i + 1:]]
    md = min(max(abs((p - q).dot(b)) for b in bs) for p, q in pairs)
    A = square_set
    ok = (
        len(diffs) == 16 and len(pairs) == 6
        and A.n == 4 and set(A.points) == set(pts)
        and A.proj_counts == counts == (3, 3)
        and A.min_distance == md == Fraction(1, 16)
    )
    record(2, ok, f"n={A.n} proj_counts={A.proj_counts} min_distance={A.min_distance}")


def test_criterion_03_sumset_equals_materialization(square_set):
    t0 = time.perf_counter()
    sched = make_schedule(2, [square_set, square_set])
    stage = build_stages(sched, 2)[2]
    pts = stage.center_points()
    ok = len(pts) == 16
    sizes = []
    for ps, b in zip(stage.proj_sets, sched.norm.b):
        brute = {(y - z).dot(b) for y in pts for z in pts}
        ok &= set(ps.to_fractions()) == brute
        sizes.append(len(brute))
    dt = time.perf_counter() - t0
    ok &= dt < 5
    record(3, ok, f"level-2 proj set sizes {sizes} match all 256 center differences ({dt:.2f}s)")


def test_criterion_04_covering_decay(k4_set):
    t0 = time.perf_counter()
    c = Fraction(1, 4)
    try:
        sched = make_schedule(4, [k4_set] * 3, c=c)
    except ScheduleInfeasible as exc:
        record(4, False, f"make_schedule(K=4, N=2, c=1/4) rejected: {exc}")
        return
    norm = sched.norm
    rows = decay_report(sched, norm, 3)
    ratio = sched.c * sched.C_bar
    ok = ratio < Fraction(1, 2)
    c0 = c0_bound(norm)
    for r in rows:
        bound = 2 * sched.K * c0 * ratio ** r.j
        ok &= r.total_length <= bound and r.bound == bound
    dt = time.perf_counter() - t0
    ok &= dt < 60
    record(4, ok, f"c*C_bar={ratio} lengths={[float(r.total_length) for r in rows]} ({dt:.2f}s)")


def test_criterion_05_cover_soundness(k4_set):
    t0 = time.perf_counter()
    sched = make_schedule(4, [k4_set] * 2)
    stage = build_stages(sched, 2)[2]
    norm = sched.norm
    cover = cover_distance_set(stage, norm)
    pts = stage.center_points()
    n = len(pts)
    dists = {eval_norm(norm, pts[i] - pts[j]) for i in range(n) for j in range(i + 1, n)}
    ok = all(d in cover for d in dists)
    misses = sum(d not in cover for d in dists)

    rng = np.random.default_rng(7)
    R = stage.radius
    q = 1 << 20

    def offset():
        while True:
            x, y = (int(v) for v in rng.integers(-q, q, size=2, endpoint=True))
            if x * x + y * y <= q * q:
                return Point2(R * Fraction(x, q), R * Fraction(y, q))

    for _ in range(1000):
        i, j = (int(v) for v in rng.integers(0, n, size=2))
        d = eval_norm(norm, (pts[i] + offset()) - (pts[j] + offset()))
        if d not in cover:
            ok = False
            misses += 1
    dt = time.perf_counter() - t0
    ok &= dt < 30
    record(5, ok, f"{n} centers, {len(dists)} distinct distances + 1000 perturbed pairs, misses={misses} ({dt:.2f}s)")


def test_criterion_06_dimension_closed_form():
    t0 = time.perf_counter()
    const = dimension_estimates(plan_schedule(4, [16] * 5, Fraction(1, 4)))
    ok = all(abs(e - Decimal("0.8")) < Decimal("1e-9") for _, e in const)
    grow = dimension_estimates(plan_schedule(4, [2 ** (4 * j) for j in (1, 2, 3)], Fraction(1, 4)))
    est = [e for _, e in grow]
    # log2 N_j = 4 sum i, log2(1/Delta_j) = sum (3i + 2)
    closed = [Decimal(4 * sum(range(1, j + 1))) / Decimal(3 * sum(range(1, j + 1)) + 2 * j) for j in (1, 2, 3)]
    ok &= all(abs(a - b) < Decimal("1e-9") for a, b in zip(est, closed))
    ok &= all(a < b for a, b in zip(est, est[1:])) and est[2] > est[0]
    ok &= all(e < Decimal(4) / 3 for e in est)
    dt = time.perf_counter() - t0
    ok &= dt < 10
    record(6, ok, f"constant={[f'{float(e):.12f}' for _, e in const]} growing={[f'{float(e):.6f}' for e in est]} ({dt:.2f}s)")


def test_criterion_07_power_set():
    t0 = time.perf_counter()
    spec = PowerSpec(1, 2, 2, (Fraction(13, 8),))
    A = build_power_set(spec)
    s0, _ = power_base_set(spec)
    sloped_cap = 8 ** (2 + 1)
    axis_cap = 8 ** 2
    counts = A.proj_counts
    # functional 0 has slope gamma; the rest are 0, 1, inf
    ok = A.n == 16 and len(np.unique(s0)) == 4
    ok &= counts[0] <= sloped_cap and all(c <= axis_cap for c in counts[1:])
    try:
        build_power_set(PowerSpec(1, 2, 3, (Fraction(1, 2),)))
        ok = False
        collision = "no error"
    except RepresentationCollision:
        collision = "RepresentationCollision"
    dt = time.perf_counter() - t0
    ok &= dt < 10
    record(7, ok, f"n={A.n} |S0|=4 counts={list(counts)} caps=({sloped_cap},{axis_cap}); gamma=1/2,N=3 -> {collision} ({dt:.2f}s)")


def test_criterion_08_km_margins():
    t0 = time.perf_counter()
    g32, g12 = Fraction(3, 2), Fraction(1, 2)
    r1 = km_margin(GammaVector((g32,)), 2, 2)
    r2 = km_margin(GammaVector((g12,)), 2, 2)
    floor = separation_floor(GammaVector((g32,)), 2, 2)
    ok = r1.margin == _brute_km(g32, 2, 2) == Fraction(1, 2) and r1.witness == (-1, 1)
    ok &= r2.margin == _brute_km(g12, 2, 2) == 0 and r2.witness == (1, -2)
    ok &= floor == _brute_km(g32, 2, 1) / 2 == Fraction(1, 4)
    dt = time.perf_counter() - t0
    ok &= dt < 5
    record(8, ok, f"margins {r1.margin} {r1.witness}, {r2.margin} {r2.witness}; floor {floor} ({dt:.2f}s)")


def test_criterion_09_measure_consistency(square_stages, k4_stages):
    ok = True
    checked = 0
    for sched, stages in (square_stages, k4_stages):
        for j, st in enumerate(stages):
            ok &= sum(natural_measure(st, i) for i in range(st.count)) == 1
            if j + 1 < len(stages):
                nxt = stages[j + 1]
                n_next = nxt.count // st.count
                for i in range(st.count):
                    kids = children(st, i, n_next)
                    ok &= natural_measure(st, i) == sum(natural_measure(nxt, k) for k in kids)
            checked += 1
    record(9, ok, f"{checked} stages: total mass 1, parent mass = sum of children")


def test_criterion_10_determinism(tmp_path):
    runner = CliRunner()
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        res = runner.invoke(main, ["build", "--mode", "theorem1", "--K", "4", "--N", "2",
                                   "--depth", "2", "--seed", "7", "--out", str(out)])
        assert res.exit_code == 0, res.output
        outs.append({p.name: p.read_bytes() for p in sorted(Path(out).iterdir())})
    ok = outs[0] == outs[1] and "manifest_build.json" in outs[0]
    record(10, ok, f"{len(outs[0])} files byte-identical across two runs")
