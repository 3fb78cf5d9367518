"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line (shown in the terminal summary) and
then asserts, so a failing criterion is visible both ways.
"""
import io
import random
import statistics
import time
from contextlib import redirect_stdout
from fractions import Fraction as F

import numpy as np

from maxaffcd.cli import main
from maxaffcd.decomposition import (
    ChainSubproblem,
    build_rows_cols_decomposition,
    chain_max_marginal,
    chain_value,
    run_mma,
)
from maxaffcd.energy import energy, slopes
from maxaffcd.generate import generate_grid, generate_maxaff, generate_random_graph
from maxaffcd.io import dumps_maxaff
from maxaffcd.maxaff import (
    MaxAffInstance,
    Verdict,
    apply_update,
    coordinate_minimizer,
    evaluate,
    initial_state,
    prune,
    run,
)
from maxaffcd.midpoint import (
    CYCLE_ITERATES,
    midpoint_update,
    minimizer_interval,
    verify_cycle_instance,
)
from maxaffcd.mrf import (
    boundedness_witness,
    diffusion_residual,
    encode_to_maxaff,
    run_diffusion,
)
from maxaffcd.oracle import brute_force_chain_all, brute_force_map, reference_envelope

from conftest import make_drift_planes, make_three_planes


def close(a, b, rel):
    return abs(a - b) <= rel * max(1.0, abs(a), abs(b))


# 1 ---------------------------------------------------------------------------

def test_criterion_1_three_planes(record):
    t0 = time.perf_counter()
    inst = make_three_planes()
    state = initial_state(inst, [1, 1])
    fs = [max(state.y)]
    apply_update(inst, state, 0)
    x_after_1 = list(state.x)
    fs.append(max(state.y))
    apply_update(inst, state, 1)
    x_after_2 = list(state.x)
    fs.append(max(state.y))
    report = run(make_three_planes("float"), [1, 1], eps=1e-9, max_sweeps=200)
    elapsed = time.perf_counter() - t0
    xinf = max(abs(v) for v in report.x)
    ok = (x_after_1 == [F(-1, 2), 1] and x_after_2 == [F(-1, 2), F(1, 4)]
          and fs == [1, 1, F(1, 4)] and report.verdict is Verdict.CONVERGED
          and xinf <= 1e-8 and report.sweeps <= 200 and elapsed < 1)
    record(1, ok, f"x after 2 updates ({', '.join(map(str, x_after_2))}), "
                  f"f {' -> '.join(map(str, fs))}, "
                  f"{report.sweeps} sweeps, |x|inf={xinf:.1e}, {elapsed:.3f}s")
    assert ok


# 2 ---------------------------------------------------------------------------

def test_criterion_2_drift_planes(record, tmp_path):
    t0 = time.perf_counter()
    inst = make_drift_planes()
    state = initial_state(inst, [0, 0, 0])
    for j in range(3):
        apply_update(inst, state, j)
    first = list(state.x)
    exact_drop = True
    for _ in range(100):
        before = list(state.y)
        for j in range(3):
            apply_update(inst, state, j)
        exact_drop &= all(b - a == 1 for a, b in zip(state.y, before))
    path = tmp_path / "drift_planes.json"
    path.write_text(dumps_maxaff(inst, x0=[0, 0, 0]))
    with redirect_stdout(io.StringIO()) as out:
        code = main(["solve", str(path)])
    elapsed = time.perf_counter() - t0
    ok = first == [-1, -2, 2] and exact_drop and code == 2 and "Diverging" in out.getvalue() \
        and elapsed < 1
    record(2, ok, f"first sweep ({', '.join(map(str, first))}), 100 unit drops {exact_drop}, CLI exit {code}, "
                  f"{elapsed:.3f}s")
    assert ok


# 3 ---------------------------------------------------------------------------

def test_criterion_3_energy_certificate(record):
    t0 = time.perf_counter()
    coeffs = [-3, -2, -1, 1, 2, 3]
    checked = violations = 0
    for seed in range(100):
        rng = random.Random(seed)
        m, n = rng.randint(4, 30), rng.randint(2, 10)
        inst = generate_maxaff(m, n, rng.uniform(0.2, 0.6), coeffs, seed=seed, mode="exact")
        # generated instances are already sign consistent, so run() keeps every row
        assert prune(inst).instance.m == inst.m
        bounds = slopes(inst)
        k = bounds.k

        def check(j, d, y_before, y_after):
            nonlocal checked, violations
            checked += 1
            if energy(y_before, k) - energy(y_after, k) < bounds.c * abs(d):
                violations += 1

        x0 = [F(rng.randint(-10, 10), rng.randint(1, 3)) for _ in range(inst.n)]
        report = run(inst, x0, eps=F(1, 10**6), max_sweeps=40, certify=True, callback=check)
        violations += sum(not row.passed for row in report.energy_ledger)
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and checked > 0 and elapsed < 60
    record(3, ok, f"{checked} updates on 100 instances, {violations} violations, {elapsed:.1f}s")
    assert ok


# 4 ---------------------------------------------------------------------------

def test_criterion_4_halting(record):
    t0 = time.perf_counter()
    epsilons = [1e-1, 1e-2, 1e-3, 1e-4]
    worst_ratio = 0.0
    all_halted = True
    for seed in range(10):
        model = generate_grid(4, 4, 3, seed=seed)
        products = []
        for eps in epsilons:
            report = run_diffusion(model, eps=eps, max_sweeps=10**6)
            all_halted &= report.verdict is Verdict.CONVERGED
            products.append(report.sweeps * eps)
        worst_ratio = max(worst_ratio, max(products) / statistics.median(products))
    elapsed = time.perf_counter() - t0
    ok = all_halted and worst_ratio <= 10 and elapsed < 120
    record(4, ok, f"all halted {all_halted}, worst max/median of T(eps)*eps = {worst_ratio:.2f}, "
                  f"{elapsed:.1f}s")
    assert ok


# 5 ---------------------------------------------------------------------------

def small_models(count):
    models, seed = [], 0
    while len(models) < count:
        rng = random.Random(1000 + seed)
        L = rng.randint(2, 4)
        V = rng.randint(2, 12)
        if L ** V <= 4096:
            model = generate_random_graph(V, L, edge_prob=rng.uniform(0.3, 0.8), seed=seed)
            if model.pairwise:
                models.append(model)
        seed += 1
    return models


def test_criterion_5_diffusion(record):
    t0 = time.perf_counter()
    failures = {"a": 0, "b": 0, "c": 0, "d": 0, "e": 0}
    for model in small_models(50):
        F_true = brute_force_map(model)[0]
        witness = boundedness_witness(model)
        n_terms = model.n_nodes + len(model.pairwise)
        last = {"u2": None, "count": 0}

        def check(state, triplet, d):
            last["count"] += 1
            unary = np.array(state.unary)
            pair = np.array(list(state.pairwise.values()))
            u2 = max(unary.max(), pair.max())
            if last["u2"] is not None and u2 > last["u2"] + 1e-12:
                failures["b"] += 1
            last["u2"] = u2
            w = model.n_labels * unary.sum() + pair.sum()
            if not close(w, witness, 1e-9):
                failures["c"] += 1
            u1 = unary.max(axis=1).sum() + pair.max(axis=(1, 2)).sum()
            if not (F_true <= u1 + 1e-9 and u1 <= n_terms * u2 + 1e-9):
                failures["e"] += 1
            if last["count"] % 10 == 0:
                if not close(brute_force_map(state.as_model())[0], F_true, 1e-9):
                    failures["a"] += 1

        report = run_diffusion(model, eps=1e-8, max_sweeps=10**6, callback=check)
        if report.verdict is not Verdict.CONVERGED or diffusion_residual(model, report.delta) >= 1e-6:
            failures["d"] += 1
    elapsed = time.perf_counter() - t0
    ok = not any(failures.values())
    record(5, ok, f"50 models, failures per clause {failures}, {elapsed:.1f}s")
    assert ok


# 6 ---------------------------------------------------------------------------

def test_criterion_6_diffusion_is_generic_cd(record):
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(10):
        model = generate_random_graph(5, 3, edge_prob=0.6, seed=seed)
        if not model.pairwise:
            model = generate_grid(1, 5, 3, seed=seed)
        enc = encode_to_maxaff(model)
        assert list(enc.variables) == list(model.triplets())
        sweeps = -(-1000 // len(enc.variables))
        report = run_diffusion(model, eps=0, max_sweeps=sweeps, record_steps=True)
        state = initial_state(enc.instance)
        generic = []
        while len(generic) < 1000:
            for j in range(enc.instance.n):
                generic.append(apply_update(enc.instance, state, j))
        diffs = [abs(a - b) for a, b in zip(generic[:1000], report.steps[:1000])]
        assert len(diffs) == 1000
        worst = max(worst, max(diffs))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12
    record(6, ok, f"10 models x 1000 updates, max |d diff| = {worst:.1e}, {elapsed:.1f}s")
    assert ok


# 7 ---------------------------------------------------------------------------

def random_chain(rng):
    n, L = rng.randint(1, 8), rng.randint(1, 3)
    num = lambda: F(rng.randint(-50, 50), rng.randint(1, 4))  # noqa: E731
    unary = [[num() for _ in range(L)] for _ in range(n)]
    pairwise = [[[num() for _ in range(L)] for _ in range(L)] for _ in range(n - 1)]
    return ChainSubproblem(range(n), unary, pairwise)


def test_criterion_7_max_marginal_averaging(record):
    t0 = time.perf_counter()
    rng = random.Random(7)
    dp_errors = linear_errors = 0
    for _ in range(200):
        sub = random_chain(rng)
        value, marginals = brute_force_chain_all(sub.unary, sub.pairwise)
        dp_errors += abs(chain_value(sub) - value) > 1e-9
        for feature in sub.features():
            if len(feature) == 2:
                key = ("u", sub.position[feature[0]], feature[1])
            else:
                k, flipped = sub.edge_position[feature[:2]]
                key = ("p", k, feature[3], feature[2]) if flipped else ("p", k) + feature[2:]
            mm = chain_max_marginal(sub, feature)
            dp_errors += abs(mm - marginals[key]) > 1e-9
            d = F(rng.randint(-100, 100), rng.randint(1, 9))
            shifted = ChainSubproblem(sub.nodes, [list(r) for r in sub.unary],
                                      [[list(r) for r in m] for m in sub.pairwise])
            shifted.add(feature, d)
            linear_errors += chain_max_marginal(shifted, feature) != mm + d

    equal_errors = sum_errors = mono_errors = 0
    updates = 0
    for seed in range(10):
        model = generate_grid(3, 3, 3, seed=seed)
        decomp = build_rows_cols_decomposition(model)
        features = list(decomp.members)
        target = {
            f: decomp.model.unary[f[0]][f[1]] if len(f) == 2 else decomp.model.pair(*f)
            for f in features
        }
        prev = {"top": None}

        def check(state, key, d):
            nonlocal equal_errors, sum_errors, mono_errors, updates
            updates += 1
            f, s, t = key
            if abs(state.max_marginal(s, f) - state.max_marginal(t, f)) > 1e-10:
                equal_errors += 1
            for g in features:
                total = sum(state.subs[r].get(g) for r in decomp.members[g])
                if abs(total - target[g]) > 1e-12:
                    sum_errors += 1
            top = state.objective()
            if prev["top"] is not None and top > prev["top"] + 1e-12:
                mono_errors += 1
            prev["top"] = top

        run_mma(decomp, eps=1e-6, max_sweeps=300, callback=check)
    elapsed = time.perf_counter() - t0
    ok = not (dp_errors or linear_errors or equal_errors or sum_errors or mono_errors)
    record(7, ok, f"200 chains: {dp_errors} DP mismatches, {linear_errors} linearity failures; "
                  f"{updates} averaging updates: {equal_errors} unequal, {sum_errors} sum drifts, "
                  f"{mono_errors} max-bound increases; {elapsed:.1f}s")
    assert ok


# 8 ---------------------------------------------------------------------------

def test_criterion_8_midpoint_cycle(record):
    t0 = time.perf_counter()
    with redirect_stdout(io.StringIO()) as out:
        code = main(["demo", "cycle"])
    report = verify_cycle_instance()
    traj = report.trajectory
    expected = [tuple(F(v) for v in p) for p in CYCLE_ITERATES]
    exact = all(isinstance(v, F) for p in traj.iterates for v in p)
    ok = (code == 0 and report.ok and exact and traj.period == 6
          and traj.iterates[traj.cycle_start:traj.cycle_start + 7] == expected + expected[:1]
          and "period: 6" in out.getvalue())
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 1
    record(8, ok, f"exit {code}, period {traj.period}, 12x12 check "
                  f"{report.points_feasible and report.tight_exactly_designated}, {elapsed:.3f}s")
    assert ok


# 9 ---------------------------------------------------------------------------

def test_criterion_9_rule_coincidence(record):
    t0 = time.perf_counter()
    mismatches = updates = 0
    for seed in range(50):
        rng = random.Random(seed)
        inst = generate_maxaff(rng.randint(5, 25), rng.randint(2, 8), rng.uniform(0.2, 0.6),
                               [-1, 1], seed=seed, mode="exact")
        x0 = [F(rng.randint(-20, 20), rng.randint(1, 5)) for _ in range(inst.n)]
        a, b = initial_state(inst, x0), initial_state(inst, x0)
        for k in range(15 * inst.n):
            j = k % inst.n
            apply_update(inst, a, j)
            midpoint_update(inst, b, j)
            updates += 1
            mismatches += a.x != b.x
        full_a = run(inst, x0, eps=F(1, 10**9), max_sweeps=100, trace=True)
        full_b = run(inst, x0, eps=F(1, 10**9), max_sweeps=100, trace=True, rule="midpoint")
        mismatches += full_a.x != full_b.x or full_a.trace != full_b.trace
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0
    record(9, ok, f"50 instances, {updates} lockstep updates, {mismatches} mismatches, "
                  f"{elapsed:.1f}s")
    assert ok


# 10 --------------------------------------------------------------------------

def test_criterion_10_envelope_vs_oracle(record):
    t0 = time.perf_counter()
    rng = random.Random(10)
    mismatches = 0
    for _ in range(500):
        n = rng.randint(1, 4)
        m = rng.randint(2, 12)
        j = rng.randrange(n)
        rows = []
        for i in range(m):
            terms = [(c, F(rng.choice([-1, 1]) * rng.randint(1, 6), rng.randint(1, 3)))
                     for c in range(n) if rng.random() < 0.6]
            rows.append((F(rng.randint(-20, 20), rng.randint(1, 4)), terms))
        # guarantee both signs in column j
        rows.append((F(rng.randint(-5, 5)), [(j, F(rng.randint(1, 4)))]))
        rows.append((F(rng.randint(-5, 5)), [(j, -F(rng.randint(1, 4)))]))
        rng.shuffle(rows)
        inst = MaxAffInstance.from_rows(rows, n=n, mode="exact")
        x = [F(rng.randint(-10, 10), rng.randint(1, 3)) for _ in range(n)]
        state = initial_state(inst, x)
        t = coordinate_minimizer(inst, state, j)
        value, lo, hi = reference_envelope(inst, x, j, ignore_constant=True)
        # membership and uniqueness for g_j
        mismatches += not (lo == hi == t)
        value_f, lo_f, hi_f = reference_envelope(inst, x, j)
        iv = minimizer_interval(inst, state, j)
        mismatches += (iv.value, iv.lower, iv.upper) != (value_f, lo_f, hi_f)
        x_t = list(x)
        x_t[j] = t
        y_t, _ = evaluate(inst, x_t)
        g = max(y_t[i] for i, _ in inst.columns[j])
        mismatches += g != value
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0
    record(10, ok, f"500 columns, {mismatches} mismatches, {elapsed:.1f}s")
    assert ok
