"""Acceptance gate: one test per criterion, each printing a single PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
The last criterion runs every registered posterior example and takes about half an hour.
"""
import itertools
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from test_kernels import brute_miniball_radius
from test_models import NEAR_ONE, frailty_density, grid_integral, hiw_1d_oracle, mc_complete_marginal

from nervegraph import fixtures
from nervegraph.complexes import NerveClass, alpha_complex, build_filtration, cech_complex, maximal_simplices
from nervegraph.experiments import (
    CALIBRATED_HARDCORE_SCALE,
    CALIBRATED_THRESHOLD,
    REGISTRY,
    empty_graph_count,
    get_spec,
    rgg_feature_stats,
    run_example,
    run_factorization_examples,
    run_table3_trace,
    table1_rows,
)
from nervegraph.graphs import LabeledGraph, decomposable_from_filtration, is_decomposable
from nervegraph.mcmc import ProposalConfig, StructureMap, run_prior_chain
from nervegraph.models import HIWHyper, clayton_log_density, hiw_log_marginal
from nervegraph.priors import UniformPrior, Window, sample_uniform

pytestmark = pytest.mark.acceptance


def report(num, title, ok, seconds, limit, detail):
    in_time = limit is None or seconds < limit
    status = "PASS" if ok and in_time else "FAIL"
    budget = f" / {limit:.0f} s" if limit is not None else ""
    line = f"[{status}] criterion {num:02d} {title}: {detail} ({seconds:.1f} s{budget})"
    ACCEPTANCE_LINES.append((num, line))
    print(line)
    assert ok and in_time, line


def test_criterion_01_factorizations():
    t0 = time.time()
    got = run_factorization_examples()
    want = {"alpha_r0.5": "[1,2][2,3,5][4]", "cech_r0.7": "[1,2,3,5][1,4]"}
    report(1, "nerve factorizations", got == want, time.time() - t0, 1.0,
           f"alpha r=0.5 {got['alpha_r0.5']}, cech r=0.7 {got['cech_r0.7']}")


TABLE3 = [
    ("[1][2][3][4][5]", "-", 0.0, "-"),
    ("[1,3][2][4][5]", "-", 0.313, "(1,3)"),
    ("[1,3][2][4,5]", "-", 0.321, "(4,5)"),
    ("[1,3][2,5][4,5]", "[5]", 0.379, "(2,5)"),
    ("[1,3][2,4,5]", "-", 0.421, "(2,4)"),
    ("[1,3][3,4][2,4,5]", "[3][4]", 0.459, "(3,4)"),
    ("[1,3][3,4][2,4,5]", "[3][4]", 0.474, "~(1,2)"),
    ("[1,3,4][2,4,5]", "[4]", 0.498, "(1,4)"),
]


def _blocks(s):
    return set() if s == "-" else set(s.strip("[]").split("]["))


def test_criterion_02_trace():
    t0 = time.time()
    rows = run_table3_trace()
    ok = len(rows) == len(TABLE3)
    worst = 0.0
    for row, (cl, sep, r, upd) in zip(rows, TABLE3):
        ok &= _blocks(row["cliques"]) == _blocks(cl) and _blocks(row["separators"]) == _blocks(sep)
        ok &= row["update"] == upd
        worst = max(worst, abs(row["r"] - r))
    # the printed radii are rounded from coordinates given to three decimals
    ok &= worst < 2e-3
    updates = " ".join(r["update"] for r in rows[1:])
    report(2, "clique/separator trace", ok, time.time() - t0, 1.0,
           f"{len(rows)} rows, updates {updates}, max radius gap {worst:.4f}")


def test_criterion_03_maximal_simplices():
    t0 = time.time()
    want = [(2, 3, 4), (0, 1), (0, 5), (1, 5)]
    passing = []
    for label, r in (("0.40", 0.40), ("sqrt(0.075)", np.sqrt(0.075))):
        got = maximal_simplices(alpha_complex(fixtures.HYPERGRAPH_VERTICES, r))
        if sorted(got) == sorted(want):
            passing.append(label)
    report(3, "hypergraph maximal simplices", bool(passing), time.time() - t0, 1.0,
           f"{{3,4,5}},{{1,2}},{{1,6}},{{2,6}} at r={','.join(passing) or 'none'}")


def test_criterion_04_table1_quartiles():
    t0 = time.time()

    def check(table):
        u = table.lookup("Uniform", 75)
        m = table.lookup("Matern(0.035)", 75)
        e = table.lookup("ER(0.065)", 75)
        parts = {
            "uniform edges": np.all(np.abs(np.subtract(u[2:5], [161, 171, 182])) <= 3),
            "uniform 3-cliques": np.all(np.abs(np.subtract(u[5:8], [134, 160, 190])) <= 8),
            "matern edge median": abs(m[3] - 161) <= 4,
            "ER edges": np.all(np.abs(np.subtract(e[2:5], [172, 181, 189])) <= 1),
        }
        desc = (f"U {u[2]:.0f}/{u[3]:.0f}/{u[4]:.0f} tri {u[5]:.0f}/{u[6]:.0f}/{u[7]:.0f}, "
                f"M med {m[3]:.0f}, ER {e[2]:.0f}/{e[3]:.0f}/{e[4]:.0f}")
        return parts, desc

    literal = rgg_feature_stats([r for r in table1_rows() if r.n == 75], 2500, 0)
    parts, desc = check(literal)
    calibrated = rgg_feature_stats([r for r in table1_rows(CALIBRATED_THRESHOLD, CALIBRATED_HARDCORE_SCALE)
                                    if r.n == 75], 2500, 0)
    cparts, cdesc = check(calibrated)
    failed = [k for k, v in parts.items() if not v]
    detail = (f"literal 2r=0.164: {desc}" + (f" [fails: {', '.join(failed)}]" if failed else "")
              + f"; calibrated threshold {CALIBRATED_THRESHOLD}: {cdesc}"
              + (" [all parts pass]" if all(cparts.values()) else " [fails]"))
    report(4, "Table-1 quartiles", all(parts.values()), time.time() - t0, 300.0, detail)


def test_criterion_05_prior_chain_acceptance():
    t0 = time.time()
    smap = StructureMap(NerveClass("alpha", 2), 0.3)
    trace = run_prior_chain(UniformPrior(), ProposalConfig(), 10_000, 0, 10, smap, 10, np.random.default_rng(0))
    report(5, "uniform prior chain", trace.acceptance_rate == 1.0, time.time() - t0, None,
           f"acceptance rate {trace.acceptance_rate:.6f} over 10000 steps")


def test_criterion_06_decomposability():
    t0 = time.time()
    rng = np.random.default_rng(6)
    failures = 0
    for i in range(1_000):
        P = sample_uniform(int(rng.integers(1, 31)), Window("ball", 2), rng)
        kind = "cech" if i % 2 == 0 else "alpha"
        F = build_filtration(P, NerveClass(kind, 2), 2, float(rng.uniform(0.05, 0.6)))
        failures += not is_decomposable(decomposable_from_filtration(F))
    report(6, "decomposable output", failures == 0, time.time() - t0, 120.0,
           f"{failures} failures over 1000 configurations")


def test_criterion_07_infeasibility_bound():
    t0 = time.time()
    counts = {n: empty_graph_count(n, 1.0 / (np.sqrt(n) - 1), 10_000, seed=n) for n in (5, 10, 20)}
    report(7, "no empty graph at the bound", all(c == 0 for c in counts.values()), time.time() - t0, 60.0,
           ", ".join(f"n={n}: {c} empty" for n, c in counts.items()))


def test_criterion_08_likelihoods():
    t0 = time.time()
    parts = {}
    d2 = float(np.exp(clayton_log_density([NEAR_ONE] * 2, 4.0)))
    parts["2-d corner = 5"] = abs(np.log(d2) / np.log(5) - 1) < 1e-6
    d3 = float(np.exp(clayton_log_density([NEAR_ONE] * 3, 4.0)))
    parts["3-d corner = 30"] = abs(np.log(d3) / np.log(30) - 1) < 1e-6
    oracle3 = frailty_density([NEAR_ONE] * 3, 4.0)
    total = grid_integral(lambda P: clayton_log_density(P, 4.0), 400, 2)
    parts["integrates to 1"] = abs(total - 1) < 1e-3
    rng = np.random.default_rng(8)
    x = rng.normal(size=(12, 1))
    h1 = hiw_log_marginal(x, LabeledGraph(1, frozenset()), HIWHyper(3.0, np.array([[1.0]])))
    errs = [abs(np.expm1(h1 - hiw_1d_oracle(x[:, 0], 3.0, 1.0)))]
    for p in (2, 3):
        X = rng.normal(size=(3, p))
        got = hiw_log_marginal(X, LabeledGraph.complete(p), HIWHyper(3.0, np.eye(p)))
        errs.append(abs(np.expm1(got - mc_complete_marginal(X, 3.0, np.eye(p), rng))))
    parts["HIW oracles"] = max(errs) < 0.02
    failed = [k for k, v in parts.items() if not v]
    detail = (f"2-d {d2:.6f}, 3-d {d3:.6f} (frailty oracle {oracle3:.6f}), integral {total:.6f}, "
              f"HIW rel errs {', '.join(f'{e:.4f}' for e in errs)}"
              + (f" [fails: {', '.join(failed)}]" if failed else ""))
    report(8, "likelihood oracles", not failed, time.time() - t0, None, detail)


def test_criterion_09_nerve_oracles():
    t0 = time.time()
    rng = np.random.default_rng(9)
    mismatches = alpha_escapes = 0
    for _ in range(100):
        n = int(rng.integers(3, 9))
        P = rng.uniform(-1, 1, size=(n, 2))
        r = float(rng.uniform(0.05, 0.9))
        brute = {s for k in range(1, n + 1) for s in itertools.combinations(range(n), k)
                 if brute_miniball_radius(P[list(s)]) <= r}
        K = cech_complex(P, r, n)
        mismatches += set(K.simplices) != brute
        alpha_escapes += not set(alpha_complex(P, r).edges()) <= set(cech_complex(P, r, 2).edges())
    report(9, "nerve oracle equivalence", mismatches == 0 and alpha_escapes == 0, time.time() - t0, None,
           f"{mismatches} Cech mismatches, {alpha_escapes} alpha edges outside Cech over 100 pairs")


@pytest.mark.slow
def test_criterion_10_posterior_recovery():
    t0 = time.time()
    res = {}
    for exp_id in REGISTRY:
        res[exp_id] = run_example(get_spec(exp_id))
    checks = {"ex1 rank 1": res["ex1"]["truth_rank"] == 1}
    for nerve in ("alpha2", "alpha3", "cech2"):
        checks[f"ex4-m1-{nerve} rank 1"] = res[f"ex4-m1-{nerve}"]["truth_rank"] == 1
    rank2 = res["ex2-gauss"]["truth_rank"]
    checks["ex2 top 3"] = rank2 is not None and rank2 <= 3
    mode_s = res["ex3-strauss"]["tally"][0][1]
    mode_u = res["ex3-unif"]["tally"][0][1]
    checks["ex3 strauss mode > uniform mode"] = mode_s > mode_u
    checks["ex4-m2-alpha2 never samples truth"] = res["ex4-m2-alpha2"]["truth_frequency"] == 0.0
    checks["ex4-m2-cech2 rank 1"] = res["ex4-m2-cech2"]["truth_rank"] == 1
    checks["ex4-m2-alpha3 rank 1"] = res["ex4-m2-alpha3"]["truth_rank"] == 1
    ranks = ", ".join(f"{k} {v['truth_rank']}" for k, v in res.items())
    failed = [k for k, v in checks.items() if not v]
    detail = (f"truth ranks {ranks}; ex3 modes strauss {mode_s:.3f} vs uniform {mode_u:.3f}"
              + (f" [fails: {', '.join(failed)}]" if failed else ""))
    report(10, "posterior recovery", not failed, time.time() - t0, 3600.0, detail)


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                pass
