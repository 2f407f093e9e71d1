import math

import numpy as np
import pytest

from netsim.correlation import (correlation_scan, distance_correlation,
                                kendall_tau_b, pearson, rank_average, spearman)
from netsim.data import AttackRecord, PairScore
from netsim.errors import DataError, UndefinedCorrelationError


# ---- independent O(n^2) reference implementations (pure loops) ----

def pearson_oracle(x, y):
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    num = sum((a - mx) * (b - my) for a, b in zip(x, y))
    dx = sum((a - mx) ** 2 for a in x)
    dy = sum((b - my) ** 2 for b in y)
    return num / math.sqrt(dx * dy)


def ranks_oracle(x):
    out = []
    for v in x:
        less = sum(1 for w in x if w < v)
        equal = sum(1 for w in x if w == v)
        out.append(less + (equal + 1) / 2.0)
    return out


def spearman_oracle(x, y):
    return pearson_oracle(ranks_oracle(x), ranks_oracle(y))


def kendall_oracle(x, y):
    c = d = tx = ty = 0
    n = len(x)
    for i in range(n):
        for j in range(i + 1, n):
            sx = int(x[i] > x[j]) - int(x[i] < x[j])
            sy = int(y[i] > y[j]) - int(y[i] < y[j])
            if sx == 0 and sy == 0:
                continue
            if sx == 0:
                tx += 1
            elif sy == 0:
                ty += 1
            elif sx == sy:
                c += 1
            else:
                d += 1
    return (c - d) / math.sqrt((c + d + tx) * (c + d + ty))


def dcor_oracle(x, y):
    n = len(x)

    def centered(v):
        d = [[abs(v[i] - v[j]) for j in range(n)] for i in range(n)]
        row = [sum(d[i]) / n for i in range(n)]
        col = [sum(d[i][j] for i in range(n)) / n for j in range(n)]
        grand = sum(row) / n
        return [[d[i][j] - row[i] - col[j] + grand for j in range(n)]
                for i in range(n)]

    a = centered(x)
    b = centered(y)
    dcov2 = sum(a[i][j] * b[i][j] for i in range(n) for j in range(n)) / n ** 2
    dvx = sum(a[i][j] ** 2 for i in range(n) for j in range(n)) / n ** 2
    dvy = sum(b[i][j] ** 2 for i in range(n) for j in range(n)) / n ** 2
    if dvx * dvy <= 0:
        return 0.0
    return math.sqrt(max(dcov2, 0.0) / math.sqrt(dvx * dvy))


# ---- closed-form cases ----

def test_pearson_linear_exact():
    x = [1.0, 2.0, 3.0, 4.0]
    assert pearson(x, [2 * v + 3 for v in x]) == 1.0
    assert pearson(x, [-v for v in x]) == -1.0


def test_pearson_pinned_value():
    # x=(1,2,3), y=(1,2,4): direct formula gives 9 / (2*sqrt(21))
    assert abs(pearson([1, 2, 3], [1, 2, 4]) - 9 / (2 * math.sqrt(21))) < 1e-15


def test_spearman_monotone_and_pinned():
    x = [1.0, 2.0, 3.0, 4.0]
    assert spearman(x, [math.exp(v) for v in x]) == 1.0
    assert spearman([1, 2, 3], [3, 1, 2]) == -0.5


def test_spearman_is_pearson_of_ranks(rng):
    for _ in range(20):
        x = rng.uniform(0, 1, size=9)
        y = rng.uniform(0, 1, size=9)
        assert spearman(x, y) == pearson(rank_average(x), rank_average(y))


def test_rank_average_ties():
    np.testing.assert_array_equal(rank_average([1.0, 1.0, 2.0]), [1.5, 1.5, 3.0])
    np.testing.assert_array_equal(rank_average([5.0, 1.0, 5.0, 0.0]),
                                  [3.5, 2.0, 3.5, 1.0])


def test_kendall_closed_forms():
    assert kendall_tau_b([1, 2, 3], [10, 20, 30]) == 1.0
    assert kendall_tau_b([1, 2, 3], [3, 2, 1]) == -1.0
    assert kendall_tau_b([1, 2, 3], [1, 3, 2]) == 1 / 3


def test_dcor_affine_and_nonlinear():
    x = np.linspace(-2, 2, 9)
    assert abs(distance_correlation(x, 3.0 * x - 1.0) - 1.0) < 1e-10
    # y = x^2 on symmetric x: pearson ~ 0 but dcor clearly positive
    y = x ** 2
    assert abs(pearson(x, y)) < 1e-12
    assert distance_correlation(x, y) > 0.1


def test_all_methods_match_oracles(rng):
    for _ in range(60):
        n = int(rng.integers(5, 25))
        x = rng.uniform(0, 1, size=n)
        y = rng.uniform(0, 1, size=n)
        assert abs(pearson(x, y) - pearson_oracle(list(x), list(y))) < 1e-10
        assert abs(spearman(x, y) - spearman_oracle(list(x), list(y))) < 1e-10
        assert abs(kendall_tau_b(x, y) - kendall_oracle(list(x), list(y))) < 1e-10
        assert abs(distance_correlation(x, y) - dcor_oracle(list(x), list(y))) < 1e-10


def test_ties_against_oracles(rng):
    for _ in range(20):
        n = int(rng.integers(5, 20))
        x = rng.integers(0, 4, size=n).astype(float)
        y = rng.integers(0, 4, size=n).astype(float)
        if np.all(x == x[0]) or np.all(y == y[0]):
            continue
        assert abs(spearman(x, y) - spearman_oracle(list(x), list(y))) < 1e-10
        assert abs(kendall_tau_b(x, y) - kendall_oracle(list(x), list(y))) < 1e-10


def test_symmetry_and_ranges(rng):
    for _ in range(20):
        x = rng.uniform(0, 1, size=8)
        y = rng.uniform(0, 1, size=8)
        assert pearson(x, y) == pearson(y, x)
        assert spearman(x, y) == spearman(y, x)
        assert kendall_tau_b(x, y) == kendall_tau_b(y, x)
        assert abs(pearson(x, y)) <= 1 and abs(kendall_tau_b(x, y)) <= 1
        assert 0.0 <= distance_correlation(x, y) <= 1.0
        # positive affine transforms leave pearson alone; dcor too
        assert abs(pearson(2 * x + 1, y) - pearson(x, y)) < 1e-12
        assert abs(pearson(-2 * x, y) + pearson(x, y)) < 1e-12
        assert abs(distance_correlation(-3 * x + 2, y)
                   - distance_correlation(x, y)) < 1e-10


def test_constant_inputs_raise():
    for func in (pearson, spearman, kendall_tau_b, distance_correlation):
        with pytest.raises(UndefinedCorrelationError):
            func([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
        with pytest.raises(UndefinedCorrelationError):
            func([1.0, 2.0, 3.0], [5.0, 5.0, 5.0])


# ---- the per-source scan ----

def planted_scores(nets):
    scores = []
    rng = np.random.default_rng(99)
    for i, a in enumerate(nets):
        for b in nets[i + 1:]:
            scores.append(PairScore(a, b, 5, 5, float(rng.uniform(0.2, 0.9)),
                                    {1: 0.5}))
    return scores


def record(attack, targeted, source, target, rate):
    return AttackRecord(attack, targeted, "white", "single", source, target, rate)


def test_scan_planted_linear_relationship():
    nets = ["n1", "n2", "n3", "n4"]
    scores = planted_scores(nets)
    lookup = {(s.net_a, s.net_b): s.cka_mean for s in scores}
    table = []
    for s in nets:
        for t in nets:
            if s == t:
                continue
            simv = lookup.get((s, t)) or lookup.get((t, s))
            table.append(record("P", False, s, t, 0.5 + 0.4 * simv))
    reports, diagnostics = correlation_scan(scores, table, "pearson")
    assert not diagnostics
    assert len(reports) == 4
    for r in reports:
        assert abs(r.coefficient - 1.0) < 1e-9
        assert r.n == 3


def test_scan_constant_success_yields_diagnostics():
    nets = ["n1", "n2", "n3"]
    scores = planted_scores(nets)
    table = [record("P", False, s, t, 0.7)
             for s in nets for t in nets if s != t]
    reports, diagnostics = correlation_scan(scores, table, "pearson")
    assert not reports
    assert len(diagnostics) == 3
    assert all("constant" in d.reason for d in diagnostics)


def test_scan_matches_manual_pairing():
    nets = ["a", "b", "c", "d"]
    scores = planted_scores(nets)
    rng = np.random.default_rng(3)
    table = []
    for attack in ("P", "Q"):
        for s in nets:
            for t in nets:
                if s != t:
                    table.append(record(attack, False, s, t,
                                        float(rng.uniform(0, 1))))
    reports, _ = correlation_scan(scores, table, "spearman")
    assert len(reports) == 8  # 4 sources x 2 attacks
    lookup = {(s.net_a, s.net_b): s.cka_mean for s in scores}
    by_key = {(r.source_network, r.attack_name): r for r in reports}
    for attack in ("P", "Q"):
        for s in nets:
            targets = sorted(t for t in nets if t != s)
            xs = [lookup.get((s, t)) or lookup.get((t, s)) for t in targets]
            ys = [next(r.success_rate for r in table
                       if r.attack_name == attack and r.source_network == s
                       and r.target_network == t) for t in targets]
            want = spearman_oracle(xs, ys)
            assert abs(by_key[(s, attack)].coefficient - want) < 1e-10


def test_scan_skips_single_target_groups():
    scores = planted_scores(["a", "b", "c"])
    table = [record("P", True, "a", "b", 0.4)]
    reports, diagnostics = correlation_scan(scores, table, "kendall")
    assert not reports
    assert diagnostics[0].reason == "fewer than 2 targets"


def test_scan_missing_pair_is_data_error():
    scores = planted_scores(["a", "b"])
    table = [record("P", False, "a", "b", 0.5), record("P", False, "a", "z", 0.5)]
    with pytest.raises(DataError, match="z"):
        correlation_scan(scores, table, "pearson")


def test_scan_ignores_self_rows():
    nets = ["a", "b", "c"]
    scores = planted_scores(nets)
    table = [record("P", False, s, t, 0.1 if s == t else 0.5 + 0.01 * len(t))
             for s in nets for t in nets]
    reports, _ = correlation_scan(scores, table, "pearson")
    for r in reports:
        assert r.n == 2  # self row not paired


def test_scan_uses_requested_score_kind():
    scores = [PairScore("a", "b", 5, 5, 0.2, {1: 0.9}),
              PairScore("a", "c", 5, 5, 0.4, {1: 0.1}),
              PairScore("b", "c", 5, 5, 0.6, {1: 0.5})]
    table = [record("P", False, "a", "b", 0.8),
             record("P", False, "a", "c", 0.2),
             record("P", False, "b", "c", 0.5),
             record("P", False, "b", "a", 0.9),
             record("P", False, "c", "a", 0.1),
             record("P", False, "c", "b", 0.6)]
    cka_reports, _ = correlation_scan(scores, table, "pearson", "cka")
    dbs_reports, _ = correlation_scan(scores, table, "pearson", "dbs:1")
    a_cka = next(r for r in cka_reports if r.source_network == "a")
    a_dbs = next(r for r in dbs_reports if r.source_network == "a")
    assert a_cka.coefficient != a_dbs.coefficient
    assert a_dbs.score_kind == "dbs:1"
