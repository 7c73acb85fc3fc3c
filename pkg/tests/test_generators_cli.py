"""Closed-form constants, named instances, instance documents, and the CLI."""

import json
import math
from fractions import Fraction

import pytest

from socrs import cli, io
from socrs.env import check_membership
from socrs.generators import (alpha_bipartite, alpha_hypergraph, alpha_k,
                              alpha_rayleigh, alpha_table,
                              bipartite_impossibility_bound, gen_instance,
                              greedy_bound, greedy_gamma,
                              hat_graph_disconnection)


def test_alpha_constants_known_values():
    assert alpha_k(1) == pytest.approx(0.5, abs=1e-15)
    assert alpha_k(2) == pytest.approx(0.6, abs=1e-15)
    assert alpha_bipartite() == pytest.approx((3 - math.sqrt(5)) / 2, abs=1e-15)
    assert alpha_hypergraph(3) == pytest.approx(0.25, abs=1e-15)
    assert alpha_rayleigh() == 0.5
    assert alpha_rayleigh(b=2) == pytest.approx(1 / 3, abs=1e-15)
    assert alpha_bipartite(b=1) == pytest.approx(
        (2 + 1 - math.sqrt(5)) / 2, abs=1e-15)


def test_alpha_k_brute_force_poisson():
    # independent recomputation from raw Poisson pmf sums
    for k in (1, 2, 3, 5, 8):
        lam = float(k)
        pmf = [math.exp(-lam) * lam ** j / math.factorial(j) for j in range(k + 1)]
        assert alpha_k(k) == pytest.approx(sum(pmf[:k]) / sum(pmf), rel=1e-12)


def test_greedy_gamma_rounding():
    assert greedy_gamma(2) == 0.5       # [1] / 2
    assert greedy_gamma(8) == 0.75      # [2] / 8
    assert greedy_gamma(9) == pytest.approx(1 - 2 / 9)
    assert 0 < greedy_bound(2) < greedy_bound(12) < 1


def test_alpha_table_dispatch():
    assert alpha_table("matching") == pytest.approx(1 / 3)
    assert alpha_table("k-uniform", k=2) == pytest.approx(0.6)
    with pytest.raises(ValueError):
        alpha_table("nope")


def test_impossibility_bound_values():
    # smaller root of (1-eps) a^2 - (3-2 eps) a + 1 = 0
    for eps, expect in [(1 / 3, 0.5), (1 / 4, 0.4648162), (1 / 5, 0.4457524)]:
        a = bipartite_impossibility_bound(eps)
        assert a == pytest.approx(expect, abs=1e-6)
        assert (1 - eps) * a * a - (3 - 2 * eps) * a + 1 == pytest.approx(0, abs=1e-12)


def test_hat_graph_formula():
    for n in range(1, 5):
        assert hat_graph_disconnection(n) == Fraction(3, n + 3)


def test_gen_instances_are_valid():
    for name, params in [("bipartite-impossibility", {"n": 3}),
                         ("K4-barrier", {"eps": 0.1}),
                         ("hat-graph", {"n": 2}),
                         ("symmetric-uniform", {"n": 4, "k": 2}),
                         ("random-graph", {}), ("random-bipartite", {}),
                         ("random-hypergraph", {}),
                         ("random-graphic-matroid", {})]:
        env, x, doc = gen_instance(name, seed=1, **params)
        assert len(x) == env.n
        assert all(0 < v <= 1 for v in x)
        rep = check_membership(env, x)
        assert rep.status != "outside"
        # documents round-trip through the parser
        env2, x2, scale = io.parse_instance(json.dumps(doc))
        assert env2.n == env.n
        assert x2 == pytest.approx([float(v) for v in x])


def test_gen_deterministic_in_seed():
    _, x1, d1 = gen_instance("random-graph", seed=5)
    _, x2, d2 = gen_instance("random-graph", seed=5)
    _, x3, _ = gen_instance("random-graph", seed=6)
    assert d1 == d2
    assert x1 != x3 or d1["edges"] != gen_instance("random-graph", seed=6)[2]["edges"]


def test_parse_instance_rejects_unknown_fields():
    doc = {"kind": "k-uniform", "k": 1, "x": [0.5], "bogus": 1}
    with pytest.raises(Exception):
        io.parse_instance(doc)
    with pytest.raises(Exception):
        io.parse_instance({"kind": "who-knows", "x": [0.5]})


def test_trace_round_trip(tmp_path):
    rows = [(0, 0, True, False), (1, 0, False, False), (0, 1, True, True)]
    path = tmp_path / "trace.csv"
    io.write_trace(path, rows)
    assert io.read_trace(path) == rows


def test_cli_gen_and_verify(tmp_path):
    inst = tmp_path / "inst.json"
    rc = cli.main(["gen", "random-graph", "--seed", "3", "--out", str(inst)])
    assert rc == 0
    rc = cli.main(["verify-lp", "--alpha", "0.3", "--out",
                   str(tmp_path / "v.json"), str(inst)])
    assert rc == 0
    doc = json.loads((tmp_path / "v.json").read_text())
    assert doc["alpha_achieved"] >= 0.3 - 1e-7
    assert not doc["violated_caps"]


def test_cli_lp_exact_and_alpha_table(tmp_path):
    inst = tmp_path / "inst.json"
    cli.main(["gen", "symmetric-uniform", "--params", '{"n": 4, "k": 2}',
              "--out", str(inst)])
    out = tmp_path / "lp.json"
    assert cli.main(["lp-exact", "--out", str(out), str(inst)]) == 0
    doc = json.loads(out.read_text())
    assert 0 < doc["alpha_float"] <= 1
    out2 = tmp_path / "tab.json"
    assert cli.main(["alpha-table", "k-uniform", "--params", '{"k": 2}',
                     "--out", str(out2)]) == 0
    assert json.loads(out2.read_text())["alpha"] == pytest.approx(0.6)


def test_cli_usage_and_input_errors(tmp_path):
    assert cli.main(["definitely-not-a-command"]) == 2
    assert cli.main([]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "nope", "x": [0.5]}')
    assert cli.main(["verify-lp", str(bad)]) == 2
    assert cli.main(["verify-lp", str(tmp_path / "missing.json")]) == 2


def test_cli_run_policy_and_estimate(tmp_path):
    inst = tmp_path / "inst.json"
    cli.main(["gen", "random-graph", "--seed", "4", "--out", str(inst)])
    trace = tmp_path / "trace.csv"
    rc = cli.main(["run-policy", "--alpha", "0.3", "--seed", "1",
                   "--trace-out", str(trace), "--out",
                   str(tmp_path / "p.json"), str(inst)])
    assert rc == 0
    assert len(io.read_trace(trace)) == json.loads(
        (tmp_path / "p.json").read_text())["trace_rows"]
    rc = cli.main(["estimate", "--alpha", "0.3", "--samples", "5000",
                   "--mode", "mc", "--seed", "1", "--out",
                   str(tmp_path / "e.json"), str(inst)])
    assert rc == 0


def test_cli_run_recurring(tmp_path):
    inst = tmp_path / "inst.json"
    cli.main(["gen", "random-graph", "--seed", "2", "--out", str(inst)])
    out = tmp_path / "r.json"
    rc = cli.main(["run-recurring", "--alpha", "0.3", "--renewals", "20",
                   "--out", str(out), str(inst)])
    assert rc == 0
    freq = json.loads(out.read_text())["acceptance_frequency"]
    assert all(0.0 <= v <= 1.0 for v in freq.values())
