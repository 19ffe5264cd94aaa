import itertools
import random
from fractions import Fraction as F

import pytest

from entropykit.expr import Chart, parse
from entropykit.access import (
    AccessError,
    AxiomConfig,
    AxiomStatus,
    CompositeState,
    ConstructionImpossible,
    EdgeRelation,
    EntropyFn,
    EntropyOracle,
    MemoizedOracle,
    OracleMismatchError,
    Relation,
    StateSpace,
    calibrate,
    check_axioms,
    comparison_hypothesis,
    construct_entropy,
    derived_relations,
    verify_entropy,
)


def space(label, names, scalable=False):
    return StateSpace(
        label, ("x",), {n: (F(i),) for i, n in enumerate(names)}, scalable
    )


def pure(label, name):
    return CompositeState.pure(label, name)


def edge_relation(label, names, edges, close=True):
    nodes = [pure(label, n) for n in names]
    rel = EdgeRelation(nodes, [(pure(label, a), pure(label, b)) for a, b in edges])
    return rel.closure() if close else rel


def oracle_for(label, values):
    return EntropyOracle({label: {n: F(v) for n, v in values.items()}})


# -- derived relations ---------------------------------------------------------


def test_derived_relations_classification():
    rel = edge_relation("G", ["a", "b"], [("a", "b")])
    a, b = pure("G", "a"), pure("G", "b")
    assert derived_relations(rel, a, b) is Relation.STRICT
    assert derived_relations(rel, b, a) is Relation.ACCESSIBLE
    sym = edge_relation("G", ["a", "b"], [("a", "b"), ("b", "a")])
    assert derived_relations(sym, a, b) is Relation.EQUIVALENT
    loose = edge_relation("G", ["a", "b"], [])
    assert derived_relations(loose, a, b) is Relation.INCOMPARABLE


def test_composite_states_are_order_insensitive_multisets():
    ab = pure("G", "a").compose(pure("G", "b"))
    ba = pure("G", "b").compose(pure("G", "a"))
    assert ab == ba
    assert ab.scale(F(1, 2)).parts[0][0] == F(1, 2)
    with pytest.raises(AccessError):
        pure("G", "a").scale(0)


# -- closure ---------------------------------------------------------------------


def brute_reachability(names, edges):
    reach = {(a, a) for a in names}
    reach.update(edges)
    for _ in names:
        reach.update(
            (a, d) for (a, b) in list(reach) for (c, d) in list(reach) if b == c
        )
    return reach


def test_closure_is_idempotent_and_minimal():
    names = ["a", "b", "c", "d"]
    edges = [("a", "b"), ("b", "c"), ("c", "a"), ("c", "d")]
    raw = edge_relation("G", names, edges, close=False)
    closed = raw.closure()
    assert closed.closure().edges == closed.edges
    want = {
        (pure("G", a), pure("G", b)) for a, b in brute_reachability(names, edges)
    }
    assert closed.edges == want


# -- axioms -----------------------------------------------------------------------


def test_closed_edges_pass_reflexivity_and_transitivity():
    rel = edge_relation("G", ["a", "b", "c"], [("a", "b"), ("b", "c")])
    report = check_axioms(rel, [space("G", ["a", "b", "c"])])
    assert report["reflexivity"].status is AxiomStatus.PASS
    assert report["transitivity"].status is AxiomStatus.PASS
    assert report["scaling-invariance"].status is AxiomStatus.NOT_APPLICABLE


def test_raw_edges_fail_transitivity_with_witness():
    rel = edge_relation("G", ["a", "b", "c"], [("a", "b"), ("b", "c")], close=False)
    report = check_axioms(rel, [space("G", ["a", "b", "c"])])
    assert report["transitivity"].status is AxiomStatus.FAIL
    assert report["transitivity"].witness == (
        pure("G", "a"),
        pure("G", "b"),
        pure("G", "c"),
    )


def test_entropy_oracle_passes_all_six_axioms():
    sp = space("G", ["a", "b", "c", "d"], scalable=True)
    oracle = oracle_for("G", {"a": 0, "b": 2, "c": 2, "d": 5})
    report = check_axioms(oracle, [sp])
    for r in report.results:
        assert r.status is AxiomStatus.PASS, r
    assert "LIMIT_APPROXIMATED" in report["stability"].caveats


def test_entropy_oracle_axioms_by_brute_force():
    # independent brute force over all ≤2-component composites on a λ grid
    sp = space("G", ["a", "b", "c"], scalable=True)
    oracle = oracle_for("G", {"a": 0, "b": 1, "c": 3})
    grid = [F(1, 2), F(1), F(2)]
    pures = [pure("G", n) for n in sp.names()]
    composites = list(pures)
    for x, y in itertools.product(pures, repeat=2):
        for lx, ly in itertools.product(grid, repeat=2):
            composites.append(x.scale(lx).compose(y.scale(ly)))
    for x in composites:
        assert oracle.le(x, x)
    for x, y, z in itertools.product(composites[:12], repeat=3):
        if oracle.le(x, y) and oracle.le(y, z):
            assert oracle.le(x, z)
    for x, y in itertools.product(pures, repeat=2):
        if oracle.le(x, y):
            for lam in grid:
                assert oracle.le(x.scale(lam), y.scale(lam))
            for xp, yp in itertools.product(pures, repeat=2):
                if oracle.le(xp, yp):
                    assert oracle.le(x.compose(xp), y.compose(yp))
    for x in pures:
        split = x.scale(F(1, 2)).compose(x.scale(F(1, 2)))
        assert oracle.le(x, split) and oracle.le(split, x)


def test_stability_can_fail_on_near_ties_and_is_flagged_approximate():
    # δ = 1/128 survives every scheduled ε ≥ 1/64 against Δ = 1, so the finite
    # schedule accepts the premise while the conclusion fails
    sp = space("G", ["lo", "mid", "hi"], scalable=True)
    oracle = oracle_for("G", {"lo": 0, "mid": F(1, 128), "hi": 1})
    config = AxiomConfig(max_stability_quadruples=10_000, composite_samples=0)
    report = check_axioms(oracle, [sp], config)
    assert report["stability"].status is AxiomStatus.FAIL
    assert "LIMIT_APPROXIMATED" in report["stability"].caveats
    x, y, z, zp = report["stability"].witness
    assert oracle.total(x) > oracle.total(y)


def test_consistency_on_explicit_composite_nodes():
    a, b = pure("G", "a"), pure("G", "b")
    aa, bb = a.compose(a), b.compose(b)
    good = EdgeRelation(
        [a, b, aa, bb],
        [(a, a), (b, b), (aa, aa), (bb, bb), (a, b), (aa, bb)],
    )
    report = check_axioms(good, [space("G", ["a", "b"])])
    assert report["consistency"].status is AxiomStatus.PASS
    bad = EdgeRelation(
        [a, b, aa, bb], [(a, a), (b, b), (aa, aa), (bb, bb), (a, b)]
    )
    report = check_axioms(bad, [space("G", ["a", "b"])])
    assert report["consistency"].status is AxiomStatus.FAIL


def test_memoized_oracle_detects_nondeterminism():
    flips = itertools.count()

    def flaky(x, y):
        return next(flips) % 2 == 0

    oracle = MemoizedOracle(flaky, recheck=True)
    a, b = pure("G", "a"), pure("G", "b")
    assert oracle.le(a, b)
    with pytest.raises(OracleMismatchError):
        oracle.le(a, b)


# -- comparison hypothesis -----------------------------------------------------------


def test_ch_on_chain_and_antichain():
    chain = edge_relation("G", ["a", "b", "c"], [("a", "b"), ("b", "c")])
    assert comparison_hypothesis(chain, space("G", ["a", "b", "c"])).total
    anti = edge_relation("G", ["a", "b"], [])
    r = comparison_hypothesis(anti, space("G", ["a", "b"]))
    assert not r.total
    assert r.incomparable == ((pure("G", "a"), pure("G", "b")),)


def test_ch_total_for_entropy_oracle():
    sp = space("G", ["a", "b", "c", "d", "e"])
    oracle = oracle_for("G", {"a": 3, "b": 1, "c": 4, "d": 1, "e": 5})
    assert comparison_hypothesis(oracle, sp).total


def test_quotient_order_is_a_partial_order():
    # derived relations are antisymmetric once equivalent states collapse
    rng = random.Random(19)
    for _ in range(30):
        names = [f"s{i}" for i in range(rng.randint(2, 6))]
        edges = [
            (a, b)
            for a in names
            for b in names
            if a != b and rng.random() < 0.4
        ]
        rel = edge_relation("G", names, edges)
        classes: list[list] = []
        for n in names:
            x = pure("G", n)
            for cls in classes:
                if derived_relations(rel, x, cls[0]) is Relation.EQUIVALENT:
                    cls.append(x)
                    break
            else:
                classes.append([x])
        for i, ci in enumerate(classes):
            for j, cj in enumerate(classes):
                if i == j:
                    continue
                both = rel.le(ci[0], cj[0]) and rel.le(cj[0], ci[0])
                assert not both  # distinct classes are never mutually accessible


# -- entropy construction -------------------------------------------------------------


def test_construct_entropy_rank_on_two_chain():
    rel = edge_relation("G", ["a", "b"], [("a", "b")])
    sp = space("G", ["a", "b"])
    S = construct_entropy(rel, sp)
    assert S.values == {"a": F(0), "b": F(1)}
    assert verify_entropy(S, rel, sp).ok
    # brute force: every monotone labelling with values in 0..2 orders a below b,
    # and the rank choice is among them
    valid = []
    for va, vb in itertools.product(range(3), repeat=2):
        if (va <= vb) == rel.le(pure("G", "a"), pure("G", "b")) and (
            vb <= va
        ) == rel.le(pure("G", "b"), pure("G", "a")):
            valid.append((va, vb))
    assert valid and all(va < vb for va, vb in valid)
    assert (0, 1) in valid


def test_construct_entropy_collapses_equivalent_cycle():
    rel = edge_relation("G", ["a", "b"], [("a", "b"), ("b", "a")])
    S = construct_entropy(rel, space("G", ["a", "b"]))
    assert S.values["a"] == S.values["b"]


def test_construct_entropy_matches_hidden_order():
    rng = random.Random(71)
    for _ in range(40):
        names = [f"s{i}" for i in range(rng.randint(2, 6))]
        hidden = {n: rng.randint(0, 7) for n in names}
        sp = StateSpace(
            "G", ("x",), {n: (F(i),) for i, n in enumerate(names)}, scalable=True
        )
        oracle = oracle_for("G", hidden)
        S = construct_entropy(oracle, sp)
        for x, y in itertools.combinations(names, 2):
            assert (S.values[x] <= S.values[y]) == (hidden[x] <= hidden[y])
            assert (S.values[y] <= S.values[x]) == (hidden[y] <= hidden[x])
        assert verify_entropy(S, oracle, sp).ok


def test_construct_entropy_requires_comparability():
    rel = edge_relation("G", ["a", "b"], [])
    with pytest.raises(ConstructionImpossible) as err:
        construct_entropy(rel, space("G", ["a", "b"]))
    assert err.value.witness == (pure("G", "a"), pure("G", "b"))


def test_construct_entropy_degenerate_scaled_space():
    sp = space("G", ["a", "b"], scalable=True)
    oracle = oracle_for("G", {"a": 2, "b": 2})
    S = construct_entropy(oracle, sp)
    assert S.degenerate
    assert set(S.values.values()) == {F(0)}


# -- entropy verification --------------------------------------------------------------


def test_verify_entropy_flags_planted_swap():
    rel = edge_relation("G", ["a", "b", "c"], [("a", "b"), ("b", "c")])
    sp = space("G", ["a", "b", "c"])
    bad = EntropyFn("G", {"a": F(1), "b": F(0), "c": F(2)})
    report = verify_entropy(bad, rel, sp)
    assert report.monotonicity.status is AxiomStatus.FAIL
    assert report.monotonicity.witness is not None


def test_verify_entropy_flags_constant_on_strict_pair():
    rel = edge_relation("G", ["a", "b"], [("a", "b")])
    sp = space("G", ["a", "b"])
    const = EntropyFn("G", {"a": F(0), "b": F(0)})
    report = verify_entropy(const, rel, sp)
    assert report.monotonicity.status is AxiomStatus.FAIL
    x, y, reason = report.monotonicity.witness
    assert reason == "S ≤ without ≺"


# -- calibration -------------------------------------------------------------------------


def two_system_instance():
    names = ["g0", "g1", "g2", "g3"]
    sp1 = StateSpace("G1", ("x",), {n: (F(i),) for i, n in enumerate(names)})
    sp2 = StateSpace("G2", ("x",), {n: (F(i),) for i, n in enumerate(names)})
    s1 = EntropyFn("G1", {n: F(i) for i, n in enumerate(names)})
    s2 = EntropyFn("G2", {n: 2 * F(i) + 3 for i, n in enumerate(names)})
    nodes = [pure("G1", n) for n in names] + [pure("G2", n) for n in names]
    edges = []
    for n in names:
        edges.append((pure("G1", n), pure("G2", n)))
        edges.append((pure("G2", n), pure("G1", n)))
    for i in range(len(names) - 1):
        edges.append((pure("G1", names[i]), pure("G1", names[i + 1])))
        edges.append((pure("G2", names[i]), pure("G2", names[i + 1])))
    cross = EdgeRelation(nodes, edges).closure()
    return [(sp1, s1), (sp2, s2)], cross


def test_calibrate_recovers_affine_rescaling():
    systems, cross = two_system_instance()
    result = calibrate(systems, cross)
    assert result.ok
    assert result.coefficients[0] == (F(1), F(0))
    assert result.coefficients[1] == (F(1, 2), F(-3, 2))
    # glued entropies coincide on identified states and respect every cross pair
    for n in ("g0", "g1", "g2", "g3"):
        assert result.glued_value(systems, pure("G1", n)) == result.glued_value(
            systems, pure("G2", n)
        )
    margin = F(1, 10**6)
    for x, y in itertools.combinations(cross.universe(), 2):
        rel = derived_relations(cross, x, y)
        gx, gy = result.glued_value(systems, x), result.glued_value(systems, y)
        if rel is Relation.EQUIVALENT:
            assert gx == gy
        elif rel is Relation.STRICT:
            assert gy - gx >= margin  # strict pairs separated by the margin
        elif rel is Relation.ACCESSIBLE:
            assert gx - gy >= margin


def test_calibrate_single_system_is_normalized_identity():
    sp = StateSpace("G", ("x",), {"a": (F(0),), "b": (F(1),)})
    S = EntropyFn("G", {"a": F(0), "b": F(1)})
    cross = EdgeRelation([pure("G", "a"), pure("G", "b")], []).closure()
    result = calibrate([(sp, S)], cross)
    assert result.ok
    assert result.coefficients == ((F(1), F(0)),)


def test_calibrate_three_systems():
    # affine gluing across three gradings of the same physical states
    names = ["g0", "g1", "g2"]

    def grading(label, fn):
        sp = StateSpace(label, ("x",), {n: (F(i),) for i, n in enumerate(names)})
        return sp, EntropyFn(label, {n: fn(F(i)) for i, n in enumerate(names)})

    systems = [
        grading("G1", lambda v: v),
        grading("G2", lambda v: 2 * v + 3),
        grading("G3", lambda v: v / 2 - 1),
    ]
    nodes, edges = [], []
    for label in ("G1", "G2", "G3"):
        nodes += [pure(label, n) for n in names]
    for n in names:
        for a, b in [("G1", "G2"), ("G2", "G3"), ("G1", "G3")]:
            edges += [(pure(a, n), pure(b, n)), (pure(b, n), pure(a, n))]
    for i in range(len(names) - 1):
        for label in ("G1", "G2", "G3"):
            edges.append((pure(label, names[i]), pure(label, names[i + 1])))
    cross = EdgeRelation(nodes, edges).closure()
    result = calibrate(systems, cross)
    assert result.ok
    assert result.coefficients[1] == (F(1, 2), F(-3, 2))
    assert result.coefficients[2] == (F(2), F(2))
    for n in names:
        glued = {
            result.glued_value(systems, pure(lbl, n)) for lbl in ("G1", "G2", "G3")
        }
        assert len(glued) == 1


def test_calibrate_reports_contradiction_witness():
    systems, _ = two_system_instance()
    a1, a2 = pure("G1", "g0"), pure("G2", "g0")
    b1, b2 = pure("G1", "g1"), pure("G2", "g1")
    nodes = [a1, a2, b1, b2]
    edges = [
        (a1, a1), (a2, a2), (b1, b1), (b2, b2),
        (a1, a2), (a2, a1),  # identify the low states
        (b1, b2), (b2, b1),  # identify the high states
        (b1, a1),  # contradicts S1(g1) > S1(g0)
    ]
    cross = EdgeRelation(nodes, edges)
    result = calibrate(systems, cross)
    assert not result.ok
    assert result.witness
    assert any("≺≺" in w for w in result.witness)


def test_entropy_oracle_from_expression():
    chart = Chart(("u", "v"))
    sp = StateSpace(
        "G",
        ("u", "v"),
        {"a": (F(1), F(2)), "b": (F(3), F(1))},
    )
    oracle = EntropyOracle.from_expression([sp], parse("u + 2*v", chart))
    assert oracle.values["G"] == {"a": F(5), "b": F(5)}
    assert derived_relations(oracle, pure("G", "a"), pure("G", "b")) is Relation.EQUIVALENT
