import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from prodnet.errors import ModelError
from prodnet.partitions import fully_connected, islands, set_partitions
from prodnet.policy import TradePolicy, brute_force_compatible, compatible_partitions, design_policy, is_compatible
from prodnet.replicate import replicate_game


@pytest.fixture
def rep3(inst_b):
    return replicate_game(inst_b, 3)


def test_prevent_cross_country_link(rep2):
    policy = TradePolicy(frozenset({(0, 3)}))
    assert is_compatible(islands(2), rep2, policy)
    assert not is_compatible(fully_connected(2), rep2, policy)


def test_catalyze_cross_country_link(rep2):
    policy = TradePolicy(catalyzed=frozenset({(0, 3)}))
    assert is_compatible(fully_connected(2), rep2, policy)
    assert not is_compatible(islands(2), rep2, policy)


def test_empty_policy(rep3):
    assert compatible_partitions(rep3, TradePolicy()).partitions == set_partitions(3)


def test_prevent_and_catalyze(rep3):
    # firm 0 = (g1, country 1), firm 4 = (g2, country 2), firm 1 = (g1, country 2), firm 5 = (g2, country 3)
    policy = TradePolicy(frozenset({(0, 4)}), frozenset({(1, 5)}))
    res = compatible_partitions(rep3, policy)
    assert res.partitions == [((0,), (1, 2))]
    assert res.partitions == brute_force_compatible(rep3, policy)


def test_same_category_links(rep3):
    assert compatible_partitions(rep3, TradePolicy(frozenset({(0, 1)}))).partitions == set_partitions(3)
    res = compatible_partitions(rep3, TradePolicy(catalyzed=frozenset({(0, 1)})))
    assert res.partitions == [] and not res.feasible
    assert "same category" in res.certificate


def test_conflict_certificate(rep3):
    policy = TradePolicy(frozenset({(0, 5)}), frozenset({(0, 4), (1, 5)}))
    res = compatible_partitions(rep3, policy)
    assert not res.feasible and "countries 0 and 2" in res.certificate
    assert brute_force_compatible(rep3, policy) == []


def test_self_links(rep2):
    assert compatible_partitions(rep2, TradePolicy(catalyzed=frozenset({(0, 0)}))).partitions == set_partitions(2)
    assert not compatible_partitions(rep2, TradePolicy(frozenset({(0, 0)}))).feasible


def test_policy_validation(rep2):
    with pytest.raises(ModelError):
        TradePolicy(frozenset({(0, 1)}), frozenset({(0, 1)}))
    with pytest.raises(ModelError):
        compatible_partitions(rep2, TradePolicy(frozenset({(0, 9)})))


def test_design_examples(rep2, rep3):
    d = design_policy(rep2, islands(2))
    assert len(d.prevented) == 1 and not d.catalyzed
    d = design_policy(rep2, fully_connected(2))
    assert len(d.catalyzed) == 1 and not d.prevented
    d = design_policy(rep3, [[0, 1], [2]])
    assert len(d.catalyzed) == 1 and len(d.prevented) == 1
    assert compatible_partitions(rep3, d).partitions == [((0, 1), (2,))]


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(
    n=st.integers(1, 4),
    links=st.lists(st.tuples(st.integers(0, 7), st.integers(0, 7), st.booleans()), max_size=5),
)
def test_propagation_equals_brute_force(inst_b, n, links):
    rep = replicate_game(inst_b, n)
    m = rep.econ.m
    prevented = {(i % m, j % m) for i, j, p in links if p}
    catalyzed = {(i % m, j % m) for i, j, p in links if not p} - prevented
    policy = TradePolicy(frozenset(prevented), frozenset(catalyzed))
    res = compatible_partitions(rep, policy)
    assert res.partitions == brute_force_compatible(rep, policy)
    for Q in res.partitions:
        label = {c: k for k, block in enumerate(Q) for c in block}
        assert all(label[a] != label[b] for a, b in res.separated)
        assert all(label[a] == label[b] for a, b in res.merged)
