import pytest
from hypothesis import given
from hypothesis import strategies as st

from prodnet import oracles
from prodnet.errors import CapExceededError, ModelError
from prodnet.partitions import bell_number, canonical, from_rgs, restricted_growth_strings, set_partitions, to_rgs


@pytest.mark.parametrize("n,count", [(0, 1), (1, 1), (2, 2), (3, 5), (4, 15), (5, 52), (6, 203)])
def test_bell_counts(n, count):
    assert bell_number(n) == count
    assert len(set_partitions(n)) == count


def test_rgs_lexicographic():
    strings = list(restricted_growth_strings(4))
    assert strings == sorted(strings)
    assert strings[0] == (0, 0, 0, 0) and strings[-1] == (0, 1, 2, 3)


@pytest.mark.parametrize("n", range(0, 7))
def test_oracle_enumerator_agrees(n):
    assert oracles.partition_enumerator(n) == set_partitions(n)


def test_caps():
    with pytest.raises(CapExceededError):
        set_partitions(7)
    with pytest.raises(CapExceededError):
        oracles.partition_enumerator(7)
    assert len(set_partitions(7, cap=7)) == 877


@given(st.integers(1, 6).flatmap(lambda n: st.sampled_from(set_partitions(n)).map(lambda q: (n, q))))
def test_rgs_round_trip(case):
    n, q = case
    assert from_rgs(to_rgs(q, n)) == q
    assert canonical(list(reversed(q)), n) == q


def test_invalid_partitions():
    with pytest.raises(ModelError):
        canonical([[0], [0, 1]], 2)
    with pytest.raises(ModelError):
        canonical([[0], []], 1)
