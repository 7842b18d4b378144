import pytest

from zerotemp.graph import build_context_graph
from zerotemp.instances import bernoulli2, golden3
from zerotemp.potential import InadmissibleWord, WordTooShort, make_potential
from zerotemp.shift import enumerate_words, full_shift


def test_range_one_contexts_are_symbols():
    g = build_context_graph(*bernoulli2())
    assert g.contexts == ((0,), (1,))
    assert g.n_edges == 4
    # the edge c -> d carries f of the source
    assert [g.weight[g.edge_index[(c, d)]] for c, d in [(0, 1), (1, 0)]] == [0.0, -1.0]


def test_range_three_contexts_are_pairs():
    s = full_shift(2)
    f = make_potential(s, 3, {w: float(-sum(w)) for w in enumerate_words(s, 3)})
    g = build_context_graph(s, f)
    assert g.contexts == ((0, 0), (0, 1), (1, 0), (1, 1))
    e = g.edge_path((0, 1, 1))[0]
    assert g.words[e] == (0, 1, 1) and g.weight[e] == -2.0


def test_edge_path_errors():
    g = build_context_graph(*golden3())
    assert len(g.edge_path((0, 1, 2, 0))) == 3
    with pytest.raises(InadmissibleWord):
        g.edge_path((2, 2))
    s = full_shift(2)
    f = make_potential(s, 3, {w: 0.0 for w in enumerate_words(s, 3)})
    with pytest.raises(WordTooShort):
        build_context_graph(s, f).edge_path((0,))


def test_reversed_graph():
    g = build_context_graph(*golden3())
    r = g.reversed()
    assert sorted(zip(r.dst.tolist(), r.src.tolist(), r.weight.tolist())) == \
        sorted(zip(g.src.tolist(), g.dst.tolist(), g.weight.tolist()))
