import numpy as np
import pytest

from conftest import conllu
from core.conllu import Empty, Word, parse_document
from core.errors import GraphError
from core.eud_graph import Edge, EnhancedGraph, NodeIndexer, from_sentence, reachability, to_sentence


def graph(n_words, *edges, n_empty=0):
    return EnhancedGraph(n_words, n_empty, frozenset(Edge(*e) for e in edges))


def test_chain_from_sentence():
    (sent,) = parse_document(conllu(
        "1 a a X X _ 0 root 0:root _",
        "2 b b X X _ 1 obj 1:obj _",
    ))
    g = from_sentence(sent)
    assert g.edges == {Edge(0, 1, "root"), Edge(1, 2, "obj")}


def test_figure_sentence_edges(tale_gold):
    g = from_sentence(tale_gold)
    assert Edge(3, 5, "conj:and") in g.edges
    assert Edge(1, 5, "nmod:of") in g.edges
    assert g.heads_of(5) == [(1, "nmod:of"), (3, "conj:and")]
    assert g.dependents_of(1) == [(3, "nmod:of"), (5, "nmod:of")]
    assert g.dependents_of(0) == [(1, "root")]


def test_empty_nodes_follow_words(empty_node_sentence):
    idx = NodeIndexer(empty_node_sentence)
    assert idx.index_of(Empty(2, 1)) == 5
    assert idx.id_of(4) == Word(4)
    g = from_sentence(empty_node_sentence)
    assert (g.n_words, g.n_empty) == (4, 1)
    assert Edge(5, 4, "nsubj") in g.edges
    assert Edge(2, 5, "conj") in g.edges


def test_graph_invariants():
    with pytest.raises(GraphError):
        graph(2, (1, 0, "x"))
    with pytest.raises(GraphError):
        graph(2, (1, 1, "x"))
    with pytest.raises(GraphError):
        graph(2, (0, 3, "x"))
    parallel = graph(2, (1, 2, "a"), (1, 2, "b"))
    assert len(parallel.edges) == 2


def test_round_trip(tale_gold, empty_node_sentence, relcl_basic):
    for s in (tale_gold, empty_node_sentence, relcl_basic):
        assert to_sentence(from_sentence(s), s) == s


def test_added_root_edge_shows_in_deps(tale_gold):
    g = from_sentence(tale_gold).with_edges([Edge(0, 3, "root")])
    out = to_sentence(g, tale_gold)
    assert out.tokens[2].deps_text() == "0:root|1:nmod:of"


def test_node_count_mismatch(tale_gold):
    with pytest.raises(GraphError):
        to_sentence(graph(3, (0, 1, "root")), tale_gold)


def test_random_round_trip(tale_basic):
    rng = np.random.default_rng(7)
    for _ in range(50):
        mask = rng.random((6, 6)) < 0.3
        edges = [(int(h), int(d), "dep") for h, d in zip(*np.nonzero(mask)) if d != 0 and h != d]
        g = graph(5, *edges)
        assert from_sentence(to_sentence(g, tale_basic)) == g


def test_reachability_chain():
    r = reachability(graph(3, (0, 1, "a"), (1, 2, "b"), (2, 3, "c")))
    assert r.is_connected
    assert r.reachable == {1, 2, 3}


def test_reachability_no_path():
    r = reachability(graph(3, (0, 1, "a"), (3, 2, "b")))
    assert r.unreachable == {2, 3}


def test_cycle_is_not_reachable():
    r = reachability(graph(3, (0, 1, "a"), (2, 3, "b"), (3, 2, "c")))
    assert r.unreachable == {2, 3}
    assert r.root_children == {1}


def test_reachability_is_monotone():
    rng = np.random.default_rng(11)
    for _ in range(100):
        n = int(rng.integers(1, 8))
        pairs = [(h, d) for h in range(n + 1) for d in range(1, n + 1) if h != d]
        chosen = [p for p in pairs if rng.random() < 0.25]
        g = graph(n, *[(h, d, "x") for h, d in chosen])
        before = reachability(g)
        assert before.reachable | before.unreachable == set(range(1, n + 1))
        assert not before.reachable & before.unreachable
        h, d = pairs[int(rng.integers(len(pairs)))]
        after = reachability(g.with_edges([Edge(h, d, "y")]))
        assert before.reachable <= after.reachable
