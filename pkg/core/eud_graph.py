# core/eud_graph.py
"""
Enhanced-dependency graph over one sentence.

Dense node indices:
  0            notional ROOT
  1..n         words
  n+1..n+m     empty nodes, in document order

so that decoder matrix rows and graph nodes share one index space.
Multiword ranges carry no dependencies and are not nodes.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Dict, FrozenSet, Iterable, List, NamedTuple, Tuple

import networkx as nx

from core.conllu import ROOT, DepsHead, Empty, Sentence, TokenId, Word
from core.errors import GraphError


class Edge(NamedTuple):
    head: int
    dependent: int
    label: str


class NodeIndexer:
    """Bijection TokenId <-> dense node index for one sentence."""

    def __init__(self, sentence: Sentence):
        words = [t.id for t in sentence.tokens if isinstance(t.id, Word)]
        empties = [t.id for t in sentence.tokens if isinstance(t.id, Empty)]
        self.n_words = len(words)
        self.n_empty = len(empties)
        self._ids: List[TokenId] = [ROOT] + words + empties
        self._index: Dict[TokenId, int] = {tid: i for i, tid in enumerate(self._ids)}

    def index_of(self, token_id: DepsHead) -> int:
        try:
            return self._index[token_id]
        except KeyError:
            raise GraphError(f"dangling head reference {token_id}") from None

    def id_of(self, index: int) -> TokenId:
        return self._ids[index]


@dataclass(frozen=True)
class EnhancedGraph:
    n_words: int
    n_empty: int = 0
    edges: FrozenSet[Edge] = frozenset()

    def __post_init__(self):
        if self.n_words < 0 or self.n_empty < 0:
            raise GraphError("node counts must be non-negative")
        edges = frozenset(Edge(int(h), int(d), str(label)) for h, d, label in self.edges)
        n = self.n_nodes
        for e in edges:
            if e.dependent == 0:
                raise GraphError(f"ROOT cannot be a dependent: {e}")
            if e.head == e.dependent:
                raise GraphError(f"self-loop on node {e.head}")
            if not (0 <= e.head < n and 1 <= e.dependent < n):
                raise GraphError(f"edge {e} outside node range 0..{n - 1}")
            if not e.label:
                raise GraphError(f"edge {e} has an empty label")
        object.__setattr__(self, "edges", edges)

    @property
    def n_nodes(self) -> int:
        return self.n_words + self.n_empty + 1

    def sorted_edges(self) -> List[Edge]:
        return sorted(self.edges, key=lambda e: (e.dependent, e.head, e.label))

    def heads_of(self, dependent: int) -> List[Tuple[int, str]]:
        return sorted((e.head, e.label) for e in self.edges if e.dependent == dependent)

    def dependents_of(self, head: int) -> List[Tuple[int, str]]:
        return sorted((e.dependent, e.label) for e in self.edges if e.head == head)

    def with_edges(self, extra: Iterable[Edge]) -> "EnhancedGraph":
        return replace(self, edges=self.edges | frozenset(extra))

    def to_networkx(self) -> nx.DiGraph:
        G = nx.DiGraph()
        G.add_nodes_from(range(self.n_nodes))
        G.add_edges_from((e.head, e.dependent) for e in self.edges)
        return G


@dataclass(frozen=True)
class ReachabilityReport:
    reachable: FrozenSet[int]
    unreachable: FrozenSet[int]
    root_children: FrozenSet[int]

    @property
    def is_connected(self) -> bool:
        return not self.unreachable


def from_sentence(sentence: Sentence) -> EnhancedGraph:
    """One edge per DEPS entry."""
    indexer = NodeIndexer(sentence)
    edges = []
    for tok in sentence.tokens:
        if tok.is_multiword:
            continue
        dep = indexer.index_of(tok.id)
        for head, label in tok.deps:
            edges.append(Edge(indexer.index_of(head), dep, label))
    return EnhancedGraph(indexer.n_words, indexer.n_empty, frozenset(edges))


def to_sentence(graph: EnhancedGraph, template: Sentence) -> Sentence:
    """Rewrite the DEPS column of ``template`` from ``graph``; other columns untouched."""
    indexer = NodeIndexer(template)
    if (indexer.n_words, indexer.n_empty) != (graph.n_words, graph.n_empty):
        raise GraphError(
            f"node-count mismatch: graph has {graph.n_words} words + {graph.n_empty} empty, "
            f"sentence has {indexer.n_words} + {indexer.n_empty}"
        )

    incoming: Dict[int, List[Tuple[DepsHead, str]]] = {}
    for e in graph.edges:
        incoming.setdefault(e.dependent, []).append((indexer.id_of(e.head), e.label))

    tokens = []
    for tok in template.tokens:
        if not tok.is_multiword:
            tok = replace(tok, deps=tuple(incoming.get(indexer.index_of(tok.id), ())))
        tokens.append(tok)
    return replace(template, tokens=tuple(tokens))


def reachability(graph: EnhancedGraph) -> ReachabilityReport:
    """Directed reachability from node 0 by full traversal; cycles alone reach nothing."""
    reached = nx.descendants(graph.to_networkx(), 0)
    everything = set(range(1, graph.n_nodes))
    return ReachabilityReport(
        reachable=frozenset(reached),
        unreachable=frozenset(everything - reached),
        root_children=frozenset(d for d, _ in graph.dependents_of(0)),
    )
