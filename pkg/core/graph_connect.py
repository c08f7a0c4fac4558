# core/graph_connect.py
"""
Make every node of an enhanced graph reachable from the notional ROOT.

Three strategies, all of which only add edges (0, u, "root"):
  naive   - attach every initially unreachable node
  greedy  - repeatedly attach the unreachable node that reaches the most
            unreachable nodes (itself included), first in node order on ties
  oracle  - smallest subset of unreachable nodes whose attachment connects
            the graph, by exhaustive search (bounded by max_nodes)

Node order is the dense index order, so empty nodes come after all words.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Sequence, Tuple, Union

import networkx as nx
import numpy as np
import pandas as pd

from core.config import get_default_config
from core.conllu import Sentence
from core.errors import InstanceTooLarge
from core.eud_graph import Edge, EnhancedGraph, from_sentence, reachability, to_sentence

logger = logging.getLogger(__name__)

ROOT_LABEL = get_default_config().root_label
DEFAULT_MAX_NODES = get_default_config().oracle_max_nodes


class Strategy(str, Enum):
    NAIVE = "naive"
    GREEDY = "greedy"
    ORACLE = "oracle"


@dataclass(frozen=True)
class RepairOutcome:
    repaired: EnhancedGraph
    added_edges: Tuple[Edge, ...]
    strategy: Strategy

    @property
    def n_added(self) -> int:
        return len(self.added_edges)


def _root_edges(nodes: Iterable[int]) -> Tuple[Edge, ...]:
    return tuple(Edge(0, u, ROOT_LABEL) for u in sorted(nodes))


def _outcome(g: EnhancedGraph, nodes: Iterable[int], strategy: Strategy) -> RepairOutcome:
    added = _root_edges(nodes)
    return RepairOutcome(g.with_edges(added), added, strategy)


def _closures(G: nx.DiGraph, nodes: Iterable[int]) -> Dict[int, FrozenSet[int]]:
    """Nodes reachable from each node, the node itself included."""
    return {u: frozenset(nx.descendants(G, u)) | {u} for u in nodes}


# ============================================================
# Strategies
# ============================================================

def connect_naive(g: EnhancedGraph) -> RepairOutcome:
    return _outcome(g, reachability(g).unreachable, Strategy.NAIVE)


def connect_greedy(g: EnhancedGraph) -> RepairOutcome:
    chosen: List[int] = []
    current = g
    while True:
        unreachable = reachability(current).unreachable
        if not unreachable:
            break
        closures = _closures(current.to_networkx(), unreachable)
        # max() keeps the first maximiser in sorted order
        best = max(sorted(unreachable), key=lambda u: len(closures[u] & unreachable))
        chosen.append(best)
        current = current.with_edges([Edge(0, best, ROOT_LABEL)])
    return _outcome(g, chosen, Strategy.GREEDY)


def connect_oracle(g: EnhancedGraph, max_nodes: int = DEFAULT_MAX_NODES) -> RepairOutcome:
    unreachable = reachability(g).unreachable
    if not unreachable:
        return _outcome(g, (), Strategy.ORACLE)
    if len(unreachable) > max_nodes:
        raise InstanceTooLarge(len(unreachable), max_nodes)

    closures = _closures(g.to_networkx(), unreachable)
    candidates = sorted(unreachable)
    for k in range(1, len(candidates) + 1):
        for subset in itertools.combinations(candidates, k):
            covered = frozenset().union(*(closures[u] for u in subset))
            if unreachable <= covered:
                return _outcome(g, subset, Strategy.ORACLE)
    return _outcome(g, candidates, Strategy.ORACLE)


def connect(
    g: EnhancedGraph,
    strategy: Union[Strategy, str] = Strategy.GREEDY,
    max_nodes: int = DEFAULT_MAX_NODES,
) -> RepairOutcome:
    strategy = Strategy(strategy)
    if strategy is Strategy.NAIVE:
        return connect_naive(g)
    if strategy is Strategy.GREEDY:
        return connect_greedy(g)
    return connect_oracle(g, max_nodes)


def connect_sentence(
    sentence: Sentence,
    strategy: Union[Strategy, str] = Strategy.GREEDY,
    max_nodes: int = DEFAULT_MAX_NODES,
) -> Tuple[Sentence, RepairOutcome]:
    outcome = connect(from_sentence(sentence), strategy, max_nodes)
    if not outcome.added_edges:
        return sentence, outcome
    return to_sentence(outcome.repaired, sentence), outcome


def connect_document(
    sentences: Sequence[Sentence],
    strategy: Union[Strategy, str] = Strategy.GREEDY,
    max_nodes: int = DEFAULT_MAX_NODES,
) -> Tuple[List[Sentence], List[RepairOutcome]]:
    repaired, outcomes = [], []
    for s in sentences:
        fixed, outcome = connect_sentence(s, strategy, max_nodes)
        repaired.append(fixed)
        outcomes.append(outcome)
    n_fixed = sum(1 for o in outcomes if o.added_edges)
    logger.info(
        "[CONNECT] %s: %d/%d sentences repaired, %d root edges added",
        Strategy(strategy).value, n_fixed, len(outcomes), sum(o.n_added for o in outcomes),
    )
    return repaired, outcomes


# ============================================================
# Fragmentation statistics
# ============================================================

@dataclass(frozen=True)
class FragmentationStats:
    n_sentences: int
    n_fragmented: int
    n_unreachable: int

    @property
    def connected_share(self) -> float:
        """Percentage of sentences whose graph is fully reachable."""
        if not self.n_sentences:
            return 100.0
        return 100.0 * (self.n_sentences - self.n_fragmented) / self.n_sentences


def fragmentation_stats(sentences: Iterable[Sentence]) -> FragmentationStats:
    n = fragmented = unreachable = 0
    for s in sentences:
        report = reachability(from_sentence(s))
        n += 1
        if not report.is_connected:
            fragmented += 1
            unreachable += len(report.unreachable)
    return FragmentationStats(n, fragmented, unreachable)


# ============================================================
# Randomized comparison harness
# ============================================================

def random_graph(rng: np.random.Generator, n_words: int, density: float) -> EnhancedGraph:
    """Each ordered pair (h, d), d >= 1, h != d, is an edge with probability ``density``."""
    n = n_words + 1
    mask = rng.random((n, n)) < density
    edges = [
        Edge(int(h), int(d), "dep")
        for h, d in zip(*np.nonzero(mask))
        if d != 0 and h != d
    ]
    return EnhancedGraph(n_words, 0, frozenset(edges))


@dataclass(frozen=True)
class HarnessResult:
    frame: pd.DataFrame
    greedy_above_oracle: int


def strategy_harness(
    n_graphs: int = 1000,
    max_words: int = 10,
    max_density: float = 0.4,
    seed: int = 0,
) -> HarnessResult:
    """Added-edge counts of every strategy on random graphs; one row per instance."""
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n_graphs):
        n_words = int(rng.integers(1, max_words + 1))
        density = float(rng.uniform(0.0, max_density))
        g = random_graph(rng, n_words, density)
        rows.append({
            "instance": i,
            "n_words": n_words,
            "density": density,
            "unreachable": len(reachability(g).unreachable),
            "naive": connect_naive(g).n_added,
            "greedy": connect_greedy(g).n_added,
            "oracle": connect_oracle(g, max_nodes=max_words).n_added,
        })
    frame = pd.DataFrame(rows)
    above = int((frame["greedy"] > frame["oracle"]).sum()) if len(frame) else 0
    if above:
        logger.info("[CONNECT] greedy added more edges than the oracle on %d/%d graphs", above, n_graphs)
    return HarnessResult(frame, above)
