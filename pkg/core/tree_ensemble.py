# core/tree_ensemble.py
"""
Linear combination of basic-tree predictions.

Per word, every member votes for its (head, deprel) with its weight.
  1. head = weighted argmax over voted heads
  2. if that is not a tree with exactly one child of ROOT, take the
     maximum-weight spanning arborescence over voted candidates only,
     trying every voted root child in turn; equally heavy trees are
     ranked word by word by the lowest member proposing each head
  3. if no arborescence exists, use the member tree carrying the most
     vote weight
  4. deprel = weighted plurality among members that chose the final head
LEMMA / UPOS / XPOS / FEATS are weighted pluralities too. Ties go to the
lowest member index. Vote sums use Fractions so ties are exact.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import pandas as pd

from core.config import get_default_config
from core.conllu import Sentence
from core.enhancer import RuleSet, enhance_document
from core.errors import InvariantViolation, TokenizationMismatch
from core.eval_elas import LabelMode, score

logger = logging.getLogger(__name__)

Votes = Dict[int, Dict[int, Fraction]]   # dependent -> head -> summed weight
IntVotes = Dict[int, Dict[int, int]]


# ============================================================
# Input
# ============================================================

@dataclass(frozen=True)
class EnsembleInput:
    members: Tuple[Tuple[Sentence, ...], ...]
    weights: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        members = tuple(tuple(m) for m in self.members)
        if not members:
            raise ValueError("an ensemble needs at least one member")
        weights = tuple(self.weights) if self.weights is not None else (1,) * len(members)
        if len(weights) != len(members):
            raise ValueError(f"{len(weights)} weights for {len(members)} members")
        if any(not w > 0 for w in weights):
            raise ValueError("member weights must be positive")

        first = members[0]
        for k, other in enumerate(members[1:], start=2):
            if len(other) != len(first):
                raise TokenizationMismatch(
                    None, f"member {k} has {len(other)} sentences, member 1 has {len(first)}"
                )
            for i, (a, b) in enumerate(zip(first, other)):
                if a.forms() != b.forms():
                    raise TokenizationMismatch(i, f"member {k} differs from member 1 in word forms")

        object.__setattr__(self, "members", members)
        object.__setattr__(self, "weights", weights)

    @property
    def fractions(self) -> Tuple[Fraction, ...]:
        return tuple(Fraction(w) for w in self.weights)


def _plurality(values: Iterable[Hashable], weights: Sequence[Fraction]) -> Hashable:
    """Weighted plurality; on ties the value first proposed by a lower member wins."""
    total: Dict[Hashable, Fraction] = {}
    first: Dict[Hashable, int] = {}
    for k, (v, w) in enumerate(zip(values, weights)):
        total[v] = total.get(v, Fraction(0)) + w
        first.setdefault(v, k)
    return max(total, key=lambda v: (total[v], -first[v]))


# ============================================================
# Tree checks and repair
# ============================================================

def is_valid_tree(heads: Sequence[int]) -> bool:
    """``heads[i]`` is the head of word i+1; one ROOT child, no cycles, all in range."""
    n = len(heads)
    if n == 0 or sum(1 for h in heads if h == 0) != 1:
        return False
    if any(h < 0 or h > n or h == d for d, h in enumerate(heads, start=1)):
        return False
    G = nx.DiGraph()
    G.add_nodes_from(range(n + 1))
    G.add_edges_from((h, d) for d, h in enumerate(heads, start=1))
    return nx.is_arborescence(G)


def _tree_weight(heads: Sequence[int], votes: Votes) -> Fraction:
    return sum((votes[d].get(h, Fraction(0)) for d, h in enumerate(heads, start=1)), Fraction(0))


def _heaviest_tree(n: int, votes: IntVotes, fixed: Dict[int, int]) -> Optional[Tuple[int, List[int]]]:
    """Heaviest one-root-child tree over voted candidates, honouring ``fixed`` heads."""
    forced_root = [d for d, h in fixed.items() if h == 0]
    if len(forced_root) > 1:
        return None
    root_children = forced_root or [d for d in range(1, n + 1) if 0 in votes[d] and d not in fixed]

    best: Optional[Tuple[int, List[int]]] = None
    for r in root_children:
        G = nx.DiGraph()
        G.add_nodes_from(range(n + 1))
        G.add_edge(0, r, weight=votes[r][0])
        for d in range(1, n + 1):
            if d == r:
                continue
            for h, w in votes[d].items():
                if h != 0 and h != d and fixed.get(d, h) == h:
                    G.add_edge(h, d, weight=w)
        try:
            tree = nx.maximum_spanning_arborescence(G, attr="weight")
        except nx.NetworkXException:
            continue
        heads = [0] * n
        for h, d in tree.edges():
            heads[d - 1] = h
        total = sum(votes[d][h] for d, h in enumerate(heads, start=1))
        if best is None or total > best[0]:
            best = (total, heads)
    return best


def _arborescence_repair(n: int, votes: Votes, first_vote: Dict[int, Dict[int, int]]) -> Optional[List[int]]:
    """
    Maximum-weight tree over voted candidates. Among equally heavy trees the
    one whose heads were proposed by lower member indices wins, compared word
    by word from the left.
    """
    scale = math.lcm(*(w.denominator for per_word in votes.values() for w in per_word.values()))
    int_votes: IntVotes = {d: {h: int(w * scale) for h, w in per_word.items()} for d, per_word in votes.items()}

    found = _heaviest_tree(n, int_votes, {})
    if found is None:
        return None
    target, heads = found

    fixed: Dict[int, int] = {}
    for d in range(1, n + 1):
        better = sorted(
            (h for h in int_votes[d] if first_vote[d][h] < first_vote[d][heads[d - 1]]),
            key=lambda h: first_vote[d][h],
        )
        for h in better:
            trial = _heaviest_tree(n, int_votes, {**fixed, d: h})
            if trial is not None and trial[0] == target:
                heads = trial[1]
                break
        fixed[d] = heads[d - 1]
    return heads


# ============================================================
# Combination
# ============================================================

def _combine_sentence(index: int, sentences: Sequence[Sentence], weights: Sequence[Fraction]) -> Sentence:
    words = [s.words() for s in sentences]
    n = len(words[0])

    votes: Votes = {d: {} for d in range(1, n + 1)}
    first_vote: Dict[int, Dict[int, int]] = {d: {} for d in range(1, n + 1)}
    head_choice = []
    for d in range(1, n + 1):
        proposals = []
        for k, member in enumerate(words):
            h = member[d - 1].head
            if h is None:
                raise InvariantViolation(str(d), f"member {k + 1} has no basic head in sentence {index + 1}")
            votes[d][h] = votes[d].get(h, Fraction(0)) + weights[k]
            first_vote[d].setdefault(h, k)
            proposals.append(h)
        head_choice.append(_plurality(proposals, weights))

    heads = head_choice
    if not is_valid_tree(heads):
        repaired = _arborescence_repair(n, votes, first_vote)
        if repaired is not None:
            logger.debug("[ENSEMBLE] sentence %d: voted heads repaired by arborescence", index + 1)
            heads = repaired
        else:
            valid = [
                [t.head for t in member] for member in words
                if is_valid_tree([t.head for t in member])
            ]
            if not valid:
                raise InvariantViolation(f"sentence {index + 1}", "no member yields a valid tree")
            heads = max(valid, key=lambda hs: _tree_weight(hs, votes))
            logger.warning("[ENSEMBLE] sentence %d: fell back to the heaviest member tree", index + 1)

    tokens_by_word = {}
    for d in range(1, n + 1):
        h = heads[d - 1]
        agreeing = [(member[d - 1], weights[k]) for k, member in enumerate(words) if member[d - 1].head == h]
        deprel = _plurality([t.deprel for t, _ in agreeing], [w for _, w in agreeing])
        column = [member[d - 1] for member in words]
        tokens_by_word[d] = replace(
            column[0],
            head=h,
            deprel=deprel,
            lemma=_plurality([t.lemma for t in column], weights),
            upos=_plurality([t.upos for t in column], weights),
            xpos=_plurality([t.xpos for t in column], weights),
            feats=_plurality([tuple(sorted(t.feats)) for t in column], weights),
            deps=(),
        )

    template = sentences[0].without_empty_nodes()
    tokens = []
    for tok in template.tokens:
        if tok.is_word:
            tok = tokens_by_word[tok.id.index]
        tokens.append(tok)
    return replace(template, tokens=tuple(tokens))


def combine(e: EnsembleInput) -> List[Sentence]:
    weights = e.fractions
    out = [
        _combine_sentence(i, [member[i] for member in e.members], weights)
        for i in range(len(e.members[0]))
    ]
    logger.info("[ENSEMBLE] combined %d members over %d sentences", len(e.members), len(out))
    return out


# ============================================================
# Ensemble selection on development data
# ============================================================

def select_best_ensemble(
    candidates: Sequence[Tuple[str, Sequence[Sentence]]],
    gold: Sequence[Sentence],
    sizes: Iterable[int] = get_default_config().ensemble_sizes,
    rules: Optional[RuleSet] = None,
) -> Tuple[Tuple[str, ...], pd.DataFrame]:
    """
    Score every combination of the named candidates of the given sizes.

    Each combination is combined, enhanced with ``rules`` (default: no rules)
    and scored with full-label ELAS against ``gold``. Returns the names of the
    best combination (first in enumeration order on ties) and one row per
    combination.
    """
    rules = rules if rules is not None else RuleSet()
    sizes = tuple(sizes)
    names = [name for name, _ in candidates]
    docs = [tuple(doc) for _, doc in candidates]

    rows = []
    best: Optional[Tuple[float, Tuple[str, ...]]] = None
    for k in sorted(set(int(s) for s in sizes)):
        if k < 1 or k > len(candidates):
            continue
        for combo in itertools.combinations(range(len(candidates)), k):
            combined = combine(EnsembleInput(tuple(docs[i] for i in combo)))
            report = score(gold, enhance_document(combined, rules), LabelMode.FULL)
            chosen = tuple(names[i] for i in combo)
            rows.append({"members": ",".join(chosen), "size": k, "f1": report.f1})
            if best is None or report.f1 > best[0]:
                best = (report.f1, chosen)
    if best is None:
        raise ValueError(f"no ensemble size in {tuple(sizes)} fits {len(candidates)} candidates")
    logger.info("[ENSEMBLE] best combination %s (ELAS F1 %.2f)", ",".join(best[1]), best[0])
    return best[1], pd.DataFrame(rows)
