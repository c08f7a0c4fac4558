# core/enhancer.py
"""
Heuristic enhancer: copy the basic tree and rewrite / add edges.

Rules (each optional, see RuleSet):
  case-lemma   nmod/obl label gains the lowercased lemma(s) of the case dependent(s)
  case-feat    nmod/obl label gains the lowercased Case feature value of the dependent
  conj-lemma   conj label gains the lowercased lemma of the cc dependent
  relcl-ref    antecedent --ref--> relative pronoun, and the antecedent takes the pronoun's roles

The two case rules never run together. Rules only add edges or rewrite
labels, so a tree-derived graph stays connected.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import pandas as pd

from core.conllu import Sentence, Token
from core.errors import GraphError
from core.eud_graph import Edge, EnhancedGraph, to_sentence
from core.eval_elas import ElasReport, LabelMode, check_tokenization, score

logger = logging.getLogger(__name__)

CASE_TRIGGERS = ("nmod", "obl")
CONJ_TRIGGER = "conj"
RELCL_PREFIX = "acl:relcl"
REF_LABEL = "ref"


class RuleId(str, Enum):
    # definition order is the tie-break order
    CASE_LEMMA = "case-lemma"
    CASE_FEAT = "case-feat"
    CONJ_LEMMA = "conj-lemma"
    REL_CLAUSE_REF = "relcl-ref"


_RULE_RANK = {rule: i for i, rule in enumerate(RuleId)}


class CaseMode(str, Enum):
    LEMMA = "lemma"
    FEATVALUE = "featvalue"


@dataclass(frozen=True)
class RuleSet:
    enabled: FrozenSet[RuleId] = frozenset()

    def __post_init__(self):
        enabled = frozenset(RuleId(r) for r in self.enabled)
        if {RuleId.CASE_LEMMA, RuleId.CASE_FEAT} <= enabled:
            raise ValueError("case-lemma and case-feat cannot be combined")
        object.__setattr__(self, "enabled", enabled)

    @classmethod
    def parse(cls, text: str) -> "RuleSet":
        """Comma list of rule names; "" or "none" is the empty set."""
        text = (text or "").strip()
        if text in ("", "none"):
            return cls()
        try:
            return cls(frozenset(RuleId(part.strip()) for part in text.split(",") if part.strip()))
        except ValueError as e:
            known = ", ".join(r.value for r in RuleId)
            raise ValueError(f"{e} (known rules: {known})") from None

    def ordered(self) -> Tuple[RuleId, ...]:
        return tuple(sorted(self.enabled, key=_RULE_RANK.__getitem__))

    @property
    def sort_key(self) -> Tuple[int, Tuple[int, ...]]:
        return (len(self.enabled), tuple(_RULE_RANK[r] for r in self.ordered()))

    def __contains__(self, rule) -> bool:
        return RuleId(rule) in self.enabled

    def __str__(self) -> str:
        return ",".join(r.value for r in self.ordered()) or "none"


def admissible_rule_sets() -> List[RuleSet]:
    """All 12 subsets without both case rules, smallest first then RuleId order."""
    out = []
    rules = list(RuleId)
    for k in range(len(rules) + 1):
        for combo in itertools.combinations(rules, k):
            if RuleId.CASE_LEMMA in combo and RuleId.CASE_FEAT in combo:
                continue
            out.append(RuleSet(frozenset(combo)))
    return sorted(out, key=lambda rs: rs.sort_key)


# ============================================================
# Basic tree access
# ============================================================

def _word_tokens(sentence: Sentence) -> Dict[int, Token]:
    return {t.id.index: t for t in sentence.words()}


def _basic_children(sentence: Sentence) -> Dict[int, List[Token]]:
    """Basic-tree dependents per head index, in surface order."""
    children: Dict[int, List[Token]] = {}
    for tok in sentence.words():
        if tok.head is not None:
            children.setdefault(tok.head, []).append(tok)
    return children


def _check_derived(graph: EnhancedGraph, sentence: Sentence) -> None:
    if graph.n_words != sentence.n_words:
        raise GraphError(
            f"graph has {graph.n_words} words but the sentence has {sentence.n_words}"
        )


def copy_basic(sentence: Sentence) -> EnhancedGraph:
    """One edge (head, dependent, deprel) per word; empty nodes are left out."""
    edges = []
    for tok in sentence.words():
        if tok.head is None:
            raise GraphError(f"word {tok.id} has no basic head")
        edges.append(Edge(tok.head, tok.id.index, tok.deprel))
    return EnhancedGraph(sentence.n_words, 0, frozenset(edges))


# ============================================================
# Rules
# ============================================================

def _case_suffix(dependent: Token, kids: List[Token], mode: CaseMode) -> Optional[str]:
    markers = [c for c in kids if c.deprel == "case"]
    if not markers:
        return None
    if mode is CaseMode.LEMMA:
        lemmas = [c.lemma.lower() for c in markers if c.lemma != "_"]
        return "_".join(lemmas) or None
    value = dependent.feat("Case")
    return value.lower() if value else None


def apply_case_rule(
    graph: EnhancedGraph, sentence: Sentence, mode: Union[CaseMode, str] = CaseMode.LEMMA
) -> EnhancedGraph:
    mode = CaseMode(mode)
    _check_derived(graph, sentence)
    words = _word_tokens(sentence)
    children = _basic_children(sentence)

    edges = set()
    for e in graph.edges:
        if e.label in CASE_TRIGGERS and e.dependent in words:
            suffix = _case_suffix(words[e.dependent], children.get(e.dependent, []), mode)
            if suffix:
                e = e._replace(label=f"{e.label}:{suffix}")
        edges.add(e)
    return replace(graph, edges=frozenset(edges))


def apply_conj_rule(graph: EnhancedGraph, sentence: Sentence) -> EnhancedGraph:
    _check_derived(graph, sentence)
    children = _basic_children(sentence)

    edges = set()
    for e in graph.edges:
        if e.label == CONJ_TRIGGER:
            # first coordinating conjunction in surface order
            cc = next((c for c in children.get(e.dependent, []) if c.deprel == "cc"), None)
            if cc is not None and cc.lemma != "_":
                e = e._replace(label=f"{CONJ_TRIGGER}:{cc.lemma.lower()}")
        edges.add(e)
    return replace(graph, edges=frozenset(edges))


def _relative_pronoun(kids: Iterable[Token]) -> Optional[Token]:
    for c in kids:
        pron_type = c.feat("PronType")
        if pron_type and "Rel" in pron_type.split(","):
            return c
    return None


def apply_relcl_rule(graph: EnhancedGraph, sentence: Sentence) -> EnhancedGraph:
    _check_derived(graph, sentence)
    words = _word_tokens(sentence)
    children = _basic_children(sentence)

    added = set()
    for e in graph.edges:
        if not e.label.startswith(RELCL_PREFIX) or e.head == 0:
            continue
        # only basic attachments trigger; edges this rule added never do
        if e.dependent not in words or words[e.dependent].head != e.head:
            continue
        antecedent, clause_head = e.head, e.dependent
        pron = _relative_pronoun(children.get(clause_head, []))
        if pron is None:
            continue
        p = pron.id.index
        if p == antecedent:
            continue
        added.add(Edge(antecedent, p, REF_LABEL))
        for f in graph.edges:
            if f.head == clause_head and f.dependent == p:
                added.add(Edge(clause_head, antecedent, f.label))
    return graph.with_edges(added)


# ============================================================
# Whole-sentence enhancement
# ============================================================

def enhance_graph(sentence: Sentence, rules: RuleSet) -> EnhancedGraph:
    """Apply the enabled rules in the fixed order case -> conj -> relcl."""
    graph = copy_basic(sentence)
    if RuleId.CASE_LEMMA in rules:
        graph = apply_case_rule(graph, sentence, CaseMode.LEMMA)
    elif RuleId.CASE_FEAT in rules:
        graph = apply_case_rule(graph, sentence, CaseMode.FEATVALUE)
    if RuleId.CONJ_LEMMA in rules:
        graph = apply_conj_rule(graph, sentence)
    if RuleId.REL_CLAUSE_REF in rules:
        graph = apply_relcl_rule(graph, sentence)
    return graph


def enhance_sentence(sentence: Sentence, rules: RuleSet) -> Sentence:
    base = sentence.without_empty_nodes()
    return to_sentence(enhance_graph(base, rules), base)


def enhance_document(sentences: Iterable[Sentence], rules: RuleSet) -> List[Sentence]:
    return [enhance_sentence(s, rules) for s in sentences]


# ============================================================
# Rule-subset search
# ============================================================

def evaluate_rule_subsets(
    dev_gold: Sequence[Sentence], dev_pred_basic: Sequence[Sentence]
) -> List[Tuple[RuleSet, ElasReport]]:
    """Full-label ELAS of every admissible subset, in admissible order."""
    check_tokenization(dev_gold, dev_pred_basic)
    results = []
    for rules in admissible_rule_sets():
        system = enhance_document(dev_pred_basic, rules)
        results.append((rules, score(dev_gold, system, LabelMode.FULL)))
    return results


def best_rule_subset(
    dev_gold: Sequence[Sentence], dev_pred_basic: Sequence[Sentence]
) -> Tuple[RuleSet, ElasReport]:
    """Argmax by ELAS F1; ties go to the smaller subset, then RuleId order."""
    best: Optional[Tuple[RuleSet, ElasReport]] = None
    for rules, report in evaluate_rule_subsets(dev_gold, dev_pred_basic):
        if best is None or report.f1 > best[1].f1:
            best = (rules, report)
    logger.info("[ENHANCE] best rule subset %s (ELAS F1 %.2f)", best[0], best[1].f1)
    return best


def rule_subset_table(
    dev_gold: Sequence[Sentence], dev_pred_basic: Sequence[Sentence]
) -> pd.DataFrame:
    results = evaluate_rule_subsets(dev_gold, dev_pred_basic)
    best_f1 = max(r.f1 for _, r in results)
    winner = next(str(rs) for rs, r in results if r.f1 == best_f1)
    rows = [
        {
            "rules": str(rs), "size": len(rs.enabled),
            "tp": r.tp, "fp": r.fp, "fn": r.fn,
            "precision": r.precision, "recall": r.recall, "f1": r.f1,
            "best": str(rs) == winner,
        }
        for rs, r in results
    ]
    return pd.DataFrame(rows)
