import itertools
from fractions import Fraction

import numpy as np
import pytest

from conftest import conllu
from core.conllu import parse_document
from core.enhancer import RuleSet
from core.errors import InvariantViolation, TokenizationMismatch
from core.tree_ensemble import EnsembleInput, combine, is_valid_tree, select_best_ensemble


def tree(heads, labels=None, forms=None, upos=None):
    n = len(heads)
    labels = labels or ["root" if h == 0 else "dep" for h in heads]
    forms = forms or [f"w{i}" for i in range(1, n + 1)]
    upos = upos or ["X"] * n
    rows = [
        f"{i} {forms[i - 1]} {forms[i - 1].lower()} {upos[i - 1]} _ _ {heads[i - 1]} {labels[i - 1]} _ _"
        for i in range(1, n + 1)
    ]
    return parse_document(conllu(*rows))[0]


def heads_of(sentence):
    return [t.head for t in sentence.words()]


def random_tree(rng, n):
    order = [int(x) for x in rng.permutation(n) + 1]
    heads = [0] * n
    for pos, d in enumerate(order[1:], start=1):
        heads[d - 1] = order[int(rng.integers(pos))]
    return heads


def brute_force_best(members, weights):
    """Maximum total vote weight over all trees built from voted heads."""
    n = len(members[0])
    votes = [{} for _ in range(n)]
    for heads, w in zip(members, weights):
        for d, h in enumerate(heads):
            votes[d][h] = votes[d].get(h, Fraction(0)) + Fraction(w)
    best = None
    for assignment in itertools.product(*[sorted(v) for v in votes]):
        if is_valid_tree(assignment):
            total = sum(votes[d][h] for d, h in enumerate(assignment))
            best = total if best is None else max(best, total)
    return best, votes


def vote_weight(heads, votes):
    return sum(votes[d].get(h, Fraction(0)) for d, h in enumerate(heads))


def test_is_valid_tree():
    assert is_valid_tree([0, 1, 2])
    assert is_valid_tree([2, 0, 2])
    assert not is_valid_tree([])
    assert not is_valid_tree([0, 0])
    assert not is_valid_tree([2, 1])
    assert not is_valid_tree([0, 3, 2])
    assert not is_valid_tree([0, 5])
    assert not is_valid_tree([0, 2])


def test_identical_members(tale_basic):
    doc = [tale_basic]
    assert combine(EnsembleInput((doc, doc, doc))) == doc


def test_majority_head_wins():
    a = tree([2, 0, 2, 2, 2])
    c = tree([5, 0, 2, 2, 2])
    (out,) = combine(EnsembleInput(([a], [a], [c])))
    assert heads_of(out) == [2, 0, 2, 2, 2]


def test_deprel_voted_among_members_with_the_chosen_head():
    a = tree([0, 1, 1], labels=["root", "nmod", "dep"])
    b = tree([0, 1, 1], labels=["root", "obl", "dep"])
    c = tree([0, 3, 1], labels=["root", "nsubj", "dep"])
    (tied,) = combine(EnsembleInput(([a], [b], [c])))
    assert tied.tokens[1].deprel == "nmod"
    (weighted,) = combine(EnsembleInput(([a], [b], [c]), weights=(1, 2, 1)))
    assert weighted.tokens[1].deprel == "obl"


def test_other_columns_are_pluralities():
    a = tree([0, 1], upos=["NOUN", "ADJ"])
    b = tree([0, 1], upos=["VERB", "ADJ"])
    c = tree([0, 1], upos=["VERB", "ADV"])
    (out,) = combine(EnsembleInput(([a], [b], [c])))
    assert [t.upos for t in out.tokens] == ["VERB", "ADJ"]


def test_cycle_is_repaired_to_heaviest_tree():
    members = [[0, 1, 2], [0, 3, 1], [3, 3, 0]]
    # per-word majorities are [0, 3, 2]: a 2 <-> 3 cycle
    (out,) = combine(EnsembleInput(tuple([tree(h)] for h in members)))
    heads = heads_of(out)
    assert is_valid_tree(heads)
    best, votes = brute_force_best(members, (1, 1, 1))
    assert vote_weight(heads, votes) == best
    assert heads == [0, 3, 1]


def test_tied_repairs_prefer_lower_members():
    members = [[2, 3, 0], [2, 0, 1], [0, 3, 1]]
    # voted heads [2, 3, 1] form a cycle; all three member trees weigh 5
    best, votes = brute_force_best(members, (1, 1, 1))
    assert all(vote_weight(m, votes) == best for m in members)
    (out,) = combine(EnsembleInput(tuple([tree(h)] for h in members)))
    assert heads_of(out) == [2, 3, 0]

    (rotated,) = combine(EnsembleInput(tuple([tree(h)] for h in members[1:] + members[:1])))
    assert heads_of(rotated) == [2, 0, 1]


def test_random_ties_follow_member_order():
    rng = np.random.default_rng(29)
    for _ in range(300):
        n = int(rng.integers(2, 6))
        members = [random_tree(rng, n) for _ in range(3)]
        best, votes = brute_force_best(members, (1, 1, 1))
        rank = [{} for _ in range(n)]
        for k, heads in enumerate(members):
            for d, h in enumerate(heads):
                rank[d].setdefault(h, k)
        tied = [
            list(a) for a in itertools.product(*[sorted(v) for v in votes])
            if is_valid_tree(a) and vote_weight(a, votes) == best
        ]
        expected = min(tied, key=lambda a: [rank[d][h] for d, h in enumerate(a)])
        (out,) = combine(EnsembleInput(tuple([tree(h)] for h in members)))
        assert heads_of(out) == expected


def test_random_ensembles_give_heaviest_valid_trees():
    rng = np.random.default_rng(13)
    for _ in range(500):
        n = int(rng.integers(1, 6))
        members = [random_tree(rng, n) for _ in range(3)]
        weights = tuple(int(w) for w in rng.integers(1, 4, size=3))
        (out,) = combine(EnsembleInput(tuple([tree(h)] for h in members), weights=weights))
        heads = heads_of(out)
        assert is_valid_tree(heads)
        best, votes = brute_force_best(members, weights)
        assert vote_weight(heads, votes) == best
        for d in range(n):
            if len({m[d] for m in members}) == 1:
                assert heads[d] == members[0][d]

        (scaled,) = combine(EnsembleInput(tuple([tree(h)] for h in members), weights=tuple(3 * w for w in weights)))
        assert scaled == out


def test_no_valid_tree_anywhere():
    broken = tree([0, 3, 2])
    with pytest.raises(InvariantViolation):
        combine(EnsembleInput(([broken], [broken])))


def test_missing_head(fragmented_system):
    with pytest.raises(InvariantViolation):
        combine(EnsembleInput((fragmented_system, fragmented_system)))


def test_input_validation():
    a = tree([0, 1])
    with pytest.raises(TokenizationMismatch):
        EnsembleInput(([a], [tree([0, 1], forms=["w1", "other"])]))
    with pytest.raises(TokenizationMismatch):
        EnsembleInput(([a], [a, a]))
    with pytest.raises(ValueError):
        EnsembleInput(())
    with pytest.raises(ValueError):
        EnsembleInput(([a], [a]), weights=(1,))
    with pytest.raises(ValueError):
        EnsembleInput(([a], [a]), weights=(1, 0))
    assert EnsembleInput(([a], [a]), weights=(0.5, 2)).fractions == (Fraction(1, 2), Fraction(2))


def test_select_best_ensemble(tale_basic):
    gold = parse_document(conllu(
        "1 Tale tale NOUN NN _ 0 root 0:root _",
        "2 of of ADP IN _ 3 case 3:case _",
        "3 joy joy NOUN NN _ 1 nmod 1:nmod _",
        "4 and and CCONJ CC _ 5 cc 5:cc _",
        "5 sorrow sorrow NOUN NN _ 3 conj 3:conj _",
    ))
    flat = tree([0, 1, 1, 1, 1], forms=["Tale", "of", "joy", "and", "sorrow"])
    candidates = [("flat", [flat]), ("good", [tale_basic])]

    names, frame = select_best_ensemble(candidates, gold, sizes=(1, 3), rules=RuleSet())
    assert names == ("good",)
    assert frame["members"].tolist() == ["flat", "good"]
    assert frame.loc[1, "f1"] == pytest.approx(100.0)

    names, frame = select_best_ensemble(candidates, gold, sizes=(2,))
    assert len(frame) == 1
    assert names == ("flat", "good")

    with pytest.raises(ValueError):
        select_best_ensemble(candidates, gold, sizes=(5,))
