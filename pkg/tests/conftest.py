"""Shared CoNLL-U fixtures."""
from __future__ import annotations

import os
from pathlib import Path
from typing import List

import numpy as np
import pytest

from core.conllu import Sentence, parse_document
from core.sdp_decode import EdgeProbabilities


def conllu(*lines: str) -> str:
    """Build CoNLL-U text; token rows are whitespace-separated, comments verbatim."""
    out = []
    for line in lines:
        if line == "":
            out.append("")
        elif line.startswith("#"):
            out.append(line)
        else:
            cols = line.split()
            assert len(cols) == 10, line
            out.append("\t".join(cols))
    return "\n".join(out) + "\n\n"


TALE_GOLD = conllu(
    "# sent_id = tale",
    "# text = Tale of joy and sorrow",
    "1 Tale tale NOUN NN _ 0 root 0:root _",
    "2 of of ADP IN _ 3 case 3:case _",
    "3 joy joy NOUN NN _ 1 nmod 1:nmod:of _",
    "4 and and CCONJ CC _ 5 cc 5:cc _",
    "5 sorrow sorrow NOUN NN _ 3 conj 1:nmod:of|3:conj:and _",
)

TALE_BASIC = conllu(
    "# sent_id = tale",
    "# text = Tale of joy and sorrow",
    "1 Tale tale NOUN NN _ 0 root _ _",
    "2 of of ADP IN _ 3 case _ _",
    "3 joy joy NOUN NN _ 1 nmod _ _",
    "4 and and CCONJ CC _ 5 cc _ _",
    "5 sorrow sorrow NOUN NN _ 3 conj _ _",
)

RELCL_BASIC = conllu(
    "# sent_id = relcl",
    "# text = the man who arrived left",
    "1 the the DET DT Definite=Def|PronType=Art 2 det _ _",
    "2 man man NOUN NN Number=Sing 5 nsubj _ _",
    "3 who who PRON WP PronType=Rel 4 nsubj _ _",
    "4 arrived arrive VERB VBD _ 2 acl:relcl _ _",
    "5 left leave VERB VBD _ 0 root _ _",
)

EMPTY_NODE = conllu(
    "# sent_id = gapping",
    "# text = Sue likes tea Paul",
    "1 Sue Sue PROPN NNP _ 2 nsubj 2:nsubj _",
    "2 likes like VERB VBZ _ 0 root 0:root _",
    "2.1 likes like VERB VBZ _ _ _ 2:conj _",
    "3 tea tea NOUN NN _ 2 obj 2:obj _",
    "4 Paul Paul PROPN NNP _ 2 conj 2.1:nsubj _",
)

# 0 -> 1; 2 <-> 3 form a cycle; 3 -> 4.  Unreachable: 2, 3, 4.
FRAGMENTED_SYSTEM_ROWS = (
    "1 a a X X _ _ _ 0:root _",
    "2 b b X X _ _ _ 3:dep _",
    "3 c c X X _ _ _ 2:dep _",
    "4 d d X X _ _ _ 3:dep _",
)

FRAGMENTED_GOLD_ROWS = (
    "1 a a X X _ _ _ 0:root _",
    "2 b b X X _ _ _ 1:dep _",
    "3 c c X X _ _ _ 2:dep _",
    "4 d d X X _ _ _ 3:dep _",
)


def repeated(rows, n: int, prefix: str) -> str:
    return "".join(conllu(f"# sent_id = {prefix}-{i}", *rows) for i in range(1, n + 1))


@pytest.fixture
def tale_gold() -> Sentence:
    return parse_document(TALE_GOLD)[0]


@pytest.fixture
def tale_basic() -> Sentence:
    return parse_document(TALE_BASIC)[0]


@pytest.fixture
def relcl_basic() -> Sentence:
    return parse_document(RELCL_BASIC)[0]


@pytest.fixture
def empty_node_sentence() -> Sentence:
    return parse_document(EMPTY_NODE)[0]


@pytest.fixture
def fragmented_system() -> List[Sentence]:
    return parse_document(repeated(FRAGMENTED_SYSTEM_ROWS, 5, "frag"))


@pytest.fixture
def fragmented_gold() -> List[Sentence]:
    return parse_document(repeated(FRAGMENTED_GOLD_ROWS, 5, "frag"))


@pytest.fixture
def ud_dir() -> Path:
    """Directory of downloaded UD .conllu files; skips when EUDKIT_UD_DIR is unset."""
    value = os.environ.get("EUDKIT_UD_DIR")
    if not value or not Path(value).is_dir():
        pytest.skip("EUDKIT_UD_DIR not set")
    return Path(value)


FIGURE_VOCAB = ("root", "case", "nmod:of", "cc", "conj:and")


def figure_probabilities() -> EdgeProbabilities:
    """Scores that reproduce the gold graph of TALE_GOLD at threshold 0.5."""
    n = 6
    probs = np.full((n, n), 0.1)
    probs[0, :] = 0.0
    labels = np.zeros((n, n), dtype=int)
    # (dependent, head): (probability, label index)
    cells = {
        (1, 0): (0.95, 0),
        (2, 3): (0.9, 1),
        (3, 1): (0.8, 2),
        (4, 5): (0.85, 3),
        (5, 1): (0.7, 2),
        (5, 3): (0.75, 4),
    }
    for (i, j), (p, label) in cells.items():
        probs[i, j] = p
        labels[i, j] = label
    return EdgeProbabilities(5, 0, probs, labels, FIGURE_VOCAB, "tale")
