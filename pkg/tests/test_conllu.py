import random

import conllu as conllu_package
import pytest

from conftest import EMPTY_NODE, RELCL_BASIC, TALE_GOLD, conllu
from core.conllu import (
    ROOT, Empty, MultiwordRange, Sentence, Token, Word,
    find_violation, parse_deps, parse_document, parse_feats, parse_token_id, read_conllu,
    sentence_from_tokenlist, serialize_document, to_tokenlist, write_conllu,
)
from core.errors import ConlluParseError, InvariantViolation


def test_minimal_sentence():
    sents = parse_document("1\tTale\ttale\tNOUN\tNN\t_\t0\troot\t0:root\t_\n\n")
    assert len(sents) == 1
    (tok,) = sents[0].tokens
    assert tok.id == Word(1)
    assert tok.head == 0
    assert tok.deps == ((ROOT, "root"),)


def test_token_ids():
    assert parse_token_id("2.1") == Empty(2, 1)
    assert parse_token_id("3-4") == MultiwordRange(3, 4)
    assert parse_token_id("12") == Word(12)
    for bad in ("01", "2.0", "4-4", "a", "1.", ""):
        with pytest.raises(ValueError):
            parse_token_id(bad)


def test_parse_deps():
    assert parse_deps("2:nmod:of|4:conj:and") == ((Word(2), "nmod:of"), (Word(4), "conj:and"))
    assert parse_deps("_") == ()
    assert parse_deps("2.1:nsubj") == ((Empty(2, 1), "nsubj"),)
    with pytest.raises(ValueError):
        parse_deps("2nmod")
    with pytest.raises(ValueError):
        parse_deps("1-2:nmod")


@pytest.mark.parametrize("text", [TALE_GOLD, RELCL_BASIC, EMPTY_NODE])
def test_round_trip_is_byte_identical(text):
    assert serialize_document(parse_document(text)) == text


def test_figure_sentence_keeps_both_heads_of_sorrow():
    sorrow = parse_document(TALE_GOLD)[0].tokens[4]
    assert sorrow.deps_text() == "1:nmod:of|3:conj:and"


def test_multiword_round_trip():
    text = conllu(
        "# text = du",
        "1-2 du _ _ _ _ _ _ _ _",
        "1 de de ADP _ _ 2 case 2:case _",
        "2 le le DET _ _ 0 root 0:root _",
    )
    (sent,) = parse_document(text)
    assert sent.tokens[0].is_multiword
    assert sent.n_words == 2
    assert serialize_document([sent]) == text


def test_deps_are_sorted_on_output():
    tok = Token(Word(5), deps=((Word(3), "x"), (Empty(2, 1), "y"), (Word(2), "z")))
    assert tok.deps_text() == "2:z|2.1:y|3:x"
    tied = Token(Word(5), deps=((Word(2), "b"), (Word(2), "a")))
    assert tied.deps_text() == "2:a|2:b"


def test_feats_sorted_case_insensitively():
    tok = Token(Word(1), feats=(("VerbForm", "Fin"), ("abbr", "Yes"), ("Mood", "Ind")))
    assert tok.feats_text() == "abbr=Yes|Mood=Ind|VerbForm=Fin"
    assert tok.feats == (("abbr", "Yes"), ("Mood", "Ind"), ("VerbForm", "Fin"))
    with pytest.raises(ValueError):
        Token(Word(1), feats=(("Case", "Gen"), ("Case", "Nom")))


def test_wrong_column_count_reports_line():
    text = "# sent_id = x\n1\tTale\ttale\tNOUN\tNN\t_\t0\troot\t0:root\n\n"
    with pytest.raises(ConlluParseError) as exc:
        parse_document(text)
    assert exc.value.line_no == 2
    assert "columns" in exc.value.reason


def test_non_consecutive_ids_rejected():
    text = conllu(
        "1 a a X X _ 0 root _ _",
        "3 b b X X _ 1 dep _ _",
    )
    with pytest.raises(ConlluParseError) as exc:
        parse_document(text)
    assert exc.value.line_no == 2


def test_head_out_of_range_rejected():
    text = conllu(
        "1 a a X X _ 0 root _ _",
        "2 b b X X _ 7 dep _ _",
    )
    with pytest.raises(ConlluParseError, match="out of range"):
        parse_document(text)


def test_dangling_empty_head_rejected():
    text = conllu(
        "1 a a X X _ 0 root 0:root _",
        "2 b b X X _ 1 dep 1.1:dep _",
    )
    with pytest.raises(ConlluParseError, match="empty node"):
        parse_document(text)


def test_multiword_with_head_rejected():
    text = conllu(
        "1-2 du _ _ _ _ 0 _ _ _",
        "1 de de ADP _ _ 2 case _ _",
        "2 le le DET _ _ 0 root _ _",
    )
    with pytest.raises(ConlluParseError) as exc:
        parse_document(text)
    assert exc.value.line_no == 1


def test_comment_inside_tokens_rejected():
    text = "1\ta\ta\tX\tX\t_\t0\troot\t_\t_\n# late\n\n"
    with pytest.raises(ConlluParseError):
        parse_document(text)


def test_empty_input():
    assert parse_document("") == []
    assert serialize_document([]) == ""


def test_crlf_and_bytes_accepted():
    expected = parse_document(TALE_GOLD)
    assert parse_document(TALE_GOLD.replace("\n", "\r\n")) == expected
    assert parse_document(TALE_GOLD.encode("utf-8")) == expected


def test_metadata():
    (sent,) = parse_document(TALE_GOLD)
    assert sent.sent_id == "tale"
    assert sent.text == "Tale of joy and sorrow"
    assert sent.forms() == ["Tale", "of", "joy", "and", "sorrow"]


def test_serialize_rejects_broken_sentence():
    broken = Sentence(tokens=(Token(Word(1), head=0, deprel="root"), Token(Word(3), head=1, deprel="dep")))
    with pytest.raises(InvariantViolation) as exc:
        serialize_document([broken])
    assert exc.value.token == "3"


def test_without_empty_nodes(empty_node_sentence):
    stripped = empty_node_sentence.without_empty_nodes()
    assert [str(t.id) for t in stripped.tokens] == ["1", "2", "3", "4"]
    assert stripped.tokens[3].deps == ()
    assert stripped.tokens[0].deps == ((Word(2), "nsubj"),)


def test_read_write_files(tmp_path):
    src = tmp_path / "in.conllu"
    src.write_text(TALE_GOLD, encoding="utf-8")
    out = tmp_path / "out.conllu"
    write_conllu(read_conllu(src), out)
    assert out.read_bytes() == TALE_GOLD.encode("utf-8")


def test_ud_treebank_round_trip(ud_dir):
    files = sorted(ud_dir.rglob("*.conllu"))[:2]
    if not files:
        pytest.skip("no .conllu files under EUDKIT_UD_DIR")
    for path in files:
        text = path.read_bytes().decode("utf-8")
        assert serialize_document(parse_document(text)) == text


def test_parse_feats():
    assert parse_feats("_") == ()
    assert parse_feats("Number=Plur|Case=Nom") == (("Number", "Plur"), ("Case", "Nom"))
    for bad in ("Case", "Case=", "=Nom", "Case=Nom|Case=Gen"):
        with pytest.raises(ValueError):
            parse_feats(bad)


def test_unsorted_feats_survive_round_trip():
    tok = Token(Word(1), form="cats", feats=(("Number", "Plur"), ("Case", "Nom")), head=0, deprel="root")
    sent = Sentence(tokens=(tok,))
    assert parse_document(serialize_document([sent])) == [sent]


def test_tokenlist_conversion(tale_gold, empty_node_sentence):
    for sent in (tale_gold, empty_node_sentence):
        tokenlist = to_tokenlist(sent)
        assert tokenlist.metadata["sent_id"] == sent.sent_id
        assert sentence_from_tokenlist(tokenlist) == sent


def test_sentence_from_conllu_package_parse():
    (tokenlist,) = conllu_package.parse(TALE_GOLD)
    assert sentence_from_tokenlist(tokenlist) == parse_document(TALE_GOLD)[0]


# ============================================================
# Generated sentences
# ============================================================

LABELS = ("root", "nsubj", "obj", "nmod:of", "obl:because_of", "conj:and", "obl:v:loc", "dep")
FEATS = (("Case", ("Nom", "Gen", "Acc")), ("Number", ("Sing", "Plur")), ("abbr", ("Yes",)),
         ("PronType", ("Rel", "Int,Rel")), ("VerbForm", ("Fin", "Part")))


def random_sentence(rng, index):
    n_words = rng.randint(1, 7)
    empties = {b: rng.randint(0, 2) if rng.random() < 0.3 else 0 for b in range(1, n_words + 1)}
    empty_ids = [Empty(b, s) for b in range(1, n_words + 1) for s in range(1, empties[b] + 1)]
    node_ids = [Word(i) for i in range(1, n_words + 1)] + empty_ids

    def feats():
        chosen = rng.sample(FEATS, rng.randint(0, 3))
        return tuple((key, rng.choice(values)) for key, values in chosen)

    def deps(own):
        heads = [h for h in [ROOT] + node_ids if h != own]
        picked = rng.sample(heads, min(len(heads), rng.randint(0, 2)))
        return tuple({(h, rng.choice(LABELS)) for h in picked})

    tokens = []
    next_range = 1
    for i in range(1, n_words + 1):
        if i >= next_range and i < n_words and rng.random() < 0.25:
            end = rng.randint(i + 1, n_words)
            tokens.append(Token(MultiwordRange(i, end), form=f"mw{i}", misc=rng.choice(("_", "SpaceAfter=No"))))
            next_range = end + 1
        word = Word(i)
        tokens.append(Token(
            word, form=f"w{i}", lemma=f"l{i}", upos=rng.choice(("NOUN", "VERB", "_")), xpos="_",
            feats=feats(), head=rng.choice([None] + list(range(0, n_words + 1))),
            deprel=rng.choice(LABELS), deps=deps(word),
        ))
        for s in range(1, empties[i] + 1):
            empty = Empty(i, s)
            tokens.append(Token(empty, form=f"e{i}.{s}", lemma="_", upos="VERB", feats=feats(), deps=deps(empty)))
    sent = Sentence(tokens=tuple(tokens), comments=(f"# sent_id = gen-{index}",))
    assert find_violation(sent.tokens) is None
    return sent


def test_generated_sentences_round_trip():
    rng = random.Random(11)
    sentences = [random_sentence(rng, i) for i in range(300)]
    text = serialize_document(sentences)
    assert parse_document(text) == sentences
    assert serialize_document(parse_document(text)) == text
