"""Scoring fixtures hand-computed against the reference chunk evaluator."""
import pytest

from lexner.corpus import Mention, Sentence, TagScheme
from lexner.errors import DataError, SchemeError
from lexner.evaluation import evaluate, evaluate_by_group


def sent(words, tags):
    return Sentence.from_words(words, tags=tags)


FIVE = ["John", "Smith", "lives", "in", "Oslo"]
GOLD5 = ["B-PER", "L-PER", "O", "O", "U-LOC"]


class TestFixtures:
    def test_exact_match(self):
        r = evaluate([sent(FIVE, GOLD5)], [GOLD5])
        assert (r.tp, r.fp, r.fn) == (2, 0, 0)
        assert r.precision == 100.0 and r.recall == 100.0 and r.f1 == 100.0
        assert r.text().splitlines()[0] == (
            "processed 5 tokens with 2 phrases; found: 2 phrases; correct: 2.")
        assert r.text().splitlines()[1] == (
            "accuracy: 100.00%; precision: 100.00%; recall: 100.00%; FB1: 100.00")

    def test_type_mismatch(self):
        pred = ["B-ORG", "L-ORG", "O", "O", "U-LOC"]
        r = evaluate([sent(FIVE, GOLD5)], [pred])
        assert (r.tp, r.fp, r.fn) == (1, 1, 1)
        assert f"{r.precision:.2f}" == "50.00"
        assert f"{r.recall:.2f}" == "50.00"
        assert f"{r.f1:.2f}" == "50.00"
        assert f"{r.accuracy:.2f}" == "60.00"
        assert (r.per_type["LOC"].tp, r.per_type["LOC"].fp) == (1, 0)
        assert (r.per_type["ORG"].tp, r.per_type["ORG"].fp) == (0, 1)
        assert r.per_type["PER"].fn == 1
        assert r.per_type["PER"].f1 == 0.0

    def test_boundary_mismatch(self):
        pred = ["U-PER", "O", "O", "O", "U-LOC"]
        r = evaluate([sent(FIVE, GOLD5)], [pred])
        assert (r.tp, r.fp, r.fn) == (1, 1, 1)
        assert f"{r.precision:.2f}" == "50.00"
        assert f"{r.recall:.2f}" == "50.00"
        assert f"{r.f1:.2f}" == "50.00"
        assert f"{r.accuracy:.2f}" == "60.00"
        assert r.per_type["PER"].found == 1 and r.per_type["PER"].tp == 0

    def test_lenient_prediction_repair(self):
        gold = [
            sent(["Ada", "Lovelace", "wrote"], ["B-PER", "L-PER", "O"]),
            sent(["see", "old", "Oslo"], ["O", "O", "U-LOC"]),
        ]
        # orphan I opens a mention; unterminated I closes at sentence end,
        # both repairs recover the gold spans exactly
        pred = [["I-PER", "L-PER", "O"], ["O", "O", "I-LOC"]]
        r = evaluate(gold, pred)
        assert (r.tp, r.fp, r.fn) == (2, 0, 0)
        assert r.f1 == 100.0
        assert f"{r.accuracy:.2f}" == "66.67"
        line = r.text().splitlines()[1]
        assert line == (
            "accuracy:  66.67%; precision: 100.00%; recall: 100.00%; FB1: 100.00")

    def test_empty_prediction(self):
        pred = ["O"] * 5
        r = evaluate([sent(FIVE, GOLD5)], [pred])
        assert (r.tp, r.fp, r.fn) == (0, 0, 2)
        assert r.precision == 0.0 and r.recall == 0.0 and r.f1 == 0.0
        assert f"{r.accuracy:.2f}" == "40.00"
        assert r.text().splitlines()[0] == (
            "processed 5 tokens with 2 phrases; found: 0 phrases; correct: 0.")
        assert r.text().splitlines()[1] == (
            "accuracy:  40.00%; precision:   0.00%; recall:   0.00%; FB1:   0.00")

    def test_one_correct_one_spurious(self):
        gold = [sent(FIVE, GOLD5)]
        pred = [["B-PER", "L-PER", "U-MISC", "O", "O"]]
        r = evaluate(gold, pred)
        assert (r.tp, r.fp, r.fn) == (1, 1, 1)
        assert r.precision == 50.0 and r.recall == 50.0 and r.f1 == 50.0


class TestContracts:
    def test_identity_is_perfect(self):
        gold = [sent(FIVE, GOLD5), sent(["x"], ["O"])]
        r = evaluate(gold, gold)
        assert r.precision == r.recall == r.f1 == 100.0
        assert r.accuracy == 100.0

    def test_swap_swaps_precision_recall(self):
        gold = [sent(FIVE, GOLD5)]
        pred_tags = ["B-PER", "L-PER", "O", "O", "O"]
        pred = [sent(FIVE, pred_tags)]
        fwd = evaluate(gold, pred)
        rev = evaluate(pred, gold)
        assert fwd.precision == rev.recall
        assert fwd.recall == rev.precision
        assert fwd.f1 == rev.f1

    def test_gold_must_be_strict(self):
        with pytest.raises(SchemeError):
            evaluate([sent(["a", "b"], ["I-PER", "L-PER"])], [["O", "O"]])

    def test_sentence_count_mismatch(self):
        with pytest.raises(DataError):
            evaluate([sent(["a"], ["O"])], [])

    def test_token_count_mismatch_names_sentence(self):
        gold = [sent(["a"], ["O"]), sent(["b", "c"], ["O", "O"])]
        with pytest.raises(DataError) as err:
            evaluate(gold, [["O"], ["O"]])
        assert "sentence 1" in str(err.value)

    def test_pred_sentences_without_tags(self):
        gold = [sent(["a"], ["O"])]
        with pytest.raises(DataError):
            evaluate(gold, [Sentence.from_words(["a"])])

    def test_gold_mentions_accepted_directly(self):
        g = Sentence.from_words(FIVE, mentions=[Mention(0, 2, "PER"), Mention(4, 5, "LOC")])
        r = evaluate([g], [GOLD5])
        assert r.f1 == 100.0

    def test_iob2_scheme(self):
        gold = [sent(["a", "b", "c"], ["B-PER", "I-PER", "O"])]
        r = evaluate(gold, [["B-PER", "I-PER", "O"]], scheme=TagScheme.IOB2)
        assert r.f1 == 100.0


class TestGroups:
    def test_single_group_equals_overall(self):
        gold = [sent(FIVE, GOLD5)]
        r = evaluate_by_group(gold, [GOLD5], lambda s: "news")
        assert set(r.per_group) == {"news"}
        g = r.per_group["news"]
        assert (g.tp, g.fp, g.fn) == (r.tp, r.fp, r.fn)

    def test_two_perfect_groups(self):
        gold = [
            Sentence.from_words(["a", "b"], tags=["B-PER", "L-PER"], doc_index=0),
            Sentence.from_words(["c"], tags=["U-LOC"], doc_index=1),
        ]
        pred = [["B-PER", "L-PER"], ["U-LOC"]]
        r = evaluate_by_group(gold, pred, lambda s: f"doc{s.doc_index}")
        assert r.per_group["doc0"].f1 == 100.0
        assert r.per_group["doc1"].f1 == 100.0

    def test_empty_group_is_all_zero(self):
        gold = [sent(["quiet", "here"], ["O", "O"])]
        r = evaluate_by_group(gold, [["O", "O"]], lambda s: "empty")
        g = r.per_group["empty"]
        assert (g.tp, g.fp, g.fn) == (0, 0, 0)
        assert g.precision == g.recall == g.f1 == 0.0
