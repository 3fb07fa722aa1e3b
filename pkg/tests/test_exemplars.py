import pytest

from xlqg.errors import BankKeyError, ExemplarPoolError
from xlqg.exemplars import (
    DictionaryTranslator,
    ExemplarBank,
    ExemplarSet,
    build_english_bank,
    build_target_bank,
    build_translated_bank,
    build_typeless_bank,
    select_exemplars,
)
from xlqg.qtypes import QUESTION_TYPES, TYPELESS, QuestionType, TypedQuestion
from xlqg.toy import TOY_TGT, toy_translator


def typed_pool(per_type=20):
    pool = []
    for qtype in QUESTION_TYPES:
        for i in range(per_type):
            pool.append(TypedQuestion(f"{qtype.value.lower()} question {i} ?", qtype))
    return pool


def test_bank_cardinality():
    bank = build_english_bank(typed_pool(), sizes=(1, 5, 10, 15), seeds=range(5))
    assert len(bank) == 8 * 4 * 5


def test_bank_determinism():
    a = build_english_bank(typed_pool(), sizes=(5,), seeds=(0, 1))
    b = build_english_bank(typed_pool(), sizes=(5,), seeds=(0, 1))
    assert a.sets.keys() == b.sets.keys()
    for key in a.sets:
        assert a.sets[key].questions == b.sets[key].questions


def test_insufficient_pool_names_the_type():
    pool = typed_pool(3)
    pool = [tq for tq in pool if tq.qtype is not QuestionType.WHY] \
        + [TypedQuestion("why question 0 ?", QuestionType.WHY)]
    with pytest.raises(ExemplarPoolError) as err:
        build_english_bank(pool, sizes=(3,), seeds=(0,))
    assert err.value.qtype is QuestionType.WHY


def test_sets_have_no_duplicates_and_fixed_order():
    bank = build_english_bank(typed_pool(), sizes=(10,), seeds=(0,))
    for exemplar_set in bank.sets.values():
        assert len(set(exemplar_set.questions)) == exemplar_set.size
        again = select_exemplars(bank, "en", exemplar_set.qtype, 10, 0)
        assert again.questions == exemplar_set.questions


def test_different_sizes_are_independent_draws():
    bank = build_english_bank(typed_pool(), sizes=(5, 10), seeds=(0,))
    pool = set(bank.pools[("en", "What")])
    five = select_exemplars(bank, "en", QuestionType.WHAT, 5, 0)
    ten = select_exemplars(bank, "en", QuestionType.WHAT, 10, 0)
    # independent draws from the same pool; nesting is NOT guaranteed
    assert set(five.questions) <= pool
    assert set(ten.questions) <= pool


def test_missing_key_lists_available_pairs():
    bank = build_english_bank(typed_pool(), sizes=(5,), seeds=(0, 1))
    with pytest.raises(BankKeyError) as err:
        select_exemplars(bank, "en", QuestionType.WHAT, 20, 0)
    assert (5, 0) in err.value.available and (5, 1) in err.value.available


def test_round_trip_is_byte_exact(tmp_path):
    bank = build_english_bank(typed_pool(), sizes=(1, 5), seeds=(0, 1, 2))
    path = bank.save(tmp_path / "bank.json")
    again = ExemplarBank.load(path)
    assert again.sets.keys() == bank.sets.keys()
    for key in bank.sets:
        assert again.sets[key].questions == bank.sets[key].questions
        assert again.provenance[key] == bank.provenance[key]
    assert again.pools == bank.pools
    # a second save is byte-identical
    second = again.save(tmp_path / "bank2.json")
    assert second.read_bytes() == path.read_bytes()


TGT_LEADS = {
    "kiam": "when", "kie": "where", "kio": "what", "kiu": "which",
    "kiun": "who", "kial": "why", "kiel": "how did", "kiom": "how many",
}


def test_target_bank_stores_original_strings():
    questions = [f"{lead} demando {i} ?" for lead in TGT_LEADS for i in range(8)]
    translator = DictionaryTranslator(word_table={**TGT_LEADS, "demando": "question"})
    bank = build_target_bank(questions, "sw", translator, sizes=(5,), seeds=(2,))
    assert len(bank) == 8
    who_set = select_exemplars(bank, "sw", QuestionType.WHO, 5, 2)
    assert all(q.startswith("kiun") for q in who_set.questions)
    assert bank.provenance[who_set.key] == "human-written"


def test_target_bank_missing_type_names_it():
    questions = [f"{lead} demando {i} ?" for lead in TGT_LEADS
                 if lead != "kiun" for i in range(8)]
    translator = DictionaryTranslator(word_table={**TGT_LEADS, "demando": "question"})
    with pytest.raises(ExemplarPoolError) as err:
        build_target_bank(questions, "sw", translator, sizes=(5,), seeds=(2,))
    assert err.value.qtype is QuestionType.WHO


def test_target_bank_drops_untypeable_translations():
    questions = ["kiam unu ?", "cxu vere ?"]  # second translates to a yes/no lead
    translator = DictionaryTranslator(word_table={"kiam": "when", "cxu": "is",
                                                  "vere": "it true"})
    with pytest.raises(ExemplarPoolError):
        # only one type has any pool at all, others empty
        build_target_bank(questions, "sw", translator, sizes=(1,), seeds=(0,))


def test_toy_target_bank_covers_all_types():
    from xlqg.toy import generate_toy_corpus

    corpus = generate_toy_corpus(TOY_TGT, 160, seed=4)
    bank = build_target_bank([ex.question for ex in corpus], TOY_TGT,
                             toy_translator(), sizes=(1, 5), seeds=(0,))
    assert len(bank) == 16
    one = select_exemplars(bank, TOY_TGT, QuestionType.HOW_NUMBER, 1, 0)
    assert one.questions[0].split()[0] == "kiom"


def test_typeless_bank_sizes():
    exemplar_set = build_typeless_bank(typed_pool(), per_type=2, seed=0)
    assert exemplar_set.size == 16
    assert exemplar_set.qtype == TYPELESS
    single = build_typeless_bank(typed_pool(), per_type=1, seed=0)
    assert single.size == 8
    again = build_typeless_bank(typed_pool(), per_type=2, seed=0)
    assert again.questions == exemplar_set.questions


def test_translated_bank_provenance():
    translator = DictionaryTranslator(word_table={"what": "kio", "question": "demando"})
    bank = build_translated_bank(typed_pool(), "eo-like", translator,
                                 sizes=(2,), seeds=(0,))
    key = ("eo-like", "What", 2, 0)
    assert bank.provenance[key] == "machine-translated"
    assert all(q.startswith("kio") for q in bank.sets[key].questions)


def test_duplicate_key_rejected():
    bank = ExemplarBank()
    exemplar_set = ExemplarSet("en", QuestionType.WHO, 1, 0, ("who is it ?",))
    bank.add(exemplar_set, "human-written")
    with pytest.raises(ValueError):
        bank.add(exemplar_set, "human-written")


def test_set_size_invariant():
    with pytest.raises(ValueError):
        ExemplarSet("en", QuestionType.WHO, 3, 0, ("a ?", "b ?"))
    with pytest.raises(ValueError):
        ExemplarSet("en", QuestionType.WHO, 2, 0, ("a ?", "a ?"))
