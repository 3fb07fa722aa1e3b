import pytest

from xlqg.evaluation import (
    CodeSwitchLabel,
    HeuristicIdentifier,
    StubIdentifier,
    code_switch_report,
    contains_interrogative,
    detect_code_switching,
)
from xlqg.qg import GenerationRecord
from xlqg.toy import TOY_SRC, TOY_TGT


def test_figure_style_how_long_case():
    question = "How long ni safari hii ?"
    identifier = StubIdentifier(by_text={question: 0.75})
    assert detect_code_switching(question, "sw", identifier) \
        is CodeSwitchLabel.INTERROGATIVE


def test_fully_english_output_is_full_switch():
    identifier = StubIdentifier(default=0.0)
    assert detect_code_switching("How long is this trip ?", "sw", identifier) \
        is CodeSwitchLabel.FULL


def test_pure_target_question_is_clean():
    identifier = StubIdentifier(default=1.0)
    assert detect_code_switching("safari hii ni ndefu ?", "sw", identifier) \
        is CodeSwitchLabel.NONE


def test_threshold_boundary_is_not_full():
    question = "wapi how"
    identifier = StubIdentifier(by_text={question: 0.70})
    assert detect_code_switching(question, "sw", identifier) \
        is CodeSwitchLabel.INTERROGATIVE
    identifier = StubIdentifier(by_text={question: 0.699})
    assert detect_code_switching(question, "sw", identifier) is CodeSwitchLabel.FULL


def test_constant_full_proportion_never_yields_full():
    identifier = StubIdentifier(default=1.0)
    for question in ("how many ?", "nini hii ?", "when did it start ?"):
        assert detect_code_switching(question, "sw", identifier) \
            is not CodeSwitchLabel.FULL


def test_empty_question_rejected():
    with pytest.raises(ValueError):
        detect_code_switching("  ", "sw", StubIdentifier())


def test_interrogative_matching_is_word_bounded():
    assert contains_interrogative("How long was it ?")
    assert contains_interrogative("tell me WHAT it is")
    assert not contains_interrogative("showhow chowhow")
    assert not contains_interrogative("safari hii ni ndefu")


def test_heuristic_identifier_scripts():
    identifier = HeuristicIdentifier()
    assert identifier.proportion("你好吗", "zh") == 1.0  # pure hanzi
    mixed = identifier.proportion("How long 时间", "zh")
    assert mixed < 0.3  # character-based: 2 hanzi vs 7 latin letters
    assert identifier.proportion("कहाँ है", "hi") == 1.0
    assert identifier.proportion("where है", "hi") == 0.5  # token-based


def test_heuristic_identifier_wordlists():
    identifier = HeuristicIdentifier()
    assert identifier.proportion("kiam mira alvenis ?", TOY_TGT) == 1.0
    assert identifier.proportion("when did mira arrive ?", TOY_SRC) == 1.0
    mixed = identifier.proportion("how long mira alvenis ?", TOY_TGT)
    assert mixed == pytest.approx(0.5)
    with pytest.raises(ValueError):
        identifier.proportion("hello", "xx")


def record(question, language=TOY_TGT):
    return GenerationRecord("id", language, "Who", None, question, "ref ?", 0)


def test_report_percentages_and_recount():
    questions = {
        "kiam mira alvenis ?": 1.0,        # none
        "how long mira restis ?": 0.8,     # interrogative
        "when did mira arrive ?": 0.1,     # full
        "kio tomas konstruas ?": 0.95,     # none
    }
    identifier = StubIdentifier(by_text=questions)
    records = [record(q) for q in questions]
    report = code_switch_report({"modelA": records}, identifier)
    entry = report["modelA"][TOY_TGT]
    assert entry["n"] == 4
    assert entry["counts"] == {"none": 2, "interrogative": 1, "full": 1}
    assert entry["interrogative_pct"] == pytest.approx(25.0)
    assert entry["total_pct"] == pytest.approx(50.0)
    # recount from labels reproduces the report exactly
    labels = [detect_code_switching(q, TOY_TGT, identifier) for q in questions]
    assert entry["counts"]["full"] == sum(l is CodeSwitchLabel.FULL for l in labels)
    assert entry["counts"]["interrogative"] == sum(
        l is CodeSwitchLabel.INTERROGATIVE for l in labels)


def test_report_writes_csv(tmp_path):
    identifier = StubIdentifier(default=1.0)
    records = [record("kiam mira alvenis ?")]
    csv_path = tmp_path / "cs.csv"
    code_switch_report({"m": records}, identifier, csv_path=csv_path)
    lines = csv_path.read_text(encoding="utf-8").strip().splitlines()
    assert lines[0] == "model,language,label,count"
    assert len(lines) == 4  # header + three label rows


def test_report_requires_records():
    with pytest.raises(ValueError):
        code_switch_report({"m": []}, StubIdentifier())


def test_labels_partition_every_question():
    from hypothesis import given, strategies as st

    @given(st.text(alphabet="abc how?", min_size=1).filter(str.strip),
           st.floats(0.0, 1.0))
    def check(question, proportion):
        label = detect_code_switching(question, "sw",
                                      StubIdentifier(default=proportion))
        assert label in CodeSwitchLabel

    check()
