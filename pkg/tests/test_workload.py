"""The workload file format, the generator's shape guarantees, and the
synthetic text source."""
import pytest

from chainreview.errors import WorkloadError
from chainreview.workload import (
    ArticleAction,
    CommentAction,
    UserAction,
    build_alpha_workload,
    format_workload,
    parse_workload,
    synth_text,
)

SAMPLE = """
# demo workload
seed 99
group g1
user u01 expert g1
user u02 scholar g1
article art01 u02 g1 words=200
review art01 quorum=1 ratio=1/2
endorse art01 u01 favorable
comment art01 u02 words=20
annotate art01 u01 words=10
modify art01 u02 words=180
"""


def test_parse_sample():
    spec = parse_workload(SAMPLE)
    assert spec.seed == 99
    assert spec.counts() == {
        "group": 1, "user": 2, "article": 1, "review": 1,
        "endorse": 1, "comment": 1, "annotation": 1, "modify": 1,
    }
    article = [a for a in spec.actions if isinstance(a, ArticleAction)][0]
    assert article.words == 200 and article.uploader == "u02"


def test_format_parse_roundtrip():
    spec = build_alpha_workload(users=7, articles=4, comments=5, annotations=3, groups=2)
    again = parse_workload(format_workload(spec))
    assert again.actions == spec.actions
    assert again.seed == spec.seed


@pytest.mark.parametrize(
    "line,fragment",
    [
        ("user u01 wizard g1", "unknown role"),
        ("article a1 u1 g1 words=ten", "malformed"),
        ("review a1 quorum=1 ratio=half", "malformed"),
        ("endorse a1 u1 maybe", "unknown verdict"),
        ("teleport a1", "unknown action"),
        ("article a1 u1", "malformed"),
    ],
)
def test_malformed_lines_carry_line_numbers(line, fragment):
    with pytest.raises(WorkloadError) as exc:
        parse_workload("group g1\n" + line)
    assert fragment in str(exc.value)
    assert exc.value.line_no == 2


def test_alpha_shape_counts():
    spec = build_alpha_workload()
    counts = spec.counts()
    assert counts["user"] == 23
    assert counts["article"] == 19
    assert counts["comment"] == 31
    assert counts["annotation"] == 49
    assert counts["review"] == 19


def test_alpha_population_has_enough_experts_per_group():
    spec = build_alpha_workload()
    experts_by_group = {}
    for action in spec.actions:
        if isinstance(action, UserAction) and action.role == "expert":
            for group in action.groups:
                experts_by_group[group] = experts_by_group.get(group, 0) + 1
    assert all(count >= 3 for count in experts_by_group.values())


def test_comments_only_reference_generated_articles():
    spec = build_alpha_workload()
    articles = {a.article_id for a in spec.actions if isinstance(a, ArticleAction)}
    for action in spec.actions:
        if isinstance(action, CommentAction):
            assert action.article_id in articles


def test_synth_text_is_deterministic_and_sized():
    a = synth_text(5, "article/x/1", 300)
    b = synth_text(5, "article/x/1", 300)
    c = synth_text(5, "article/x/2", 300)
    assert a == b and a != c
    word_count = len(a.split())
    assert 280 <= word_count <= 330
    assert a.count(".") >= 12  # enough sentences for extractive stubs
