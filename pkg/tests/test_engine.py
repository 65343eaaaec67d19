"""Pipeline composition: registration, submission atomicity, policy-gated
reads, tamper alarms, modification history, comments, and replay determinism."""
import pytest

from chainreview import summary as sm
from chainreview.contract import ThresholdConfig
from chainreview.crypto import sm3_digest
from chainreview.engine import ReviewEngine
from chainreview.errors import (
    AuthorizationError,
    ChainReviewError,
    ConsensusFailure,
    DuplicateAccount,
    NotFoundError,
    TamperAlarm,
)
from chainreview.workload import WorkloadSpec, build_alpha_workload, synth_text

from conftest import seeded

ARTICLE_TEXT = synth_text(7, "engine-article", 300)


def make_population(engine: ReviewEngine):
    alice = engine.register_user("alice", role="scholar", groups=("g1",), seed=seeded(1))
    bob = engine.register_user("bob", role="expert", groups=("g1",), seed=seeded(2))
    carol = engine.register_user("carol", role="expert", groups=("g1",), seed=seeded(3))
    dana = engine.register_user("dana", role="scholar", groups=("g1",), seed=seeded(4))
    eve = engine.register_user("eve", role="scholar", seed=seeded(5))  # no group
    return alice, bob, carol, dana, eve


def submitted(engine, uploader, article_id="art-main"):
    engine.submit_article(uploader, ARTICLE_TEXT, "g1", article_id)
    return article_id


# -- registration --


def test_register_funds_names_and_joins_groups(engine):
    creds = engine.register_user("alice", role="expert", groups=("g1",), seed=seeded(1))
    account = engine.ledger.read_account(creds.address)
    gas = engine.config.gas_default_fee
    # The user pays gas only for their own set_name; membership transactions
    # are administrator-signed.
    assert account.balance == engine.config.grant_amount - gas
    user = engine.contract.user(creds.address)
    assert user.display_name == "alice"
    assert user.groups == {"g1"}
    assert creds.address in engine.contract.group("g1").expert_members


def test_register_23_users_all_funded(engine):
    for i in range(23):
        creds = engine.register_user(f"user{i:02d}", seed=seeded(100 + i))
        assert engine.ledger.read_account(creds.address).balance > 0
    assert len(engine.credentials) == 23


def test_seeded_registration_reproduces_address(engine_factory):
    first = engine_factory().register_user("alice", seed=seeded(1))
    second = engine_factory().register_user("alice", seed=seeded(1))
    assert first.address == second.address


def test_duplicate_name_rejected(engine):
    engine.register_user("alice", seed=seeded(1))
    with pytest.raises(DuplicateAccount):
        engine.register_user("alice", seed=seeded(2))


# -- submission --


def test_submit_composes_chain_blob_and_abstract(engine):
    alice, *_ = make_population(engine)
    article_id = submitted(engine, alice)
    entry = engine.contract.file(article_id)
    assert entry.state_flag == 0 and entry.version == 1
    assert entry.plaintext_digest == sm3_digest(ARTICLE_TEXT.encode())
    assert engine.filestore.get_blob(article_id, 1).ciphertext
    assert entry.summary_records  # provenance recorded
    assert entry.abstract_digest == entry.summary_records[-1].digest


def test_submit_end_to_end_integrity_oracle(engine):
    alice, *_ = make_population(engine)
    article_id = submitted(engine, alice)
    entry = engine.contract.file(article_id)
    key = engine._recover_article_key(alice, entry)
    report = engine.filestore.verify_integrity(article_id, 1, key, entry.plaintext_digest)
    assert report.ok


def test_consensus_failure_leaves_no_chain_records_and_no_blobs(engine):
    alice, *_ = make_population(engine)
    engine.pool = sm.ModelPool(
        instances=[
            sm.SummarizerInstance(f"r{i}", lambda t: t[:10], lambda s, t: False)
            for i in range(3)
        ],
        rng_seed=0,
    )
    height_before = engine.ledger.height
    with pytest.raises(ConsensusFailure):
        engine.submit_article(alice, ARTICLE_TEXT, "g1", "doomed")
    assert engine.ledger.height == height_before
    assert "doomed" not in engine.contract.files
    with pytest.raises(NotFoundError):
        engine.filestore.get_blob("doomed", 1)


def test_submit_guards(engine):
    alice, _, _, _, eve = make_population(engine)
    with pytest.raises(AuthorizationError):
        engine.submit_article(eve, ARTICLE_TEXT, "g1", "nope")
    with pytest.raises(ChainReviewError):
        engine.submit_article(alice, "", "g1", "empty")
    submitted(engine, alice)
    with pytest.raises(ChainReviewError):
        engine.submit_article(alice, ARTICLE_TEXT, "g1", "art-main")


# -- review and endorsement --


def test_full_quorum_script_reaches_flag_2(engine):
    alice, bob, carol, *_ = make_population(engine)
    article_id = submitted(engine, alice)
    view = engine.run_review(alice, article_id, ThresholdConfig(2, 1, 2))
    assert view.state_flag == 1
    view = engine.cast_endorsement(bob, article_id, "favorable")
    assert view.state_flag == 1
    view = engine.cast_endorsement(carol, article_id, "favorable")
    assert view.state_flag == 2


def test_endorsement_before_review_rejected(engine):
    alice, bob, *_ = make_population(engine)
    article_id = submitted(engine, alice)
    with pytest.raises(ChainReviewError):
        engine.cast_endorsement(bob, article_id, "favorable")


def test_non_expert_endorsement_rejected(engine):
    alice, bob, carol, dana, _ = make_population(engine)
    article_id = submitted(engine, alice)
    engine.run_review(alice, article_id, ThresholdConfig(1, 1, 2))
    with pytest.raises(ChainReviewError):
        engine.cast_endorsement(dana, article_id, "favorable")
    with pytest.raises(ChainReviewError):
        engine.cast_endorsement(bob, article_id, "sideways")


# -- reading --


def test_read_policy_progression(engine):
    alice, bob, carol, dana, eve = make_population(engine)
    article_id = submitted(engine, alice)

    uploader_view = engine.read_article(alice, article_id)
    assert uploader_view.access == "full" and uploader_view.text == ARTICLE_TEXT
    assert sm3_digest(uploader_view.text.encode()) == uploader_view.plaintext_digest

    scholar_view = engine.read_article(dana, article_id)
    assert scholar_view.access == "metadata"
    assert scholar_view.text is None and scholar_view.abstract_text is None

    engine.run_review(alice, article_id, ThresholdConfig(2, 1, 2))
    scholar_view = engine.read_article(dana, article_id)
    assert scholar_view.access == "abstract"
    assert scholar_view.abstract_text and scholar_view.text is None
    assert sm3_digest(scholar_view.abstract_text.encode()) == scholar_view.abstract_digest

    engine.cast_endorsement(bob, article_id, "favorable")
    engine.cast_endorsement(carol, article_id, "favorable")
    scholar_view = engine.read_article(dana, article_id)
    assert scholar_view.access == "full" and scholar_view.text == ARTICLE_TEXT

    with pytest.raises(AuthorizationError):
        engine.read_article(eve, article_id)


def test_tampered_blob_raises_alarm_not_plaintext(engine, tmp_path):
    alice, *_ = make_population(engine)
    article_id = submitted(engine, alice)
    blob_path = engine.filestore.root / article_id / "v1.blob"
    raw = bytearray(blob_path.read_bytes())
    raw[len(raw) // 2] ^= 0x01
    blob_path.write_bytes(bytes(raw))
    with pytest.raises(TamperAlarm):
        engine.read_article(alice, article_id)


def test_substituted_blob_raises_alarm_via_digest(engine):
    # Replace the stored ciphertext with a valid encryption of different
    # content under the same key and nonce: only the digest check can catch it.
    from chainreview.crypto import sym_encrypt

    alice, *_ = make_population(engine)
    article_id = submitted(engine, alice)
    entry = engine.contract.file(article_id)
    key = engine._recover_article_key(alice, entry)
    nonce = engine.filestore.get_blob(article_id, 1).nonce
    forged = sym_encrypt(key, b"a different document entirely", nonce)
    (engine.filestore.root / article_id / "v1.blob").write_bytes(forged)
    with pytest.raises(TamperAlarm):
        engine.read_article(alice, article_id)


def test_list_visible_respects_policy(engine):
    alice, bob, carol, dana, eve = make_population(engine)
    submitted(engine, alice)
    assert [v.article_id for v in engine.list_visible(alice)] == ["art-main"]
    assert [v.article_id for v in engine.list_visible(dana)] == ["art-main"]
    assert engine.list_visible(eve) == []


# -- modification --


def test_modify_increments_version_and_keeps_history(engine):
    alice, *_ = make_population(engine)
    article_id = submitted(engine, alice)
    v1_digest = engine.contract.file(article_id).plaintext_digest
    new_text = synth_text(8, "engine-article-v2", 280)
    version = engine.modify_article(alice, article_id, new_text)
    entry = engine.contract.file(article_id)
    assert version == 2 and entry.version == 2
    assert len(entry.modification_log) == 1
    log = entry.modification_log[0]
    assert log.new_digest == sm3_digest(new_text.encode())
    assert log.modifier == alice.address

    # v1 remains readable and still verifies against its historical digest.
    key = engine._recover_article_key(alice, entry)
    assert engine.filestore.verify_integrity(article_id, 1, key, v1_digest).ok
    view = engine.read_article(alice, article_id)
    assert view.text == new_text


def test_modify_requires_full_access(engine):
    alice, bob, *_ = make_population(engine)
    article_id = submitted(engine, alice)
    engine.run_review(alice, article_id, ThresholdConfig(2, 1, 2))
    with pytest.raises(AuthorizationError):
        engine.modify_article(bob, article_id, "rewrite attempt " * 30)


def test_stored_latest_version_tracks_contract(engine):
    alice, *_ = make_population(engine)
    article_id = submitted(engine, alice)
    assert engine.filestore.latest_version(article_id) == engine.contract.file(article_id).version
    engine.modify_article(alice, article_id, synth_text(9, "track-v2", 250))
    assert engine.filestore.latest_version(article_id) == engine.contract.file(article_id).version == 2


def test_concurrent_pipelines_for_distinct_articles(engine):
    import threading

    users = [
        engine.register_user(f"writer{i}", role="scholar", groups=("g1",), seed=seeded(40 + i))
        for i in range(4)
    ]
    failures = []

    def pipeline(index):
        try:
            creds = users[index]
            article_id = f"conc-{index}"
            engine.submit_article(creds, synth_text(index, f"conc/{index}", 200), "g1", article_id)
            engine.run_review(creds, article_id, ThresholdConfig(1, 1, 1))
        except Exception as exc:  # noqa: BLE001 - collected for the main thread
            failures.append(exc)

    threads = [threading.Thread(target=pipeline, args=(i,)) for i in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not failures
    assert len(engine.contract.files) == 4
    assert engine.ledger.verify_chain().ok
    assert engine.ledger.total_supply() == engine.config.distributor_balance


# -- comments --


def test_comment_recorded_on_chain_and_listed(engine):
    alice, bob, carol, dana, _ = make_population(engine)
    article_id = submitted(engine, alice)
    engine.run_review(alice, article_id, ThresholdConfig(2, 1, 2))
    body = "A careful note about the threshold arithmetic."
    comment_id = engine.post_comment(dana, article_id, "comment", body)
    entry = engine.contract.file(article_id)
    assert entry.interactions[-1].digest == sm3_digest(body.encode())
    assert entry.interactions[-1].ref_id == comment_id
    listed = engine.list_comments(alice, article_id)
    assert [c.body for c in listed] == [body]
    assert listed[0].author_name == "dana"


def test_unauthorized_comment_rejected(engine):
    alice, _, _, dana, eve = make_population(engine)
    article_id = submitted(engine, alice)
    with pytest.raises(AuthorizationError):  # flag 0: members hold metadata access only
        engine.post_comment(dana, article_id, "comment", "too early")
    with pytest.raises(AuthorizationError):
        engine.post_comment(eve, article_id, "comment", "outsider")


# -- persistence across restarts --


def test_engine_reload_preserves_state(node_config):
    engine = ReviewEngine(node_config)
    alice = engine.register_user("alice", role="scholar", groups=("g1",), seed=seeded(1))
    article_id = submitted(engine, alice)
    root_before = engine.ledger.state_root()

    reloaded = ReviewEngine(node_config)
    assert reloaded.ledger.state_root() == root_before
    creds = reloaded.credentials_by_name("alice")
    view = reloaded.read_article(creds, article_id)
    assert view.text == ARTICLE_TEXT


# -- replay --


def test_replay_small_spec_deterministic(engine_factory):
    spec = build_alpha_workload(users=6, articles=3, comments=4, annotations=2,
                                groups=1, modifications=1)
    reports = [engine_factory().replay_workload(spec) for _ in range(2)]
    assert all(r.ok for r in reports)
    assert reports[0].state_root == reports[1].state_root
    assert reports[0].counts["article"] == 3


def test_replay_empty_spec(engine):
    report = engine.replay_workload(WorkloadSpec())
    assert report.ok and report.chain_height == 1 and report.counts == {}


def test_replay_reports_failing_step(engine):
    spec = WorkloadSpec()
    from chainreview.workload import ArticleAction

    spec.actions.append(ArticleAction(article_id="a1", uploader="ghost", group_id="g1", words=50))
    report = engine.replay_workload(spec)
    assert not report.ok
    assert report.failures and "action 0" in report.failures[0]
