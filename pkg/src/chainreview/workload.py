"""Declarative workloads: a plain-text format with one action per line,
a deterministic synthetic-corpus generator, and the replay runner.

Format, ``#`` starts a comment::

    group <group_id>
    user <name> <scholar|expert> <group_id> [group_id ...]
    article <article_id> <uploader> <group_id> words=<n>
    review <article_id> quorum=<n> ratio=<num>/<den>
    endorse <article_id> <expert_name> <favorable|unfavorable>
    comment <article_id> <author_name> words=<n>
    annotate <article_id> <author_name> words=<n>
    modify <article_id> <editor_name> words=<n>

Replay derives every article body, comment, and key from (workload seed,
action ids), so one (spec, seed) pair always reproduces the same final
state root.
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

from .contract import ROLE_EXPERT, ROLE_SCHOLAR, KIND_ANNOTATION, KIND_COMMENT, ThresholdConfig
from .crypto import sm3_digest
from .errors import WorkloadError

DEFAULT_SEED = 2024

# Zipf-weighted content vocabulary for synthetic article bodies. Disjoint
# from the summarizer stop-word list so keyword ranking sees every token.
_VOCABULARY = (
    "ledger review article expert scholar consensus endorsement digest "
    "encryption signature threshold verdict summary abstract integrity "
    "archive manuscript analysis method result experiment measurement "
    "protocol network storage record transaction balance account group "
    "authority policy access version history channel audit evidence "
    "submission revision commentary finding dataset figure model theory "
    "approach framework evaluation baseline metric sample procedure "
    "observation hypothesis criterion validation inspection chamber "
    "catalog journal citation context margin structure pipeline stage "
    "cluster replica quorum batch sequence interval window latency "
    "capacity outcome impact scope domain artifact checksum registry"
).split()


@dataclass(frozen=True)
class GroupAction:
    group_id: str
    kind: str = "group"


@dataclass(frozen=True)
class UserAction:
    name: str
    role: str
    groups: tuple[str, ...]
    kind: str = "user"


@dataclass(frozen=True)
class ArticleAction:
    article_id: str
    uploader: str
    group_id: str
    words: int
    kind: str = "article"


@dataclass(frozen=True)
class ReviewAction:
    article_id: str
    quorum: int
    ratio_num: int
    ratio_den: int
    kind: str = "review"


@dataclass(frozen=True)
class EndorseAction:
    article_id: str
    expert: str
    favorable: bool
    kind: str = "endorse"


@dataclass(frozen=True)
class CommentAction:
    article_id: str
    author: str
    words: int
    interaction: str = KIND_COMMENT
    kind: str = "comment"


@dataclass(frozen=True)
class ModifyAction:
    article_id: str
    editor: str
    words: int
    kind: str = "modify"


WorkloadAction = (
    GroupAction | UserAction | ArticleAction | ReviewAction | EndorseAction | CommentAction | ModifyAction
)


@dataclass
class WorkloadSpec:
    actions: list[WorkloadAction] = field(default_factory=list)
    seed: int = DEFAULT_SEED

    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for action in self.actions:
            label = (
                action.interaction if isinstance(action, CommentAction) else action.kind
            )
            out[label] = out.get(label, 0) + 1
        return out


@dataclass(frozen=True)
class ReplayReport:
    counts: dict[str, int]
    duration_seconds: float
    chain_height: int
    state_root: str
    chain_ok: bool
    chain_reason: str | None
    failures: list[str]

    @property
    def ok(self) -> bool:
        return not self.failures and self.chain_ok


# --- parsing / formatting ---


def _parse_kv(token: str, key: str, line_no: int) -> str:
    prefix = key + "="
    if not token.startswith(prefix):
        raise WorkloadError(f"expected {key}=..., got {token!r}", line_no=line_no)
    return token[len(prefix):]


def parse_workload(text: str) -> WorkloadSpec:
    spec = WorkloadSpec()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        kind, args = tokens[0], tokens[1:]
        try:
            if kind == "seed":
                spec.seed = int(args[0])
            elif kind == "group":
                spec.actions.append(GroupAction(group_id=args[0]))
            elif kind == "user":
                name, role, *groups = args
                if role not in (ROLE_SCHOLAR, ROLE_EXPERT):
                    raise WorkloadError(f"unknown role {role!r}", line_no=line_no)
                spec.actions.append(UserAction(name=name, role=role, groups=tuple(groups)))
            elif kind == "article":
                article_id, uploader, group_id, words = args
                spec.actions.append(
                    ArticleAction(
                        article_id=article_id,
                        uploader=uploader,
                        group_id=group_id,
                        words=int(_parse_kv(words, "words", line_no)),
                    )
                )
            elif kind == "review":
                article_id, quorum, ratio = args
                num, den = _parse_kv(ratio, "ratio", line_no).split("/")
                spec.actions.append(
                    ReviewAction(
                        article_id=article_id,
                        quorum=int(_parse_kv(quorum, "quorum", line_no)),
                        ratio_num=int(num),
                        ratio_den=int(den),
                    )
                )
            elif kind == "endorse":
                article_id, expert, verdict = args
                if verdict not in ("favorable", "unfavorable"):
                    raise WorkloadError(f"unknown verdict {verdict!r}", line_no=line_no)
                spec.actions.append(
                    EndorseAction(
                        article_id=article_id, expert=expert, favorable=verdict == "favorable"
                    )
                )
            elif kind in ("comment", "annotate"):
                article_id, author, words = args
                spec.actions.append(
                    CommentAction(
                        article_id=article_id,
                        author=author,
                        words=int(_parse_kv(words, "words", line_no)),
                        interaction=KIND_COMMENT if kind == "comment" else KIND_ANNOTATION,
                    )
                )
            elif kind == "modify":
                article_id, editor, words = args
                spec.actions.append(
                    ModifyAction(
                        article_id=article_id,
                        editor=editor,
                        words=int(_parse_kv(words, "words", line_no)),
                    )
                )
            else:
                raise WorkloadError(f"unknown action kind {kind!r}", line_no=line_no)
        except WorkloadError:
            raise
        except (ValueError, IndexError) as exc:
            raise WorkloadError(f"malformed {kind} line: {exc}", line_no=line_no) from exc
    return spec


def format_workload(spec: WorkloadSpec) -> str:
    lines = [f"# chainreview workload, {len(spec.actions)} actions", f"seed {spec.seed}"]
    for action in spec.actions:
        if isinstance(action, GroupAction):
            lines.append(f"group {action.group_id}")
        elif isinstance(action, UserAction):
            lines.append(f"user {action.name} {action.role} {' '.join(action.groups)}")
        elif isinstance(action, ArticleAction):
            lines.append(
                f"article {action.article_id} {action.uploader} {action.group_id} words={action.words}"
            )
        elif isinstance(action, ReviewAction):
            lines.append(
                f"review {action.article_id} quorum={action.quorum} "
                f"ratio={action.ratio_num}/{action.ratio_den}"
            )
        elif isinstance(action, EndorseAction):
            verdict = "favorable" if action.favorable else "unfavorable"
            lines.append(f"endorse {action.article_id} {action.expert} {verdict}")
        elif isinstance(action, CommentAction):
            verb = "comment" if action.interaction == KIND_COMMENT else "annotate"
            lines.append(f"{verb} {action.article_id} {action.author} words={action.words}")
        elif isinstance(action, ModifyAction):
            lines.append(f"modify {action.article_id} {action.editor} words={action.words}")
    return "\n".join(lines) + "\n"


# --- synthetic text ---


def synth_text(seed: int, label: str, words: int) -> str:
    """Deterministic Zipf-ish prose: enough repeated content words that the
    keyword-coverage verifier has a real signal to check."""
    rng = random.Random(int.from_bytes(sm3_digest(f"{seed}/{label}".encode())[:8], "big"))
    weights = [1.0 / (rank + 1) for rank in range(len(_VOCABULARY))]
    theme = rng.sample(_VOCABULARY, 12)
    sentences = []
    remaining = max(words, 8)
    while remaining > 0:
        length = min(remaining, rng.randint(8, 14))
        picks = rng.choices(_VOCABULARY, weights=weights, k=max(length - 2, 1))
        picks += rng.choices(theme, k=min(2, length))
        rng.shuffle(picks)
        sentence = " ".join(picks)
        sentences.append(sentence[0].upper() + sentence[1:] + ".")
        remaining -= length
    return " ".join(sentences)


# --- generation ---


def build_alpha_workload(
    users: int = 23,
    articles: int = 19,
    comments: int = 31,
    annotations: int = 49,
    groups: int = 3,
    modifications: int = 4,
    seed: int = DEFAULT_SEED,
) -> WorkloadSpec:
    """Alpha-scale synthetic workload: groups, a role-mixed user population,
    reviewed articles with passing endorsement scripts, and the requested
    number of comments and annotations."""
    rng = random.Random(seed)
    spec = WorkloadSpec(seed=seed)
    group_ids = [f"g{i + 1}" for i in range(groups)]
    for group_id in group_ids:
        spec.actions.append(GroupAction(group_id=group_id))

    names = [f"u{i + 1:02d}" for i in range(users)]
    membership: dict[str, list[str]] = {g: [] for g in group_ids}
    experts: dict[str, list[str]] = {g: [] for g in group_ids}
    for index, name in enumerate(names):
        group_id = group_ids[index % len(group_ids)]
        # Guarantee three experts per group before mixing in scholars.
        role = ROLE_EXPERT if len(experts[group_id]) < 3 or rng.random() < 0.25 else ROLE_SCHOLAR
        spec.actions.append(UserAction(name=name, role=role, groups=(group_id,)))
        membership[group_id].append(name)
        if role == ROLE_EXPERT:
            experts[group_id].append(name)

    article_ids = []
    uploader_of: dict[str, str] = {}
    group_of: dict[str, str] = {}
    for i in range(articles):
        article_id = f"art{i + 1:03d}"
        group_id = group_ids[i % len(group_ids)]
        uploader = membership[group_id][i // len(group_ids) % len(membership[group_id])]
        words = rng.randint(150, 420)
        spec.actions.append(
            ArticleAction(article_id=article_id, uploader=uploader, group_id=group_id, words=words)
        )
        article_ids.append(article_id)
        uploader_of[article_id] = uploader
        group_of[article_id] = group_id

    for article_id in article_ids:
        group_id = group_of[article_id]
        eligible = [e for e in experts[group_id] if e != uploader_of[article_id]]
        quorum = 2
        spec.actions.append(
            ReviewAction(article_id=article_id, quorum=quorum, ratio_num=1, ratio_den=2)
        )
        needed_participation = -(-len(eligible) // 2)  # ceil(eligible / 2)
        verdicts: list[tuple[str, bool]] = []
        if len(eligible) > 2 and rng.random() < 0.4:
            verdicts.append((eligible[0], False))
        favorable_pool = [e for e in eligible if all(e != v for v, _ in verdicts)]
        favorable_needed = max(quorum, needed_participation - len(verdicts))
        for expert in favorable_pool[:favorable_needed]:
            verdicts.append((expert, True))
        for expert, favorable in verdicts:
            spec.actions.append(
                EndorseAction(article_id=article_id, expert=expert, favorable=favorable)
            )

    def pick_commenter(article_id: str, rng: random.Random) -> str:
        return rng.choice(membership[group_of[article_id]])

    for i in range(comments):
        article_id = article_ids[i % len(article_ids)]
        spec.actions.append(
            CommentAction(
                article_id=article_id,
                author=pick_commenter(article_id, rng),
                words=rng.randint(12, 60),
                interaction=KIND_COMMENT,
            )
        )
    for i in range(annotations):
        article_id = article_ids[(i * 7 + 3) % len(article_ids)]
        spec.actions.append(
            CommentAction(
                article_id=article_id,
                author=pick_commenter(article_id, rng),
                words=rng.randint(6, 25),
                interaction=KIND_ANNOTATION,
            )
        )
    for i in range(modifications):
        article_id = article_ids[(i * 5 + 1) % len(article_ids)]
        spec.actions.append(
            ModifyAction(
                article_id=article_id,
                editor=uploader_of[article_id],
                words=rng.randint(150, 420),
            )
        )
    return spec


# --- replay ---


def run_workload(engine, spec: WorkloadSpec, seed: int | None = None) -> ReplayReport:
    """Execute a workload against an engine. The first failing action aborts
    the run and is identified in the report."""
    seed = spec.seed if seed is None else seed
    started = time.monotonic()
    counts: dict[str, int] = {}
    failures: list[str] = []
    by_name = {}

    def creds_for(name: str):
        if name not in by_name:
            by_name[name] = engine.credentials_by_name(name)
        return by_name[name]

    for index, action in enumerate(spec.actions):
        label = action.interaction if isinstance(action, CommentAction) else action.kind
        try:
            if isinstance(action, GroupAction):
                engine.ensure_group(action.group_id)
            elif isinstance(action, UserAction):
                user_seed = sm3_digest(f"{seed}/user/{action.name}".encode())
                by_name[action.name] = engine.register_user(
                    action.name, role=action.role, groups=action.groups, seed=user_seed
                )
            elif isinstance(action, ArticleAction):
                text = synth_text(seed, f"article/{action.article_id}/1", action.words)
                engine.submit_article(
                    creds_for(action.uploader), text, action.group_id, action.article_id
                )
            elif isinstance(action, ReviewAction):
                uploader = engine.contract.file(action.article_id).uploader
                engine.run_review(
                    engine.credentials_for(uploader),
                    action.article_id,
                    ThresholdConfig(action.quorum, action.ratio_num, action.ratio_den),
                )
            elif isinstance(action, EndorseAction):
                engine.cast_endorsement(
                    creds_for(action.expert),
                    action.article_id,
                    "favorable" if action.favorable else "unfavorable",
                )
            elif isinstance(action, CommentAction):
                body = synth_text(seed, f"{action.interaction}/{index}", action.words)
                engine.post_comment(
                    creds_for(action.author), action.article_id, action.interaction, body
                )
            elif isinstance(action, ModifyAction):
                version = engine.contract.file(action.article_id).version + 1
                text = synth_text(
                    seed, f"article/{action.article_id}/{version}", action.words
                )
                engine.modify_article(creds_for(action.editor), action.article_id, text)
            counts[label] = counts.get(label, 0) + 1
        except Exception as exc:  # noqa: BLE001 - report the failing step, then stop
            failures.append(f"action {index} ({label}): {exc}")
            break

    verification = engine.ledger.verify_chain()
    return ReplayReport(
        counts=counts,
        duration_seconds=time.monotonic() - started,
        chain_height=engine.ledger.height,
        state_root=engine.ledger.state_root().hex(),
        chain_ok=bool(verification),
        chain_reason=verification.reason,
        failures=failures,
    )
