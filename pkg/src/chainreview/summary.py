"""Summary consensus: one randomly chosen generator instance drafts an
abstract, two randomly chosen validator instances (never the generator) must
both accept it, and the loop retries until acceptance or the attempt budget
runs out. Only accepted summaries ever reach the chain.

The instance pool ships with three deterministic extractive summarizers so a
node is viable offline; an adapter for an external model service can be
registered behind the same two-function contract (summarize, verify) provided
it behaves deterministically in test mode.
"""
from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass
from typing import Callable

from .crypto import sm3_digest
from .errors import ChainReviewError, ConsensusFailure

# Short function words excluded from keyword ranking; fixed so tokenization
# is identical on every platform.
STOP_WORDS = frozenset(
    """
    a about above after again all also am an and any are as at be because been
    before being below between both but by can did do does doing down during
    each few for from further had has have having he her here hers him his how
    i if in into is it its itself just me more most my no nor not of off on
    once only or other our ours out over own same she so some such than that
    the their theirs them then there these they this those through to too
    under until up very was we were what when where which while who whom why
    will with you your yours
    """.split()
)

_WORD_RE = re.compile(r"[a-z0-9]+")
_SENTENCE_RE = re.compile(r"(?<=[.!?])\s+")


def tokenize(text: str) -> list[str]:
    return [w for w in _WORD_RE.findall(text.lower()) if w not in STOP_WORDS]


def split_sentences(text: str) -> list[str]:
    return [s.strip() for s in _SENTENCE_RE.split(text.strip()) if s.strip()]


def top_keywords(text: str, n: int) -> list[str]:
    """Frequency-ranked content words; ties broken lexicographically so the
    ranking is deterministic."""
    counts: dict[str, int] = {}
    for token in tokenize(text):
        counts[token] = counts.get(token, 0) + 1
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    return [word for word, _ in ranked[:n]]


def keyword_coverage(summary: str, text: str, n: int) -> float:
    keywords = top_keywords(text, n)
    if not keywords:
        return 1.0
    present = set(tokenize(summary))
    return sum(1 for k in keywords if k in present) / len(keywords)


@dataclass(frozen=True)
class VerifierConfig:
    """Acceptance rule for the shipped verifier: the summary's length must be
    a sane fraction of the source and it must cover enough of the source's
    top keywords."""

    top_n: int = 10
    coverage_threshold: float = 0.5
    min_length_fraction: float = 0.02
    max_length_fraction: float = 0.3


def default_verifier(summary: str, text: str, config: VerifierConfig = VerifierConfig()) -> bool:
    if not summary or not text:
        return False
    fraction = len(summary) / len(text)
    if not (config.min_length_fraction <= fraction <= config.max_length_fraction):
        return False
    return keyword_coverage(summary, text, config.top_n) >= config.coverage_threshold


# --- summarizer instances ---


@dataclass(frozen=True)
class SummarizerInstance:
    instance_id: str
    summarize: Callable[[str], str]
    verify: Callable[[str, str], bool]


def _effective_k(k: int, n_sentences: int) -> int:
    # Never return more than ~30% of the source sentences, so extractive
    # output respects the verifier's upper length bound on longer texts.
    return max(1, min(k, math.floor(n_sentences * 0.3) or 1))


def lead_summarizer(k: int = 3) -> Callable[[str], str]:
    def summarize(text: str) -> str:
        sentences = split_sentences(text)
        return " ".join(sentences[: _effective_k(k, len(sentences))])

    return summarize


def keyword_density_summarizer(k: int = 3, top_n: int = 10) -> Callable[[str], str]:
    def summarize(text: str) -> str:
        sentences = split_sentences(text)
        keywords = set(top_keywords(text, top_n))
        scored = []
        for pos, sentence in enumerate(sentences):
            tokens = tokenize(sentence)
            hits = sum(1 for t in tokens if t in keywords)
            scored.append((-hits / (len(tokens) + 1), pos, sentence))
        scored.sort()
        chosen = sorted(scored[: _effective_k(k, len(sentences))], key=lambda item: item[1])
        return " ".join(sentence for _, _, sentence in chosen)

    return summarize


def centroid_summarizer(k: int = 3) -> Callable[[str], str]:
    def summarize(text: str) -> str:
        sentences = split_sentences(text)
        doc_counts: dict[str, int] = {}
        for token in tokenize(text):
            doc_counts[token] = doc_counts.get(token, 0) + 1
        norm_doc = math.sqrt(sum(c * c for c in doc_counts.values())) or 1.0
        scored = []
        for pos, sentence in enumerate(sentences):
            counts: dict[str, int] = {}
            for token in tokenize(sentence):
                counts[token] = counts.get(token, 0) + 1
            dot = sum(c * doc_counts.get(t, 0) for t, c in counts.items())
            norm = math.sqrt(sum(c * c for c in counts.values())) or 1.0
            scored.append((-dot / (norm * norm_doc), pos, sentence))
        scored.sort()
        chosen = sorted(scored[: _effective_k(k, len(sentences))], key=lambda item: item[1])
        return " ".join(sentence for _, _, sentence in chosen)

    return summarize


def default_pool(seed: int = 0, verifier_config: VerifierConfig = VerifierConfig()) -> "ModelPool":
    def verify(summary: str, text: str) -> bool:
        return default_verifier(summary, text, verifier_config)

    return ModelPool(
        instances=[
            SummarizerInstance("lead-3", lead_summarizer(), verify),
            SummarizerInstance("keyword-density", keyword_density_summarizer(), verify),
            SummarizerInstance("centroid", centroid_summarizer(), verify),
        ],
        rng_seed=seed,
    )


# --- the consensus protocol ---


@dataclass(frozen=True)
class SummaryAttempt:
    attempt_index: int
    generator_id: str
    summary: str
    validator_ids: tuple[str, str]
    verdicts: tuple[bool, bool]

    @property
    def accepted(self) -> bool:
        return all(self.verdicts)


@dataclass(frozen=True)
class TrustworthySummary:
    summary: str
    digest: bytes
    provenance: SummaryAttempt
    attempts_total: int


@dataclass
class ModelPool:
    instances: list[SummarizerInstance]
    rng_seed: int = 0

    def __post_init__(self):
        if len(self.instances) < 3:
            raise ChainReviewError(
                "pool needs at least 3 instances: one generator plus 2 distinct validators"
            )
        ids = [inst.instance_id for inst in self.instances]
        if len(set(ids)) != len(ids):
            raise ChainReviewError("instance ids must be unique")

    def by_id(self, instance_id: str) -> SummarizerInstance:
        for inst in self.instances:
            if inst.instance_id == instance_id:
                return inst
        raise ChainReviewError(f"no such instance: {instance_id}")

    def rng(self, seed: int | None = None) -> random.Random:
        return random.Random(self.rng_seed if seed is None else seed)


def generate_summary(pool: ModelPool, text: str, rng: random.Random | None = None) -> tuple[str, str]:
    """Pick one instance uniformly and apply it; returns (generator_id, summary)."""
    if not text:
        raise ChainReviewError("cannot summarize empty text")
    rng = rng or pool.rng()
    generator = pool.instances[rng.randrange(len(pool.instances))]
    return generator.instance_id, generator.summarize(text)


def verify_summary(
    pool: ModelPool,
    summary: str,
    text: str,
    generator_id: str,
    rng: random.Random | None = None,
) -> tuple[tuple[str, str], tuple[bool, bool], bool]:
    """Two distinct validators, never the generator, each render a verdict;
    the summary is accepted only if both are true."""
    rng = rng or pool.rng()
    candidates = [inst for inst in pool.instances if inst.instance_id != generator_id]
    if len(candidates) < 2:
        raise ChainReviewError("pool too small to validate: need 2 non-generator instances")
    validators = rng.sample(candidates, 2)
    verdicts = tuple(v.verify(summary, text) for v in validators)
    return (
        (validators[0].instance_id, validators[1].instance_id),
        verdicts,
        all(verdicts),
    )


def consensus_summarize(
    pool: ModelPool,
    text: str,
    max_attempts: int = 16,
    seed: int | None = None,
) -> TrustworthySummary:
    """Loop generate -> verify until a summary is accepted. Raises
    ConsensusFailure when the budget is exhausted; nothing from a failed run
    is ever recorded on chain."""
    if max_attempts < 1:
        raise ChainReviewError("max_attempts must be >= 1")
    rng = pool.rng(seed)
    for attempt_index in range(1, max_attempts + 1):
        generator_id, candidate = generate_summary(pool, text, rng)
        validator_ids, verdicts, accepted = verify_summary(
            pool, candidate, text, generator_id, rng
        )
        if accepted:
            attempt = SummaryAttempt(
                attempt_index=attempt_index,
                generator_id=generator_id,
                summary=candidate,
                validator_ids=validator_ids,
                verdicts=verdicts,
            )
            return TrustworthySummary(
                summary=candidate,
                digest=sm3_digest(candidate.encode("utf-8")),
                provenance=attempt,
                attempts_total=attempt_index,
            )
    raise ConsensusFailure(
        f"no trustworthy summary after {max_attempts} attempts", attempts=max_attempts
    )
