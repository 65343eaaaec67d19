"""Shared fixtures for contract-level tests: precomputed key material and a
review scenario builder that drives the contract purely through payloads."""
from itertools import permutations, product

from chainreview import contract as ct
from chainreview.crypto import generate_keypair, sm3_digest

ADMIN = b"\xAA" * 20

# One session-wide pool of deterministic pairs; contract tests only need
# addresses and a structurally valid group public key.
KEYPAIRS = [generate_keypair(seed=bytes(31) + bytes([i + 1])) for i in range(9)]
GROUP_KEYS = generate_keypair(seed=bytes(31) + b"\x7F")

DIGEST_A = sm3_digest(b"plaintext-a")
DIGEST_B = sm3_digest(b"abstract-a")


def ctx(sender: bytes, timestamp: int = 1) -> ct.ExecutionContext:
    return ct.ExecutionContext(sender=sender, timestamp=timestamp, admin_address=ADMIN)


def build_group_state(
    n_experts: int,
    n_scholars: int = 1,
    group_id: str = "g1",
) -> tuple[ct.ContractState, bytes, list[bytes], list[bytes]]:
    """Users[0] is the uploader (a scholar); returns
    (state, uploader, expert addresses, scholar addresses)."""
    state = ct.ContractState()
    state.execute(ct.CreateGroup(group_id=group_id, public_key=GROUP_KEYS.public_key), ctx(ADMIN))
    uploader = KEYPAIRS[0]
    state.execute(
        ct.RegisterAccount(public_key=uploader.public_key, role=ct.ROLE_SCHOLAR), ctx(ADMIN)
    )
    state.execute(
        ct.AddMember(group_id=group_id, member=uploader.address, expert=False,
                     wrapped_group_key=b"wrapped"),
        ctx(ADMIN),
    )
    experts = []
    for i in range(n_experts):
        keys = KEYPAIRS[1 + i]
        state.execute(
            ct.RegisterAccount(public_key=keys.public_key, role=ct.ROLE_EXPERT), ctx(ADMIN)
        )
        state.execute(
            ct.AddMember(group_id=group_id, member=keys.address, expert=True,
                         wrapped_group_key=b"wrapped"),
            ctx(ADMIN),
        )
        experts.append(keys.address)
    scholars = []
    for i in range(n_scholars):
        keys = KEYPAIRS[1 + n_experts + i]
        state.execute(
            ct.RegisterAccount(public_key=keys.public_key, role=ct.ROLE_SCHOLAR), ctx(ADMIN)
        )
        state.execute(
            ct.AddMember(group_id=group_id, member=keys.address, expert=False,
                         wrapped_group_key=b"wrapped"),
            ctx(ADMIN),
        )
        scholars.append(keys.address)
    return state, uploader.address, experts, scholars


def upload_article(
    state: ct.ContractState,
    uploader: bytes,
    article_id: str = "art-1",
    group_id: str = "g1",
) -> str:
    group_addr = state.group(group_id).key_address
    state.execute(
        ct.UploadFile(
            article_id=article_id,
            plaintext_digest=DIGEST_A,
            abstract_digest=DIGEST_B,
            group_id=group_id,
            wrapped_keys=((uploader, b"wrap-uploader"), (group_addr, b"wrap-group")),
        ),
        ctx(uploader),
    )
    return article_id


def review_scenario(
    n_experts: int,
    quorum: int,
    ratio_num: int,
    ratio_den: int,
) -> tuple[ct.ContractState, str, bytes, list[bytes]]:
    state, uploader, experts, _ = build_group_state(n_experts)
    article_id = upload_article(state, uploader)
    state.execute(
        ct.StartReview(
            article_id=article_id,
            thresholds=ct.ThresholdConfig(quorum, ratio_num, ratio_den),
        ),
        ctx(uploader),
    )
    return state, article_id, uploader, experts


def expected_final_flag(verdicts, quorum, ratio_num, ratio_den, eligible) -> int:
    """Independent pass-rule oracle: scan verdict prefixes with plain integer
    arithmetic; the flag flips to 2 at the first prefix where the favorable
    quorum and the participation floor both hold."""
    favorable = 0
    for total, verdict in enumerate(verdicts, start=1):
        if verdict:
            favorable += 1
        if favorable >= quorum and total * ratio_den >= ratio_num * eligible:
            return 2
    return 1


def all_endorsement_sequences(n_experts: int):
    """Every ordered sequence of distinct experts with a verdict each."""
    for k in range(n_experts + 1):
        for order in permutations(range(n_experts), k):
            for verdicts in product((True, False), repeat=k):
                yield tuple(zip(order, verdicts))
