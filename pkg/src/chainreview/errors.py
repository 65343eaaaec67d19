"""Exception hierarchy shared across the platform."""


class ChainReviewError(Exception):
    """Base class for all platform errors."""

    code = "error"


class CryptoError(ChainReviewError):
    code = "crypto_error"


class DecryptionError(CryptoError):
    """Authenticated decryption failed: wrong key, bad nonce, or tampered bytes."""

    code = "decryption_failed"


class LedgerError(ChainReviewError):
    code = "ledger_error"


class BadSignature(LedgerError):
    code = "bad_signature"


class NonceMismatch(LedgerError):
    code = "nonce_mismatch"


class InsufficientBalance(LedgerError):
    code = "insufficient_balance"


class UnknownAccount(LedgerError):
    code = "unknown_account"


class DuplicateAccount(LedgerError):
    code = "duplicate_account"


class ChainCorruption(LedgerError):
    """Persisted chain fails verification; carries the first broken block index."""

    code = "chain_corruption"

    def __init__(self, message, block_index=None):
        super().__init__(message)
        self.block_index = block_index


class ContractError(ChainReviewError):
    """Payload-level rejection; recorded as a failed receipt when raised on-chain."""

    code = "contract_rejected"


class AuthorizationError(ChainReviewError):
    code = "not_authorized"


class NotFoundError(ChainReviewError):
    code = "not_found"


class TamperAlarm(ChainReviewError):
    """Stored content no longer matches the digest recorded on chain."""

    code = "tamper_alarm"


class ConsensusFailure(ChainReviewError):
    """Summary consensus exhausted its attempt budget without acceptance."""

    code = "consensus_failure"

    def __init__(self, message, attempts=0):
        super().__init__(message)
        self.attempts = attempts


class WorkloadError(ChainReviewError):
    code = "workload_error"

    def __init__(self, message, line_no=None):
        super().__init__(message)
        self.line_no = line_no


class AuthenticationError(ChainReviewError):
    """Request authentication failure; subclasses carry distinct codes."""

    code = "auth_failed"


class MissingAuthHeaders(AuthenticationError):
    code = "missing_auth_headers"


class UnknownIdentity(AuthenticationError):
    code = "unknown_identity"


class StaleTimestamp(AuthenticationError):
    code = "stale_timestamp"


class InvalidRequestSignature(AuthenticationError):
    code = "invalid_request_signature"


class ReplayedRequest(AuthenticationError):
    code = "replayed_request"


class RateLimited(ChainReviewError):
    code = "rate_limited"
