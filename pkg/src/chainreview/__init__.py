"""chainreview: a peer review platform engine with envelope-encrypted
storage, expert endorsement thresholds, consensus-validated abstracts, and a
tamper-evident transaction ledger."""

__version__ = "0.1.0"
