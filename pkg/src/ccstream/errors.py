"""Shared exception types."""


class CapacityError(ValueError):
    """Input exceeds a deliberate size guard (brute-force oracles only)."""


class ParseError(ValueError):
    """Malformed input file; message carries file and line number."""


class AccountingError(RuntimeError):
    """The live-word census went negative: a consumer released too much."""


class StreamRunError(RuntimeError):
    """A pass consumer raised mid-run; carries the consumer identity."""

    def __init__(self, consumer: str, message: str):
        super().__init__(f"consumer {consumer!r}: {message}")
        self.consumer = consumer
