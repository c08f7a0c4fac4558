"""
Error hierarchy shared by every eudkit stage.

Each class carries the exit status the CLI maps it to:
  1 usage, 2 input format, 3 internal invariant violation.
"""
from __future__ import annotations

from typing import Optional


class EudkitError(Exception):
    exit_code: int = 2


class UsageError(EudkitError):
    exit_code = 1


class ConlluParseError(EudkitError):
    """Malformed CoNLL-U input; ``line_no`` is 1-based."""

    def __init__(self, line_no: int, reason: str):
        self.line_no = int(line_no)
        self.reason = reason
        super().__init__(f"line {self.line_no}: {reason}")


class InvariantViolation(EudkitError):
    exit_code = 3

    def __init__(self, token: str, reason: str):
        self.token = token
        self.reason = reason
        super().__init__(f"token {token}: {reason}")


class GraphError(EudkitError):
    pass


class ProbabilityFormatError(EudkitError):
    def __init__(self, line_no: Optional[int], reason: str):
        self.line_no = line_no
        self.reason = reason
        where = f"record on line {line_no}: " if line_no is not None else ""
        super().__init__(f"{where}{reason}")


class ShapeMismatchError(ProbabilityFormatError):
    pass


class TokenizationMismatch(EudkitError):
    def __init__(self, sentence_index: Optional[int], reason: str):
        self.sentence_index = sentence_index
        self.reason = reason
        where = f"sentence {sentence_index + 1}: " if sentence_index is not None else ""
        super().__init__(f"{where}{reason}")


class InstanceTooLarge(EudkitError):
    def __init__(self, n_unreachable: int, max_nodes: int):
        self.n_unreachable = n_unreachable
        self.max_nodes = max_nodes
        super().__init__(
            f"{n_unreachable} unreachable nodes exceed the oracle limit of {max_nodes}"
        )


class StageError(EudkitError):
    """Wraps a failure with the pipeline stage it happened in."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 3)
        super().__init__(f"[{stage}] {cause}")
