"""Error type for the evaluation harness."""


class EvalError(RuntimeError):
    """Contract violation in rating, match, or tournament plumbing."""
