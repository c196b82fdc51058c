"""Shared error type for the learner package."""


class LearnerError(RuntimeError):
    """Contract violation in the training stack (config, samples, grads)."""
