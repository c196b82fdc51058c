"""Shared error type for the network package."""


class NetError(RuntimeError):
    """Contract violation in the network stack (shapes, masks, finiteness)."""
