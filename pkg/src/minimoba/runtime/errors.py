"""Error type for the sample-transport pipeline."""


class PipelineError(RuntimeError):
    """Contract violation in framing, transport, pooling or model sync."""
