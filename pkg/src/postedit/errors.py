"""Shared exception types."""


class MarkupError(ValueError):
    """Tag markup is malformed (unmatched, crossing, or intra-word tags)."""


class UnknownStyleError(MarkupError):
    """A tag references a style id missing from the style table."""


class ProviderError(RuntimeError):
    """An external or built-in provider failed or returned invalid output."""

    def __init__(self, message: str, provider: str = ""):
        super().__init__(message)
        self.provider = provider
