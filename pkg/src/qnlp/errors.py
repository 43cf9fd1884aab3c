"""Exception types shared across the package."""


class QnlpError(Exception):
    """Base class for every error raised by this package."""


class TypeMismatch(QnlpError):
    def __init__(self, left, right, message="type mismatch"):
        self.left = left
        self.right = right
        super().__init__(f"{message}: {left} != {right}")


class UnknownWord(QnlpError):
    def __init__(self, word):
        self.word = word
        super().__init__(f"unknown word: {word!r}")


class NoReduction(QnlpError):
    def __init__(self, tokens, stuck):
        self.tokens = tuple(tokens)
        self.stuck = stuck
        super().__init__(
            f"no reduction to the target type for {' '.join(self.tokens)!r}; "
            f"stuck at {stuck}")


class TooLarge(QnlpError):
    pass


class NotCircuitLike(QnlpError):
    pass


class UnsupportedType(QnlpError):
    pass


class UnboundParameter(QnlpError):
    def __init__(self, slot):
        self.slot = slot
        super().__init__(f"unbound parameter slot {slot}")


class WidthExceeded(QnlpError):
    pass


class ZeroSuccess(QnlpError):
    """No shot passed post-selection, so the conditional estimate is undefined."""

    def __init__(self, shots):
        self.shots = shots
        super().__init__(f"no shot out of {shots} passed post-selection")


class DimensionMismatch(QnlpError):
    pass


class ConfigError(QnlpError):
    pass
