"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or mismatched input (lengths, spaces, signs)."""


class PreconditionError(ValueError):
    """A mathematical hypothesis required by a checker does not hold.

    ``hypothesis`` names the failed assumption so callers (and the CLI) can
    report it verbatim.
    """

    def __init__(self, hypothesis: str, detail: str = ""):
        self.hypothesis = hypothesis
        msg = f"hypothesis failed: {hypothesis}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class UnsupportedExponentError(ValueError):
    """Exact operator norms exist only for p in {1, 2, inf}."""
