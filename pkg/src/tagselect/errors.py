"""Exception types shared across the package."""


class TagSelectError(Exception):
    """Base class for every domain error raised by this package.

    ``category`` is a short machine-readable label used by the CLI when
    printing ``error[<category>]`` diagnostics.
    """

    category = "data"


class FormatError(TagSelectError):
    """A file could not be parsed.  Carries the offending path and line."""

    category = "format"

    def __init__(self, path, lineno, message):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = str(path)
        self.lineno = lineno


class UntrainableTagError(TagSelectError):
    """Threshold learning needs at least one positive and one negative label."""

    category = "model"


class DegenerateFitError(TagSelectError):
    """A least-squares fit has a rank-deficient normal matrix."""

    category = "model"
