"""Exception types shared across the package."""


class ResourceCapError(RuntimeError):
    """A requested size exceeds a configured depth/size cap."""

    def __init__(self, what: str, value: int, cap: int, flag: str | None = None):
        self.what = what
        self.value = value
        self.cap = cap
        self.flag = flag
        msg = f"{what}={value} exceeds cap {cap}"
        if flag:
            msg += f" (raise it with {flag})"
        super().__init__(msg)


class StructureError(ValueError):
    """A graph or matrix violates a structural requirement (e.g. connectivity)."""


class PreconditionError(ValueError):
    """A mathematical hypothesis required by an operation does not hold.

    ``pair`` carries the offending vertex pair when there is one.
    """

    def __init__(self, message: str, pair: tuple[str, str] | None = None):
        self.pair = pair
        super().__init__(message)
