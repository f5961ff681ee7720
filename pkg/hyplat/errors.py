"""Exception hierarchy shared by the library and the command line."""


class HyplatError(Exception):
    """Base class for every error raised by hyplat."""


# --- Input errors (exit code 2) ---

class InputError(HyplatError):
    pass


class MatrixParseError(InputError):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class AsymmetricMatrixError(InputError):
    pass


class GraphError(InputError):
    pass


class SignatureError(InputError):
    """The Gram matrix does not have signature (n-1, -1)."""


class SingularError(InputError):
    """The Gram matrix has determinant zero."""


# --- Algorithm errors ---

class PreconditionError(HyplatError):
    pass


class RankError(HyplatError):
    """The supplied vectors do not span the ambient space."""


class BlindDirectionError(HyplatError):
    """No neighbour exists in a direction lying in the closed cone V1."""


class NotFillableError(HyplatError):
    """The discriminant group has no element of order p^2."""


class OrbitBudgetError(HyplatError):
    """An orbit enumeration grew past the configured cap (exit code 3)."""


class InternalError(HyplatError):
    pass
