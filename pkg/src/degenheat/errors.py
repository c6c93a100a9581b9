"""Exception hierarchy shared by all degenheat modules."""


class DegenheatError(Exception):
    """Base class for every error raised by this package."""


class DomainError(DegenheatError, ValueError):
    """An argument lies outside the domain of an operation."""


class DegenerateCoefficientError(DegenheatError, ArithmeticError):
    """|p(t)| fell below the nonvanishing floor."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class DegenerateKernelError(DegenheatError, ArithmeticError):
    """The kernel was asked for an argument without Gaussian decay (Re omega <= 0)."""

    def __init__(self, message, omega=None):
        super().__init__(message)
        self.omega = omega


class DegenerateRegimeError(DegenheatError, ArithmeticError):
    """Re omega dropped below rho_min at a requested time."""

    def __init__(self, message, t=None, tau=None):
        super().__init__(message)
        self.t = t
        self.tau = tau


class NonConvergenceError(DegenheatError, ArithmeticError):
    """Adaptive quadrature hit its panel cap before meeting the tolerance."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class OracleError(DegenheatError, ArithmeticError):
    """The Crank-Nicolson oracle broke down (tiny pivot)."""


class DomainTooSmallError(DomainError):
    """Data is not negligible at the oracle's far-field boundary."""


class SpecParseError(DegenheatError, ValueError):
    """A problem-spec file is malformed; ``key`` holds the offending key path."""

    def __init__(self, message, key=None):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key
