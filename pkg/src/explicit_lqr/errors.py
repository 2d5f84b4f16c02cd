"""Exception types raised across the package."""


class ExplicitLQRError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(ExplicitLQRError, ValueError):
    pass


class InvalidProblem(ExplicitLQRError, ValueError):
    pass


class NoConvergence(ExplicitLQRError, RuntimeError):
    def __init__(self, max_iter, residual=None):
        self.max_iter = max_iter
        self.residual = residual
        msg = f"no convergence within {max_iter} iterations"
        if residual is not None:
            msg += f" (last change {residual:.3e})"
        super().__init__(msg)


class SingularInnerMatrix(ExplicitLQRError, ArithmeticError):
    pass


class UnstableClosedLoop(ExplicitLQRError, RuntimeError):
    pass


class NotFinitelyDetermined(ExplicitLQRError, RuntimeError):
    def __init__(self, k_max):
        self.k_max = k_max
        super().__init__(f"invariant set not determined within {k_max} iterations")


class EmptyPolytope(ExplicitLQRError, ValueError):
    pass


class UnboundedPolytope(ExplicitLQRError, ValueError):
    pass


class DimensionNot2D(ExplicitLQRError, ValueError):
    pass


class IndexOutOfRange(ExplicitLQRError, IndexError):
    pass


class LengthMismatch(ExplicitLQRError, ValueError):
    pass


class BadStageCount(ExplicitLQRError, ValueError):
    pass


class NotPersistentForm(ExplicitLQRError, ValueError):
    pass


class DegenerateKKT(ExplicitLQRError, ArithmeticError):
    pass


class HorizonMismatch(ExplicitLQRError, ValueError):
    pass


class FingerprintMismatch(ExplicitLQRError, ValueError):
    pass


class StructureViolation(ExplicitLQRError, AssertionError):
    """A structural property that holds in exact arithmetic was violated.

    This points at an enumeration or numerical bug, never at the input.
    """

    def __init__(self, message, tuple_text=None):
        self.tuple_text = tuple_text
        super().__init__(message if tuple_text is None else f"{message}: {tuple_text}")


class OutsideDomain(ExplicitLQRError, ValueError):
    def __init__(self, x, step=None):
        self.x = x
        self.step = step
        where = "" if step is None else f" at step {step}"
        super().__init__(f"state {list(x)} is outside the feasible set{where}")


class InfeasiblePoint(ExplicitLQRError, ValueError):
    pass


class TooLarge(ExplicitLQRError, ValueError):
    pass


class SamplingExhausted(ExplicitLQRError, RuntimeError):
    pass
