"""Exception types shared across the package."""


class DomainError(ValueError):
    """Argument lies at or beyond the domain of the internal energy.

    The internal energy density diverges as the polarization magnitude
    approaches the saturation bound; callers treat this as +inf.
    """


class SolverError(RuntimeError):
    """Inner minimization failed (non-convergence or broken factorization)."""

    def __init__(self, message, *, iterations=None, grad_norm=None, iterate=None):
        super().__init__(message)
        self.iterations = iterations
        self.grad_norm = grad_norm
        self.iterate = iterate


class OperatorError(SolverError):
    """A hysteresis operator evaluation failed.

    ``site`` is the index of the failing pinning site for the forward
    operator (the inner problems decouple); ``None`` for the coupled
    inverse problem.
    """

    def __init__(self, message, *, site=None, **kw):
        super().__init__(message, **kw)
        self.site = site


class OuterSolverError(RuntimeError):
    """Field-level (FEM) outer iteration failed to converge."""

    def __init__(self, message, *, residual_history=None, step=None, formulation=None):
        super().__init__(message)
        self.residual_history = residual_history
        self.step = step
        self.formulation = formulation
