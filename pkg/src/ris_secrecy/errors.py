"""Exception types shared by the subproblem solvers and the outer loop."""


class NoFeasibleStart(RuntimeError):
    """The secrecy target is unreachable in the current subproblem."""


class SubproblemInfeasible(RuntimeError):
    """A convex subproblem reported infeasibility mid-iteration."""


class MaxIterations(RuntimeError):
    """An iteration cap was reached before the convergence test fired."""


class NonMonotoneError(RuntimeError):
    """The provably monotone quantity increased: indicates a solver bug."""
