"""
Error hierarchy for the planning library
"""


class RamlabError(Exception):
    """Base class for every error raised by the library"""


class DomainError(RamlabError, ValueError):
    """A parameter lies outside its admissible range"""


class RamModelError(RamlabError):
    """A model cannot be used as given"""


class InfeasibleRowError(RamModelError):
    """An interval row admits no probability distribution"""

    def __init__(self, state, action, lo_sum, hi_sum):
        self.state = state
        self.action = action
        self.lo_sum = lo_sum
        self.hi_sum = hi_sum
        super().__init__(
            f"Row ({state}, {action}) is infeasible: sum(lo)={lo_sum:.12g}, sum(hi)={hi_sum:.12g}"
        )


class ModelFormatError(RamModelError, DomainError):
    """A model file is malformed"""


class SolverDivergenceError(RamlabError):
    """Value iteration did not reach the requested tolerance"""

    def __init__(self, iterations, residual):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"Value iteration did not converge after {iterations} iterations (residual {residual:.3e})"
        )


class LinearProgramError(RamlabError):
    """The dense simplex routine failed on a problem it should solve"""


class ContractViolationError(RamlabError):
    """A caller broke the decide/advance protocol"""


class OracleSizeError(RamlabError):
    """A brute-force computation exceeded its belief budget"""

    def __init__(self, budget):
        self.budget = budget
        super().__init__(f"Exact planning visited more than {budget} beliefs")
