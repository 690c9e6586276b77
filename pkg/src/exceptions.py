# src/exceptions.py
"""Error hierarchy shared by the solver, the loaders and the pipeline."""


class ResolutionError(Exception):
    """Base class for every error raised by this package"""


# Input / I/O side: the pipeline maps these to exit code 2

class InputError(ResolutionError):
    """Raised when an input file cannot be turned into a model"""


class ParseError(InputError):
    """Raised when a line of an input file is malformed"""

    def __init__(self, message: str, line: int = None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(f"{where}{message}")


class DuplicatePair(ParseError):
    """Raised when the same unordered observation pair is listed twice"""


class ProbabilityOutOfRange(ParseError):
    """Raised when a pair probability lies outside [0, 1]"""


class UnknownId(InputError):
    """Raised when a truth file names an observation the instance does not have"""


# Model errors

class InfeasiblePair(ResolutionError, ValueError):
    """Raised when a hypothesis contains a pair that blocking forbids (theta = inf)"""


class InfeasibleColumn(InfeasiblePair):
    """Raised when an infeasible column is offered to the column pool"""


class UniverseMismatch(ResolutionError, ValueError):
    """Raised when two partitions are not defined over the same observations"""


# Solver side: the pipeline maps these to exit code 1

class SolverError(ResolutionError):
    """Raised when an optimization step cannot produce a result"""


class LpError(SolverError):
    """Raised when the LP backend reports a non-optimal status"""


class IterationLimit(LpError):
    """Raised when the LP backend exhausts its pivot budget"""


class Infeasible(LpError):
    """Raised when a linear program has no feasible point"""


class Unbounded(LpError):
    """Raised when a linear program is unbounded below"""


class MaxIterations(SolverError):
    """Raised when column generation exceeds its iteration budget"""


class SizeLimit(SolverError):
    """Raised when an exact routine is asked to handle more elements than allowed"""


class TightnessViolation(SolverError):
    """Raised when the set-packing LP comes out looser than the cycle/odd-wheel LP"""
