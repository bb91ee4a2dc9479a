"""
Error types for the FIN placement solver
Each error carries the process exit code the CLI reports for it
"""


class FinError(Exception):
    """Base class for all solver errors"""

    exit_code = 1
    title = 'Error'

    def __init__(self, message, offending_id=None):
        super().__init__(message)
        self.message = message
        self.offending_id = offending_id

    def to_dict(self):
        """Convert error to dictionary"""
        return {
            'error': self.title,
            'message': self.message,
            'offending_id': self.offending_id,
            'exit_code': self.exit_code
        }


class ScenarioParseError(FinError):
    """Scenario file is missing or is not valid JSON"""

    exit_code = 2
    title = 'Parse error'


class ScenarioValidationError(FinError):
    """Scenario violates a model invariant"""

    exit_code = 3
    title = 'Validation error'


class UnitError(ScenarioValidationError):
    """Quantity carries an unknown or mismatched unit suffix"""

    title = 'Unit error'


class GraphError(FinError):
    """Graph construction cannot produce a usable graph"""

    exit_code = 1
    title = 'Graph error'


class InfeasibleError(FinError):
    """No configuration satisfies the constraints"""

    exit_code = 4
    title = 'Infeasible'


class SearchSpaceError(FinError):
    """Exhaustive search would exceed the enumeration guard"""

    exit_code = 5
    title = 'Search space exceeded'


class RunSpecError(FinError):
    """Command-line run specification is inconsistent"""

    exit_code = 6
    title = 'Invalid run specification'
