"""Exception hierarchy shared by the simulator and the CLI"""

from typing import List, Optional


class SimulationError(Exception):
    """Base class for every error raised by the simulator"""


class ConfigurationError(SimulationError):
    """Bad config file, unknown key, malformed unit or scan spec"""


class ParameterError(ConfigurationError):
    """Physical parameters violate one or more constraints"""

    def __init__(self, violations: List[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations) or "invalid parameters")


class UndefinedQuantityError(SimulationError):
    """Derived quantity has no value for these parameters (e.g. z_B on resonance)"""

    def __init__(self, quantity: str, reason: str):
        self.quantity = quantity
        self.reason = reason
        super().__init__(f"{quantity} is undefined: {reason}")


class GridError(SimulationError):
    """Resolution, support, CFL or step-size guard violated"""


class NumericalError(SimulationError):
    """Pole hit, non-finite values, aliasing or another numeric failure"""

    def __init__(self, message: str, snapshot_path: Optional[str] = None):
        self.snapshot_path = snapshot_path
        if snapshot_path:
            message = f"{message} (diagnostic snapshot: {snapshot_path})"
        super().__init__(message)


class GoldenMismatchError(SimulationError):
    """Golden file comparison failed"""

    def __init__(self, mismatches: List[str]):
        self.mismatches = list(mismatches)
        super().__init__(f"{len(self.mismatches)} golden mismatch(es): " + "; ".join(self.mismatches[:5]))
