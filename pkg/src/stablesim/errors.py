"""Exception types shared across the simulator."""


class SimulationError(Exception):
    """Base class for all simulator errors."""


class ConfigError(SimulationError):
    """Invalid configuration file or parameter set."""


class NotAnalyzableError(ConfigError):
    """Requested analysis is structurally impossible for the coin design.

    Raised when a collateral-price sweep is requested for an exogenous,
    centrally managed coin: fiat is both the collateral and the reference
    currency, so there is no independent collateral price to shock.
    """


class ControlFailure(SimulationError):
    """A control check found an inconsistency; the path is aborted."""

    def __init__(self, message: str, path_index: int | None = None):
        super().__init__(message)
        self.path_index = path_index
