class DomainError(ValueError):
    """Invalid numeric argument or inconsistent configuration."""


class DataError(ValueError):
    """Malformed file, document, or dataset."""


class NumericalError(RuntimeError):
    """Simulation state became non-finite."""
