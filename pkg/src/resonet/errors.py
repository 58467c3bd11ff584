"""Exception types shared across the package."""


class ModelError(ValueError):
    """An input describes a physically or structurally invalid model."""


class NumericalError(RuntimeError):
    """A computation left its validated regime (divergence, lost trace, no convergence)."""


class ConfigError(ValueError):
    """A scenario configuration file is malformed or inconsistent."""
