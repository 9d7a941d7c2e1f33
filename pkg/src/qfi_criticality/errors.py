"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input violates a documented precondition."""


class CapacityError(ValidationError):
    """Problem size exceeds what the dense solver supports."""


class SqueezingUndefinedError(ValueError):
    """Mean spin vanishes, so the Wineland parameter has no direction."""


class NoCrossoverError(ValueError):
    """No inflection point found in the sampled temperature range."""


class WindingUndefinedError(ValueError):
    """Spectrum is gapless or the accumulated angle is not quantized."""


class ValidityError(ValueError):
    """Requested quantity lies outside an approximation's regime."""


class ExtrapolationError(ValueError):
    """Fit evaluated too far outside the sampled range."""


class NoThermalEntanglementError(ValueError):
    """The witness never exceeds the bound at any temperature."""


class NoPowerLawError(ValueError):
    """Data in the requested window is not described by a power law."""


class ConfigError(ValueError):
    """Sweep configuration is malformed."""
