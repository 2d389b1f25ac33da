"""Exception hierarchy shared by the vvlab modules."""


class VVLabError(Exception):
    """Base class for all vvlab failures."""


class DomainError(VVLabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class BracketError(VVLabError):
    """A root could not be bracketed; indicates a defect in the function evaluated."""


class TruncationError(VVLabError):
    """A truncated series cannot meet its tolerance at the requested point."""


class InitialLayerError(TruncationError):
    """Vorticity requested at t = 0 for data with nonzero total vorticity."""


class QuadratureError(VVLabError):
    """Successive quadrature refinements disagree beyond tolerance."""


class FitError(VVLabError):
    """A rate fit was refused (degenerate input or non power-law data)."""


class ConfigError(VVLabError):
    """One or more configuration problems; ``errors`` lists every one found."""

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
