"""Exception hierarchy shared by every maskopt module."""


class MaskoptError(Exception):
    """Base class for all errors raised by maskopt."""


class InvalidEdge(MaskoptError, ValueError):
    pass


class InvalidNode(MaskoptError, ValueError):
    pass


class InvalidArgument(MaskoptError, ValueError):
    pass


class EmptyHonestSet(MaskoptError, ValueError):
    """Every agent is corrupted, so there is nothing left to protect."""


class NotConnected(MaskoptError, ValueError):
    pass


class AllZeroSpectrum(MaskoptError, ValueError):
    """No eigenvalue lies above the zero cutoff."""


class TooLarge(MaskoptError, ValueError):
    """Input exceeds the size limit of an exhaustive enumeration."""


class InvalidSigma(MaskoptError, ValueError):
    pass


class InvalidTable(MaskoptError, ValueError):
    pass


class ShapeError(MaskoptError, ValueError):
    pass


class NoUniqueMinimizer(MaskoptError, ValueError):
    """Aggregate quadratic term is not positive definite."""


class Diverged(MaskoptError, RuntimeError):
    pass


class IncomparableCoefficients(MaskoptError, ValueError):
    """Two coefficient sets differ on corrupted rows or in their honest sums."""


class PrivacyBreach(MaskoptError):
    """The corrupted set cuts the honest agents; no finite guarantee exists."""


class ScenarioError(MaskoptError, ValueError):
    """Scenario file failed to parse or validate.

    ``violations`` holds one ``(field_path, code, message)`` triple per problem
    found, so callers can report all of them at once.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        lines = [f"{path}: {code}: {msg}" for path, code, msg in self.violations]
        super().__init__("invalid scenario:\n  " + "\n  ".join(lines))

    @property
    def codes(self):
        return {code for _, code, _ in self.violations}
