"""
qsetlab error codes and exceptions.

Every rejection raised by the kernel is a QuasiSetError subclass with a
stable ``code``. The code table below is the reference for CLI diagnostics.
"""
import logging
from typing import Optional

logger = logging.getLogger(__name__)


error_codes = {
    'duplicate-species': 'species id declared more than once',
    'unknown-species': 'species id not registered in the universe',
    'empty-label': 'macro-atom label must be non-empty',
    'dangling-handle': 'handle does not name an entity of the universe',
    'frozen-universe': 'universe construction phase is over',
    'identity-undefined': 'identity undefined for m-atoms',
    'not-a-qset': 'argument is not a quasi-set',
    'invalid-relation': 'pairs do not lie in source x target',
    'not-quasi-function': 'relation is not a quasi-function',
    'image-undefined': 'argument is not indistinguishable from any domain element',
    'not-in-carrier': 'argument is not a member of the carrier',
    'invalid-region': 'malformed region',
    'a1-violation': '[x]2 must saturate to exactly two m-atoms',
    'a2-violation': 'sup-diameter of V exceeds 2c, or c is not positive',
    'outside-space': 'argument is neither a sample point of V nor an atom of [x]2',
    'invalid-axis': 'measurement axis must be a unit 3-vector',
    'invalid-sample-size': 'number of samples must be positive',
    'invalid-seed': 'sampling seed must be a non-negative integer',
    'syntax': 'formula syntax error',
    'ill-formed': 'formula is not well formed',
    'unsorted-variable': 'free variable without sort or value',
    'model-syntax': 'model file syntax error',
    'model-validation': 'model file validation error',
}


class QuasiSetError(Exception):
    """
    A qsetlab specific exception.
    """
    code = 'quasi-set'

    def __init__(self, message: Optional[str] = None):
        super().__init__(message or error_codes.get(self.code, self.code))
        self.message = str(self)


class DuplicateSpecies(QuasiSetError):
    code = 'duplicate-species'

    def __init__(self, species_id: str):
        super().__init__(f"duplicate species id {species_id!r}")
        self.species_id = species_id


class UnknownSpecies(QuasiSetError):
    code = 'unknown-species'


class EmptyLabel(QuasiSetError):
    code = 'empty-label'


class DanglingHandle(QuasiSetError):
    code = 'dangling-handle'


class FrozenUniverse(QuasiSetError):
    code = 'frozen-universe'


class IdentityUndefined(QuasiSetError):
    code = 'identity-undefined'


class NotAQset(QuasiSetError):
    code = 'not-a-qset'


class InvalidRelation(QuasiSetError):
    code = 'invalid-relation'


class NotQuasiFunction(QuasiSetError):
    code = 'not-quasi-function'


class ImageUndefined(QuasiSetError):
    code = 'image-undefined'


class NotInCarrier(QuasiSetError):
    code = 'not-in-carrier'


class InvalidRegion(QuasiSetError):
    code = 'invalid-region'


class A1Violation(QuasiSetError):
    code = 'a1-violation'


class A2Violation(QuasiSetError):
    code = 'a2-violation'

    def __init__(self, message: str, check=None):
        super().__init__(message)
        self.check = check


class OutsideSpace(QuasiSetError):
    code = 'outside-space'


class InvalidAxis(QuasiSetError):
    code = 'invalid-axis'


class InvalidSampleSize(QuasiSetError):
    code = 'invalid-sample-size'


class InvalidSeed(QuasiSetError):
    code = 'invalid-seed'


def check_seed(seed: int) -> int:
    if isinstance(seed, bool) or int(seed) != seed or seed < 0:
        raise InvalidSeed(f"sampling seed must be a non-negative integer, got {seed!r}")
    return int(seed)


class FormulaSyntaxError(QuasiSetError):
    code = 'syntax'

    def __init__(self, diagnostic):
        super().__init__(str(diagnostic))
        self.diagnostic = diagnostic


class IllFormedFormula(QuasiSetError):
    code = 'ill-formed'

    def __init__(self, diagnostics):
        super().__init__("; ".join(str(d) for d in diagnostics))
        self.diagnostics = list(diagnostics)


class UnsortedVariable(QuasiSetError):
    code = 'unsorted-variable'


class ModelSyntaxError(QuasiSetError):
    code = 'model-syntax'

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ModelValidationError(QuasiSetError):
    code = 'model-validation'

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def raise_error(error: QuasiSetError):
    """
    Log the error and raise it.
    """
    logger.error("%s: %s", error.code, error.message)
    raise error
