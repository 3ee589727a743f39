"""Exception hierarchy.

Every error carries a stable ``code`` string; the CLI prints it verbatim so
harnesses can match on failures without parsing messages.
"""


class SasvError(Exception):
    code = "E_GENERIC"


class IoFailure(SasvError):
    code = "E_IO"


class MalformedLine(SasvError):
    code = "E_MALFORMED_LINE"


class UnknownLabel(SasvError):
    code = "E_UNKNOWN_LABEL"


class DuplicateTrial(SasvError):
    code = "E_DUPLICATE_TRIAL"


class NonFiniteScore(SasvError):
    code = "E_NON_FINITE_SCORE"


class DimensionMismatch(SasvError):
    code = "E_DIMENSION_MISMATCH"


class ZeroNormVector(SasvError):
    code = "E_ZERO_NORM_VECTOR"


class DuplicateUtterance(SasvError):
    code = "E_DUPLICATE_UTTERANCE"


class DuplicateEnrollment(SasvError):
    code = "E_DUPLICATE_ENROLLMENT"


class MissingScore(SasvError):
    code = "E_MISSING_SCORE"


class UnmatchedScore(SasvError):
    code = "E_UNMATCHED_SCORE"


class DuplicateDatasetName(SasvError):
    code = "E_DUPLICATE_DATASET_NAME"


class MalformedManifest(SasvError):
    code = "E_MALFORMED_MANIFEST"


class UnknownEnrollment(SasvError):
    code = "E_UNKNOWN_ENROLLMENT"


class UnknownUtterance(SasvError):
    code = "E_UNKNOWN_UTTERANCE"


class TooFewScores(SasvError):
    code = "E_TOO_FEW_SCORES"


class DegenerateStd(SasvError):
    code = "E_DEGENERATE_STD"


class KeyMismatch(SasvError):
    code = "E_KEY_MISMATCH"


class InvalidWeights(SasvError):
    code = "E_INVALID_WEIGHTS"


class SingleClassInput(SasvError):
    code = "E_SINGLE_CLASS_INPUT"


class EmptyScoreSet(SasvError):
    code = "E_EMPTY_SCORE_SET"


class EmptyClass(SasvError):
    code = "E_EMPTY_CLASS"


class InvalidParams(SasvError):
    code = "E_INVALID_PARAMS"


class DegenerateParams(SasvError):
    code = "E_DEGENERATE_PARAMS"


class EmptyInput(SasvError):
    code = "E_EMPTY_INPUT"


class InvalidConfig(SasvError):
    code = "E_INVALID_CONFIG"
