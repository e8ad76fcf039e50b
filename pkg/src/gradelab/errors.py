"""Exception types shared across the platform."""


class GradelabError(Exception):
    """Base class for all platform errors."""


# -- assignment bundles -------------------------------------------------

class MalformedManifest(GradelabError):
    pass


class InvalidSpec(GradelabError):
    pass


class OversizedBody(GradelabError):
    pass


class EmptyResults(GradelabError):
    pass


class UnsupportedKind(GradelabError):
    """The backend cannot evaluate this test-spec kind (bundle/backend mismatch)."""


# -- execution harness ---------------------------------------------------

class BackendUnavailable(GradelabError):
    pass


class CompileTimeout(GradelabError):
    pass


class InconsistentInputs(GradelabError):
    pass


class MemberLookup(GradelabError):
    """A reflective lookup (class/member/method) found nothing.

    Not a fault: evaluate_test_spec turns this into a failing result with
    an absent observed value.
    """


class InvocationFault(GradelabError):
    """A fault raised while executing submitted code (maps to RuntimeFault)."""

    def __init__(self, exception_type: str, message: str):
        super().__init__(f"{exception_type}: {message}")
        self.exception_type = exception_type
        self.message = message


# -- feedback ------------------------------------------------------------

class NotClickable(GradelabError):
    pass


# -- hint engine ---------------------------------------------------------

class BudgetExceeded(GradelabError):
    pass


class ClientError(GradelabError):
    """Base for completion-client failures."""


class ClientTimeout(ClientError):
    """Transport failure persisting after retries."""


class ClientRejected(ClientError):
    """Non-retryable completion-API error."""


class TransientClientFailure(ClientError):
    """Retryable transport failure (raised by clients, consumed by the retry loop)."""


class SanitizationEmpty(GradelabError):
    pass


class OutOfRange(GradelabError):
    pass


class AlreadyRated(GradelabError):
    pass


# -- experiment core -----------------------------------------------------

class NoPendingPrompt(GradelabError):
    pass


class DuplicateResponse(GradelabError):
    pass


class CorruptLog(GradelabError):
    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class InvariantViolation(GradelabError):
    pass


# -- analytics -----------------------------------------------------------

class EmptySample(GradelabError):
    pass


class InvalidP(GradelabError):
    pass


class InvalidQ(GradelabError):
    pass


class NoData(GradelabError):
    pass


class DegenerateDesign(GradelabError):
    pass
