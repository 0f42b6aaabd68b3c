class TemplateMinerError(Exception):
    """Base class of every error raised by the template miner."""


# --- template_core ---
class EmptyTemplate(TemplateMinerError):
    pass


# --- log_ingest ---
class EmptyLine(TemplateMinerError):
    pass


class ContainsWildcardMarker(TemplateMinerError):
    pass


class DuplicateTemplate(TemplateMinerError):
    pass


class EmptyGroundTruth(TemplateMinerError):
    pass


class NoMessages(TemplateMinerError):
    pass


# --- llm_client ---
class EmptyBatch(TemplateMinerError):
    pass


class BackendError(TemplateMinerError):
    """A single exchange with the completion backend failed."""


class BackendTimeout(BackendError):
    pass


class HttpStatusError(BackendError):
    def __init__(self, status_code: int, body: str = ""):
        super().__init__(f"backend answered HTTP {status_code}: {body[:200]}")
        self.status_code = status_code


class MalformedResponse(BackendError):
    pass


class ScriptExhausted(BackendError):
    pass


class BackendUnreachable(BackendError):
    """Raised by the miner when the very first http query cannot connect.

    Carries the partial result so callers can still write it out.
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


# --- evaluation ---
class InvalidCounts(TemplateMinerError):
    pass


# --- cli ---
class SnapshotMismatch(TemplateMinerError):
    def __init__(self, diff: str):
        super().__init__("replayed result differs from the stored snapshot")
        self.diff = diff
