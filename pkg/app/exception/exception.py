from typing import Generic, Optional, TypeVar

from fastapi import HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from app.models import BaseResponse

T = TypeVar("T")


class KGQAException(Exception, Generic[T]):
    """Base error of the engine. Carries the envelope returned over HTTP."""

    default_status = 500
    default_error_code = "KGQA_ERROR"

    def __init__(
            self,
            message: Optional[str] = None,
            error_code: Optional[str] = None,
            status_code: Optional[int] = None,
            data: Optional[T] = None,
    ):
        self.status_code = status_code or self.default_status
        self.error_code = error_code or self.default_error_code
        self.message = message or "An error occurred"
        self.data = data
        self.response = BaseResponse[T](
            status=self.status_code,
            error_code=self.error_code,
            message=self.message,
            data=data
        )
        super().__init__(self.message)


class ConfigError(KGQAException):
    default_error_code = "CONFIG_ERROR"


class RecordError(KGQAException):
    """A single line of a line-delimited file could not be used."""

    default_status = 400
    default_error_code = "INVALID_RECORD"

    def __init__(self, message: str, line_number: int, path: Optional[str] = None):
        self.line_number = line_number
        self.path = path
        where = f"{path}:{line_number}" if path else f"line {line_number}"
        super().__init__(f"{where}: {message}", data={"line": line_number})


class LoadError(KGQAException):
    default_status = 400
    default_error_code = "LOAD_ERROR"


class GraphParseError(RecordError):
    default_error_code = "GRAPH_PARSE_ERROR"


class ProviderError(KGQAException):
    default_status = 502
    default_error_code = "PROVIDER_ERROR"


class FixtureMissError(ProviderError):
    default_status = 404
    default_error_code = "FIXTURE_MISS"


class DimensionMismatchError(KGQAException):
    default_status = 400
    default_error_code = "DIMENSION_MISMATCH"


class EmptyCorpusError(KGQAException):
    default_status = 400
    default_error_code = "EMPTY_CORPUS"


class MetricError(KGQAException):
    default_status = 400
    default_error_code = "METRIC_ERROR"


class UnknownMetricError(MetricError):
    default_error_code = "UNKNOWN_METRIC"


class TrainingError(KGQAException):
    default_error_code = "TRAINING_ERROR"


class GraphTooSmallError(TrainingError):
    default_status = 400
    default_error_code = "GRAPH_TOO_SMALL"


class UnresolvablePatternError(KGQAException):
    default_status = 422
    default_error_code = "UNRESOLVABLE_PATTERN"


class NoCandidatesError(KGQAException):
    default_status = 404
    default_error_code = "NO_CANDIDATES"


class CustomHTTPException(HTTPException):
    def __init__(
            self,
            status_code: int,
            error_code: Optional[str] = None,
            message: Optional[str] = None,
            data: Optional[T] = None,
    ):
        self.status_code = status_code
        self.error_code = error_code or str(status_code)
        self.message = message or "An error occurred"
        self.data = data
        self.response = BaseResponse(
            status=status_code,
            error_code=self.error_code,
            message=self.message,
            data=data,
        )
        self.detail = self.message
        super().__init__(status_code=status_code, detail=self.detail)


# Exception handlers to register with FastAPI app
async def kgqa_exception_handler(request: Request, exc: KGQAException):
    return JSONResponse(
        status_code=exc.status_code,
        content=exc.response.model_dump()
    )


async def http_exception_handler(request: Request, exc: StarletteHTTPException):
    return JSONResponse(
        status_code=exc.status_code,
        content=BaseResponse(
            status=exc.status_code,
            error_code=getattr(exc, "error_code", str(exc.status_code)),
            message=str(exc.detail),
            data=None
        ).model_dump()
    )


async def validation_exception_handler(request: Request, exc: RequestValidationError):
    return JSONResponse(
        status_code=422,
        content=BaseResponse(
            status=422,
            error_code="422",
            message="Validation error",
            data=[{"loc": list(err["loc"]), "msg": err["msg"], "type": err["type"]} for err in exc.errors()]
        ).model_dump()
    )


async def general_exception_handler(request: Request, exc: Exception):
    return JSONResponse(
        status_code=500,
        content=BaseResponse(
            status=500,
            error_code="500",
            message=str(exc),
            data=None
        ).model_dump()
    )


def register_exception_handlers(app):
    """Register all exception handlers with the FastAPI app"""
    app.add_exception_handler(KGQAException, kgqa_exception_handler)
    app.add_exception_handler(StarletteHTTPException, http_exception_handler)
    app.add_exception_handler(RequestValidationError, validation_exception_handler)
    app.add_exception_handler(Exception, general_exception_handler)
