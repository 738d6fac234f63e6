"""Error types raised by the services and mapped to exit codes by the CLI."""


class AppError(Exception):
    exit_code = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail

    def __str__(self) -> str:
        return self.detail


class UsageError(AppError):
    exit_code = 2


class ConfigError(UsageError):
    pass


class EdgeListParseError(AppError):
    def __init__(self, line_number: int, detail: str):
        super().__init__(f"line {line_number}: {detail}")
        self.line_number = line_number


class TypeConflictError(AppError):
    pass


class EmptyGraphError(AppError):
    pass


class VertexNotFoundError(AppError, KeyError):
    def __init__(self, name: str):
        super().__init__(f"Unknown vertex: {name!r}")
        self.name = name


class SamplerError(AppError):
    pass


class TrainingError(AppError):
    pass


class WeightingError(AppError):
    pass


class EvaluationError(AppError):
    pass


class EmbeddingFormatError(AppError):
    pass


class ManifestError(AppError):
    pass
