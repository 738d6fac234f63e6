from app.models.run import RunRecord, RunMetric

__all__ = [
    "RunRecord",
    "RunMetric",
]
