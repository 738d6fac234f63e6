import uuid
from datetime import datetime

from sqlalchemy import Column, String, Integer, DateTime, ForeignKey, Text, Float
from sqlalchemy.orm import relationship

from app.database import Base


class RunRecord(Base):
    __tablename__ = "runs"

    id = Column(String(36), primary_key=True, default=lambda: str(uuid.uuid4()))
    command = Column(String(32), nullable=False)  # train, eval-sim, eval-rec
    model = Column(String(16), nullable=True)
    output_path = Column(Text, nullable=True)
    seed = Column(Integer, nullable=True)
    duration_seconds = Column(Float, nullable=True)
    manifest = Column(Text, nullable=True)
    created_at = Column(DateTime, default=datetime.utcnow, nullable=False)

    metrics = relationship(
        "RunMetric",
        back_populates="run",
        cascade="all, delete-orphan",
        order_by="RunMetric.id",
    )


class RunMetric(Base):
    __tablename__ = "run_metrics"

    id = Column(Integer, primary_key=True, autoincrement=True)
    run_id = Column(
        String(36),
        ForeignKey("runs.id", ondelete="CASCADE"),
        nullable=False,
    )
    name = Column(String(32), nullable=False)
    k = Column(Integer, nullable=True)
    value = Column(Float, nullable=False)

    run = relationship("RunRecord", back_populates="metrics")
