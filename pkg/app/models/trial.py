# app/models/trial.py
from sqlalchemy import (
    Column,
    DateTime,
    Enum as SQLEnum,
    Float,
    ForeignKey,
    Integer,
    String,
    UniqueConstraint,
)
from sqlalchemy.orm import relationship
from sqlalchemy.sql import func
import enum

from app.db.session import Base


class DesignModel(str, enum.Enum):
    NORMAL = "normal"
    POISSON = "poisson"


class Trial(Base):
    __tablename__ = "trials"

    id = Column(Integer, primary_key=True, index=True)
    name = Column(String, nullable=False)

    # Design
    model = Column(SQLEnum(DesignModel), default=DesignModel.NORMAL, nullable=False)
    theta0 = Column(Float, nullable=False, default=0.0)
    theta1 = Column(Float, nullable=False)
    g = Column(Float, nullable=True)  # exposure ratio, Poisson designs only
    rho = Column(Float, nullable=True)

    # Stopping rule
    k0 = Column(Float, nullable=False)
    k1 = Column(Float, nullable=False)
    burn_in_events = Column(Integer, nullable=False, default=1)
    max_events = Column(Integer, nullable=True)

    # Timestamps
    created_at = Column(DateTime(timezone=True), server_default=func.now(), nullable=False)
    updated_at = Column(DateTime(timezone=True), onupdate=func.now())

    # Relationships
    records = relationship(
        "TrialRecord",
        back_populates="trial",
        cascade="all, delete-orphan",
        order_by="TrialRecord.sequence",
    )

    def __repr__(self):
        return f"<Trial {self.id} {self.name}>"


class TrialRecord(Base):
    __tablename__ = "trial_records"
    __table_args__ = (UniqueConstraint("trial_id", "subject_id", name="uq_trial_subject"),)

    id = Column(Integer, primary_key=True, index=True)
    trial_id = Column(Integer, ForeignKey("trials.id"), nullable=False, index=True)
    sequence = Column(Integer, nullable=False)  # ingestion order within the trial

    subject_id = Column(String, nullable=False)
    time = Column(Float, nullable=False)
    event = Column(Integer, nullable=False)
    arm = Column("group", Integer, nullable=False)

    created_at = Column(DateTime(timezone=True), server_default=func.now(), nullable=False)

    trial = relationship("Trial", back_populates="records")

    def __repr__(self):
        return f"<TrialRecord {self.trial_id}:{self.subject_id}>"
