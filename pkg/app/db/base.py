# app/db/base.py
# Import all models here for Alembic to detect them
from app.db.session import Base
from app.models.trial import Trial, TrialRecord
