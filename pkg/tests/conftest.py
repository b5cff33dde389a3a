# tests/conftest.py
import pytest
from fastapi.testclient import TestClient
from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker
from sqlalchemy.pool import StaticPool

from app.db.base import Base
from app.db.session import get_db
from app.main import app
from app.schemas.evidence import SurvivalDataset
from tests.oracles import FAVOURS_TREATMENT, FOUR_SUBJECTS, TIED_CENSORED, TWO_SUBJECTS


@pytest.fixture
def two_subjects():
    return SurvivalDataset.from_tuples(TWO_SUBJECTS)


@pytest.fixture
def four_subjects():
    return SurvivalDataset.from_tuples(FOUR_SUBJECTS)


@pytest.fixture
def tied_censored():
    return SurvivalDataset.from_tuples(TIED_CENSORED)


@pytest.fixture
def favours_treatment():
    return SurvivalDataset.from_tuples(FAVOURS_TREATMENT)


@pytest.fixture
def db_session():
    engine = create_engine(
        "sqlite://",
        connect_args={"check_same_thread": False},
        poolclass=StaticPool,
    )
    Base.metadata.create_all(bind=engine)
    TestingSession = sessionmaker(autocommit=False, autoflush=False, bind=engine)
    session = TestingSession()
    try:
        yield session
    finally:
        session.close()
        Base.metadata.drop_all(bind=engine)


@pytest.fixture
def client(db_session):
    def override_get_db():
        yield db_session

    app.dependency_overrides[get_db] = override_get_db
    with TestClient(app) as test_client:
        yield test_client
    app.dependency_overrides.clear()
