import logging
import os
import sys

from app.db.base import Base
from app.db.session import make_engine
from app.core.config import settings

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
)
logger = logging.getLogger("create_db")


def init_db(url: str) -> None:
    """Create the monitored-trial tables without going through migrations"""
    engine = make_engine(url)
    logger.info(f"Creating tables on {engine.url.render_as_string(hide_password=True)}")
    Base.metadata.create_all(bind=engine)
    logger.info(f"Tables ready: {', '.join(sorted(Base.metadata.tables))}")


if __name__ == "__main__":
    database_url = os.environ.get("DATABASE_URL") or settings.DATABASE_URL
    if not database_url:
        logger.error("DATABASE_URL is not set")
        sys.exit(1)
    init_db(database_url)
