"""Database package."""

from src.database.models import RunTable, Base, engine, SessionLocal, init_database
from src.database import repository

__all__ = [
    "RunTable",
    "Base",
    "engine",
    "SessionLocal",
    "init_database",
    "repository",
]
