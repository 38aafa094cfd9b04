"""
Database models using SQLAlchemy ORM.
"""

from datetime import datetime, timezone

from sqlalchemy import JSON, DateTime, Float, Integer, String, create_engine
from sqlalchemy.orm import DeclarativeBase, Mapped, mapped_column, sessionmaker
from sqlalchemy.pool import StaticPool

from src.config import settings


class Base(DeclarativeBase):
    pass


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


class RunTable(Base):
    """One recorded backtest, corruption or ablation run."""

    __tablename__ = "runs"

    id: Mapped[int] = mapped_column(Integer, primary_key=True, autoincrement=True)
    command: Mapped[str] = mapped_column(String(32), nullable=False, index=True)
    seed: Mapped[int] = mapped_column(Integer, nullable=False)
    created_at: Mapped[datetime] = mapped_column(DateTime, default=_utcnow, nullable=False)
    output_dir: Mapped[str] = mapped_column(String(1024), nullable=False)

    # Headline counts
    n_records: Mapped[int] = mapped_column(Integer, default=0, nullable=False)
    availability: Mapped[float] = mapped_column(Float, nullable=True)
    alerts_green: Mapped[int] = mapped_column(Integer, default=0, nullable=False)
    alerts_orange: Mapped[int] = mapped_column(Integer, default=0, nullable=False)
    alerts_red: Mapped[int] = mapped_column(Integer, default=0, nullable=False)

    # Resolved config echo and metrics summary
    config: Mapped[dict] = mapped_column(JSON, default=dict, nullable=False)
    summary: Mapped[dict] = mapped_column(JSON, default=dict, nullable=False)

    def __repr__(self) -> str:
        return f"<Run(id={self.id}, command='{self.command}', seed={self.seed})>"


def _make_engine(url: str):
    if url in ("sqlite://", "sqlite:///:memory:"):
        # one shared connection so every session sees the same in-memory tables
        return create_engine(
            url, echo=settings.debug, connect_args={"check_same_thread": False}, poolclass=StaticPool
        )
    return create_engine(url, echo=settings.debug, pool_pre_ping=True)


# Database engine and session
engine = _make_engine(settings.database_url)

SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)


def init_database() -> None:
    """Initialize database tables."""
    Base.metadata.create_all(bind=engine)
