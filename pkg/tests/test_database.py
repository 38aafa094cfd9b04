"""Run store repository."""

import pytest
from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker
from sqlalchemy.pool import StaticPool

from src.database import repository
from src.database.models import Base


@pytest.fixture
def db():
    engine = create_engine("sqlite://", connect_args={"check_same_thread": False}, poolclass=StaticPool)
    Base.metadata.create_all(bind=engine)
    session = sessionmaker(bind=engine)()
    yield session
    session.close()
    engine.dispose()


def _summary(green: int, red: int) -> dict:
    return {
        "command": "backtest",
        "alerts": {"records": green + red, "availability": 1.0, "alerts": {"GREEN": green, "ORANGE": 0, "RED": red}},
    }


def test_create_and_fetch(db):
    run = repository.create_run(db, "backtest", 42, "outputs/a", {"run": {"seed": 42}}, _summary(10, 2))
    assert run.id is not None
    fetched = repository.get_by_id(db, run.id)
    assert fetched.n_records == 12
    assert fetched.alerts_red == 2
    assert fetched.availability == 1.0
    assert fetched.summary["alerts"]["alerts"]["GREEN"] == 10
    assert fetched.config == {"run": {"seed": 42}}
    assert repository.get_by_id(db, 999) is None


def test_latest_and_listing(db):
    first = repository.create_run(db, "backtest", 1, "outputs/a", {}, _summary(1, 0))
    second = repository.create_run(db, "corrupt", 1, "outputs/b", {}, _summary(1, 1))
    assert repository.get_latest(db).id == second.id
    assert repository.get_latest(db, command="backtest").id == first.id
    assert [r.id for r in repository.list_runs(db)] == [second.id, first.id]
    assert len(repository.list_runs(db, limit=1)) == 1


def test_delete(db):
    run = repository.create_run(db, "ablate", 3, "outputs/c", {}, _summary(0, 0))
    assert repository.delete_run(db, run.id)
    assert repository.get_by_id(db, run.id) is None
    assert not repository.delete_run(db, run.id)


def test_empty_store(db):
    assert repository.get_latest(db) is None
    assert repository.list_runs(db) == []
