"""
Database operations for recorded runs.
Simple function-based access to run data.
"""

from typing import Any, Dict, List, Optional

from sqlalchemy import select
from sqlalchemy.orm import Session

from src.database.models import RunTable


def create_run(
    db: Session,
    command: str,
    seed: int,
    output_dir: str,
    config: Dict[str, Any],
    summary: Dict[str, Any],
) -> RunTable:
    """Store a finished run; headline counts are lifted from the summary."""
    alerts = summary.get("alerts", {}).get("alerts", {})
    run = RunTable(
        command=command,
        seed=seed,
        output_dir=output_dir,
        n_records=int(summary.get("alerts", {}).get("records", 0)),
        availability=summary.get("alerts", {}).get("availability"),
        alerts_green=int(alerts.get("GREEN", 0)),
        alerts_orange=int(alerts.get("ORANGE", 0)),
        alerts_red=int(alerts.get("RED", 0)),
        config=config,
        summary=summary,
    )
    db.add(run)
    db.commit()
    db.refresh(run)
    return run


def get_by_id(db: Session, run_id: int) -> Optional[RunTable]:
    """Get run by ID."""
    return db.get(RunTable, run_id)


def get_latest(db: Session, command: Optional[str] = None) -> Optional[RunTable]:
    """Most recently stored run, optionally of one command."""
    stmt = select(RunTable).order_by(RunTable.id.desc()).limit(1)
    if command:
        stmt = stmt.where(RunTable.command == command)
    return db.scalars(stmt).first()


def list_runs(db: Session, limit: int = 20) -> List[RunTable]:
    """Newest runs first."""
    return list(db.scalars(select(RunTable).order_by(RunTable.id.desc()).limit(limit)))


def delete_run(db: Session, run_id: int) -> bool:
    """Delete a run."""
    run = get_by_id(db, run_id)
    if not run:
        return False

    db.delete(run)
    db.commit()
    return True
