from datetime import datetime, timezone

from sqlalchemy import Column, DateTime, Float, Integer, String, Text

from nvregsim.core.database import Base

RUN_STATUSES = ("running", "succeeded", "failed")


def _utcnow() -> datetime:
    return datetime.now(timezone.utc).replace(tzinfo=None)


class RunRecord(Base):
    """One CLI invocation: what ran, with which config, and how it ended"""
    __tablename__ = 'run_records'

    id = Column(Integer, primary_key=True)
    run_id = Column(String(64), unique=True, nullable=False, index=True)
    command = Column(String(128), nullable=False, index=True)
    status = Column(String(16), nullable=False, default='running')  # running, succeeded, failed
    config_hash = Column(String(64), nullable=True, index=True)
    seed = Column(Integer, nullable=True)
    step_density = Column(Float, nullable=True)
    summary_path = Column(String(1024), nullable=True)
    error_code = Column(String(64), nullable=True)
    notes = Column(Text, nullable=True)
    created_at = Column(DateTime, default=_utcnow)
    completed_at = Column(DateTime, nullable=True)

    def finish(self, status: str, error_code: str | None = None, notes: str | None = None) -> None:
        if status not in RUN_STATUSES:
            raise ValueError(f"unknown run status {status!r}")
        self.status = status
        self.error_code = error_code
        if notes:
            self.notes = notes
        self.completed_at = _utcnow()

    def to_dict(self):
        return {
            'run_id': self.run_id,
            'command': self.command,
            'status': self.status,
            'config_hash': self.config_hash,
            'seed': self.seed,
            'step_density': self.step_density,
            'summary_path': self.summary_path,
            'error_code': self.error_code,
            'notes': self.notes,
            'created_at': self.created_at.isoformat() if self.created_at else None,
            'completed_at': self.completed_at.isoformat() if self.completed_at else None,
        }
