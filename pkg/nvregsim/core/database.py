"""Run-ledger database: declarative base and lazily created engine/session"""
from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker, declarative_base
from sqlalchemy.pool import StaticPool

Base = declarative_base()

# created on first use
_engine = None
_SessionLocal = None
_database_url = None


def configure_database(url: str | None = None) -> None:
    """Point the ledger at ``url`` (None: the configured DATABASE_URL) and drop cached handles."""
    global _engine, _SessionLocal, _database_url
    if _engine is not None:
        _engine.dispose()
    _engine = None
    _SessionLocal = None
    _database_url = url


def get_engine():
    """Get or create database engine"""
    global _engine
    if _engine is None:
        from config import get_config
        settings = get_config()
        url = _database_url or settings.DATABASE_URL
        options = {"echo": settings.SQLALCHEMY_ECHO, "pool_pre_ping": True}
        if url in ("sqlite://", "sqlite:///:memory:"):
            # one shared connection so the in-memory ledger survives across sessions
            options.update(connect_args={"check_same_thread": False}, poolclass=StaticPool)
        _engine = create_engine(url, **options)
    return _engine


def get_session_local():
    """Get or create session maker"""
    global _SessionLocal
    if _SessionLocal is None:
        _SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=get_engine())
    return _SessionLocal


def get_db():
    """Yield a session and close it afterwards"""
    db = get_session_local()()
    try:
        yield db
    finally:
        db.close()


def init_db():
    """Create the ledger tables"""
    import nvregsim.models  # noqa: F401  registers RunRecord on Base
    Base.metadata.create_all(bind=get_engine())
