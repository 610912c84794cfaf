"""
Command routing
Routers collect command handlers the way web routers collect endpoints; the
application mounts them under a prefix and exposes them as argparse
subcommands.  Request-model fields become ``--flags`` and are validated by
pydantic before the handler runs.
"""
from __future__ import annotations

import argparse
from dataclasses import dataclass, field, replace
import json
import logging
from pathlib import Path
import sys
import typing
from typing import Any, Callable, Dict, List, Optional, Sequence, Type
import uuid

from pydantic import BaseModel, ValidationError
from sqlalchemy.exc import SQLAlchemyError

from nvregsim import __version__
from nvregsim.core.errors import ConfigValidationError, NvRegSimError
from nvregsim.schemas.experiment_schema import ExperimentConfig, load_experiment_config, validation_details
from nvregsim.schemas.report_schema import Provenance, RunSummary, TableSpec
from nvregsim.simulation.propagation import PropagationOptions
from nvregsim.simulation.sequences import PulseStyle
from nvregsim.utils.reporting import config_hash, emit_report

logger = logging.getLogger(__name__)

EXIT_OK = 0


@dataclass
class CommandContext:
    """What a handler gets besides its request: settings and the resolved run knobs."""

    settings: Any
    command: str
    config: Optional[ExperimentConfig] = None
    seed: int = 0
    step_density: Optional[float] = None
    workers: Optional[int] = None
    output_dir: Optional[Path] = None
    fmt: str = "both"

    def _require_config(self) -> ExperimentConfig:
        if self.config is None:
            raise ConfigValidationError(f"{self.command} needs an experiment config")
        return self.config

    def register(self):
        return self._require_config().model.build()

    def options(self, **overrides) -> PropagationOptions:
        options = self._require_config().run.options(self.step_density)
        return replace(options, **overrides) if overrides else options

    def style(self) -> PulseStyle:
        return self._require_config().pulses.style()


@dataclass
class CommandResult:
    results: Dict[str, Any]
    tables: List[TableSpec] = field(default_factory=list)
    frame: Optional[str] = None


@dataclass
class Command:
    path: str
    handler: Callable[..., CommandResult]
    help: str
    request_model: Optional[Type[BaseModel]]
    uses_config: bool
    desk_density: bool


class CommandRouter:
    def __init__(self):
        self.commands: List[Command] = []

    def command(
        self,
        path: str,
        help: str = "",
        request_model: Optional[Type[BaseModel]] = None,
        uses_config: bool = True,
        desk_density: bool = False,
    ):
        """Register ``handler(request, ctx) -> CommandResult`` under ``path`` (e.g. "deer")."""

        def decorator(handler):
            self.commands.append(Command(path, handler, help or (handler.__doc__ or "").strip(), request_model, uses_config, desk_density))
            return handler

        return decorator


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _is_list(annotation) -> bool:
    origin = typing.get_origin(annotation)
    if origin is typing.Union:
        return any(_is_list(a) for a in typing.get_args(annotation) if a is not type(None))
    return origin in (list, tuple, List)


def _is_bool(annotation) -> bool:
    return annotation is bool


def add_model_arguments(parser: argparse.ArgumentParser, model: Type[BaseModel]) -> None:
    """One flag per field; values stay strings and pydantic coerces them."""
    for name, info in model.model_fields.items():
        kwargs: Dict[str, Any] = {"dest": name, "help": info.description, "default": None}
        if _is_bool(info.annotation):
            kwargs["action"] = argparse.BooleanOptionalAction
        elif _is_list(info.annotation):
            kwargs["nargs"] = "+"
        if info.is_required():
            kwargs["required"] = True
        parser.add_argument(_flag(name), **kwargs)


def parse_request(model: Type[BaseModel], namespace: argparse.Namespace) -> BaseModel:
    values = {name: getattr(namespace, name) for name in model.model_fields if getattr(namespace, name, None) is not None}
    try:
        return model.model_validate(values)
    except ValidationError as exc:
        details = validation_details(exc)
        raise ConfigValidationError(f"invalid arguments: {details[0]['field']}: {details[0]['message']}", {"fields": details}) from None


class CommandApp:
    def __init__(self, settings, title: str = "nvregsim", ledger: bool = True):
        self.settings = settings
        self.title = title
        self.ledger = ledger
        self.commands: Dict[str, Command] = {}
        self.parser = argparse.ArgumentParser(prog=title, description="Two-NV spin register simulator and benchmarking toolchain")
        self.parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
        self._groups = self.parser.add_subparsers(dest="group", required=True)
        self._group_parsers: Dict[str, argparse._SubParsersAction] = {}

    def include_router(self, router: CommandRouter, prefix: str, help: str = "") -> None:
        if prefix not in self._group_parsers:
            group = self._groups.add_parser(prefix, help=help)
            self._group_parsers[prefix] = group.add_subparsers(dest="command", required=True)
        sub = self._group_parsers[prefix]
        for command in router.commands:
            parser = sub.add_parser(command.path, help=command.help)
            if command.uses_config:
                parser.add_argument("--config", required=True, help="experiment config JSON")
                parser.add_argument("--seed", type=int, default=None)
                parser.add_argument("--step-density", dest="step_density", type=float, default=None)
                parser.add_argument("--workers", type=int, default=None)
                parser.add_argument("--output-dir", dest="output_dir", default=None)
                parser.add_argument("--format", dest="fmt", choices=("csv", "json", "both"), default=None)
            if command.request_model is not None:
                add_model_arguments(parser, command.request_model)
            key = f"{prefix} {command.path}"
            parser.set_defaults(_command=key)
            self.commands[key] = command

    # ------------------------------------------------------------------

    def _context(self, command: Command, key: str, args: argparse.Namespace, request: Optional[BaseModel]) -> CommandContext:
        ctx = CommandContext(settings=self.settings, command=key)
        default_density = self.settings.DESK_STEP_DENSITY if command.desk_density else self.settings.STEP_DENSITY
        if command.uses_config:
            cfg = load_experiment_config(args.config)
            run = cfg.run
            ctx.config = cfg
            ctx.seed = args.seed if args.seed is not None else run.seed
            ctx.step_density = args.step_density if args.step_density is not None else (run.step_density or default_density)
            ctx.workers = args.workers or run.workers or self.settings.THREADS
            ctx.output_dir = Path(args.output_dir or run.output_dir or self.settings.OUTPUT_DIR)
            ctx.fmt = args.fmt or run.format
        else:
            out = getattr(request, "output_dir", None) if request is not None else None
            ctx.output_dir = Path(out or self.settings.OUTPUT_DIR)
        if ctx.step_density is not None and ctx.step_density <= 0:
            raise ConfigValidationError(f"step density must be positive, got {ctx.step_density}")
        return ctx

    def _hash_payload(self, ctx: CommandContext, request: Optional[BaseModel]) -> dict:
        return {
            "command": ctx.command,
            "config": ctx.config.model_dump(mode="json") if ctx.config is not None else None,
            "request": request.model_dump(mode="json", exclude={"output_dir"}) if request is not None else None,
            "seed": ctx.seed,
            "step_density": ctx.step_density,
        }

    def run(self, argv: Optional[Sequence[str]] = None) -> int:
        try:
            args = self.parser.parse_args(argv)
        except SystemExit as exc:
            return int(exc.code or 0)

        key = args._command
        command = self.commands[key]
        record = self._open_record(key)
        try:
            request = parse_request(command.request_model, args) if command.request_model else None
            ctx = self._context(command, key, args, request)
            digest = config_hash(self._hash_payload(ctx, request))
            logger.info("running %s (config %s, seed %s)", key, digest[:12], ctx.seed)
            result = command.handler(request, ctx)

            summary = RunSummary(
                command=key,
                provenance=Provenance(
                    config_hash=digest,
                    seed=ctx.seed if command.uses_config else None,
                    step_density=ctx.step_density,
                    frame=result.frame,
                    tool_version=__version__,
                ),
                results=result.results,
            )
            stem = key.replace(" ", "_")
            written = emit_report(ctx.output_dir, stem, summary, result.tables, ctx.fmt)
            summary_path = next((str(p) for p in written if p.name.endswith("_summary.json")), None)
            self._close_record(record, "succeeded", digest=digest, ctx=ctx, summary_path=summary_path)
            print(json.dumps({"success": True, "command": key, "config_hash": digest, "artifacts": [str(p) for p in written]}))
            logger.info("%s finished", key)
            return EXIT_OK
        except NvRegSimError as exc:
            logger.error("%s failed: [%s] %s", key, exc.code, exc.message)
            self._close_record(record, "failed", error_code=exc.code, notes=exc.message)
            print(json.dumps(exc.to_dict(), default=str), file=sys.stderr)
            return exc.exit_code
        except Exception as exc:
            logger.exception("%s crashed", key)
            error = NvRegSimError(f"unexpected failure: {exc}")
            self._close_record(record, "failed", error_code=error.code, notes=error.message)
            print(json.dumps(error.to_dict(), default=str), file=sys.stderr)
            return error.exit_code

    # ------------------------------------------------------------------
    # ledger

    def _open_record(self, key: str):
        if not self.ledger:
            return None
        from nvregsim.core.database import get_session_local
        from nvregsim.models.run_record import RunRecord

        try:
            db = get_session_local()()
            record = RunRecord(run_id=uuid.uuid4().hex, command=key, status="running")
            db.add(record)
            db.commit()
            return db, record
        except SQLAlchemyError as exc:
            logger.warning("run ledger unavailable: %s", exc)
            return None

    def _close_record(
        self, handle, status: str, digest: str | None = None, ctx: CommandContext | None = None,
        summary_path: str | None = None, error_code: str | None = None, notes: str | None = None,
    ) -> None:
        if handle is None:
            return
        db, record = handle
        try:
            if digest is not None:
                record.config_hash = digest
            if ctx is not None:
                record.seed = ctx.seed
                record.step_density = ctx.step_density
            record.summary_path = summary_path
            record.finish(status, error_code, notes)
            db.commit()
        except SQLAlchemyError as exc:
            db.rollback()
            logger.warning("could not update run ledger: %s", exc)
        finally:
            db.close()
