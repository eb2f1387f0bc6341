import logging

from rich.logging import RichHandler

from manipkit.core.config import settings


def setup_logging(level: str | None = None) -> None:
    level = (level or settings.LOG_LEVEL).upper()
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(rich_tracebacks=settings.DEBUG, show_path=False)],
        force=True,
    )
