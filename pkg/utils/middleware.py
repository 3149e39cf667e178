"""
Middleware utilities for the command line.

This module provides wrappers for command logging, error tracking,
and other cross-cutting concerns around command handlers.
"""
import functools
import logging
import time
from typing import Callable

from utils.errors import BaseSolverError, ExitStatus

logger = logging.getLogger(__name__)

CommandHandler = Callable[..., int]


def command_logging(name: str) -> Callable[[CommandHandler], CommandHandler]:
    """
    Wrapper to log command information.

    Args:
        name: Command name used in the log lines

    Returns:
        A decorator for command handlers returning an exit status
    """
    def decorator(handler: CommandHandler) -> CommandHandler:
        @functools.wraps(handler)
        def wrapper(*args, **kwargs) -> int:
            start_time = time.time()
            logger.info(f"Command started: {name}")
            try:
                status = handler(*args, **kwargs)
            except Exception as e:
                process_time = time.time() - start_time
                logger.error(f"Command failed: {name} - Error: {str(e)} - Time: {process_time:.4f}s")
                raise
            process_time = time.time() - start_time
            logger.info(f"Command completed: {name} - Status: {status} - Time: {process_time:.4f}s")
            return status
        return wrapper
    return decorator


def error_tracking(handler: CommandHandler) -> CommandHandler:
    """
    Wrapper to track and translate errors.

    Solver errors become their exit status; anything else is logged with its
    traceback (Sentry captures it when configured) and re-raised.
    """
    @functools.wraps(handler)
    def wrapper(*args, **kwargs) -> int:
        try:
            return handler(*args, **kwargs)
        except BaseSolverError as e:
            logger.error(f"{e.error_code}: {e.detail}")
            for message in getattr(e, "messages", []):
                logger.error(f"  {message}")
            return e.exit_code
        except KeyboardInterrupt:
            logger.warning("Interrupted")
            return int(ExitStatus.NUMERICAL_FAILURE)
        except Exception as e:
            logger.exception(f"Unhandled exception in command: {str(e)}")
            raise
    return wrapper
