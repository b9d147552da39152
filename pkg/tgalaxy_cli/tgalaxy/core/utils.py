import hashlib
import json
import logging
import os
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Any

from tgalaxy.core.config import settings


def mkdir_safe(path: str):
    Path(path).mkdir(parents=True, exist_ok=True)


def atomic_write_json(path: str, obj: Any):
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    tmp = p.with_suffix(".tmp")
    with open(tmp, "w", encoding="utf-8") as f:
        json.dump(obj, f, indent=2, sort_keys=True, default=str)
    os.replace(str(tmp), str(p))


def digest_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def get_logger(component: str) -> logging.Logger:
    """Child logger of the application logger; handlers live on the parent."""
    return logging.getLogger(f"{settings.APP_NAME}.{component}")


def setup_logging(scope: str = "system", *, log_level: str = None):
    """Route the application log to `<LOG_DIR>/<scope>.log`; each scope keeps one file handler."""
    logger = logging.getLogger(settings.APP_NAME)
    name = f"file:{scope}"
    logfile = Path(settings.LOG_DIR) / f"{scope}.log"
    for h in list(logger.handlers):
        if h.get_name() != name:
            continue
        if h.baseFilename == os.path.abspath(str(logfile)):
            return logger
        # LOG_DIR moved since this scope was opened
        logger.removeHandler(h)
        h.close()
    level = log_level or settings.LOG_LEVEL
    logger.setLevel(getattr(logging, level.upper()))
    mkdir_safe(settings.LOG_DIR)
    handler = RotatingFileHandler(str(logfile), maxBytes=10_000_000, backupCount=5)
    handler.set_name(name)
    formatter = logging.Formatter('%(asctime)s %(levelname)s %(name)s %(message)s')
    handler.setFormatter(formatter)
    logger.addHandler(handler)
    dev = os.getenv("DEV", "").lower() in ("1", "true", "yes")
    if dev and not any(h.get_name() == "console" for h in logger.handlers):
        ch = logging.StreamHandler()
        ch.set_name("console")
        ch.setFormatter(formatter)
        logger.addHandler(ch)
    logger.propagate = False
    return logger
