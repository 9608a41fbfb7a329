import logging
import os
from typing import Optional

LOG_FORMAT = "%(asctime)s %(levelname)s %(message)s"


def configure_logging(level: Optional[str] = None) -> None:
    """Install one stream handler on the root logger.

    Every module logs through ``logging.getLogger(__name__)`` and prefixes its
    messages with a subsystem tag such as ``[KG]`` or ``[VECTORDB]``.
    """
    level = (level or os.environ.get("KGQA_LOG_LEVEL") or "INFO").upper()
    root = logging.getLogger()
    if not any(getattr(h, "_kgqa", False) for h in root.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._kgqa = True
        root.addHandler(handler)
    root.setLevel(level)
