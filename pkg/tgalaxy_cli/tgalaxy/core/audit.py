"""
Audit trail for theorem-level checks.
Every `check` and `oracle-check` run appends one JSON line per check.
"""
import json
from datetime import datetime, timedelta
from pathlib import Path
from typing import Any, Dict, List, Optional

from tgalaxy.core.config import settings
from tgalaxy.core.utils import get_logger, mkdir_safe

logger = get_logger("audit")


class CheckAudit:
    """Append-only JSONL log of check outcomes for one scope."""

    def __init__(self, scope: str = "system", log_dir: Optional[str] = None):
        self.scope = scope
        self.audit_dir = Path(log_dir or settings.LOG_DIR)
        mkdir_safe(str(self.audit_dir))
        self.checks_log = self.audit_dir / f"{scope}_checks.jsonl"

    def log_check(
        self,
        command: str,
        digest: str,
        check: str,
        rank,
        ok: bool,
        details: Optional[Dict[str, Any]] = None,
    ):
        entry = {
            "timestamp": datetime.now().isoformat(),
            "scope": self.scope,
            "command": command,
            "digest": digest,
            "check": check,
            "rank": rank,
            "outcome": "pass" if ok else "fail",
            "details": details or {},
        }
        with open(self.checks_log, "a", encoding="utf-8") as f:
            f.write(json.dumps(entry, default=str, sort_keys=True) + "\n")
        logger.debug("audited %s/%s at rank %s: %s", command, check, rank, entry["outcome"])

    def history(self, days: int = 30, check: Optional[str] = None) -> List[Dict[str, Any]]:
        """Entries of the last `days` days, newest first."""
        if not self.checks_log.exists():
            return []
        cutoff = datetime.now() - timedelta(days=days)
        out = []
        with open(self.checks_log, encoding="utf-8") as f:
            for line in f:
                try:
                    entry = json.loads(line)
                    if datetime.fromisoformat(entry["timestamp"]) < cutoff:
                        continue
                except (json.JSONDecodeError, KeyError, ValueError):
                    continue
                if check is None or entry.get("check") == check:
                    out.append(entry)
        out.sort(key=lambda e: e["timestamp"], reverse=True)
        return out

    def stats(self) -> Dict[str, Any]:
        entries = self.history(days=36500)
        failed = [e for e in entries if e["outcome"] == "fail"]
        return {
            "total_checks": len(entries),
            "failed_checks": len(failed),
            "checks": sorted({e["check"] for e in entries}),
            "last_failure": failed[0]["timestamp"] if failed else None,
        }
