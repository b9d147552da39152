import json
import logging
import logging.handlers
from pathlib import Path

import pytest

from tgalaxy.core.audit import CheckAudit
from tgalaxy.core.config import settings
from tgalaxy.core.schemas import SchemaRegistry
from tgalaxy.core.utils import atomic_write_json, digest_text, setup_logging
from tgalaxy.reports.tables import render_table


def test_setup_logging_idempotent():
    logger1 = setup_logging("tmptest")
    handlers_before = len(logger1.handlers)
    logger2 = setup_logging("tmptest")
    assert len(logger2.handlers) == handlers_before
    assert any(isinstance(h, logging.handlers.RotatingFileHandler) for h in logger2.handlers)


def test_setup_logging_opens_one_file_per_scope():
    logger = setup_logging("scope_a")
    setup_logging("scope_b")
    setup_logging("scope_a")
    names = [h.get_name() for h in logger.handlers]
    assert names.count("file:scope_a") == 1 and names.count("file:scope_b") == 1
    logging.getLogger(f"{settings.APP_NAME}.tests").warning("scoped hello")
    for h in logger.handlers:
        h.flush()
    assert "scoped hello" in (Path(settings.LOG_DIR) / "scope_a.log").read_text()
    assert "scoped hello" in (Path(settings.LOG_DIR) / "scope_b.log").read_text()
    for h in [h for h in logger.handlers if h.get_name() in ("file:scope_a", "file:scope_b")]:
        logger.removeHandler(h)
        h.close()


def test_setup_logging_follows_log_dir(tmp_path, monkeypatch):
    logger = setup_logging("moving")
    monkeypatch.setattr(settings, "LOG_DIR", str(tmp_path / "elsewhere"))
    setup_logging("moving")
    [handler] = [h for h in logger.handlers if h.get_name() == "file:moving"]
    assert handler.baseFilename.startswith(str(tmp_path / "elsewhere"))
    logger.removeHandler(handler)
    handler.close()


def test_atomic_write_json(tmp_path):
    target = tmp_path / "nested" / "doc.json"
    atomic_write_json(str(target), {"b": 1, "a": [1, 2]})
    assert json.loads(target.read_text()) == {"a": [1, 2], "b": 1}
    assert target.read_text().index('"a"') < target.read_text().index('"b"')
    assert not (tmp_path / "nested" / "doc.tmp").exists()


def test_digest_text():
    assert digest_text("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
    assert digest_text("abc") != digest_text("abd")


def test_check_audit(tmp_path):
    audit = CheckAudit(log_dir=str(tmp_path))
    assert audit.history() == []
    audit.log_check("check", "d1", "escape", 1, True, {"walks": []})
    audit.log_check("check", "d1", "order", 1, False)
    assert len(audit.history()) == 2
    [entry] = audit.history(check="order")
    assert entry["outcome"] == "fail" and entry["details"] == {}
    stats = audit.stats()
    assert stats["total_checks"] == 2
    assert stats["failed_checks"] == 1
    assert stats["checks"] == ["escape", "order"]
    assert stats["last_failure"] == entry["timestamp"]


def test_check_audit_skips_corrupt_lines(tmp_path):
    audit = CheckAudit(scope="suite", log_dir=str(tmp_path))
    audit.log_check("oracle-check", "d2", "oracle", 0, True)
    with open(audit.checks_log, "a", encoding="utf-8") as f:
        f.write("not json\n")
    assert [e["check"] for e in audit.history()] == ["oracle"]
    assert audit.checks_log.name == "suite_checks.jsonl"


def test_schema_registry():
    registry = SchemaRegistry()
    names = registry.get_available_entities()
    assert names == sorted(names)
    assert "presentation" in names and "report.oracle-check" in names
    with pytest.raises(ValueError):
        registry.get_schema("report.unknown")
    doc = registry.validate_report("report.distance", {"source": "a", "target": "b", "distance": "w"})
    assert "walk" not in doc
    with pytest.raises(ValueError):
        registry.validate_report("report.distance", {"source": "a", "target": "b"})


def test_render_tables():
    assert render_table("distance", {"source": "a", "target": "b", "distance": "w*2"}) == "w*2"
    text = render_table("distance", {"source": "a", "target": "b", "distance": "w", "oracle": "w*2",
                                     "oracle_agrees": False}, mark=lambda w: f"<{w}>")
    assert text.splitlines() == ["w", "oracle w*2 <FAIL>"]
    text = render_table("boundary", {"rank": 1, "copy_index": 2, "sections": [
        {"section": "s1", "boundary_wnodes": ["ladder[2].x"], "infinite": True}]})
    assert text.startswith("boundary 1-wnodes of s1 at copy 2 (infinite)")
    assert render_table("boundary", {"rank": 1, "sections": []}) == "rank 1: no sections"
    text = render_table("validate", {"rank": 0, "valid": False,
                                     "violations": [{"kind": "NotWconnected", "where": "$", "message": ""}]})
    assert text.startswith("1 violation(s)")
    assert "NotWconnected" in text
    text = render_table("check", {"digest": "d", "ok": True,
                                  "checks": [{"check": "escape", "rank": 1, "ok": True, "details": {}}]})
    assert "escape" in text and "pass" in text
    marked = render_table("check", {"digest": "d", "ok": False,
                                    "checks": [{"check": "order", "rank": 1, "ok": False, "details": {}}]},
                          mark=lambda w: f"<{w}>")
    assert "<FAIL>" in marked
    with pytest.raises(ValueError):
        render_table("nothing", {})
