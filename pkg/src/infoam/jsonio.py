"""Schema-tagged JSON documents with atomic writes.

Every document this package writes carries a `"schema": "<family>/<major>"`
tag.  Readers accept any document whose family matches and whose major
version is one they know; anything else is refused up front instead of
failing halfway through a field lookup.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Any

from .errors import SchemaError

__all__ = ["schema_tag", "require_schema", "load_document", "write_document",
           "write_text"]


def schema_tag(family: str, major: int) -> str:
    return f"{family}/{major}"


def _split_tag(tag: str) -> tuple[str, int]:
    family, sep, ver = tag.rpartition("/")
    if not sep or not family:
        raise SchemaError(f"malformed schema tag {tag!r}")
    try:
        return family, int(ver)
    except ValueError:
        raise SchemaError(f"malformed schema version in tag {tag!r}") from None


def require_schema(doc: Any, family: str, major: int) -> dict:
    """Check a loaded document's schema tag; return the document."""
    if not isinstance(doc, dict):
        raise SchemaError(f"expected a JSON object, got {type(doc).__name__}")
    tag = doc.get("schema")
    if not isinstance(tag, str):
        raise SchemaError(f"document has no schema tag; expected {family}/{major}")
    got_family, got_major = _split_tag(tag)
    if got_family != family:
        raise SchemaError(f"schema {tag!r} is not a {family} document")
    if got_major != major:
        raise SchemaError(
            f"unsupported {family} major version {got_major} (supported: {major})")
    return doc


def load_document(path: str | Path, family: str, major: int) -> dict:
    p = Path(path)
    try:
        with open(p, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{p}: not valid JSON: {exc}") from exc
    try:
        return require_schema(doc, family, major)
    except SchemaError as exc:
        raise SchemaError(f"{p}: {exc}") from exc


def write_text(path: str | Path, text: str) -> None:
    """Write-temp-then-rename so readers never see a half-written file."""
    p = Path(path)
    fd, tmp = tempfile.mkstemp(dir=p.parent or Path("."), suffix=".tmp")
    try:
        # mkstemp opens 0600; give the final file ordinary umask permissions
        umask = os.umask(0)
        os.umask(umask)
        os.fchmod(fd, 0o666 & ~umask)
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, p)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_document(path: str | Path, doc: dict) -> None:
    """Serialize with stable key order and replace the target atomically."""
    write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")
