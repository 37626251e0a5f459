"""Seed derivation, stable hashing, and deterministic JSON output."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path


def derive_seed(*parts) -> int:
    """Stable 32-bit seed from any mix of ints and strings (fits every RNG API)."""
    key = "|".join(str(p) for p in parts)
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "big")


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path: str | Path) -> str:
    return sha256_bytes(Path(path).read_bytes())


def stable_json(obj) -> str:
    """Key-sorted, whitespace-normalized JSON for reproducible artifacts."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False)


def write_json(path: str | Path, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(stable_json(obj) + "\n", encoding="utf-8")
