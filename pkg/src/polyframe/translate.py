"""Minimal client for a batched JSON translation endpoint.

The endpoint receives ``{"source", "target", "texts": [...]}`` and answers
``{"translations": [...]}`` in the same order. This is the only networked code
in the package.
"""
from __future__ import annotations

import json
import logging
import os
import urllib.error
import urllib.request
from typing import Sequence

logger = logging.getLogger(__name__)

URL_ENV = "TRANSLATE_API_URL"
KEY_ENV = "TRANSLATE_API_KEY"


class TranslationError(RuntimeError):
    pass


def _post(url: str, key: str, payload: dict, timeout: float) -> dict:
    request = urllib.request.Request(
        url, data=json.dumps(payload).encode("utf-8"), method="POST",
        headers={"Content-Type": "application/json", "Authorization": f"Bearer {key}"})
    try:
        with urllib.request.urlopen(request, timeout=timeout) as resp:
            return json.loads(resp.read().decode("utf-8"))
    except urllib.error.HTTPError as exc:
        body = exc.read().decode("utf-8", "replace")[:200]
        if exc.code in (401, 403):
            raise TranslationError(f"authentication failed (HTTP {exc.code}): {body}") from None
        raise TranslationError(f"HTTP {exc.code}: {body}") from None
    except (urllib.error.URLError, OSError) as exc:
        raise TranslationError(f"translation endpoint unreachable: {exc}") from None
    except json.JSONDecodeError:
        raise TranslationError("translation endpoint returned invalid JSON") from None


def fetch_translations(words: Sequence[str], target: str, source: str = "en", url: str | None = None,
                       key: str | None = None, batch_size: int = 100,
                       timeout: float = 30.0) -> tuple[dict[str, str], list[str]]:
    """Translate ``words``; returns the table and the words that failed."""
    url = url or os.environ.get(URL_ENV)
    key = key if key is not None else os.environ.get(KEY_ENV)
    if not url or key is None:
        raise TranslationError(f"set {URL_ENV} and {KEY_ENV} to use the translation client")
    table: dict[str, str] = {}
    failed: list[str] = []
    unique = list(dict.fromkeys(w for w in words if w.strip()))
    for start in range(0, len(unique), batch_size):
        batch = unique[start:start + batch_size]
        reply = _post(url, key, {"source": source, "target": target, "texts": batch}, timeout)
        out = reply.get("translations") if isinstance(reply, dict) else None
        if not isinstance(out, list) or len(out) != len(batch):
            raise TranslationError("translation reply does not match the request batch")
        for word, translated in zip(batch, out):
            if isinstance(translated, str) and translated.strip():
                table[word] = translated.strip()
            else:
                failed.append(word)
                logger.warning("no translation for %r", word)
    return table, failed


def write_translation_table(table: dict[str, str], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for src, tgt in table.items():
            fh.write(f"{src}\t{tgt}\n")
