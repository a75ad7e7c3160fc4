"""Send a composed prompt to a chat-completions style endpoint."""

from __future__ import annotations

import logging
import os
import time

import httpx

log = logging.getLogger(__name__)


class GenerationError(RuntimeError):
    pass


def completion_request(prompt: str, model: str, temperature: float = 0.0) -> dict:
    """Request body: a single user message, nothing else."""
    return {
        "model": model,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": temperature,
    }


def first_completion(doc: dict) -> str:
    try:
        return doc["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError) as exc:
        raise GenerationError(f"unexpected completion response: {exc!r}") from exc


def generate(prompt: str, url: str | None = None, key: str | None = None,
             model: str = "gpt-4o-mini", temperature: float = 0.0, max_retries: int = 0,
             timeout: float = 120.0, client: httpx.Client | None = None) -> str:
    """Return the first completion verbatim.

    Makes one request, plus at most ``max_retries`` more on transport errors
    or 5xx replies.  Client errors (4xx) are never retried.
    """
    url = url or os.environ.get("REPOSCOPE_LLM_URL")
    key = key if key is not None else os.environ.get("REPOSCOPE_LLM_KEY")
    if not url:
        raise GenerationError("no generation endpoint; set REPOSCOPE_LLM_URL or --llm-url")
    headers = {"Content-Type": "application/json"}
    if key:
        headers["Authorization"] = f"Bearer {key}"
    body = completion_request(prompt, model, temperature)
    own = client is None
    client = client or httpx.Client(timeout=timeout)
    try:
        for attempt in range(max_retries + 1):
            try:
                resp = client.post(url, json=body, headers=headers)
            except httpx.HTTPError as exc:
                err = GenerationError(f"request to {url} failed: {exc}")
            else:
                if resp.status_code < 400:
                    try:
                        return first_completion(resp.json())
                    except ValueError as exc:
                        raise GenerationError(f"endpoint returned invalid JSON: {exc}") from exc
                err = GenerationError(f"endpoint returned HTTP {resp.status_code}: {resp.text[:200]}")
                if resp.status_code < 500:
                    raise err
            if attempt < max_retries:
                log.warning("%s; retrying (%d/%d)", err, attempt + 1, max_retries)
                time.sleep(min(2.0 ** attempt, 8.0))
        raise err
    finally:
        if own:
            client.close()
