"""Generation of synthetic self-descriptions via a chat endpoint.

Builds deterministic loan-applicant prompts from input representations
(value-based mode) or from feature names alone (free mode), then drives an
abstract chat client with retries, a request budget, and an on-disk ledger
that makes reruns idempotent. The bundled mock client keeps the whole test
suite offline; the HTTP client speaks the common chat-completions protocol.

The prompt wording is a documented reconstruction, not a quotation of any
particular production prompt.
"""

from __future__ import annotations

import json
import os
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Protocol, Sequence

import httpx

from .corpus import FeatureSchema, InputRepresentation, SelfDescription
from .baseline import serialize_representation
from .errors import (
    BudgetExceeded,
    MissingRepresentation,
    ParseError,
    ProviderError,
    TransientProviderError,
    ValidationError,
)

VALUE_BASED = "value_based"
FREE = "free"
MODES = (VALUE_BASED, FREE)

DEFAULT_PERSONA = (
    "You are a private individual writing to your bank to apply for a personal loan."
)

DEFAULT_PARAMS: Mapping[str, float] = {"temperature": 0.6, "top_p": 0.9}

_RULES = (
    "Write the application letter that accompanies your loan request. Follow these rules:\n"
    "1. Maintain a formal tone throughout.\n"
    "2. Remain mostly coherent with the applicant profile below.\n"
    "3. Include an appropriate opening and an appropriate closing.\n"
    "4. Stay focused on the loan request.\n"
    "5. Invent plausible specifics where the profile gives none.\n"
    "6. Differ meaningfully from any other version of this letter you might write.\n"
)


def default_params() -> dict[str, float]:
    return dict(DEFAULT_PARAMS)


def build_prompt(
    x: InputRepresentation | None,
    schema: FeatureSchema,
    mode: str,
    persona: str = DEFAULT_PERSONA,
) -> str:
    """Deterministic generation prompt.

    Value-based mode lists every feature with its decoded value; free mode
    lists feature display names only, never values.

    Raises:
        MissingRepresentation: value-based mode without a representation.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if mode == VALUE_BASED:
        if x is None:
            raise MissingRepresentation("value-based prompts need a representation")
        intro = "Applicant profile:"
        block = serialize_representation(x, schema)
    else:
        intro = "Your letter should touch on these subjects:"
        block = "\n".join(f"- {f.display_name}" for f in schema.features)
    return f"{persona}\n\n{_RULES}\n{intro}\n{block}\n"


@dataclass(frozen=True)
class GenerationJob:
    """One generator's work order: a prompt and how many variants of it."""

    generator_id: str
    prompt: str
    profile_id: str | None = None
    params: Mapping[str, float] | None = field(default_factory=default_params)
    n_variants: int = 5

    def __post_init__(self):
        if not self.generator_id:
            raise ValidationError("generator_id must be non-empty")
        if self.n_variants < 1:
            raise ValidationError("n_variants must be at least 1")


def make_jobs(
    schema: FeatureSchema,
    representations: Sequence[InputRepresentation],
    generator_ids: Sequence[str],
    n_variants: int = 5,
    mode: str = VALUE_BASED,
    params: Mapping[str, float] | None = None,
    persona: str = DEFAULT_PERSONA,
) -> list[GenerationJob]:
    """Cross generators with profiles (value mode) or schema alone (free)."""
    if params is None:
        params = default_params()
    jobs = []
    if mode == FREE:
        prompt = build_prompt(None, schema, FREE, persona=persona)
        for g in generator_ids:
            jobs.append(
                GenerationJob(
                    generator_id=g,
                    prompt=prompt,
                    profile_id=None,
                    params=params,
                    n_variants=n_variants,
                )
            )
        return jobs
    for g in generator_ids:
        for x in representations:
            jobs.append(
                GenerationJob(
                    generator_id=g,
                    prompt=build_prompt(x, schema, VALUE_BASED, persona=persona),
                    profile_id=x.profile_id,
                    params=params,
                    n_variants=n_variants,
                )
            )
    return jobs


# -- clients -----------------------------------------------------------------


class ChatClient(Protocol):
    def complete(
        self, prompt: str, generator_id: str, params: Mapping[str, float] | None
    ) -> str: ...


class MockChatClient:
    """Scripted offline client.

    ``script`` items are consumed in order: strings are returned, exception
    instances are raised. When the script runs out, ``fallback`` (if given)
    produces the text; otherwise a deterministic stub is returned. Every
    call is recorded in ``calls``.
    """

    def __init__(
        self,
        script: Sequence[str | Exception] | None = None,
        fallback: Callable[[str, str, Mapping[str, float] | None], str] | None = None,
    ):
        self._script = list(script or [])
        self._fallback = fallback
        self.calls: list[tuple[str, str, Mapping[str, float] | None]] = []
        self._lock = threading.Lock()

    def complete(
        self, prompt: str, generator_id: str, params: Mapping[str, float] | None
    ) -> str:
        with self._lock:
            self.calls.append((prompt, generator_id, params))
            item = self._script.pop(0) if self._script else None
        if isinstance(item, Exception):
            raise item
        if item is not None:
            return item
        if self._fallback is not None:
            return self._fallback(prompt, generator_id, params)
        return f"Dear Sir or Madam, this is letter {len(self.calls)} from {generator_id}."


class HttpChatClient:
    """Chat-completions client over HTTP.

    Endpoint and credentials come from arguments or the environment
    (FIDAUDIT_ENDPOINT, FIDAUDIT_API_KEY). Transport errors, 429, and 5xx
    responses are transient; other failures are permanent.
    """

    def __init__(
        self,
        endpoint: str | None = None,
        api_key: str | None = None,
        timeout: float = 120.0,
    ):
        self.endpoint = (endpoint or os.environ.get("FIDAUDIT_ENDPOINT", "")).rstrip("/")
        self.api_key = api_key or os.environ.get("FIDAUDIT_API_KEY", "")
        if not self.endpoint:
            raise ProviderError(
                "no endpoint configured (set FIDAUDIT_ENDPOINT or pass endpoint=)"
            )
        self.timeout = timeout

    def complete(
        self, prompt: str, generator_id: str, params: Mapping[str, float] | None
    ) -> str:
        body: dict = {
            "model": generator_id,
            "messages": [{"role": "user", "content": prompt}],
        }
        if params:
            body.update(params)
        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            resp = httpx.post(
                f"{self.endpoint}/v1/chat/completions",
                json=body,
                headers=headers,
                timeout=self.timeout,
            )
        except httpx.TransportError as e:
            raise TransientProviderError(f"transport failure: {e}") from e
        if resp.status_code == 429 or resp.status_code >= 500:
            raise TransientProviderError(f"endpoint returned {resp.status_code}")
        if resp.status_code != 200:
            raise ProviderError(f"endpoint returned {resp.status_code}: {resp.text[:200]}")
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError, ValueError) as e:
            raise ProviderError(f"malformed completion payload: {e}") from e


# -- job runner --------------------------------------------------------------


def job_key(generator_id: str, profile_id: str | None, variant: int) -> str:
    return f"{generator_id}|{profile_id or 'free'}|{variant}"


def make_doc_id(generator_id: str, profile_id: str | None, variant: int) -> str:
    base = f"{generator_id}-{profile_id or 'free'}-{variant}"
    cleaned = re.sub(r"[^A-Za-z0-9._-]+", "-", base)
    cleaned = re.sub(r"^[^A-Za-z0-9]+", "", cleaned)
    if not cleaned:
        raise ValidationError(f"cannot derive a doc_id from {base!r}")
    return cleaned


def _load_ledger(path: Path) -> dict[str, dict]:
    if not path.exists():
        return {}
    out = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            out[rec["key"]] = rec
        except (json.JSONDecodeError, KeyError, TypeError) as e:
            raise ParseError(f"{path}:{lineno}: bad ledger line: {e}") from None
    return out


def _append_ledger(path: Path, record: dict) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(record, ensure_ascii=False) + "\n")
        fh.flush()
        os.fsync(fh.fileno())


def run_jobs(
    jobs: Sequence[GenerationJob],
    client: ChatClient,
    ledger_path: str | Path,
    max_requests: int | None = None,
    max_retries: int = 3,
    backoff_base: float = 0.5,
    backoff_cap: float = 8.0,
    sleep: Callable[[float], None] = time.sleep,
    concurrency: int = 1,
) -> list[SelfDescription]:
    """Run every (job, variant), skipping work the ledger already holds.

    Transient failures retry with capped exponential backoff; each attempt
    counts against ``max_requests``. Completed variants are appended to the
    ledger immediately, so an aborted run resumes where it stopped.

    Raises:
        BudgetExceeded: the next attempt would pass ``max_requests``.
        ProviderError: a request failed permanently or ran out of retries.
    """
    ledger_path = Path(ledger_path)
    ledger_path.parent.mkdir(parents=True, exist_ok=True)
    ledger = _load_ledger(ledger_path)

    tasks: list[tuple[str, GenerationJob, int]] = []
    scheduled: set[str] = set()
    for job in jobs:
        for variant in range(1, job.n_variants + 1):
            key = job_key(job.generator_id, job.profile_id, variant)
            if key in ledger or key in scheduled:
                continue
            scheduled.add(key)
            tasks.append((key, job, variant))

    used = 0
    counter_lock = threading.Lock()

    def attempt(key: str, job: GenerationJob, variant: int) -> tuple[str, dict]:
        nonlocal used
        attempts = 0
        while True:
            with counter_lock:
                if max_requests is not None and used >= max_requests:
                    raise BudgetExceeded(
                        f"request budget {max_requests} exhausted before {key!r}"
                    )
                used += 1
            attempts += 1
            try:
                text = client.complete(job.prompt, job.generator_id, job.params)
                break
            except TransientProviderError:
                if attempts > max_retries:
                    raise
                sleep(min(backoff_cap, backoff_base * (2 ** (attempts - 1))))
        desc = SelfDescription(
            doc_id=make_doc_id(job.generator_id, job.profile_id, variant),
            profile_id=job.profile_id,
            generator_id=job.generator_id,
            variant_index=variant,
            text=text,
        )
        record = {
            "key": key,
            "attempts": attempts,
            "description": {
                "doc_id": desc.doc_id,
                "profile_id": desc.profile_id,
                "generator_id": desc.generator_id,
                "variant_index": desc.variant_index,
                "text": desc.text,
            },
        }
        return key, record

    if concurrency <= 1:
        for key, job, variant in tasks:
            key, record = attempt(key, job, variant)
            _append_ledger(ledger_path, record)
            ledger[key] = record
    else:
        with ThreadPoolExecutor(max_workers=concurrency) as pool:
            futures = [pool.submit(attempt, *t) for t in tasks]
            error: Exception | None = None
            for fut in as_completed(futures):
                try:
                    key, record = fut.result()
                except Exception as e:  # noqa: BLE001 - first failure wins, rest cancel
                    if error is None:
                        error = e
                        for other in futures:
                            other.cancel()
                    continue
                _append_ledger(ledger_path, record)
                ledger[key] = record
            if error is not None:
                raise error

    out = []
    for job in jobs:
        for variant in range(1, job.n_variants + 1):
            key = job_key(job.generator_id, job.profile_id, variant)
            rec = ledger[key]["description"]
            out.append(
                SelfDescription(
                    doc_id=rec["doc_id"],
                    profile_id=rec["profile_id"],
                    generator_id=rec["generator_id"],
                    variant_index=rec["variant_index"],
                    text=rec["text"],
                )
            )
    return out
