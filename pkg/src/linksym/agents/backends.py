"""Text backends: a deterministic rule engine and a chat-completions client."""
from __future__ import annotations

import itertools
import os
import re
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol, Sequence, Union, runtime_checkable

import httpx

DEFAULT_TEMPERATURE = 0.8
DEFAULT_TIMEOUT = 120.0
MAX_RETRIES = 3

ENV_URL = "LINKSYM_API_URL"
ENV_MODEL = "LINKSYM_MODEL"
ENV_KEY = "LINKSYM_API_KEY"


class BackendError(RuntimeError):
    """Transport-level failure; aborts the current episode."""


@runtime_checkable
class AgentBackend(Protocol):
    name: str
    temperature: float

    def complete(self, prompt: str, context: str) -> str: ...


def role_of(prompt: str) -> str:
    m = re.match(r"\s*ROLE:\s*(\w+)", prompt)
    return m.group(1).lower() if m else ""


Responder = Union[str, Callable[[str, "re.Match[str]"], str], Sequence[str]]


@dataclass
class Rule:
    role: str
    pattern: str
    response: Responder

    def __post_init__(self):
        self._rx = re.compile(self.pattern, re.S)
        self._cycle = None
        if not isinstance(self.response, str) and not callable(self.response):
            self._cycle = itertools.cycle(list(self.response))


@dataclass
class ScriptedBackend:
    """First rule whose role and pattern match the request answers it.

    Patterns are searched in the prompt followed by the context. A list
    response is cycled; a callable gets the full text and the match.
    """

    rules: list[Rule] = field(default_factory=list)
    name: str = "scripted"
    temperature: float = 0.0
    calls: list[tuple[str, str]] = field(default_factory=list)

    def __post_init__(self):
        self._lock = threading.Lock()

    def complete(self, prompt: str, context: str) -> str:
        role = role_of(prompt)
        text = f"{prompt}\n{context}"
        with self._lock:
            self.calls.append((role, context))
            for rule in self.rules:
                if rule.role not in (role, "*"):
                    continue
                m = rule._rx.search(text)
                if m is None:
                    continue
                if rule._cycle is not None:
                    return next(rule._cycle)
                if callable(rule.response):
                    return rule.response(text, m)
                return rule.response
        raise BackendError(f"scripted backend has no rule for role {role!r}")


@dataclass
class RemoteBackend:
    """Chat-completions endpoint; settings default to the environment."""

    url: Optional[str] = None
    model: Optional[str] = None
    api_key: Optional[str] = None
    temperature: float = DEFAULT_TEMPERATURE
    timeout: float = DEFAULT_TIMEOUT
    max_retries: int = MAX_RETRIES
    backoff: float = 1.0
    transport: Optional[httpx.BaseTransport] = None
    sleep: Callable[[float], None] = time.sleep

    def __post_init__(self):
        self.url = self.url or os.environ.get(ENV_URL)
        self.model = self.model or os.environ.get(ENV_MODEL, "default")
        self.api_key = self.api_key or os.environ.get(ENV_KEY)
        if not self.url:
            raise BackendError(f"no endpoint configured; set {ENV_URL}")
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        self._client = httpx.Client(timeout=self.timeout, headers=headers, transport=self.transport)

    @property
    def name(self) -> str:
        return f"remote:{self.model}"

    def close(self) -> None:
        self._client.close()

    def complete(self, prompt: str, context: str) -> str:
        payload = {
            "model": self.model,
            "temperature": self.temperature,
            "messages": [
                {"role": "system", "content": prompt},
                {"role": "user", "content": context},
            ],
        }
        last = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                self.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                r = self._client.post(self.url, json=payload)
            except httpx.TransportError as e:
                last = f"transport error: {e}"
                continue
            if 400 <= r.status_code < 500:
                raise BackendError(f"request rejected with HTTP {r.status_code}: {r.text[:200]}")
            if r.status_code >= 500:
                last = f"HTTP {r.status_code}"
                continue
            try:
                return r.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as e:
                raise BackendError(f"malformed completion payload: {e}") from e
        raise BackendError(f"giving up after {self.max_retries} retries ({last})")


@dataclass
class Backends:
    """One backend per role; any of them may be the same object."""

    topology: AgentBackend
    critic: AgentBackend
    planner: AgentBackend
    refiner: AgentBackend

    @classmethod
    def single(cls, backend: AgentBackend) -> "Backends":
        return cls(backend, backend, backend, backend)
