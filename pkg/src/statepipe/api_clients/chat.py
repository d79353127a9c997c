"""Chat-completion client with a deterministic record/replay response cache."""

import logging
import os
import tempfile
import threading
import time
from collections.abc import Callable
from pathlib import Path
from typing import Any

import httpx

from statepipe.containers.config import LlmClientConfig
from statepipe.core.exceptions import APIError, CacheMissError
from statepipe.models.base import CacheMode
from statepipe.utils.hash_generator import HashGenerator

logger = logging.getLogger(__name__)

Message = dict[str, Any]

_RETRYABLE_STATUS = frozenset({408, 429, 500, 502, 503, 504})


class ResponseCache:
    """One file per key under a directory; the file holds the raw response text."""

    def __init__(self, directory: Path) -> None:
        """Initialize the cache directory."""
        self.directory = directory

    def path_for(self, key: str) -> Path:
        """Cache file path of a key."""
        return self.directory / key

    def get(self, key: str) -> str | None:
        """Cached text, or None on a miss."""
        path = self.path_for(key)
        if not path.is_file():
            return None
        return path.read_text(encoding="utf-8")

    def put(self, key: str, text: str) -> None:
        """Store text atomically; concurrent writers of one key are last-writer-wins."""
        self.directory.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(dir=self.directory, prefix=f".{key[:8]}-")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(text)
            Path(tmp_name).replace(self.path_for(key))
        except BaseException:
            Path(tmp_name).unlink(missing_ok=True)
            raise


class LabelerClient:
    """
    Chat-completion client.

    ``live`` always calls the endpoint; ``record`` serves cache hits and stores
    misses; ``replay`` serves the cache only and never opens a connection.
    Cache keys hash the model id, the full message list and the sampling
    parameters.
    """

    def __init__(
        self,
        config: LlmClientConfig,
        transport: httpx.BaseTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
        api_name: str = "llm",
        hash_generator: HashGenerator | None = None,
    ) -> None:
        """
        Initialize the client.

        Args:
            config: Endpoint, model, retry and cache settings
            transport: Optional httpx transport (tests inject a mock)
            sleep: Backoff sleep function
            api_name: Name used in errors and logs
            hash_generator: Hash generator for cache keys

        """
        self.config = config
        self.mode = CacheMode(config.mode)
        self.cache = ResponseCache(Path(config.cache_dir))
        self.api_name = api_name
        self._transport = transport
        self._sleep = sleep
        self._hasher = hash_generator or HashGenerator()
        self._client: httpx.Client | None = None
        self._lock = threading.Lock()
        self.network_calls = 0
        self.cache_hits = 0

    @property
    def sampling(self) -> dict[str, Any]:
        """Sampling parameters sent with every request."""
        return {"temperature": self.config.temperature}

    def cache_key(self, messages: list[Message]) -> str:
        """Hex digest of (model id, messages, sampling parameters)."""
        return self._hasher.hash_json(
            {"model": self.config.model, "messages": messages, "sampling": self.sampling},
        )

    def complete(self, prompt: str) -> str:
        """Send a single user message and return the response text."""
        return self.chat([{"role": "user", "content": prompt}])

    def chat(self, messages: list[Message]) -> str:
        """
        Return the first choice's message content for ``messages``.

        Raises:
            CacheMissError: Replay mode without a cached response
            APIError: Endpoint failure after all retries

        """
        key = self.cache_key(messages)
        if self.mode is not CacheMode.LIVE:
            cached = self.cache.get(key)
            if cached is not None:
                with self._lock:
                    self.cache_hits += 1
                return cached
            if self.mode is CacheMode.REPLAY:
                logger.warning("%s cache miss for key %s", self.api_name, key)
                raise CacheMissError(key, self.api_name)

        text = self._post(messages)
        if self.mode is CacheMode.RECORD:
            self.cache.put(key, text)
        return text

    def _http(self) -> httpx.Client:
        with self._lock:
            if self._client is None:
                headers = {"Content-Type": "application/json"}
                if self.config.api_key:
                    headers["Authorization"] = f"Bearer {self.config.api_key}"
                self._client = httpx.Client(
                    timeout=self.config.timeout,
                    headers=headers,
                    transport=self._transport,
                )
            return self._client

    def _post(self, messages: list[Message]) -> str:
        payload = {"model": self.config.model, "messages": messages, **self.sampling}
        client = self._http()
        delay = self.config.backoff_s
        last_error: Exception | None = None
        for attempt in range(1, self.config.retries + 1):
            with self._lock:
                self.network_calls += 1
            try:
                response = client.post(self.config.url, json=payload)
                if response.status_code in _RETRYABLE_STATUS:
                    msg = f"{self.api_name} returned HTTP {response.status_code}"
                    raise APIError(msg, self.api_name, response.status_code)
                response.raise_for_status()
                return str(response.json()["choices"][0]["message"]["content"] or "")
            except httpx.HTTPStatusError as e:
                msg = f"{self.api_name} request rejected: HTTP {e.response.status_code}"
                raise APIError(msg, self.api_name, e.response.status_code) from e
            except (KeyError, IndexError, TypeError, ValueError) as e:
                msg = f"{self.api_name} returned an unexpected payload: {e}"
                raise APIError(msg, self.api_name) from e
            except (httpx.HTTPError, APIError) as e:
                last_error = e
                logger.warning(
                    "%s attempt %d/%d failed: %s",
                    self.api_name,
                    attempt,
                    self.config.retries,
                    e,
                )
                if attempt < self.config.retries:
                    self._sleep(delay)
                    delay *= 2
        msg = f"{self.api_name} failed after {self.config.retries} attempts: {last_error}"
        status = last_error.status_code if isinstance(last_error, APIError) else None
        raise APIError(msg, self.api_name, status)

    def close(self) -> None:
        """Close HTTP client."""
        if self._client is not None:
            self._client.close()
            self._client = None

    def __enter__(self) -> "LabelerClient":
        """Enter context."""
        return self

    def __exit__(self, *exc_info: object) -> None:
        """Close on exit."""
        self.close()
