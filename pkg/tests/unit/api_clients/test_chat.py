"""Tests for the chat-completion client and its response cache."""

import json
from collections.abc import Callable
from pathlib import Path

import httpx
import pytest

from statepipe.api_clients import LabelerClient, ResponseCache
from statepipe.containers.config import LlmClientConfig
from statepipe.core.exceptions import APIError, CacheMissError
from statepipe.models import CacheMode

URL = "http://llm.test/v1/chat/completions"


def _completion(text: str) -> httpx.Response:
    return httpx.Response(200, json={"choices": [{"message": {"role": "assistant", "content": text}}]})


class Recorder:
    """Mock endpoint answering from a list of responses and keeping every request."""

    def __init__(self, responses: list[httpx.Response] | Callable[[httpx.Request], httpx.Response]) -> None:
        self.requests: list[httpx.Request] = []
        self._responses = responses

    def __call__(self, request: httpx.Request) -> httpx.Response:
        self.requests.append(request)
        if callable(self._responses):
            return self._responses(request)
        return self._responses[len(self.requests) - 1]

    @property
    def transport(self) -> httpx.MockTransport:
        return httpx.MockTransport(self)


def _client(
    tmp_path: Path,
    mode: CacheMode,
    recorder: Recorder | None = None,
    sleeps: list[float] | None = None,
    **overrides: object,
) -> LabelerClient:
    config = LlmClientConfig(url=URL, cache_dir=str(tmp_path / "cache"), mode=mode, **overrides)
    sleep = sleeps.append if sleeps is not None else (lambda _: None)
    return LabelerClient(config, transport=recorder.transport if recorder else None, sleep=sleep)


class TestResponseCache:
    """File-per-key cache."""

    def test_get_put(self, tmp_path: Path) -> None:
        """Misses are None; stored text comes back verbatim."""
        cache = ResponseCache(tmp_path / "c")
        assert cache.get("abc") is None
        cache.put("abc", "Answer: yes\n")
        assert cache.get("abc") == "Answer: yes\n"
        assert [p.name for p in (tmp_path / "c").iterdir()] == ["abc"]


class TestLabelerClient:
    """Cache modes, retries and errors."""

    def test_record_then_hit(self, tmp_path: Path) -> None:
        """A miss is fetched once and stored; the repeat is a cache hit."""
        recorder = Recorder(lambda _: _completion("Peel the apple"))
        with _client(tmp_path, CacheMode.RECORD, recorder) as client:
            assert client.complete("List the actions") == "Peel the apple"
            assert client.complete("List the actions") == "Peel the apple"
            assert (client.network_calls, client.cache_hits) == (1, 1)
        assert len(recorder.requests) == 1
        sent = json.loads(recorder.requests[0].content)
        assert sent["messages"] == [{"role": "user", "content": "List the actions"}]
        assert sent["temperature"] == 0.0

    def test_replay_never_touches_network(
        self,
        tmp_path: Path,
        no_network: tuple[httpx.MockTransport, list[httpx.Request]],
    ) -> None:
        """Recorded answers replay offline; misses raise."""
        recorder = Recorder(lambda _: _completion("cached"))
        with _client(tmp_path, CacheMode.RECORD, recorder) as client:
            client.complete("prompt")

        transport, requests = no_network
        config = LlmClientConfig(url=URL, cache_dir=str(tmp_path / "cache"), mode=CacheMode.REPLAY)
        with LabelerClient(config, transport=transport) as replay:
            assert replay.complete("prompt") == "cached"
            with pytest.raises(CacheMissError) as exc_info:
                replay.complete("another prompt")
            assert exc_info.value.key == replay.cache_key([{"role": "user", "content": "another prompt"}])
            assert replay.network_calls == 0
        assert requests == []

    def test_live_does_not_write_cache(self, tmp_path: Path) -> None:
        """Live mode always calls the endpoint."""
        recorder = Recorder(lambda _: _completion("fresh"))
        with _client(tmp_path, CacheMode.LIVE, recorder) as client:
            client.complete("p")
            client.complete("p")
        assert len(recorder.requests) == 2
        assert not (tmp_path / "cache").exists()

    def test_cache_key_covers_model_and_sampling(self, tmp_path: Path) -> None:
        """Keys change with the model id or temperature, never otherwise."""
        messages = [{"role": "user", "content": "p"}]
        base = _client(tmp_path, CacheMode.REPLAY).cache_key(messages)
        assert _client(tmp_path, CacheMode.REPLAY).cache_key(messages) == base
        assert _client(tmp_path, CacheMode.REPLAY, model="other").cache_key(messages) != base
        assert _client(tmp_path, CacheMode.REPLAY, temperature=0.7).cache_key(messages) != base
        assert _client(tmp_path, CacheMode.REPLAY, timeout=5.0).cache_key(messages) == base

    def test_retries_with_backoff(self, tmp_path: Path) -> None:
        """Retryable statuses back off exponentially through the injected sleep."""
        recorder = Recorder([httpx.Response(503), httpx.Response(429), _completion("ok")])
        sleeps: list[float] = []
        with _client(tmp_path, CacheMode.LIVE, recorder, sleeps, retries=3, backoff_s=0.5) as client:
            assert client.complete("p") == "ok"
            assert client.network_calls == 3
        assert sleeps == [0.5, 1.0]

    def test_retries_exhausted(self, tmp_path: Path) -> None:
        """The last retryable status is reported."""
        recorder = Recorder(lambda _: httpx.Response(500))
        sleeps: list[float] = []
        with (
            _client(tmp_path, CacheMode.LIVE, recorder, sleeps, retries=2, backoff_s=1.0) as client,
            pytest.raises(APIError, match="failed after 2 attempts") as exc_info,
        ):
            client.complete("p")
        assert exc_info.value.status_code == 500
        assert sleeps == [1.0]

    def test_client_error_not_retried(self, tmp_path: Path) -> None:
        """A 4xx rejection fails at once."""
        recorder = Recorder(lambda _: httpx.Response(401, json={"error": "bad key"}))
        with (
            _client(tmp_path, CacheMode.RECORD, recorder, retries=3) as client,
            pytest.raises(APIError, match="HTTP 401"),
        ):
            client.complete("p")
        assert len(recorder.requests) == 1
        assert not (tmp_path / "cache").exists()

    def test_unexpected_payload(self, tmp_path: Path) -> None:
        """A response without choices is an API error."""
        recorder = Recorder(lambda _: httpx.Response(200, json={"result": "x"}))
        with (
            _client(tmp_path, CacheMode.LIVE, recorder) as client,
            pytest.raises(APIError, match="unexpected payload"),
        ):
            client.complete("p")

    def test_bearer_token(self, tmp_path: Path) -> None:
        """The API key is sent as a bearer token."""
        recorder = Recorder(lambda _: _completion("x"))
        with _client(tmp_path, CacheMode.LIVE, recorder, api_key="secret") as client:
            client.complete("p")
        assert recorder.requests[0].headers["Authorization"] == "Bearer secret"
