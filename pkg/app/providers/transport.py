"""Line-delimited JSON transports shared by every external provider.

Each external model (embedder, generator, NLI, STS, coreference) speaks the same
shape of protocol: one JSON request per line, one JSON response per line.
"""
import json
import logging
import shlex
import socket
import subprocess
import threading
from abc import ABC, abstractmethod
from typing import Any, Dict, Optional

import requests

from app.exception.exception import ProviderError

logger = logging.getLogger(__name__)


class JsonTransport(ABC):
    @abstractmethod
    def request(self, payload: Dict[str, Any]) -> Dict[str, Any]:
        ...

    def close(self) -> None:
        pass


def _decode(line: str, source: str) -> Dict[str, Any]:
    if not line:
        raise ProviderError(f"{source} closed the stream without a response")
    try:
        response = json.loads(line)
    except json.JSONDecodeError as e:
        raise ProviderError(f"{source} returned invalid JSON: {e}")
    if not isinstance(response, dict):
        raise ProviderError(f"{source} returned a non-object response")
    if "error" in response:
        raise ProviderError(f"{source} reported an error: {response['error']}")
    return response


class SubprocessTransport(JsonTransport):
    """Keeps one child process alive and talks to it over stdin/stdout."""

    def __init__(self, command: str):
        self.command = command
        self._process: Optional[subprocess.Popen] = None
        self._lock = threading.Lock()

    def _ensure_process(self) -> subprocess.Popen:
        if self._process is None or self._process.poll() is not None:
            logger.info(f"[PROVIDER] Starting subprocess: {self.command}")
            try:
                self._process = subprocess.Popen(
                    shlex.split(self.command),
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    text=True,
                    encoding="utf-8",
                    bufsize=1,
                )
            except OSError as e:
                raise ProviderError(f"Cannot start provider '{self.command}': {e}")
        return self._process

    def request(self, payload: Dict[str, Any]) -> Dict[str, Any]:
        with self._lock:
            process = self._ensure_process()
            try:
                process.stdin.write(json.dumps(payload, ensure_ascii=False) + "\n")
                process.stdin.flush()
                line = process.stdout.readline()
            except (BrokenPipeError, OSError) as e:
                raise ProviderError(f"Provider '{self.command}' failed: {e}")
            return _decode(line.strip(), f"provider '{self.command}'")

    def close(self) -> None:
        if self._process is not None and self._process.poll() is None:
            self._process.stdin.close()
            self._process.terminate()
            self._process.wait(timeout=5)
        self._process = None


class SocketTransport(JsonTransport):
    """One short-lived TCP connection per request to a local provider."""

    def __init__(self, host: str, port: int, timeout: float = 60.0):
        self.host = host
        self.port = port
        self.timeout = timeout

    def request(self, payload: Dict[str, Any]) -> Dict[str, Any]:
        source = f"socket provider {self.host}:{self.port}"
        try:
            with socket.create_connection((self.host, self.port), timeout=self.timeout) as conn:
                conn.sendall((json.dumps(payload, ensure_ascii=False) + "\n").encode("utf-8"))
                with conn.makefile("r", encoding="utf-8") as reader:
                    line = reader.readline()
        except OSError as e:
            raise ProviderError(f"{source} failed: {e}")
        return _decode(line.strip(), source)


class HttpTransport(JsonTransport):
    def __init__(self, url: str, timeout: float = 60.0):
        self.url = url
        self.timeout = timeout

    def request(self, payload: Dict[str, Any]) -> Dict[str, Any]:
        try:
            response = requests.post(self.url, json=payload, timeout=self.timeout)
            response.raise_for_status()
        except requests.RequestException as e:
            raise ProviderError(f"HTTP provider {self.url} failed: {e}")
        return _decode(response.text.strip(), f"HTTP provider {self.url}")
