"""Thin client for the analysis service.

By default requests are routed through the FastAPI app in-process (no
network, fully deterministic); pointing the client at a base URL sends the
same payloads to a remote instance instead.  Error mapping mirrors the
service contract: 422 means a configuration problem, 409 a numerical
failure.
"""

from __future__ import annotations

from typing import Any

__all__ = ["ServiceClient", "ClientConfigError", "ClientNumericError", "ClientError"]


class ClientError(RuntimeError):
    """Unexpected service failure."""


class ClientConfigError(ValueError):
    """The service rejected the request as misconfigured."""


class ClientNumericError(RuntimeError):
    """The computation failed numerically (unbracketed, singular, overflow)."""


class ServiceClient:
    def __init__(self, base_url: str | None = None, timeout: float | None = None):
        if base_url is None:
            # lazy import keeps CLI start-up light when talking to a remote server
            from fastapi.testclient import TestClient

            from .service.app import app

            self._client = TestClient(app)
        else:
            import httpx

            self._client = httpx.Client(base_url=base_url, timeout=timeout)

    def post(self, path: str, payload: dict[str, Any]) -> dict[str, Any]:
        response = self._client.post(path, json=payload)
        if response.status_code == 422:
            raise ClientConfigError(_detail(response))
        if response.status_code == 409:
            raise ClientNumericError(_detail(response))
        if response.status_code != 200:
            raise ClientError(f"service returned {response.status_code}: {response.text}")
        return response.json()

    def get(self, path: str) -> dict[str, Any]:
        response = self._client.get(path)
        if response.status_code != 200:
            raise ClientError(f"service returned {response.status_code}: {response.text}")
        return response.json()

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "ServiceClient":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()


def _detail(response: Any) -> str:
    try:
        detail = response.json().get("detail", response.text)
    except ValueError:
        return response.text
    if isinstance(detail, list):  # pydantic validation error list
        parts = []
        for item in detail:
            loc = ".".join(str(p) for p in item.get("loc", []) if p != "body")
            parts.append(f"{loc}: {item.get('msg', '')}".strip(": "))
        return "; ".join(parts)
    return str(detail)
