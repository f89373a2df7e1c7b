# Copyright 2026 The progsynth Authors
# SPDX-License-Identifier: Apache-2.0
"""Karel programs: parsing, execution, program embeddings and latent search."""

from __future__ import annotations

import json
from typing import Any, Optional

import numpy as np

from . import _core
from ._core import Model, cem, edit_distance, r_mat, reference_programs, task_names, task_return, tokens

__all__ = [
    "ApiError",
    "Client",
    "Model",
    "ParseError",
    "cem",
    "edit_distance",
    "parse",
    "r_mat",
    "reference_programs",
    "task_names",
    "task_return",
    "tokens",
]
__version__ = "0.1.0"


class ParseError(ValueError):
    """Malformed program; `index` is the first offending token."""

    def __init__(self, index: int, message: str):
        super().__init__(message)
        self.index = index


class ApiError(RuntimeError):
    def __init__(self, status: int, body: dict):
        super().__init__(f"{status}: {body.get('error') or body.get('message')}")
        self.status = status
        self.body = body


def parse(text: str) -> str:
    """Canonical single-space form of `text`."""
    ok, canonical, index, message = _core.check(text)
    if not ok:
        raise ParseError(index, message)
    return canonical


class Client:
    """In-process access to the debugging API, same payloads as the HTTP server."""

    def __init__(self, checkpoint: Optional[str] = None, eval_configs: int = 10):
        self._api = _core.Api(checkpoint, eval_configs)

    def request(self, method: str, path: str, body: Optional[dict] = None) -> tuple[int, dict]:
        status, payload = self._api.request(method, path, json.dumps(body) if body is not None else "")
        return status, json.loads(payload)

    def _post(self, path: str, body: dict) -> dict:
        status, payload = self.request("POST", path, body)
        if status != 200:
            raise ApiError(status, payload)
        return payload

    def tasks(self) -> list[dict]:
        return self.request("GET", "/tasks")[1]["tasks"]

    def execute(self, program: str, task: str, seed: int = 0, **extra: Any) -> dict:
        return self._post("/execute", {"program": program, "task": task, "seed": seed, **extra})

    def start_session(self, task: str, program: str, budget: int = 3, seed: int = 0) -> dict:
        return self._post("/session/start", {"task": task, "program": program, "budget": budget, "seed": seed})

    def submit(self, session: str, edited: str) -> dict:
        return self._post("/session/submit", {"session": session, "edited": edited})

    def decode(self, latent: np.ndarray) -> str:
        return self._post("/decode", {"latent": [float(x) for x in latent]})["program"]
