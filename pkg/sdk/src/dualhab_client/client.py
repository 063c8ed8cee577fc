"""Synchronous NDJSON/TCP client.

The protocol is strictly request->response: every call sends one frame and
blocks for exactly one reply, matched by the auto-incrementing ``id``.
"""

from __future__ import annotations

import json
import socket


class ProtocolError(RuntimeError):
    """Malformed frame or out-of-order response from the server."""


class ServerError(RuntimeError):
    """The server answered with success=false and an error message."""

    def __init__(self, response: dict):
        super().__init__(response.get("errorMessage") or response.get("outcome"))
        self.response = response


class Response(dict):
    """Dict view of a protocol response with typed accessors."""

    @property
    def success(self) -> bool:
        return bool(self.get("success"))

    @property
    def outcome(self) -> str:
        return self.get("outcome", "")

    @property
    def error_message(self):
        return self.get("errorMessage")

    @property
    def feedback(self):
        return self.get("feedback")

    @property
    def step_count(self) -> int:
        return int(self.get("stepCount", 0))

    @property
    def task_status(self):
        return self.get("taskStatus")

    @property
    def collisions(self) -> list:
        return self.get("collisions", [])


class Client:
    def __init__(self, sock: socket.socket):
        self._sock = sock
        self._reader = sock.makefile("r", encoding="utf-8", newline="\n")
        self._next_id = 0

    # -- plumbing -----------------------------------------------------------

    def request(self, payload: dict, *, check: bool = False) -> Response:
        """Send one frame (an ``id`` is added) and wait for its reply."""
        self._next_id += 1
        frame = dict(payload)
        frame["id"] = str(self._next_id)
        data = json.dumps(frame) + "\n"
        self._sock.sendall(data.encode("utf-8"))
        line = self._reader.readline()
        if not line:
            raise ProtocolError("connection closed by server")
        try:
            response = Response(json.loads(line))
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"unparseable response frame: {exc}") from exc
        if response.get("id") != frame["id"]:
            raise ProtocolError(
                f"response id {response.get('id')!r} != request id {frame['id']!r}")
        if check and not response.success:
            raise ServerError(response)
        return response

    # -- protocol commands --------------------------------------------------

    def reset(self, *, scene=None, task_id=None, robot="x1",
              difficulty="easy", seed=0, solve_kinematics=True) -> Response:
        payload = {"command": "reset", "robot": robot,
                   "difficulty": difficulty, "seed": seed,
                   "solveKinematics": solve_kinematics}
        if scene is not None:
            payload["scene"] = scene
        if task_id is not None:
            payload["task_id"] = task_id
        return self.request(payload, check=True)

    def step(self, command) -> Response:
        return self.request({"command": command})

    def step_parallel(self, left, right) -> Response:
        return self.request({"command": "parallel", "left": left,
                             "right": right})

    def undo(self) -> Response:
        return self.request({"command": "(undo)"})

    def redo(self) -> Response:
        return self.request({"command": "(redo)"})

    def load_state(self) -> Response:
        return self.request({"command": "(loadstate)"}, check=True)

    def solve_ik(self, target, arm="Right", position_only=False) -> list:
        response = self.request(
            {"command": "solveik", "target": target, "arm": arm,
             "positionOnly": position_only}, check=True)
        return response["joints"]

    def list_tasks(self) -> list:
        return self.request({"command": "listtasks"}, check=True)["tasks"]

    def dump_history(self) -> list:
        return self.request({"command": "dumphistory"}, check=True)["history"]

    def shutdown(self) -> Response:
        return self.request({"command": "shutdown"})

    def close(self) -> None:
        try:
            self._reader.close()
        finally:
            self._sock.close()

    def __enter__(self) -> "Client":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def connect(host: str = "127.0.0.1", port: int = 9999,
            timeout: float = 30.0) -> Client:
    """Open a protocol connection; raises OSError if the server is down."""
    sock = socket.create_connection((host, port), timeout=timeout)
    return Client(sock)
