"""JSON-over-TCP step protocol.

Wire format: newline-delimited UTF-8 JSON, one request/response pair per
line. Every connection gets its own isolated environment; nothing is shared
between clients. Three consecutive malformed frames close the connection.

Request: ``{"id": <any>, "command": <string or object>, ...}``.  Control
commands (``reset``, ``parallel``, ``solveik``, ``listtasks``,
``dumphistory``) take extra top-level fields; anything else is parsed as an
action command in its text or object form.

Response: ``{"id", "success", "outcome", "errorMessage", "feedback",
"collisions", "taskStatus", "stepCount"}``.
"""

from __future__ import annotations

import json
import os
import socketserver
import threading

from .engine import Environment
from .errors import DualhabError, ParseError, Unreachable

DEFAULT_PORT = 9999
PORT_ENV_VAR = "DUALHAB_PORT"
MALFORMED_LIMIT = 3


def _response(request_id, *, success, outcome, error=None, feedback=None,
              collisions=(), task_status=None, step_count=0, extra=None):
    payload = {
        "id": request_id,
        "success": success,
        "outcome": outcome,
        "errorMessage": error,
        "feedback": feedback,
        "collisions": [list(c) for c in collisions],
        "taskStatus": task_status,
        "stepCount": step_count,
    }
    if extra:
        payload.update(extra)
    return payload


class _NoEnvironment(DualhabError):
    pass


class Session:
    """Protocol state machine for one connection; transport-agnostic."""

    def __init__(self):
        self.env = None
        self.malformed = 0

    def handle_line(self, line: str):
        """Returns (response dict | None, keep_open flag)."""
        line = line.strip()
        if not line:
            return None, True
        try:
            request = json.loads(line)
            if not isinstance(request, dict) or "command" not in request:
                raise ValueError("request must be an object with a command")
        except (json.JSONDecodeError, ValueError) as exc:
            self.malformed += 1
            response = _response(None, success=False, outcome="protocol_error",
                                 error=str(exc))
            return response, self.malformed < MALFORMED_LIMIT
        self.malformed = 0
        request_id = request.get("id")
        try:
            return self._dispatch(request_id, request)
        except _NoEnvironment as exc:
            return _response(request_id, success=False, outcome="error",
                             error=f"E_UNKNOWN_ENV: {exc}",
                             step_count=0), True
        except ParseError as exc:
            return _response(request_id, success=False, outcome="error",
                             error=f"E_PARSE: {exc}",
                             step_count=self._step_count()), True
        except Unreachable as exc:
            return _response(request_id, success=False, outcome="error",
                             error=f"E_IK_UNREACHABLE: {exc}",
                             step_count=self._step_count()), True
        except DualhabError as exc:
            return _response(request_id, success=False, outcome="error",
                             error=f"{type(exc).__name__}: {exc}",
                             step_count=self._step_count()), True

    def _step_count(self):
        return self.env.state.step_count if self.env else 0

    def _require_env(self):
        if self.env is None:
            raise _NoEnvironment("no episode: send a reset command first")
        return self.env

    def _dispatch(self, request_id, request):
        command = request["command"]
        name = command.strip().lower() if isinstance(command, str) else None

        if name == "shutdown":
            return _response(request_id, success=True, outcome="ok",
                             step_count=self._step_count()), False

        if name == "reset":
            kwargs = {}
            if "scene" in request:
                kwargs["scene"] = request["scene"]
            if "task_id" in request:
                kwargs["task_id"] = request["task_id"]
            elif "scene" not in request:
                kwargs["scene"] = "kitchen_small"
            env_kwargs = dict(
                robot=request.get("robot", "X1"),
                difficulty=request.get("difficulty", "easy"),
                seed=request.get("seed", 0),
                solve_kinematics=request.get("solveKinematics", True),
            )
            if self.env is None:
                self.env = Environment(**env_kwargs, **kwargs)
                feedback = self.env.load_state()
            else:
                self.env.solve_kinematics = env_kwargs.pop("solve_kinematics")
                feedback = self.env.reset(**env_kwargs, **kwargs)
            return _response(request_id, success=True, outcome="ok",
                             feedback=feedback,
                             task_status=self.env.task_status(),
                             step_count=self.env.state.step_count), True

        if name == "parallel" or request.get("parallel"):
            env = self._require_env()
            left, right = (request.get("left"), request.get("right")) \
                if name == "parallel" else (command.get("left"), command.get("right"))
            if left is None or right is None:
                raise DualhabError("parallel requires left and right commands")
            lres, rres = env.step_parallel(left, right)
            return _response(
                request_id,
                success=lres.success and rres.success,
                outcome=f"{lres.outcome}/{rres.outcome}",
                error=lres.error_message or rres.error_message,
                feedback=lres.feedback,
                collisions=list(lres.collisions) + list(rres.collisions),
                task_status=env.task_status(),
                step_count=env.state.step_count,
                extra={"left": lres.to_dict(), "right": rres.to_dict()}), True

        if name == "solveik":
            env = self._require_env()
            joints = env.solve_ik(request["target"],
                                  arm=request.get("arm", "Right"),
                                  position_only=request.get("positionOnly", False))
            return _response(request_id, success=True, outcome="ok",
                             step_count=env.state.step_count,
                             extra={"joints": joints}), True

        if name == "listtasks":
            return _response(request_id, success=True, outcome="ok",
                             step_count=self._step_count(),
                             extra={"tasks": Environment.list_tasks()}), True

        if name == "dumphistory":
            env = self._require_env()
            return _response(request_id, success=True, outcome="ok",
                             step_count=env.state.step_count,
                             extra={"history": env.dump_history()}), True

        env = self._require_env()
        result = env.step(command)
        error = result.error_message
        if error is not None and result.outcome == "precondition_failed":
            error = f"E_PRECONDITION: {error}"
        return _response(request_id, success=result.success,
                         outcome=result.outcome,
                         error=error,
                         feedback=result.feedback,
                         collisions=result.collisions,
                         task_status=env.task_status(),
                         step_count=env.state.step_count), True


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        session = Session()
        for raw in self.rfile:
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError:
                line = "\x00"  # force a malformed-frame response
            response, keep_open = session.handle_line(line)
            if response is not None:
                data = json.dumps(response, sort_keys=True) + "\n"
                self.wfile.write(data.encode("utf-8"))
                self.wfile.flush()
            if not keep_open:
                break


class Server(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True


def default_port() -> int:
    return int(os.environ.get(PORT_ENV_VAR, DEFAULT_PORT))


def serve(host="127.0.0.1", port=None, *, background=False):
    """Start the protocol server; blocks unless ``background`` is set."""
    server = Server((host, port if port is not None else default_port()),
                    _Handler)
    if background:
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        return server
    try:
        server.serve_forever()
    finally:
        server.server_close()
    return server
