"""Sandboxed program runner.

Reads a program as protocol message id 0 (method load_program) on stdin and
executes it in a whitelist namespace: the five robot-API shims, the math
module, and a small set of harmless builtins. Nothing else exists - no file,
network, or process capabilities - so escape attempts fail with ordinary
exceptions that are reported upstream.

Each shim writes one request line {"id": N, "method": ..., "params": {...}}
to stdout and blocks until the matching reply line arrives on stdin; replies
carry either "result" (returned to the program) or "error" (raised into the
program as RuntimeError). The run ends with a single event line:
{"id": -1, "event": "completed"} or {"id": -1, "event": "exception",
"traceback": ...}; the exit status is 0 only for a completed event.
"""

import json
import math
import os
import posixpath
import re
import sys
import traceback

PRINT_CAP = 1 << 20  # bytes of print() output a program may produce

PROGRAM_FILENAME = "program"

_SAFE_BUILTINS = {
    "abs": abs, "all": all, "any": any, "bool": bool, "dict": dict,
    "divmod": divmod, "enumerate": enumerate, "filter": filter,
    "float": float, "int": int, "isinstance": isinstance, "len": len,
    "list": list, "map": map, "max": max, "min": min, "pow": pow,
    "range": range, "repr": repr, "reversed": reversed, "round": round,
    "set": set, "sorted": sorted, "str": str, "sum": sum, "tuple": tuple,
    "zip": zip,
    "ArithmeticError": ArithmeticError, "AttributeError": AttributeError,
    "Exception": Exception, "ImportError": ImportError,
    "IndexError": IndexError, "KeyError": KeyError,
    "LookupError": LookupError, "NameError": NameError,
    "RuntimeError": RuntimeError, "StopIteration": StopIteration,
    "TypeError": TypeError, "ValueError": ValueError,
    "ZeroDivisionError": ZeroDivisionError,
    "True": True, "False": False, "None": None,
}


class _ProtocolAbort(BaseException):
    """Unrecoverable wire-protocol violation; never catchable by programs."""


class _OutputLimit(BaseException):
    """Program print output exceeded the cap; never catchable by programs."""


class Bridge:
    """One synchronous request/reply channel over stdio."""

    def __init__(self, stdin, stdout):
        self._stdin = stdin
        self._stdout = stdout
        self._next_id = 1

    def read_message(self) -> dict:
        line = self._stdin.readline()
        if not line:
            raise _ProtocolAbort("stdin closed")
        try:
            doc = json.loads(line)
        except ValueError:
            raise _ProtocolAbort(f"malformed inbound line: {line[:100]!r}") from None
        if not isinstance(doc, dict):
            raise _ProtocolAbort("inbound message is not an object")
        return doc

    def emit(self, doc: dict):
        self._stdout.write(json.dumps(doc) + "\n")
        self._stdout.flush()

    def call(self, method: str, params: dict):
        request_id = self._next_id
        self._next_id += 1
        self.emit({"id": request_id, "method": method, "params": params})
        reply = self.read_message()
        if reply.get("id") != request_id:
            raise _ProtocolAbort(
                f"reply id {reply.get('id')!r} does not match request {request_id}"
            )
        if "error" in reply:
            raise RuntimeError(str(reply["error"].get("message", "api error")))
        return reply.get("result")


def _shims(bridge: Bridge) -> dict:
    """The five robot-API bindings; their names and arities are frozen."""

    def detect_object(name):
        return bridge.call("detect_object", {"object": str(name)})

    def execute_trajectory(trajectory):
        rows = [[float(v) for v in row] for row in trajectory]
        return bridge.call("execute_trajectory", {"trajectory": rows})

    def open_gripper():
        return bridge.call("open_gripper", {})

    def close_gripper():
        return bridge.call("close_gripper", {})

    def task_completed():
        return bridge.call("task_completed", {})

    return {
        "detect_object": detect_object,
        "execute_trajectory": execute_trajectory,
        "open_gripper": open_gripper,
        "close_gripper": close_gripper,
        "task_completed": task_completed,
    }


def _make_print(sink: list):
    written = {"bytes": 0}

    def safe_print(*args, sep=" ", end="\n"):
        text = sep.join(str(a) for a in args) + end
        written["bytes"] += len(text)
        if written["bytes"] > PRINT_CAP:
            sink.append("... [output truncated at limit]")
            raise _OutputLimit()
        sink.append(text)

    return safe_print


def _make_import(allowed: dict):
    def safe_import(name, globals=None, locals=None, fromlist=(), level=0):
        if name in allowed:
            return allowed[name]
        raise ImportError(
            f"import of {name!r} is not available here; only "
            f"{sorted(allowed)} exist"
        )

    return safe_import


def _scrub_paths(text: str) -> str:
    return re.sub(
        r'File "([^"]+)"',
        lambda m: f'File "{posixpath.basename(m.group(1).replace(os.sep, "/"))}"',
        text,
    )


def run(stdin, stdout) -> int:
    bridge = Bridge(stdin, stdout)
    try:
        first = bridge.read_message()
        if first.get("id") != 0 or first.get("method") != "load_program":
            raise _ProtocolAbort("first message must be load_program with id 0")
        code = first.get("params", {}).get("code", "")
    except _ProtocolAbort:
        return 3

    prints: list[str] = []
    builtins = dict(_SAFE_BUILTINS)
    builtins["print"] = _make_print(prints)
    builtins["__import__"] = _make_import({"math": math})
    namespace = {"__builtins__": builtins, "__name__": "__main__", "math": math}
    namespace.update(_shims(bridge))

    try:
        compiled = compile(code, PROGRAM_FILENAME, "exec")
        exec(compiled, namespace)  # noqa: S102 - the whole point of this process
    except _ProtocolAbort:
        return 3
    except _OutputLimit:
        bridge.emit({
            "id": -1, "event": "exception",
            "traceback": f"OutputLimitExceeded: the program printed more than "
                         f"{PRINT_CAP} bytes and was stopped",
        })
        return 1
    except BaseException:
        bridge.emit({
            "id": -1, "event": "exception",
            "traceback": _scrub_paths(traceback.format_exc()),
        })
        return 1
    bridge.emit({"id": -1, "event": "completed"})
    return 0


def main() -> int:
    return run(sys.stdin, sys.stdout)


if __name__ == "__main__":
    sys.exit(main())
