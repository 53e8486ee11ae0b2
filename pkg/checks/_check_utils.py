"""
Utils for the checks in this directory.

Every `verify_*.py` file registers its checks with `@mandatory_testcase` and
calls `main()` when run as a script:

    python checks/verify_rapid.py                  # all checks, each in a subprocess
    python checks/verify_rapid.py test_two_points  # a single check, with its output

The check functions take no arguments and are named `test_*`, so pytest
collects the same files.
"""

import inspect
import math
import os
import subprocess
import sys
import time
import typing

from tqdm import tqdm  # pip install tqdm

# the checks import rapid_svdd from the repository root
_REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if _REPO_ROOT not in sys.path:
    sys.path.insert(0, _REPO_ROOT)

# All checks that have been registered, by name.
_check_list = {}


class CheckFailure(AssertionError):
    pass


class _TestCase:
    def __init__(self, func, max_runtime_s):
        self.func_name = func.__name__
        self.func = func
        # extract full path of function file
        self.func_file = os.path.abspath(inspect.getfile(func))
        self.max_runtime_s = max_runtime_s

    def run(self):
        """
        Direct call of the check.
        """
        self.func()

    def _print_output(self, outs: bytes, errs: bytes):
        print(outs.decode("utf-8"))
        print(errs.decode("utf-8"))

    def run_in_subprocess(self) -> bool:
        """
        Run in a subprocess with time limit. Returns True if the check passes in
        time. The output is only shown if it fails.
        """
        assert os.path.exists(self.func_file)
        cmd = [sys.executable, self.func_file, self.func_name]
        proc = subprocess.Popen(cmd, stdout=subprocess.PIPE, stderr=subprocess.PIPE)
        try:
            outs, errs = proc.communicate(timeout=self.max_runtime_s)
        except subprocess.TimeoutExpired:
            proc.kill()
            self._print_output(*proc.communicate())
            print(f"Check '{self.func_name}' timed out after {self.max_runtime_s} seconds.")
            return False
        if proc.returncode != 0:
            self._print_output(outs, errs)
            print(f"Check '{self.func_name}' failed.")
            return False
        return True


def FAIL(msg):
    raise CheckFailure(msg)


def CHECK(condition, msg):
    """
    Raise a CheckFailure with the message if the condition is not met.
    """
    if not condition:
        FAIL(msg)


def CHECK_CLOSE(actual: float, expected: float, tol: float, msg: str = ""):
    CHECK(
        math.isfinite(actual) and abs(actual - expected) <= tol,
        f"{msg} Expected {expected!r} +- {tol}, got {actual!r}.".strip(),
    )


def CHECK_RAISES(exception: typing.Type[BaseException], func, *args, **kwargs):
    """
    Check that calling func raises the exception, and return it.
    """
    try:
        func(*args, **kwargs)
    except exception as e:
        return e
    FAIL(f"Expected {exception.__name__} from {getattr(func, '__name__', func)}.")
    return None


def mandatory_testcase(max_runtime_s=900):
    """
    Decorator for registering a check together with its time limit.
    """

    def decorator(func):
        func_name = func.__name__
        # there should only be one function with this name
        assert func_name not in _check_list
        _check_list[func_name] = _TestCase(func, max_runtime_s)
        return func

    return decorator


def run_all_checks() -> bool:
    print("Running all checks...")
    failed = []
    for func_name in tqdm(_check_list, desc="Progress"):
        start = time.perf_counter()
        succ = _check_list[func_name].run_in_subprocess()
        if succ:
            print(f"Check '{func_name}' passed in {time.perf_counter() - start:.1f}s.")
        else:
            failed.append(func_name)
    if failed:
        print(f"{len(failed)} checks failed: {', '.join(failed)}")
        return False
    print("All checks passed.")
    return True


def print_how_to_check_individually():
    print("-" * 80)
    print("You can run a single check by passing its name as an argument.")
    print("Use this to debug a single check. It will also show the output of the check.")
    print("Available checks:")
    for func_name in _check_list:
        print(f"  {func_name}")
    print("-" * 80)


def main():
    """
    Entry point of the check files. With a check name as argument, only this
    check runs (in this process). Otherwise, all checks of the file run.
    """
    if len(sys.argv) == 2:
        func_name = sys.argv[1]
        if func_name not in _check_list:
            print(f"Check '{func_name}' not found.")
            print_how_to_check_individually()
            sys.exit(1)
        _check_list[func_name].run()
    else:
        print_how_to_check_individually()
        sys.exit(0 if run_all_checks() else 1)
