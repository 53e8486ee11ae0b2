"""
Wall-clock timing of pipeline stages and time limits of the solvers, based on
the monotonic performance counter.
"""

import time
import typing


class Timer:
    """
    A simple timer for measuring durations and enforcing a time limit.
    """

    def __init__(self, runtime: float = float("inf")):
        self.runtime = runtime
        self.start = time.perf_counter()
        self._last_lap = self.start
        self.saved_times: typing.List[typing.Tuple[float, str]] = []

    def remaining(self) -> float:
        """
        The remaining time.
        """
        return self.runtime - self.time()

    def time(self) -> float:
        """
        Seconds since the creation of the timer.
        """
        return time.perf_counter() - self.start

    def __bool__(self):
        """
        Returns true if there is still time remaining.
        """
        return not self.is_out_of_time()

    def is_out_of_time(self) -> bool:
        return self.remaining() < 0

    def lap(self, label: str) -> float:
        """
        Record the duration since the previous lap (or the start) under the
        given label and return it.
        """
        now = time.perf_counter()
        duration = now - self._last_lap
        self._last_lap = now
        self.saved_times.append((duration, label))
        return duration

    def get_laps(self) -> typing.Dict[str, float]:
        """
        The recorded lap durations by label. Repeated labels are summed up.
        """
        laps: typing.Dict[str, float] = {}
        for duration, label in self.saved_times:
            laps[label] = laps.get(label, 0.0) + duration
        return laps

    def check(self):
        """
        Raises:
            TimeoutError: If the timer has expired.
        """
        if not bool(self):
            msg = f"Time limit of {self.runtime}s exceeded."
            raise TimeoutError(msg)
