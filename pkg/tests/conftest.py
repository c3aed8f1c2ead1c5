import numpy as np
from hypothesis import settings

settings.register_profile("ci", deadline=None, max_examples=50)
settings.load_profile("ci")


class ScriptedStream:
    """Stand-in for RngStream that replays a fixed list of uniforms."""

    def __init__(self, values):
        self._values = [float(v) for v in values]

    def doubles(self, count):
        if len(self._values) < count:
            raise AssertionError("scripted stream exhausted")
        out = np.array(self._values[:count])
        del self._values[:count]
        return out
