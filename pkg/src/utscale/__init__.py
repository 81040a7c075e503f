"""Unit-test scaling laboratory.

Submodules are imported explicitly (``from utscale import reward``); this
file stays import-free so that one-shot runner subprocesses spawned via
``python -m utscale.mockrunner`` do not pay for numpy startup.
"""

__version__ = "0.1.0"
