import sys

from .runner import serve_once

sys.exit(serve_once())
