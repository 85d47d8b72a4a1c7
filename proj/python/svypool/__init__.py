"""Design-based survey indicators, linearization variances and two-sample
pooling via aligned weights.

The heavy lifting lives in the compiled ``_core`` extension; this package
re-exports its surface.
"""

try:
    from ._core import *  # noqa: F401,F403
    from ._core import __version__  # noqa: F401
except ImportError:  # extension built in-tree (plain CMake), not installed
    from _core import *  # noqa: F401,F403
    from _core import __version__  # noqa: F401
