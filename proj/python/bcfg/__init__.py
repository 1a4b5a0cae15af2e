"""Central and balanced configurations of the Newtonian n-body problem.

Thin wrapper around the compiled extension module.  Installed wheels carry
the extension inside this package; in a plain CMake build tree the module
sits next to the build products, so fall back to a top-level import.
"""

try:
    from ._bcfg import *  # noqa: F401,F403
    from ._bcfg import __version__  # noqa: F401
except ImportError:  # pragma: no cover - build-tree layout
    from _bcfg import *  # noqa: F401,F403
    from _bcfg import __version__  # noqa: F401
