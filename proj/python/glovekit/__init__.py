"""Offline imitation learning from glove sensor streams to MIDI note sequences.

Thin package wrapper around the native ``_glovekit`` extension. Installed
wheels carry the extension inside the package; in a plain CMake build tree it
sits next to the build artifacts instead, hence the fallback import.
"""

try:
    from ._glovekit import *  # noqa: F401,F403
    from ._glovekit import __doc__ as _native_doc
except ImportError:  # pragma: no cover - CMake build tree layout
    from _glovekit import *  # noqa: F401,F403
    from _glovekit import __doc__ as _native_doc

__version__ = "0.1.0"
if _native_doc:
    __doc__ = _native_doc + "\n\n" + (__doc__ or "")
del _native_doc
