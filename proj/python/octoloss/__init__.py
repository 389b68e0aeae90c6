try:
    from ._octo import *  # noqa: F401,F403
    from . import _octo as _impl
except ImportError:  # dev tree: the extension sits next to the package
    from _octo import *  # noqa: F401,F403
    import _octo as _impl

__all__ = [name for name in dir(_impl) if not name.startswith("_")]
