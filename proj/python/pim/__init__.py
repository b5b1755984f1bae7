try:
    from ._pim import *  # noqa: F401,F403
except ImportError:  # extension built outside the package, e.g. plain cmake
    from _pim import *  # noqa: F401,F403
