"""Minimum distance between parametric surfaces via damped Riemannian dynamics."""

try:
    # Installed layout: the extension lives inside the package.
    from mindist._core import *  # noqa: F401,F403
    from mindist._core import __version__  # noqa: F401
except ImportError:
    # Development layout: the freshly built extension sits on PYTHONPATH.
    from _core import *  # noqa: F401,F403
    from _core import __version__  # noqa: F401
