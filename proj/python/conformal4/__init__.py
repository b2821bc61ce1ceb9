from ._core import Error, __version__, decompose_at, euler_characteristic, manifolds, run

__all__ = ["Error", "__version__", "decompose_at", "euler_characteristic", "manifolds", "run"]
