"""
Quasi-set kernel: indistinguishable m-atoms, weak pairs, quasi-functions,
finite quasi-metric spaces and the EPRB space-time model.
"""
from importlib.metadata import PackageNotFoundError, version

from .core import (
    Sort,
    Species,
    Universe,
    add_macro_atom,
    add_micro_atom,
    extensionally_equal,
    indistinguishable,
    make_qset,
    new_universe,
    quasi_cardinality,
    weak_pair,
    weak_singleton,
)
from .errors import QuasiSetError

try:
    __version__ = version("qsetlab")
except PackageNotFoundError:
    __version__ = "0.0rc0"
