"""Matrix Market reader and writer for :class:`~opnorm.core.SymMatrix`.

Parsing is delegated to :mod:`scipy.io`; this module enforces the header
contract (real or integer or pattern field, symmetric or general symmetry)
and checks that the data is actually symmetric and nonnegative.
"""

import io
import os

import numpy as np
import scipy.io
import scipy.sparse

from .core import SymMatrix
from .exceptions import OpNormError


class MatrixMarketError(OpNormError):
    """Malformed file or a matrix that violates the SymMatrix contract."""


_FIELDS = {"real", "integer", "pattern"}
_SYMMETRIES = {"symmetric", "general"}


def read_matrix_market(source):
    """Read a symmetric nonnegative matrix from a path or file-like object."""
    try:
        if isinstance(source, (str, os.PathLike)):
            with open(source, "rb") as fh:
                raw = fh.read()
        else:
            raw = source.read()
            if isinstance(raw, str):
                raw = raw.encode()
        rows, cols, _, fmt, field, symmetry = scipy.io.mminfo(io.BytesIO(raw))
        if field not in _FIELDS:
            raise MatrixMarketError(f"unsupported Matrix Market field {field!r}")
        if symmetry not in _SYMMETRIES:
            raise MatrixMarketError(f"unsupported Matrix Market symmetry {symmetry!r}")
        if rows != cols:
            raise MatrixMarketError(f"matrix must be square, header says {rows}x{cols}")
        data = scipy.io.mmread(io.BytesIO(raw))
    except MatrixMarketError:
        raise
    except (OSError, ValueError, IndexError, TypeError) as exc:
        raise MatrixMarketError(f"cannot parse Matrix Market input: {exc}") from exc
    if scipy.sparse.issparse(data):
        data = data.toarray()
    data = np.asarray(data, dtype=float)
    try:
        return SymMatrix(data)
    except ValueError as exc:
        raise MatrixMarketError(f"invalid matrix: {exc}") from exc


def write_matrix_market(target, A, *, fmt="array", comment=""):
    """Write ``A`` with a ``symmetric`` header in ``array`` or ``coordinate`` format."""
    if fmt not in ("array", "coordinate"):
        raise ValueError(f"fmt must be 'array' or 'coordinate', got {fmt!r}")
    arr = A.entries if isinstance(A, SymMatrix) else SymMatrix(A).entries
    data = arr if fmt == "array" else scipy.sparse.coo_matrix(arr)
    scipy.io.mmwrite(target, data, comment=comment, field="real",
                     precision=17, symmetry="symmetric")
