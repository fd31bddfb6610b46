"""File formats: LIBSVM text, trace CSV, and generated-instance archives.

Trace CSV layout (version tag in the first line):

    # tmap-trace-v1
    k,psi,residual_norm,step_size,mu,free_set_size,cg_iters,active_set_hash,used_safeguard,backtracks
    ... one row per visited iterate ...
    # status=converged
    # identification_iter=5
    # wall_time=0.0123

Floats are written with ``repr`` so a parsed trace reproduces the records
exactly; empty cells mean None (terminal rows have no step fields).
"""

from __future__ import annotations

import numpy as np
import scipy.sparse

from .errors import ParameterError, ParseError
from .solver import IterationRecord

TRACE_VERSION = "tmap-trace-v1"
_TRACE_COLUMNS = (
    "k", "psi", "residual_norm", "step_size", "mu",
    "free_set_size", "cg_iters", "active_set_hash",
    "used_safeguard", "backtracks",
)

_LABEL_MAP = {-1.0: -1.0, 0.0: -1.0, 1.0: 1.0}


def parse_libsvm(path, n_features=None):
    """Read a LIBSVM text file into a CSR matrix and a +-1 label vector.

    Each line is ``label idx:val idx:val ...`` with 1-based, strictly
    ascending indices. Labels -1/0/+1 are coerced to -1/+1; anything else
    is rejected. The column count is the largest index seen unless
    ``n_features`` overrides it.
    """
    labels = []
    data: list[float] = []
    indices: list[int] = []
    indptr = [0]
    max_index = 0
    with open(path, "r", encoding="ascii") as handle:
        for line_no, line in enumerate(handle, start=1):
            tokens = line.split()
            if not tokens:
                continue
            try:
                raw_label = float(tokens[0])
            except ValueError:
                raise ParseError(f"unreadable label {tokens[0]!r}", line_no) from None
            if raw_label not in _LABEL_MAP:
                raise ParseError(f"unmappable label {tokens[0]!r}", line_no)
            labels.append(_LABEL_MAP[raw_label])
            previous = 0
            for token in tokens[1:]:
                idx_text, _, val_text = token.partition(":")
                try:
                    idx = int(idx_text)
                    val = float(val_text)
                except ValueError:
                    raise ParseError(f"malformed feature {token!r}", line_no) from None
                if idx < 1:
                    raise ParseError(f"index {idx} is not positive", line_no)
                if idx <= previous:
                    raise ParseError(
                        f"index {idx} not ascending after {previous}", line_no
                    )
                previous = idx
                indices.append(idx - 1)
                data.append(val)
            max_index = max(max_index, previous)
            indptr.append(len(indices))

    n = max_index if n_features is None else int(n_features)
    if n < max_index:
        raise ParameterError(
            f"n_features={n} is smaller than the largest index seen ({max_index})"
        )
    matrix = scipy.sparse.csr_matrix(
        (np.asarray(data), np.asarray(indices, dtype=np.int64),
         np.asarray(indptr, dtype=np.int64)),
        shape=(len(labels), n),
    )
    return matrix, np.asarray(labels)


def write_libsvm(path, matrix, labels):
    """Write a CSR matrix and label vector in LIBSVM text format."""
    matrix = scipy.sparse.csr_matrix(matrix)
    labels = np.asarray(labels)
    if matrix.shape[0] != labels.size:
        raise ParameterError(
            f"matrix has {matrix.shape[0]} rows but {labels.size} labels"
        )
    with open(path, "w", encoding="ascii") as handle:
        for i in range(matrix.shape[0]):
            start, end = matrix.indptr[i], matrix.indptr[i + 1]
            features = " ".join(
                f"{matrix.indices[j] + 1}:{matrix.data[j]!r}"
                for j in range(start, end)
            )
            label = int(labels[i])
            handle.write(f"{label} {features}".rstrip() + "\n")


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(float(value))  # plain-float repr round-trips exactly
    return str(value)


def write_trace(path, report):
    """Write a solve report's trace plus its summary block as CSV."""
    with open(path, "w", encoding="ascii") as handle:
        handle.write(f"# {TRACE_VERSION}\n")
        handle.write(",".join(_TRACE_COLUMNS) + "\n")
        for rec in report.trace:
            handle.write(
                ",".join(_cell(getattr(rec, col)) for col in _TRACE_COLUMNS) + "\n"
            )
        handle.write(f"# status={report.status}\n")
        ident = report.identification_iter
        handle.write(f"# identification_iter={'none' if ident is None else ident}\n")
        handle.write(f"# wall_time={report.wall_time!r}\n")
        if report.safeguard is not None:
            handle.write(f"# switch_count={report.safeguard.switch_count}\n")


def read_trace(path):
    """Parse a trace CSV back into records and its summary dict."""
    records = []
    summary = {}
    with open(path, "r", encoding="ascii") as handle:
        first = handle.readline().strip()
        if first != f"# {TRACE_VERSION}":
            raise ParseError(f"unknown trace version line {first!r}", 1)
        header = handle.readline().strip()
        if tuple(header.split(",")) != _TRACE_COLUMNS:
            raise ParseError("unexpected trace columns", 2)
        for line_no, line in enumerate(handle, start=3):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line.lstrip("# ").partition("=")
                summary[key] = value
                continue
            cells = line.split(",")
            if len(cells) != len(_TRACE_COLUMNS):
                raise ParseError(f"expected {len(_TRACE_COLUMNS)} cells", line_no)
            records.append(
                IterationRecord(
                    k=int(cells[0]),
                    psi=float(cells[1]),
                    residual_norm=float(cells[2]),
                    step_size=float(cells[3]) if cells[3] else None,
                    mu=float(cells[4]) if cells[4] else None,
                    free_set_size=int(cells[5]) if cells[5] else None,
                    cg_iters=int(cells[6]) if cells[6] else None,
                    active_set_hash=cells[7],
                    used_safeguard=cells[8] == "1",
                    backtracks=int(cells[9]) if cells[9] else None,
                )
            )
    if "identification_iter" in summary:
        value = summary["identification_iter"]
        summary["identification_iter"] = None if value == "none" else int(value)
    if "wall_time" in summary:
        summary["wall_time"] = float(summary["wall_time"])
    if "switch_count" in summary:
        summary["switch_count"] = int(summary["switch_count"])
    return records, summary


def save_instance(path, op, b, x_true, **meta):
    """Archive a generated instance (measurement rows, data, ground truth).

    Stored as a compressed .npz with the operator's signal length and row
    selection, so the instance reloads without rerunning the generator.
    Extra keyword metadata (seed, dynamic range, ...) is stored alongside.
    """
    np.savez_compressed(
        path,
        n=np.int64(op.n),
        rows=op.rows,
        b=b,
        x_true=x_true,
        **{key: np.asarray(value) for key, value in meta.items()},
    )


def load_instance(path):
    """Load an instance archive written by ``save_instance``.

    Returns
    -------
    (op, b, x_true, meta) : operator, data vector, ground truth, dict
    """
    from .problems import PartialDctOperator

    with np.load(path) as archive:
        op = PartialDctOperator(int(archive["n"]), archive["rows"])
        b = archive["b"]
        x_true = archive["x_true"]
        meta = {
            key: archive[key]
            for key in archive.files
            if key not in {"n", "rows", "b", "x_true"}
        }
    return op, b, x_true, meta
