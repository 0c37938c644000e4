"""Jacobi matrices, discrete measures and their text/JSON serialization.

A Jacobi matrix of size ``n`` is stored as two float arrays of length ``n``:
``a`` holds a_0..a_{n-1} and ``b`` holds b_0..b_{n-1} with ``b[0] == 0``, so
that ``b[j]`` is b_j. The recurrence is

    s p_n(s) = b_{n+1} p_{n+1}(s) + a_n p_n(s) + b_n p_{n-1}(s).
"""

from __future__ import annotations

import io
import json
import math
import os
from dataclasses import dataclass, field
from typing import IO, Iterable, Optional, Union

import numpy as np

from .errors import (
    DegenerateMeasure,
    ParseError,
    RankExceeded,
    SizeMismatch,
)

EPS = np.finfo(float).eps
DEGENERACY_FACTOR = 1e3
MERGE_FACTOR = 4.0

PathOrStream = Union[str, os.PathLike, IO[str]]


def degeneracy_threshold(scale: float = 1.0) -> float:
    """Off-diagonal entries at or below this value count as zero."""
    return DEGENERACY_FACTOR * EPS * max(1.0, scale)


def _readonly(x) -> np.ndarray:
    x = np.array(x, dtype=float)
    x.setflags(write=False)
    return x


class JacobiMatrix:
    """Finite truncation of a Jacobi matrix with strictly positive off-diagonal."""

    __slots__ = ("a", "b")

    def __init__(self, diag: Iterable[float], offdiag: Iterable[float] = ()):
        a = np.asarray(diag, dtype=float).ravel()
        off = np.asarray(offdiag, dtype=float).ravel()
        if a.size < 1:
            raise ValueError("a Jacobi matrix needs at least one diagonal entry")
        if off.size != a.size - 1:
            raise SizeMismatch(
                f"expected {a.size - 1} off-diagonal entries, got {off.size}"
            )
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(off))):
            raise ValueError("Jacobi entries must be finite")
        if np.any(off <= 0.0):
            j = int(np.flatnonzero(off <= 0.0)[0]) + 1
            raise DegenerateMeasure(f"off-diagonal b_{j} = {off[j - 1]!r} is not positive")
        object.__setattr__(self, "a", _readonly(a))
        object.__setattr__(self, "b", _readonly(np.concatenate(([0.0], off))))

    def __setattr__(self, name, value):
        raise AttributeError("JacobiMatrix is immutable")

    @property
    def size(self) -> int:
        return self.a.size

    @property
    def offdiag(self) -> np.ndarray:
        return self.b[1:]

    def truncate(self, n: int) -> "JacobiMatrix":
        if not 1 <= n <= self.size:
            raise SizeMismatch(f"cannot truncate size {self.size} matrix to {n}")
        return JacobiMatrix(self.a[:n], self.b[1:n])

    def to_dense(self) -> np.ndarray:
        return np.diag(self.a) + np.diag(self.b[1:], 1) + np.diag(self.b[1:], -1)

    def __len__(self):
        return self.size

    def __eq__(self, other):
        if not isinstance(other, JacobiMatrix):
            return NotImplemented
        return np.array_equal(self.a, other.a) and np.array_equal(self.b, other.b)

    def __hash__(self):
        return hash((self.a.tobytes(), self.b.tobytes()))

    def __repr__(self):
        return f"JacobiMatrix(size={self.size})"


class DiscreteMeasure:
    """Finite sum of weighted Dirac masses with positive weights summing to one."""

    __slots__ = ("nodes", "weights")

    def __init__(self, nodes: Iterable[float], weights: Iterable[float]):
        x = np.asarray(nodes, dtype=float).ravel()
        w = np.asarray(weights, dtype=float).ravel()
        if x.size != w.size:
            raise SizeMismatch("nodes and weights differ in length")
        if x.size == 0:
            raise DegenerateMeasure("a discrete measure needs at least one atom")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(w))):
            raise DegenerateMeasure("atoms must be finite")
        if np.any(w <= 0.0):
            raise DegenerateMeasure("atom weights must be strictly positive")
        total = math.fsum(w)
        if abs(total - 1.0) > 8 * EPS * w.size:
            raise DegenerateMeasure(f"weights sum to {total!r}, not 1")
        object.__setattr__(self, "nodes", _readonly(x))
        object.__setattr__(self, "weights", _readonly(w))

    def __setattr__(self, name, value):
        raise AttributeError("DiscreteMeasure is immutable")

    @classmethod
    def normalized(cls, nodes, weights) -> "DiscreteMeasure":
        """Build a measure after rescaling ``weights`` to unit mass."""
        w = np.asarray(weights, dtype=float)
        if np.any(w <= 0.0):
            raise DegenerateMeasure("atom weights must be strictly positive")
        return cls(nodes, w / math.fsum(w))

    @property
    def count(self) -> int:
        return self.nodes.size

    def __len__(self):
        return self.count

    def merged(self) -> "DiscreteMeasure":
        """Sort the atoms and merge nodes closer than 4 eps max(1, |x|).

        Merged atoms sit at the weighted mean of their members.
        """
        order = np.argsort(self.nodes, kind="stable")
        x = self.nodes[order]
        w = self.weights[order]
        gap = np.diff(x)
        tol = MERGE_FACTOR * EPS * np.maximum(1.0, np.abs(x[1:]))
        starts = np.concatenate(([0], np.flatnonzero(gap > tol) + 1))
        if starts.size == x.size:
            return _trusted_measure(x, w)
        wsum = np.add.reduceat(w, starts)
        xsum = np.add.reduceat(w * x, starts)
        return _trusted_measure(xsum / wsum, wsum)

    def moments(self, count: int) -> np.ndarray:
        return np.array([np.dot(self.weights, self.nodes**p) for p in range(count)])

    def __eq__(self, other):
        if not isinstance(other, DiscreteMeasure):
            return NotImplemented
        return np.array_equal(self.nodes, other.nodes) and np.array_equal(
            self.weights, other.weights
        )

    def __hash__(self):
        return hash((self.nodes.tobytes(), self.weights.tobytes()))

    def __repr__(self):
        return f"DiscreteMeasure(count={self.count})"


def _trusted_measure(x, w) -> DiscreteMeasure:
    m = object.__new__(DiscreteMeasure)
    object.__setattr__(m, "nodes", _readonly(x))
    object.__setattr__(m, "weights", _readonly(w))
    return m


@dataclass(frozen=True)
class IfsSpec:
    """A homogeneous affine IFS: contraction ``delta`` and the fixed-point law."""

    delta: float
    sigma_jacobi: JacobiMatrix
    sigma_atoms: Optional[DiscreteMeasure] = field(default=None, compare=False)

    def __post_init__(self):
        if not 0.0 <= self.delta < 1.0:
            raise ValueError(f"delta must lie in [0, 1), got {self.delta!r}")
        if self.sigma_atoms is not None:
            m = self.sigma_atoms.merged()
            n = min(self.sigma_jacobi.size, m.count)
            ref = jacobi_from_discrete(m, n)
            if frobenius_distance(ref, self.sigma_jacobi.truncate(n)) > 1e-12:
                raise ValueError("sigma_jacobi does not match sigma_atoms")

    @classmethod
    def from_atoms(cls, delta: float, atoms: DiscreteMeasure) -> "IfsSpec":
        m = atoms.merged()
        return cls(delta, jacobi_from_discrete(m, m.count), atoms)

    @property
    def sigma(self):
        """The richest available description of sigma (atoms when known)."""
        return self.sigma_atoms if self.sigma_atoms is not None else self.sigma_jacobi


def jacobi_lebesgue(n: int) -> JacobiMatrix:
    """Legendre recurrence: normalized Lebesgue measure on [-1, 1]."""
    if n < 1:
        raise ValueError("size must be positive")
    j = np.arange(1, n, dtype=float)
    return JacobiMatrix(np.zeros(n), j / np.sqrt(4.0 * j * j - 1.0))


def jacobi_from_discrete(m: DiscreteMeasure, n: int) -> JacobiMatrix:
    """Recurrence coefficients of a discrete measure.

    Lanczos on diag(nodes) started from sqrt(weights), with two passes of
    classical Gram-Schmidt against all previous vectors at every step.
    """
    if n < 1:
        raise ValueError("size must be positive")
    if np.any(m.weights <= 0.0):
        raise DegenerateMeasure("atom weights must be strictly positive")
    m = m.merged()
    x, w = m.nodes, m.weights
    if n > x.size:
        raise RankExceeded(
            f"requested {n} coefficients from a measure with {x.size} distinct nodes",
            rank=x.size,
        )
    thresh = degeneracy_threshold(float(np.max(np.abs(x))))
    Q = np.empty((n, x.size))
    a = np.empty(n)
    b = np.zeros(n)
    q = np.sqrt(w)
    q /= np.linalg.norm(q)
    q_prev = np.zeros_like(q)
    for j in range(n):
        Q[j] = q
        xq = x * q
        # elementwise product then sum: BLAS dot may fuse multiply-adds and
        # break the exact cancellation of symmetric node sets
        a[j] = np.sum(q * xq)
        if j == n - 1:
            break
        r = xq - a[j] * q - b[j] * q_prev
        basis = Q[: j + 1]
        for _ in range(2):
            r -= basis.T @ (basis @ r)
        bj = np.linalg.norm(r)
        if not bj > thresh:
            raise RankExceeded(
                f"b_{j + 1} = {bj:.3e} vanished numerically (measure rank {j + 1})",
                rank=j + 1,
            )
        b[j + 1] = bj
        q_prev = q
        q = r / bj
    return JacobiMatrix(a, b[1:])


def frobenius_distance(x: JacobiMatrix, y: JacobiMatrix) -> float:
    if x.size != y.size:
        raise SizeMismatch(f"sizes differ: {x.size} vs {y.size}")
    da = x.a - y.a
    db = x.b - y.b
    return math.sqrt(float(np.dot(da, da) + 2.0 * np.dot(db, db)))


def orthonormal_values(J: JacobiMatrix, s, degree: Optional[int] = None) -> np.ndarray:
    """Evaluate p_0..p_degree at points ``s`` by running the recurrence forward.

    Returns an array of shape (degree + 1, len(s)). ``degree`` defaults to
    ``J.size - 1``; going one higher needs b_{size} and is not allowed.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if degree is None:
        degree = J.size - 1
    if degree > J.size - 1:
        raise SizeMismatch(f"degree {degree} needs a matrix of size {degree + 1}")
    P = np.empty((degree + 1, s.size))
    P[0] = 1.0
    if degree >= 1:
        P[1] = (s - J.a[0]) / J.b[1]
    for k in range(1, degree):
        P[k + 1] = ((s - J.a[k]) * P[k] - J.b[k] * P[k - 1]) / J.b[k + 1]
    return P


# -- serialization ---------------------------------------------------------

def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _open_read(src: PathOrStream):
    if hasattr(src, "read"):
        return src, False
    return open(src, "r", encoding="utf-8"), True


def _open_write(dst: PathOrStream):
    if hasattr(dst, "write"):
        return dst, False
    return open(dst, "w", encoding="utf-8"), True


def _parse_float(tok: str, line: int) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise ParseError(f"not a number: {tok!r}", line) from None
    if not math.isfinite(v):
        raise ParseError(f"non-finite value {tok!r}", line)
    return v


def _content_lines(text: str):
    for i, raw in enumerate(text.splitlines(), start=1):
        s = raw.split("#", 1)[0].strip()
        if s:
            yield i, s


def _header(lines, tag: str):
    try:
        line, first = next(lines)
    except StopIteration:
        raise ParseError("empty input", 1) from None
    parts = first.split()
    if len(parts) != 3 or parts[0] != tag or parts[1] != "v1":
        raise ParseError(f"expected header '{tag} v1 <count>', got {first!r}", line)
    try:
        count = int(parts[2])
    except ValueError:
        raise ParseError(f"bad count {parts[2]!r}", line) from None
    if count < 1:
        raise ParseError("count must be positive", line)
    return line, count


def parse_jacobi(text: str) -> JacobiMatrix:
    if text.lstrip().startswith("{"):
        return _jacobi_from_json(text)
    lines = _content_lines(text)
    hline, n = _header(lines, "jacobi")
    a = np.empty(n)
    b = np.zeros(n)
    last = hline
    for j in range(n):
        try:
            line, row = next(lines)
        except StopIteration:
            raise ParseError(f"header announces {n} rows, found {j}", last + 1) from None
        last = line
        parts = row.split()
        if len(parts) != 3:
            raise ParseError(f"expected '<j> <a_j> <b_j>', got {row!r}", line)
        if parts[0] != str(j):
            raise ParseError(f"expected row index {j}, got {parts[0]!r}", line)
        a[j] = _parse_float(parts[1], line)
        bj = _parse_float(parts[2], line)
        if j > 0:
            if bj <= 0.0:
                raise ParseError(f"b_{j} = {parts[2]} is not positive", line)
            b[j] = bj
    extra = next(lines, None)
    if extra is not None:
        raise ParseError("trailing data after the last row", extra[0])
    return JacobiMatrix(a, b[1:])


def _jacobi_from_json(text: str) -> JacobiMatrix:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno) from None
    try:
        n = int(obj["size"])
        a = [float(v) for v in obj["a"]]
        b = [float(v) for v in obj["b"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed Jacobi JSON: {exc}", 1) from None
    if len(a) != n or len(b) != n:
        raise ParseError(f"size {n} but len(a)={len(a)}, len(b)={len(b)}", 1)
    if not all(math.isfinite(v) for v in a + b):
        raise ParseError("non-finite value", 1)
    if any(v <= 0.0 for v in b[1:]):
        raise ParseError("off-diagonal entries must be positive", 1)
    return JacobiMatrix(a, b[1:])


def format_jacobi(J: JacobiMatrix, fmt: str = "text") -> str:
    if fmt == "json":
        obj = {"size": J.size, "a": [float(v) for v in J.a], "b": [float(v) for v in J.b]}
        return json.dumps(obj) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    out = io.StringIO()
    out.write(f"jacobi v1 {J.size}\n")
    for j in range(J.size):
        out.write(f"{j} {_fmt(J.a[j])} {_fmt(J.b[j])}\n")
    return out.getvalue()


def read_jacobi(src: PathOrStream) -> JacobiMatrix:
    fh, close = _open_read(src)
    try:
        return parse_jacobi(fh.read())
    finally:
        if close:
            fh.close()


def write_jacobi(J: JacobiMatrix, dst: PathOrStream, fmt: str = "text") -> None:
    fh, close = _open_write(dst)
    try:
        fh.write(format_jacobi(J, fmt))
    finally:
        if close:
            fh.close()


def parse_atoms(text: str) -> DiscreteMeasure:
    if text.lstrip().startswith("{"):
        try:
            obj = json.loads(text)
            nodes = [float(v) for v in obj["nodes"]]
            weights = [float(v) for v in obj["weights"]]
            n = int(obj.get("size", len(nodes)))
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno) from None
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed atoms JSON: {exc}", 1) from None
        if len(nodes) != n or len(weights) != n:
            raise ParseError("size does not match the node/weight lists", 1)
        try:
            return DiscreteMeasure(nodes, weights)
        except DegenerateMeasure as exc:
            raise ParseError(str(exc), 1) from None
    lines = _content_lines(text)
    hline, n = _header(lines, "atoms")
    x = np.empty(n)
    w = np.empty(n)
    last = hline
    for i in range(n):
        try:
            line, row = next(lines)
        except StopIteration:
            raise ParseError(f"header announces {n} atoms, found {i}", last + 1) from None
        last = line
        parts = row.split()
        if len(parts) != 2:
            raise ParseError(f"expected '<node> <weight>', got {row!r}", line)
        x[i] = _parse_float(parts[0], line)
        w[i] = _parse_float(parts[1], line)
        if w[i] <= 0.0:
            raise ParseError("weights must be positive", line)
    extra = next(lines, None)
    if extra is not None:
        raise ParseError("trailing data after the last atom", extra[0])
    try:
        return DiscreteMeasure(x, w)
    except DegenerateMeasure as exc:
        raise ParseError(str(exc), hline) from None


def format_atoms(m: DiscreteMeasure, fmt: str = "text") -> str:
    if fmt == "json":
        obj = {
            "size": m.count,
            "nodes": [float(v) for v in m.nodes],
            "weights": [float(v) for v in m.weights],
        }
        return json.dumps(obj) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    rows = [f"atoms v1 {m.count}"]
    rows += [f"{_fmt(x)} {_fmt(w)}" for x, w in zip(m.nodes, m.weights)]
    return "\n".join(rows) + "\n"


def read_atoms(src: PathOrStream) -> DiscreteMeasure:
    fh, close = _open_read(src)
    try:
        return parse_atoms(fh.read())
    finally:
        if close:
            fh.close()


def write_atoms(m: DiscreteMeasure, dst: PathOrStream, fmt: str = "text") -> None:
    fh, close = _open_write(dst)
    try:
        fh.write(format_atoms(m, fmt))
    finally:
        if close:
            fh.close()


def read_measure(src: PathOrStream):
    """Read either a Jacobi matrix or an atom list, detected from the header."""
    fh, close = _open_read(src)
    try:
        text = fh.read()
    finally:
        if close:
            fh.close()
    head = text.lstrip()
    if head.startswith("{"):
        try:
            keys = json.loads(text).keys()
        except (json.JSONDecodeError, AttributeError):
            raise ParseError("malformed JSON", 1) from None
        return parse_atoms(text) if "nodes" in keys else parse_jacobi(text)
    if head.startswith("atoms"):
        return parse_atoms(text)
    return parse_jacobi(text)
