"""Coefficient containers over Z_q and their arithmetic.

RingElement holds one element of R_q = Z_q[x]/(x^n + 1) (or, for the LWE
variant, a plain vector of Z_q^n). ModuleVector stacks k of them and
ModuleMatrix is either a k x k grid of ring elements or a plain n x n matrix.
"""
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence, Tuple

import numpy as np

from pqstealth.core.errors import DimensionError, ParameterError
from pqstealth.lattice import ntt as _ntt

# float64 represents every integer below 2**53 exactly
_FLOAT_EXACT = 1 << 53


def _as_reduced(values, q: int, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=np.int64)
    if arr.ndim != ndim:
        raise DimensionError(f"expected a {ndim}-d coefficient array, got shape {arr.shape}")
    if arr.size and (int(arr.min()) < 0 or int(arr.max()) >= q):
        raise ParameterError(f"coefficients must be reduced into [0, {q})")
    arr.setflags(write=False)
    return arr


def _uses_ntt(q: int, n: int) -> bool:
    return q == _ntt.Q and n == _ntt.N


def _frozen_ntt(coeffs: np.ndarray) -> np.ndarray:
    out = _ntt.ntt(coeffs)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class RingElement:
    coeffs: np.ndarray
    q: int

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _as_reduced(self.coeffs, self.q, 1))

    @classmethod
    def zero(cls, n: int, q: int) -> "RingElement":
        return cls(np.zeros(n, dtype=np.int64), q)

    @classmethod
    def monomial(cls, degree: int, n: int, q: int, coeff: int = 1) -> "RingElement":
        arr = np.zeros(n, dtype=np.int64)
        arr[degree] = coeff % q
        return cls(arr, q)

    @property
    def n(self) -> int:
        return int(self.coeffs.shape[0])

    def __len__(self) -> int:
        return self.n

    def __add__(self, other: "RingElement") -> "RingElement":
        return poly_add(self, other)

    def __sub__(self, other: "RingElement") -> "RingElement":
        return poly_sub(self, other)

    def __mul__(self, other: "RingElement") -> "RingElement":
        return poly_mul(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RingElement):
            return NotImplemented
        return self.q == other.q and np.array_equal(self.coeffs, other.coeffs)

    __hash__ = None

    def __repr__(self) -> str:
        return f"RingElement(n={self.n}, q={self.q})"


@dataclass(frozen=True, eq=False)
class ModuleVector:
    coeffs: np.ndarray  # shape (k, n)
    q: int

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _as_reduced(self.coeffs, self.q, 2))

    @classmethod
    def zero(cls, k: int, n: int, q: int) -> "ModuleVector":
        return cls(np.zeros((k, n), dtype=np.int64), q)

    @classmethod
    def from_elements(cls, elems: Sequence[RingElement]) -> "ModuleVector":
        if not elems:
            raise DimensionError("a module vector needs at least one element")
        q = elems[0].q
        if any(e.q != q or e.n != elems[0].n for e in elems):
            raise DimensionError("module vector elements disagree on n or q")
        return cls(np.stack([e.coeffs for e in elems]), q)

    @property
    def k(self) -> int:
        return int(self.coeffs.shape[0])

    @property
    def n(self) -> int:
        return int(self.coeffs.shape[1])

    @property
    def elems(self) -> Tuple[RingElement, ...]:
        return tuple(RingElement(row, self.q) for row in self.coeffs)

    @cached_property
    def ntt_form(self) -> np.ndarray:
        """Row-wise NTT of the coefficients, computed once per vector."""
        return _frozen_ntt(self.coeffs)

    def __len__(self) -> int:
        return self.k

    def __add__(self, other: "ModuleVector") -> "ModuleVector":
        return vec_add(self, other)

    def __sub__(self, other: "ModuleVector") -> "ModuleVector":
        return vec_sub(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ModuleVector):
            return NotImplemented
        return self.q == other.q and np.array_equal(self.coeffs, other.coeffs)

    __hash__ = None

    def __repr__(self) -> str:
        return f"ModuleVector(k={self.k}, n={self.n}, q={self.q})"


@dataclass(frozen=True, eq=False)
class ModuleMatrix:
    """Square public matrix.

    Structured matrices have shape (k, k, n) and act on ModuleVectors by
    ring multiplication. Plain matrices have shape (n, n) and act on each of
    the k columns of a ModuleVector independently.
    """
    data: np.ndarray
    q: int
    structured: bool = True

    def __post_init__(self):
        arr = _as_reduced(self.data, self.q, 3 if self.structured else 2)
        if arr.shape[0] != arr.shape[1]:
            raise DimensionError(f"matrix must be square, got shape {arr.shape}")
        object.__setattr__(self, "data", arr)

    @property
    def dim(self) -> int:
        return int(self.data.shape[0])

    def __getitem__(self, ij) -> RingElement:
        if not self.structured:
            raise DimensionError("plain matrices have no ring-element entries")
        i, j = ij
        return RingElement(self.data[i, j], self.q)

    @cached_property
    def ntt_form(self) -> np.ndarray:
        """Entry-wise NTT of a structured (k, k, 256) matrix, computed once per matrix."""
        return _frozen_ntt(self.data)

    def transpose(self) -> "ModuleMatrix":
        axes = (1, 0, 2) if self.structured else (1, 0)
        return ModuleMatrix(np.ascontiguousarray(self.data.transpose(axes)), self.q, self.structured)

    def __matmul__(self, vector: "ModuleVector") -> "ModuleVector":
        return matvec(self, vector)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ModuleMatrix):
            return NotImplemented
        return (self.q == other.q and self.structured == other.structured
                and np.array_equal(self.data, other.data))

    __hash__ = None


def _check_same(a, b):
    if a.q != b.q:
        raise DimensionError(f"moduli differ: {a.q} vs {b.q}")
    if a.coeffs.shape != b.coeffs.shape:
        raise DimensionError(f"shapes differ: {a.coeffs.shape} vs {b.coeffs.shape}")


def negacyclic_schoolbook(a: np.ndarray, b: np.ndarray, q: int) -> np.ndarray:
    """Product in Z_q[x]/(x^n + 1) by full convolution and folding (x^n = -1)."""
    n = a.shape[-1]
    full = np.convolve(a, b)
    out = full[:n].copy()
    out[:n - 1] -= full[n:]
    return out % q


def poly_mul_schoolbook(a: RingElement, b: RingElement) -> RingElement:
    _check_same(a, b)
    return RingElement(negacyclic_schoolbook(a.coeffs, b.coeffs, a.q), a.q)


def poly_add(a: RingElement, b: RingElement) -> RingElement:
    _check_same(a, b)
    return RingElement((a.coeffs + b.coeffs) % a.q, a.q)


def poly_sub(a: RingElement, b: RingElement) -> RingElement:
    _check_same(a, b)
    return RingElement((a.coeffs - b.coeffs) % a.q, a.q)


def poly_mul(a: RingElement, b: RingElement) -> RingElement:
    _check_same(a, b)
    if _uses_ntt(a.q, a.n):
        prod = _ntt.ntt_inverse(_ntt.basemul(_ntt.ntt(a.coeffs), _ntt.ntt(b.coeffs)))
        return RingElement(prod, a.q)
    return poly_mul_schoolbook(a, b)


def vec_add(a: ModuleVector, b: ModuleVector) -> ModuleVector:
    _check_same(a, b)
    return ModuleVector((a.coeffs + b.coeffs) % a.q, a.q)


def vec_sub(a: ModuleVector, b: ModuleVector) -> ModuleVector:
    _check_same(a, b)
    return ModuleVector((a.coeffs - b.coeffs) % a.q, a.q)


def exact_matmul(x: np.ndarray, y: np.ndarray, q: int) -> np.ndarray:
    """x @ y mod q for non-negative integer matrices with entries below q."""
    inner = x.shape[-1]
    if inner * (q - 1) ** 2 < _FLOAT_EXACT:
        prod = np.asarray(x, dtype=np.float64) @ np.asarray(y, dtype=np.float64)
        return prod.astype(np.int64) % q
    return (np.asarray(x, dtype=np.int64) @ np.asarray(y, dtype=np.int64)) % q


def _structured_products(matrix: ModuleMatrix, vector: ModuleVector, transpose: bool) -> np.ndarray:
    """out[i] = sum_j mat[i, j] * vec[j] in R_q, with mat = A or its transpose."""
    q, k, n = vector.q, vector.k, vector.n
    if _uses_ntt(q, n):
        mat_hat = matrix.ntt_form.transpose(1, 0, 2) if transpose else matrix.ntt_form
        prods = _ntt.basemul(mat_hat, vector.ntt_form[np.newaxis, :, :])
        return _ntt.ntt_inverse(prods.sum(axis=1) % q)
    mat = matrix.data.transpose(1, 0, 2) if transpose else matrix.data
    vec = vector.coeffs
    out = np.zeros((mat.shape[0], n), dtype=np.int64)
    for i in range(mat.shape[0]):
        for j in range(k):
            out[i] += negacyclic_schoolbook(mat[i, j], vec[j], q)
    return out % q


def matvec(matrix: ModuleMatrix, vector: ModuleVector, transpose: bool = False) -> ModuleVector:
    """A·v (or Aᵀ·v) for either matrix flavour."""
    if matrix.q != vector.q:
        raise DimensionError(f"moduli differ: {matrix.q} vs {vector.q}")
    q = matrix.q
    if matrix.structured:
        if matrix.dim != vector.k or matrix.data.shape[2] != vector.n:
            raise DimensionError(f"cannot multiply {matrix.data.shape} matrix by {vector.coeffs.shape} vector")
        return ModuleVector(_structured_products(matrix, vector, transpose), q)
    if matrix.dim != vector.n:
        raise DimensionError(f"cannot multiply {matrix.data.shape} matrix by {vector.coeffs.shape} columns")
    # columns are stored as rows: (A c)^T = c^T A^T
    other = matrix.data if transpose else matrix.data.T
    return ModuleVector(exact_matmul(vector.coeffs, other, q), q)


def inner(a: ModuleVector, b: ModuleVector, structured: bool = True) -> RingElement:
    """aᵀ·b in R_q, or for plain vectors the k x k Gram block <a_i, b_j> flattened row-major."""
    if a.q != b.q or a.n != b.n:
        raise DimensionError(f"cannot pair {a.coeffs.shape} with {b.coeffs.shape}")
    q = a.q
    if not structured:
        return RingElement(exact_matmul(a.coeffs, b.coeffs.T, q).reshape(-1), q)
    if a.k != b.k:
        raise DimensionError(f"ranks differ: {a.k} vs {b.k}")
    if _uses_ntt(q, a.n):
        prods = _ntt.basemul(a.ntt_form, b.ntt_form)
        return RingElement(_ntt.ntt_inverse(prods.sum(axis=0) % q), q)
    acc = np.zeros(a.n, dtype=np.int64)
    for x, y in zip(a.coeffs, b.coeffs):
        acc += negacyclic_schoolbook(x, y, q)
    return RingElement(acc % q, q)


def stack(elems: Iterable[RingElement]) -> ModuleVector:
    return ModuleVector.from_elements(list(elems))
