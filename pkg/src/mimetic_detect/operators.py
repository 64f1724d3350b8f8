"""High-order gradient operators and quadrature weights on staggered 2D grids.

Scalar fields live at cell centers plus the two physical boundary nodes of
each axis (the "extended centers": 0, 0.5, 1.5, ..., m-1.5, m-0.5, m), while
gradient values live at the m+1 integer face positions.  Grid spacing is
fixed at 1; callers that need another spacing can rescale operator output.

The 1D gradient is an (m+1) x (m+2) banded matrix: one symmetric interior
stencil of width k, plus one-sided closures of width k+1 in the first and
last k/2 rows that keep the same polynomial order of accuracy as the
interior.  2D operators are Kronecker assemblies of the 1D factors over an
x-fastest vectorization (extended index = i + j*(m+2)).

Each gradient comes with a positive diagonal quadrature vector of matching
order so that sum(P * (G u)**2) behaves as a discrete H1 seminorm.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

SUPPORTED_ORDERS = (2, 4, 6, 8)

# Face-quadrature corrections for the first/last k faces of an axis.  The
# interior weight is 1, so each vector below must be positive, and must sum
# to k - 1/2 so the whole axis integrates constants exactly (sum = m).
#
# k=2 and k=4 are the classical staggered-grid values; k=6 and k=8 solve the
# end-correction moment system
#     sum_i c_i * i**j = b_j,  c_i = w_i - 1,  j = 0..k-1,
# with b_0 = -1/2, b_j = B_{j+1}/(j+1) for odd j (Bernoulli numbers) and 0
# for even j >= 2, which makes the face quadrature order k (exact through
# polynomial degree k-1, like the gradient it is paired with).
_BOUNDARY_WEIGHTS = {
    2: (3 / 8, 9 / 8),
    4: (407 / 1152, 473 / 384, 343 / 384, 1177 / 1152),
    6: (),  # filled below by _solve_boundary_weights
    8: (),
}


class GridSizeError(ValueError):
    """Raised when a grid is too small for the requested order."""


def _check_order_and_size(k: int, m: int) -> None:
    if k not in SUPPORTED_ORDERS:
        raise ValueError(f"unsupported order k={k}; expected one of {SUPPORTED_ORDERS}")
    if m < 2 * k:
        raise GridSizeError(f"grid too small for order: need m >= {2 * k}, got m={m}")


def extended_positions(m: int) -> np.ndarray:
    """Positions of the m+2 extended centers: 0, 0.5, 1.5, ..., m-0.5, m."""
    pos = np.empty(m + 2)
    pos[0] = 0.0
    pos[1:-1] = np.arange(m) + 0.5
    pos[-1] = float(m)
    return pos


def face_positions(m: int) -> np.ndarray:
    """Positions of the m+1 faces: 0, 1, ..., m."""
    return np.arange(m + 1, dtype=float)


def one_sided_stencil(nodes, target: float, degree: int) -> np.ndarray:
    """Differentiation weights at `target` from values at `nodes`.

    Solves the (degree+1) x (degree+1) Vandermonde system
    sum_i c_i (x_i - t)**p = [p == 1] for p = 0..degree, so the returned
    coefficients recover p'(target) exactly for every polynomial p of
    degree <= `degree`.
    """
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 1 or nodes.size != degree + 1:
        raise ValueError(f"need exactly degree+1={degree + 1} nodes, got {nodes.size}")
    offsets = nodes - target
    V = np.vander(offsets, increasing=True).T  # V[p, i] = offsets[i]**p
    b = np.zeros(degree + 1)
    if degree >= 1:
        b[1] = 1.0
    try:
        return np.linalg.solve(V, b)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"singular stencil system (duplicate nodes?): {nodes}") from exc


@dataclass(frozen=True)
class Grad1D:
    """Order-k staggered gradient on an m-cell axis: (m+1) x (m+2), banded."""

    k: int
    m: int
    matrix: sparse.csr_array = field(repr=False)

    @property
    def shape(self):
        return self.matrix.shape


@dataclass(frozen=True)
class Grad2D:
    """Order-k staggered gradient on an m x n cell grid.

    Rows are the x-face block (n rows of m+1 faces) followed by the y-face
    block (n+1 rows of m faces); columns index the (m+2)(n+2) extended
    centers in x-fastest order.
    """

    k: int
    m: int
    n: int
    matrix: sparse.csr_array = field(repr=False)

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def n_x_faces(self) -> int:
        return self.n * (self.m + 1)

    @property
    def n_y_faces(self) -> int:
        return self.m * (self.n + 1)

    def split_faces(self, faces: np.ndarray):
        """Split a stacked face vector into (x_block, y_block) 2D views.

        x_block has shape (n, m+1): row j holds the x-face values of cell
        row j.  y_block has shape (n+1, m): row f holds y-face level f.
        """
        nx = self.n_x_faces
        return (
            faces[:nx].reshape(self.n, self.m + 1),
            faces[nx:].reshape(self.n + 1, self.m),
        )


@dataclass(frozen=True)
class Weights1D:
    """Positive diagonal face quadrature paired with Grad1D (length m+1)."""

    k: int
    m: int
    values: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class Weights2D:
    """Diagonal face quadrature paired with Grad2D, stored as one vector
    aligned with the operator's x-block-then-y-block row layout."""

    k: int
    m: int
    n: int
    values: np.ndarray = field(repr=False)


def build_grad_1d(k: int, m: int) -> Grad1D:
    """Order-k mimetic gradient on an m-cell axis with unit spacing."""
    _check_order_and_size(k, m)
    half = k // 2
    ext = extended_positions(m)

    rows, cols, vals = [], [], []

    # Interior faces k/2 .. m-k/2 share one width-k stencil over the centers
    # symmetric about the face (degree k-1 exactness; symmetry gives k).
    centers = np.arange(k) - (k - 1) / 2.0  # offsets of the k nearest centers
    interior = one_sided_stencil(centers, 0.0, k - 1)
    for f in range(half, m - half + 1):
        first_col = f - half + 1  # column of center f - k/2 + 0.5
        rows.extend([f] * k)
        cols.extend(range(first_col, first_col + k))
        vals.extend(interior)

    # Boundary closures: face f < k/2 uses the boundary node plus the first
    # k centers (the k+1 nearest extended nodes), at full degree k.
    closure = np.empty((half, k + 1))
    for f in range(half):
        closure[f] = one_sided_stencil(ext[: k + 1], float(f), k)
        rows.extend([f] * (k + 1))
        cols.extend(range(k + 1))
        vals.extend(closure[f])

    # Mirror image: last k/2 rows are the reversed, negated closures.
    for f in range(half):
        rows.extend([m - f] * (k + 1))
        cols.extend(range(m + 1, m - k, -1))
        vals.extend(-closure[f])

    mat = sparse.csr_array(
        (np.asarray(vals), (np.asarray(rows), np.asarray(cols))),
        shape=(m + 1, m + 2),
    )
    return Grad1D(k=k, m=m, matrix=mat)


def _solve_boundary_weights(k: int) -> tuple:
    """End-correction weights for orders without a frozen table entry."""
    from fractions import Fraction

    # b_j for j = 0..k-1: -1/2, then Bernoulli B_{j+1}/(j+1) at odd j.
    bernoulli = {2: Fraction(1, 6), 4: Fraction(-1, 30), 6: Fraction(1, 42),
                 8: Fraction(-1, 30)}
    b = [Fraction(-1, 2)]
    for j in range(1, k):
        b.append(bernoulli[j + 1] / (j + 1) if j % 2 == 1 else Fraction(0))

    # Solve sum_i c_i i**j = b_j exactly over the rationals.
    n = k
    A = [[Fraction(i) ** j for i in range(n)] for j in range(n)]
    c = _fraction_solve(A, b)
    w = tuple(float(ci + 1) for ci in c)
    if min(w) <= 0:
        raise AssertionError(f"derived k={k} boundary weights not positive: {w}")
    return w


def _fraction_solve(A, b):
    """Gaussian elimination over Fractions (small systems only)."""
    n = len(b)
    M = [row[:] + [b[i]] for i, row in enumerate(A)]
    for col in range(n):
        pivot = next(r for r in range(col, n) if M[r][col] != 0)
        M[col], M[pivot] = M[pivot], M[col]
        inv = 1 / M[col][col]
        M[col] = [v * inv for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                factor = M[r][col]
                M[r] = [vr - factor * vc for vr, vc in zip(M[r], M[col])]
    return [M[i][n] for i in range(n)]


for _k in (6, 8):
    _BOUNDARY_WEIGHTS[_k] = _solve_boundary_weights(_k)
del _k


def build_weights_1d(k: int, m: int) -> Weights1D:
    """Diagonal face-quadrature weights paired with build_grad_1d."""
    _check_order_and_size(k, m)
    w = np.ones(m + 1)
    side = np.asarray(_BOUNDARY_WEIGHTS[k])
    w[:k] = side
    w[m + 1 - k:] = side[::-1]
    return Weights1D(k=k, m=m, values=w)


def _interior_selector(p: int) -> sparse.csr_array:
    """p x (p+2) matrix extracting the p cell centers of an extended axis."""
    return sparse.csr_array(
        (np.ones(p), (np.arange(p), np.arange(1, p + 1))), shape=(p, p + 2)
    )


def build_grad_2d(k: int, m: int, n: int) -> Grad2D:
    """Order-k gradient on an m (width) x n (height) cell grid.

    G = [Gx; Gy] with Gx = E_n (x) G1d_m and Gy = G1d_n (x) E_m, where E_p
    selects the interior centers of an extended axis and (x) is the
    Kronecker product over the x-fastest vectorization.
    """
    gx_1d = build_grad_1d(k, m)
    gy_1d = build_grad_1d(k, n)
    Gx = sparse.kron(_interior_selector(n), gx_1d.matrix)
    Gy = sparse.kron(gy_1d.matrix, _interior_selector(m))
    mat = sparse.vstack([Gx, Gy], format="csr")
    return Grad2D(k=k, m=m, n=n, matrix=sparse.csr_array(mat))


def build_weights_2d(k: int, m: int, n: int) -> Weights2D:
    """Diagonal quadrature aligned with build_grad_2d's row blocks.

    x-face block: I_n (x) P1d_m; y-face block: P1d_n (x) I_m.
    """
    px = build_weights_1d(k, m).values
    py = build_weights_1d(k, n).values
    values = np.concatenate([np.tile(px, n), np.repeat(py, m)])
    return Weights2D(k=k, m=m, n=n, values=values)


def apply_operator(op, field_values: np.ndarray) -> np.ndarray:
    """Sparse mat-vec from an extended-center field to stacked face values."""
    field_values = np.asarray(field_values, dtype=float)
    n_rows, n_cols = op.matrix.shape
    if field_values.ndim != 1 or field_values.size != n_cols:
        raise ValueError(
            f"field length {field_values.size} does not match operator "
            f"columns {n_cols}"
        )
    return op.matrix @ field_values


def dump_coo(op, stream) -> None:
    """Write an operator as 'row col value' lines, 17 significant digits."""
    coo = op.matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
        stream.write(f"{r} {c} {v:.17g}\n")
