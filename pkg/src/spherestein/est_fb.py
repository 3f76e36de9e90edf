"""The moment-type estimator for the Fisher-Bingham family.

Solving the empirical Stein identity with the test functions f1(x) = x and
f2(x) = vech'(xx') leads to two coupled linear equations in mu and
vech'(A),

    M' vech'(A) + E mu = D,
    G' vech'(A) + L mu = H,

whose coefficient blocks are sample moments up to fourth order.  The fast
paths below assemble them from moment tensors; the generic path evaluates
the same quantities from the explicit derivative matrices of arbitrary
test functions and serves as an internal cross-check (the two agree to
machine precision).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    duplication_matrix,
    lower_pairs,
    solve_linear,
    spectral_norm,
    unvech_prime,
    vech_prime,
)
from .models import FisherBinghamParams, SmoothTestFunction, canonical_f1, canonical_f2

# estimates with larger norms are reported with a warning: far out on the
# likelihood plateau, very different (mu, A) give near-identical densities
IDENTIFICATION_NORM = 25.0


@dataclass
class FbSteinStatistics:
    """Sample means defining the estimating equations (trimmed to A[d,d] = 0).

    Shapes, with q = d(d+1)/2: m_prime (q-1, q-1), d_vec (q-1,),
    e_mat (q-1, d), g_prime (d, q-1), h_vec (d,), l_mat (d, d).
    """

    m_prime: np.ndarray
    d_vec: np.ndarray
    e_mat: np.ndarray
    g_prime: np.ndarray
    h_vec: np.ndarray
    l_mat: np.ndarray
    cond_m_prime: float | None = None
    cond_schur: float | None = None


@dataclass
class FbEstimate:
    mu_hat: np.ndarray
    A_hat: np.ndarray
    residual_norm: float
    cond_m_prime: float
    cond_schur: float
    warnings: list[str] = field(default_factory=list)
    estimator: str = "ST"


def _sample_matrix(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 2:
        raise ValueError("sample must be an n x d array with d >= 2")
    return x


def fb_statistics(x) -> FbSteinStatistics:
    """The six coefficient blocks for the canonical test-function pair.

    Uses the closed forms the canonical pair admits: H = (d-1) Xbar,
    L = I - S, D = 2d vech'(S) - 2 vech'(I), and moment-tensor assemblies
    for M, E, G; equal to the generic path to machine precision.
    """
    x = _sample_matrix(x)
    n, d = x.shape
    pairs = lower_pairs(d)
    q = len(pairs)

    xbar = x.mean(axis=0)
    scatter = x.T @ x / n
    third = np.einsum("ni,nj,nk->ijk", x, x, x) / n
    w = (x[:, :, None] * x[:, None, :]).reshape(n, d * d)
    fourth = (w.T @ w / n).reshape(d, d, d, d)

    h_vec = (d - 1.0) * xbar
    l_mat = np.eye(d) - scatter
    d_vec = 2.0 * d * vech_prime(scatter) - 2.0 * vech_prime(np.eye(d))

    # row blocks of B(x) = grad_f2(x) (I - xx'); row (i,j) is
    # x_j e_i' + x_i e_j' - 2 x_i x_j x', so means reduce to moment tensors
    e_mat = np.empty((q - 1, d))
    for k, (i, j) in enumerate(pairs[:-1]):
        e_mat[k] = -2.0 * third[i, j]
        e_mat[k, i] += xbar[j]
        e_mat[k, j] += xbar[i]

    m_full = np.empty((q - 1, q))
    for krow, (i, j) in enumerate(pairs[:-1]):
        for kcol, (k, l) in enumerate(pairs):
            # T4[(i,j), k, l] = mean[B_{(ij),k} x_l]
            t_kl = (scatter[j, l] if i == k else 0.0) \
                + (scatter[i, l] if j == k else 0.0) - 2.0 * fourth[i, j, k, l]
            if k == l:
                m_full[krow, kcol] = 2.0 * t_kl
            else:
                t_lk = (scatter[j, k] if i == l else 0.0) \
                    + (scatter[i, k] if j == l else 0.0) - 2.0 * fourth[i, j, l, k]
                m_full[krow, kcol] = 2.0 * (t_kl + t_lk)

    g_full = np.empty((d, q))
    for kcol, (k, l) in enumerate(pairs):
        for row in range(d):
            # mean[(I - xx')_{row,k} x_l]
            t_kl = (xbar[l] if row == k else 0.0) - third[row, k, l]
            if k == l:
                g_full[row, kcol] = 2.0 * t_kl
            else:
                t_lk = (xbar[k] if row == l else 0.0) - third[row, l, k]
                g_full[row, kcol] = 2.0 * (t_kl + t_lk)

    return FbSteinStatistics(
        m_prime=m_full[:, :-1],
        d_vec=d_vec,
        e_mat=e_mat,
        g_prime=g_full[:, :-1],
        h_vec=h_vec,
        l_mat=l_mat,
    )


def fb_statistics_generic(
    x, f1: SmoothTestFunction | None = None, f2: SmoothTestFunction | None = None
) -> FbSteinStatistics:
    """The same blocks from explicit derivative matrices, for arbitrary
    test-function pairs of output dimensions d and q - 1.

    A per-point loop; the reference path for cross-checks and research use.
    """
    x = _sample_matrix(x)
    n, d = x.shape
    q = d * (d + 1) // 2
    if f1 is None:
        f1 = canonical_f1(d)
    if f2 is None:
        f2 = canonical_f2(d)
    if f1.m != d or f2.m != q - 1:
        raise ValueError("test functions must have output dimensions d and q-1")

    dup = duplication_matrix(d)
    eye = np.eye(d)
    m_full = np.zeros((q - 1, q))
    d_vec = np.zeros(q - 1)
    e_mat = np.zeros((q - 1, d))
    g_full = np.zeros((d, q))
    h_vec = np.zeros(d)
    l_mat = np.zeros((d, d))
    for row in x:
        proj = eye - np.outer(row, row)
        xx = np.kron(row, row)
        j2 = f2.jacobian(row)
        b2 = j2 @ proj
        j1 = f1.jacobian(row)
        b1 = j1 @ proj
        m_full += 2.0 * np.kron(b2, row[None, :]) @ dup
        d_vec += (d - 1.0) * (j2 @ row) + f2.hessian_rows(row) @ xx - f2.laplacian(row)
        e_mat += b2
        g_full += 2.0 * np.kron(b1, row[None, :]) @ dup
        h_vec += (d - 1.0) * (j1 @ row) + f1.hessian_rows(row) @ xx - f1.laplacian(row)
        l_mat += b1
    return FbSteinStatistics(
        m_prime=m_full[:, :-1] / n,
        d_vec=d_vec / n,
        e_mat=e_mat / n,
        g_prime=g_full[:, :-1] / n,
        h_vec=h_vec / n,
        l_mat=l_mat / n,
    )


def fb_stein_fit(x, statistics: FbSteinStatistics | None = None) -> FbEstimate:
    """Solve the coupled equations for (mu, A); A comes back symmetric with
    A[d, d] = 0.

    Raises SingularSystem (tagged with the failing block) when M' or the
    Schur complement L - G'(M')^{-1}E is numerically singular.
    """
    x = _sample_matrix(x)
    d = x.shape[1]
    st = statistics if statistics is not None else fb_statistics(x)

    rhs = np.column_stack([st.e_mat, st.d_vec])
    solved, cond_m = solve_linear(st.m_prime, rhs, name="M'")
    w_e, w_d = solved[:, :d], solved[:, d]
    schur = st.l_mat - st.g_prime @ w_e
    mu_hat, cond_schur = solve_linear(
        schur, st.h_vec - st.g_prime @ w_d, name="Schur complement"
    )
    a_hat = unvech_prime(w_d - w_e @ mu_hat, d)
    st.cond_m_prime = cond_m
    st.cond_schur = cond_schur

    params = FisherBinghamParams(mu=mu_hat, A=a_hat)
    residual = fb_stein_residual(params, x, statistics=st)
    warnings = []
    mu_norm = float(np.linalg.norm(mu_hat))
    a_norm = spectral_norm(a_hat)
    if mu_norm > IDENTIFICATION_NORM or a_norm > IDENTIFICATION_NORM:
        warnings.append(
            "identification: parameter norms are large "
            f"(|mu| = {mu_norm:.1f}, |A| = {a_norm:.1f}); distinct parameters "
            "this far out can produce near-identical densities"
        )
    return FbEstimate(
        mu_hat=mu_hat,
        A_hat=a_hat,
        residual_norm=float(np.linalg.norm(residual)),
        cond_m_prime=cond_m,
        cond_schur=cond_schur,
        warnings=warnings,
    )


def fb_stein_residual(
    params: FisherBinghamParams, x, statistics: FbSteinStatistics | None = None
) -> np.ndarray:
    """Empirical mean of the Stein operator at the given parameters,
    concatenated over the canonical test-function pair (f1 block first).

    Zero (to solver accuracy) at the fitted parameters.
    """
    x = _sample_matrix(x)
    st = statistics if statistics is not None else fb_statistics(x)
    va = vech_prime(params.A)
    res_f1 = st.g_prime @ va + st.l_mat @ params.mu - st.h_vec
    res_f2 = st.m_prime @ va + st.e_mat @ params.mu - st.d_vec
    return np.concatenate([res_f1, res_f2])
