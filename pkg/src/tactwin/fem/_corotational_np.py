"""Vectorized corotational tet kernel (reference implementation).

Per element: deformation gradient F = Ds Bm, rotation R from the polar
factor of F (batched SVD), internal force R Ke (R^T x - x0) and warped
stiffness block R Ke R^T. The compiled kernel mirrors this module exactly;
parity between the two is covered by tests.
"""

from __future__ import annotations

import numpy as np


def lame_parameters(youngs, poisson):
    lam = youngs * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson))
    mu = youngs / (2.0 * (1.0 + poisson))
    return lam, mu


def elasticity_matrix(youngs, poisson):
    """6x6 isotropic Hooke matrix, engineering shear strains."""
    lam, mu = lame_parameters(youngs, poisson)
    d = np.zeros((6, 6))
    d[:3, :3] = lam
    d[np.arange(3), np.arange(3)] += 2.0 * mu
    d[np.arange(3, 6), np.arange(3, 6)] = mu
    return d


def precompute(vertices0, tets, youngs, poisson):
    """Rest-state element data: (Bm, Ke, volumes).

    Bm is the inverse rest edge matrix (m,3,3); its rows are the gradients
    of the last three barycentric coordinates. Ke is the 12x12 linear
    element stiffness V * B^T D B.
    """
    p = vertices0[tets]
    dm = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0], p[:, 3] - p[:, 0]], axis=2)
    vol = np.linalg.det(dm) / 6.0
    bm = np.linalg.inv(dm)

    grads = np.empty((len(tets), 4, 3))
    grads[:, 1:] = bm
    grads[:, 0] = -bm.sum(axis=1)

    m = len(tets)
    b = np.zeros((m, 6, 12))
    gx, gy, gz = grads[..., 0], grads[..., 1], grads[..., 2]
    cols = 3 * np.arange(4)
    b[:, 0, cols + 0] = gx
    b[:, 1, cols + 1] = gy
    b[:, 2, cols + 2] = gz
    b[:, 3, cols + 0] = gy
    b[:, 3, cols + 1] = gx
    b[:, 4, cols + 1] = gz
    b[:, 4, cols + 2] = gy
    b[:, 5, cols + 0] = gz
    b[:, 5, cols + 2] = gx

    d = elasticity_matrix(youngs, poisson)
    ke = np.einsum("mai,ab,mbj->mij", b, d, b, optimize=True) * vol[:, None, None]
    return bm, ke, vol


def polar_rotations(f):
    """Rotation factors of a batch of deformation gradients via SVD."""
    u, _, vt = np.linalg.svd(f)
    r = u @ vt
    neg = np.linalg.det(r) < 0
    if np.any(neg):
        u = u.copy()
        u[neg, :, 2] *= -1.0
        r = u @ vt
    return r


def forces_and_blocks(positions, tets, bm, ke, rest, want_blocks=True):
    """Internal nodal forces, warped stiffness blocks, and min det(F).

    Returns (f_int (n,3), kblocks (m,12,12), min_detf). The caller treats
    min_detf <= 0 as an inverted element. Pass want_blocks=False to skip
    the stiffness congruence (line searches only need forces).
    """
    p = positions[tets]
    ds = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0], p[:, 3] - p[:, 0]], axis=2)
    f = ds @ bm
    detf = np.linalg.det(f)
    r = polar_rotations(f)

    # back-rotated displacement per node, as a 12-vector
    local = np.einsum("mji,mkj->mki", r, p) - rest[tets]
    fl = np.einsum("mab,mb->ma", ke, local.reshape(len(tets), 12))
    fe = np.einsum("mij,mkj->mki", r, fl.reshape(len(tets), 4, 3))

    n = len(positions)
    f_int = np.zeros((n, 3))
    np.add.at(f_int, tets.ravel(), fe.reshape(-1, 3))

    if not want_blocks:
        return f_int, None, float(detf.min())
    ke4 = ke.reshape(len(tets), 4, 3, 4, 3)
    tmp = np.einsum("mij,majbk->maibk", r, ke4, optimize=True)
    kblocks = np.einsum("maibk,mlk->maibl", tmp, r, optimize=True).reshape(len(tets), 12, 12)
    return f_int, kblocks, float(detf.min())
