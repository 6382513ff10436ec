"""Independent minimiser of the weighted GCCA objective

    min_G  sum_i w_i || G - X_i U_i ||_F^2   s.t.  G'G = I,

with U_i eliminated by least squares, so the objective becomes
sum_i w_i (k - tr(G' P_i G)) with P_i the projector onto col(X_i). Solved by
projected gradient ascent on tr(G' M G) with a QR retraction; no
eigendecomposition is used. Views are deterministic closed-form matrices
that the C++ test rebuilds exactly."""
import numpy as np


def view(rows, cols, phase):
    i = np.arange(rows)[:, None]
    j = np.arange(cols)[None, :]
    return np.sin(0.37 * i * (j + 1) + phase) + 0.1 * np.cos(1.3 * i + 0.5 * j * j + phase)


def objective(views, weights, G):
    total = 0.0
    for X, w in zip(views, weights):
        U, *_ = np.linalg.lstsq(X, G, rcond=None)
        total += w * np.linalg.norm(G - X @ U) ** 2
    return total


def projected_gradient(views, weights, k, steps=20000, seed=0):
    n = views[0].shape[0]
    M = sum(w * X @ np.linalg.pinv(X) for X, w in zip(views, weights))
    G, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((n, k)))
    step = 0.5 / max(1e-12, sum(weights))
    for _ in range(steps):
        G, _ = np.linalg.qr(G + step * 2 * M @ G)
    return G


if __name__ == "__main__":
    views = [view(30, 5, 0.0), view(30, 7, 1.0)]
    weights = [0.25, 0.5]
    G = projected_gradient(views, weights, 3)
    print(f"objective {objective(views, weights, G):.12g}")
    print(f"orthonormality {np.abs(G.T @ G - np.eye(3)).max():.3g}")
