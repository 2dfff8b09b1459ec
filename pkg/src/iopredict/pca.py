"""Principal component analysis backed by a cyclic Jacobi eigensolver."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def jacobi_eigh(A, tol: float = 1e-12, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decompose a symmetric matrix by cyclic Jacobi rotations.

    Sweeps until the off-diagonal Frobenius norm falls below ``tol`` times
    the matrix norm. Returns ``(eigenvalues, eigenvectors)`` with
    eigenvectors in the columns, unsorted.
    """
    A = np.array(A, dtype=np.float64, copy=True)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("jacobi_eigh needs a square matrix")
    if not np.allclose(A, A.T, rtol=0, atol=1e-12 * max(1.0, np.abs(A).max())):
        raise ValueError("jacobi_eigh needs a symmetric matrix")
    A = 0.5 * (A + A.T)
    d = A.shape[0]
    V = np.eye(d)
    scale = np.linalg.norm(A)
    if scale == 0.0:
        return np.zeros(d), V
    mask = ~np.eye(d, dtype=bool)
    for _ in range(max_sweeps):
        # summed directly: sum(A**2) - sum(diag**2) cancels to ~sqrt(eps) * scale
        off = np.sqrt(np.sum(A[mask] ** 2))
        if off <= tol * scale:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                # smaller root of t^2 + 2 t theta - 1 = 0 keeps the rotation angle <= pi/4
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                Ap = A[:, p].copy()
                Aq = A[:, q].copy()
                A[:, p] = c * Ap - s * Aq
                A[:, q] = s * Ap + c * Aq
                Ap = A[p, :].copy()
                Aq = A[q, :].copy()
                A[p, :] = c * Ap - s * Aq
                A[q, :] = s * Ap + c * Aq
                A[p, q] = A[q, p] = 0.0
                Vp = V[:, p].copy()
                V[:, p] = c * Vp - s * V[:, q]
                V[:, q] = s * Vp + c * V[:, q]
    else:
        raise RuntimeError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    return np.diag(A).copy(), V


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray
    components: np.ndarray
    eigenvalues: np.ndarray
    explained_variance_ratio: np.ndarray
    n_samples: int

    @property
    def n_components(self) -> int:
        return self.components.shape[0]

    def cumulative_ratio(self) -> np.ndarray:
        return np.cumsum(self.explained_variance_ratio)

    def to_dict(self) -> dict:
        return {
            "mean": self.mean.tolist(),
            "components": self.components.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "explained_variance_ratio": self.explained_variance_ratio.tolist(),
            "n_samples": self.n_samples,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PcaModel":
        return cls(
            mean=np.asarray(d["mean"], dtype=np.float64),
            components=np.asarray(d["components"], dtype=np.float64),
            eigenvalues=np.asarray(d["eigenvalues"], dtype=np.float64),
            explained_variance_ratio=np.asarray(d["explained_variance_ratio"], dtype=np.float64),
            n_samples=int(d["n_samples"]),
        )

    def scree_rows(self) -> list[tuple[int, float, float, float]]:
        """(component number, eigenvalue, ratio, cumulative ratio) per component."""
        cum = self.cumulative_ratio()
        return [(i + 1, float(ev), float(r), float(c))
                for i, (ev, r, c) in enumerate(zip(self.eigenvalues, self.explained_variance_ratio, cum))]


def fit_pca(features) -> PcaModel:
    """Fit PCA on an (n, d) matrix using the 1/(n-1) sample covariance.

    Each component is sign-flipped so its largest-magnitude entry is positive.
    """
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("fit_pca expects a 2-D matrix")
    n, d = X.shape
    if n < 2 or d < 1:
        raise ValueError(f"fit_pca needs n >= 2 and d >= 1, got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("fit_pca input contains non-finite values")
    mean = X.mean(axis=0)
    Xc = X - mean
    cov = Xc.T @ Xc / (n - 1)
    vals, vecs = jacobi_eigh(cov)
    vals = np.clip(vals, 0.0, None)
    total = vals.sum()
    if total <= 0.0:
        raise ValueError("fit_pca input has rank 0 (all rows identical)")
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    comps = vecs[:, order].T.copy()
    for i, row in enumerate(comps):
        j = int(np.argmax(np.abs(row)))
        if row[j] < 0:
            comps[i] = -row
    return PcaModel(mean, comps, vals, vals / total, n)


def components_for_threshold(model: PcaModel, threshold: float) -> int:
    """Smallest k whose cumulative explained-variance ratio reaches ``threshold``."""
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must lie in (0, 1], got {threshold}")
    return ratios_for_threshold(model.explained_variance_ratio, threshold)


def ratios_for_threshold(ratios, threshold: float) -> int:
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must lie in (0, 1], got {threshold}")
    cum = np.cumsum(np.asarray(ratios, dtype=np.float64))
    # 1e-12 absorbs summation error so that threshold 1.0 is reachable
    hits = np.nonzero(cum >= threshold - 1e-12)[0]
    return int(hits[0]) + 1 if hits.size else len(cum)


def project(model: PcaModel, features, k: int | None = None) -> np.ndarray:
    X = np.atleast_2d(np.asarray(features, dtype=np.float64))
    d = model.mean.shape[0]
    if X.shape[1] != d:
        raise ValueError(f"expected {d} columns, got {X.shape[1]}")
    k = model.n_components if k is None else k
    if not 1 <= k <= model.n_components:
        raise ValueError(f"k must lie in [1, {model.n_components}], got {k}")
    return (X - model.mean) @ model.components[:k].T


def reconstruct(model: PcaModel, scores) -> np.ndarray:
    Z = np.atleast_2d(np.asarray(scores, dtype=np.float64))
    k = Z.shape[1]
    if k > model.n_components:
        raise ValueError(f"scores have {k} columns but the model has {model.n_components} components")
    return Z @ model.components[:k] + model.mean
