"""Dense complex linear algebra: norms, QR with positive diagonal, Hermitian
and unitary eigendecompositions, spectral diameter.

All values are immutable after construction and safe to share between
threads.  Eigensolvers are LAPACK-backed (via numpy); constructor checks
make the Hermitian/unitary assumptions explicit rather than trusted.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractError, DegenerateInputError, NumericalFailureError

TWO_PI = 2.0 * np.pi


class ComplexMatrix:
    """Dense n-by-n complex matrix with finiteness checked at construction."""

    __slots__ = ("entries", "dim")

    def __init__(self, entries):
        arr = np.array(entries, dtype=np.complex128)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ContractError(f"expected a square matrix, got shape {arr.shape}")
        if arr.shape[0] < 1:
            raise ContractError("matrix dimension must be at least 1")
        if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
            raise ContractError("matrix entries must be finite")
        arr.setflags(write=False)
        self.entries = arr
        self.dim = arr.shape[0]

    def __repr__(self):
        return f"ComplexMatrix(dim={self.dim})"


class HermitianView:
    """A ComplexMatrix certified Hermitian: ||A - A*|| <= 1e-12 ||A|| in HS norm."""

    __slots__ = ("inner",)

    def __init__(self, inner: ComplexMatrix):
        a = inner.entries
        defect = np.linalg.norm(a - a.conj().T)
        scale = np.linalg.norm(a)
        if defect > 1e-12 * max(scale, 1e-300):
            raise ContractError(
                f"matrix is not Hermitian: ||A - A*|| = {defect:.3e} vs ||A|| = {scale:.3e}"
            )
        self.inner = inner

    @property
    def entries(self) -> np.ndarray:
        return self.inner.entries

    @property
    def dim(self) -> int:
        return self.inner.dim

    def __repr__(self):
        return f"HermitianView(dim={self.dim})"


class UnitaryView:
    """A ComplexMatrix certified unitary: ||U U* - I|| <= 1e-10 sqrt(n)."""

    __slots__ = ("inner",)

    def __init__(self, inner: ComplexMatrix):
        u = inner.entries
        n = inner.dim
        defect = np.linalg.norm(u @ u.conj().T - np.eye(n))
        if defect > 1e-10 * np.sqrt(n):
            raise ContractError(
                f"matrix is not unitary: ||UU* - I|| = {defect:.3e} at n = {n}"
            )
        self.inner = inner

    @property
    def entries(self) -> np.ndarray:
        return self.inner.entries

    @property
    def dim(self) -> int:
        return self.inner.dim

    def __repr__(self):
        return f"UnitaryView(dim={self.dim})"


class SpectrumLine:
    """Real eigenvalues with multiplicity, sorted ascending."""

    __slots__ = ("values",)

    def __init__(self, values):
        vals = np.array(values, dtype=np.float64)
        if vals.ndim != 1 or vals.size < 1:
            raise ContractError("spectrum must be a nonempty 1-D array")
        if not np.all(np.isfinite(vals)):
            raise ContractError("eigenvalues must be finite")
        if np.any(np.diff(vals) < 0):
            vals = np.sort(vals)
        vals.setflags(write=False)
        self.values = vals

    def __len__(self):
        return self.values.size


class SpectrumCircle:
    """Eigenangles in [0, 2*pi), sorted ascending."""

    __slots__ = ("angles",)

    def __init__(self, angles):
        ang = np.array(angles, dtype=np.float64)
        if ang.ndim != 1 or ang.size < 1:
            raise ContractError("angle spectrum must be a nonempty 1-D array")
        if not np.all(np.isfinite(ang)):
            raise ContractError("angles must be finite")
        if np.any(ang < 0.0) or np.any(ang >= TWO_PI):
            raise ContractError("angles must lie in [0, 2*pi)")
        if np.any(np.diff(ang) < 0):
            ang = np.sort(ang)
        ang.setflags(write=False)
        self.angles = ang

    def __len__(self):
        return self.angles.size


def hermitian(entries) -> HermitianView:
    """Shorthand: build a HermitianView from raw entries."""
    return HermitianView(ComplexMatrix(entries))


def unitary(entries) -> UnitaryView:
    """Shorthand: build a UnitaryView from raw entries."""
    return UnitaryView(ComplexMatrix(entries))


def hs_norm(a) -> float:
    """Hilbert-Schmidt (Frobenius) norm."""
    arr = a.entries if hasattr(a, "entries") else np.asarray(a)
    return float(np.linalg.norm(arr))


def eig_hermitian(a: HermitianView, vectors: bool = False):
    """Eigenvalues of a Hermitian matrix, ascending; optionally eigenvectors.

    Returns a SpectrumLine, or (SpectrumLine, V) with columns of V the
    corresponding eigenvectors, satisfying ||A V - V diag(lam)|| small.
    """
    try:
        if vectors:
            vals, vecs = np.linalg.eigh(a.entries)
            return SpectrumLine(vals), vecs
        return SpectrumLine(np.linalg.eigvalsh(a.entries))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails
        raise NumericalFailureError(f"Hermitian eigensolver failed: {exc}") from exc


def op_norm(a: HermitianView) -> float:
    """Operator norm max_i |lambda_i| of a Hermitian matrix."""
    vals = eig_hermitian(a).values
    return float(max(abs(vals[0]), abs(vals[-1])))


def spectral_diameter(a: HermitianView) -> float:
    """lambda_max - lambda_min; equals twice the operator-norm distance to
    the scalar matrices."""
    vals = eig_hermitian(a).values
    return float(vals[-1] - vals[0])


def qr_positive(g: ComplexMatrix):
    """QR factorization with R's diagonal real and strictly positive.

    This normalization makes the factorization unique and is what turns the
    Q of a Gaussian matrix into a Haar-distributed unitary.
    """
    q, r = np.linalg.qr(g.entries)
    d = np.diagonal(r).copy()
    if np.any(np.abs(d) < 1e-300):
        raise DegenerateInputError("input is numerically rank-deficient")
    phases = d / np.abs(d)
    q = q * phases[np.newaxis, :]
    r = r / phases[:, np.newaxis]
    return UnitaryView(ComplexMatrix(q)), ComplexMatrix(r)


def det_lu(a: ComplexMatrix) -> complex:
    """Determinant via LU with partial pivoting (independent of the QR path,
    so determinant checks are genuine cross-checks)."""
    return complex(np.linalg.det(a.entries))


def eig_unitary_angles(u: UnitaryView) -> SpectrumCircle:
    """Eigenangles theta_j of a unitary matrix, with e^{i theta_j} its spectrum.

    Checks that all computed eigenvalues sit on the unit circle and that the
    angle product reproduces det(U).
    """
    n = u.dim
    try:
        lam = np.linalg.eigvals(u.entries)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericalFailureError(f"unitary eigensolver failed: {exc}") from exc
    radial = np.abs(np.abs(lam) - 1.0)
    if np.max(radial) > 1e-9 * np.sqrt(n):
        raise NumericalFailureError(
            f"computed eigenvalue off the unit circle by {np.max(radial):.3e}"
        )
    angles = np.angle(lam)
    angles = np.where(angles < 0.0, angles + TWO_PI, angles)
    # roundoff can park an angle exactly at 2*pi
    angles = np.where(angles >= TWO_PI, 0.0, angles)
    prod = np.exp(1j * np.sum(angles))
    det = det_lu(u.inner)
    if abs(prod - det) > 1e-8 * n:
        raise NumericalFailureError(
            f"angle product disagrees with det(U) by {abs(prod - det):.3e}"
        )
    return SpectrumCircle(np.sort(angles))
