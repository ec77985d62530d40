"""Fixed-measurement model: Schmidt state, local unitaries, standard-basis readout.

Alice and Bob hold ``n`` qubits each. The initial state is a Schmidt sum
``sum_i (lambda_i / N') |a_i>|b_i>`` over computational basis states, they
apply ``U`` and ``V`` and both measure in the standard basis. Only the columns
``U[:, a_i]`` and ``V[:, b_i]`` enter the outcome distribution, so an instance
stores just those columns (optionally restricted to the rows where they can be
nonzero) and never forms the 2^(2n)-dimensional state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .correlations import MASS_TOL, JointDistribution

__all__ = ["ParadigmInstance", "born_distribution", "schmidt_qubit_count"]

# Up to this many Schmidt terms the amplitude is accumulated term by term with
# one ufunc per real operation, so structurally cancelling terms give exact
# zeros (no FMA or BLAS reassociation).
EXACT_TERM_LIMIT = 16


@dataclass(frozen=True)
class ParadigmInstance:
    n: int
    coefficients: np.ndarray
    normalization: float
    alice_columns: np.ndarray
    bob_columns: np.ndarray
    alice_vectors: np.ndarray
    bob_vectors: np.ndarray
    alice_rows: np.ndarray | None = None
    bob_rows: np.ndarray | None = None
    U: np.ndarray | None = field(default=None, repr=False, compare=False)
    V: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        size = 1 << self.n
        coeffs = np.asarray(self.coefficients, dtype=float).reshape(-1)
        object.__setattr__(self, "coefficients", coeffs)
        for name in ("alice_columns", "bob_columns"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.int64).reshape(-1))
        for side in ("alice", "bob"):
            vecs = np.asarray(getattr(self, f"{side}_vectors"), dtype=complex)
            if vecs.ndim == 1:
                vecs = vecs[:, None]
            object.__setattr__(self, f"{side}_vectors", vecs)
            rows = getattr(self, f"{side}_rows")
            rows = np.arange(size, dtype=np.int64) if rows is None else np.asarray(rows, dtype=np.int64)
            object.__setattr__(self, f"{side}_rows", rows)
            if vecs.shape != (rows.size, coeffs.size):
                raise ValueError(f"{side}_vectors has shape {vecs.shape}, expected "
                                 f"({rows.size}, {coeffs.size})")
            if rows.size and (rows.min() < 0 or rows.max() >= size or np.any(np.diff(rows) <= 0)):
                raise ValueError(f"{side}_rows must be increasing indices in [0, {size})")
        if self.alice_columns.size != coeffs.size or self.bob_columns.size != coeffs.size:
            raise ValueError("one alice and one bob column index per Schmidt term")
        for name in ("alice_columns", "bob_columns"):
            cols = getattr(self, name)
            if np.unique(cols).size != cols.size:
                raise ValueError(f"{name} must be distinct, got {cols.tolist()}")
            if cols.size and (cols.min() < 0 or cols.max() >= size):
                raise ValueError(f"{name} outside [0, {size})")
        if self.normalization <= 0:
            raise ValueError("normalization must be positive")
        mass = float(np.sum((coeffs / self.normalization) ** 2))
        if abs(mass - 1.0) > MASS_TOL:
            raise ValueError(f"Schmidt weights square-sum to {mass!r}, not 1")

    @property
    def terms(self) -> int:
        return int(self.coefficients.size)

    @property
    def amplitudes(self) -> np.ndarray:
        """Normalized Schmidt amplitudes ``lambda_i / N'``."""
        return self.coefficients / self.normalization

    def to_dict(self) -> dict:
        """JSON-ready form: Schmidt terms plus the referenced unitary columns."""
        return {
            "n": self.n,
            "coefficients": self.coefficients.tolist(),
            "normalization": float(self.normalization),
            "alice_columns": self.alice_columns.tolist(),
            "bob_columns": self.bob_columns.tolist(),
            "alice_rows": self.alice_rows.tolist(),
            "bob_rows": self.bob_rows.tolist(),
            "alice_vectors": {"real": self.alice_vectors.real.tolist(),
                              "imag": self.alice_vectors.imag.tolist()},
            "bob_vectors": {"real": self.bob_vectors.real.tolist(),
                            "imag": self.bob_vectors.imag.tolist()},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ParadigmInstance":
        def vectors(d):
            return np.array(d["real"], dtype=float) + 1j * np.array(d["imag"], dtype=float)

        return cls(
            n=int(data["n"]),
            coefficients=np.array(data["coefficients"], dtype=float),
            normalization=float(data["normalization"]),
            alice_columns=data["alice_columns"],
            bob_columns=data["bob_columns"],
            alice_vectors=vectors(data["alice_vectors"]),
            bob_vectors=vectors(data["bob_vectors"]),
            alice_rows=data.get("alice_rows"),
            bob_rows=data.get("bob_rows"),
        )


def _amplitudes(inst: ParadigmInstance) -> tuple[np.ndarray, np.ndarray]:
    coef = inst.amplitudes
    A, B = inst.alice_vectors, inst.bob_vectors
    if inst.terms <= EXACT_TERM_LIMIT:
        shape = (A.shape[0], B.shape[0])
        re = np.zeros(shape)
        im = np.zeros(shape)
        for i in range(inst.terms):
            ar, ai = A[:, i].real, A[:, i].imag
            br, bi = B[:, i].real, B[:, i].imag
            re += coef[i] * (np.multiply.outer(ar, br) - np.multiply.outer(ai, bi))
            im += coef[i] * (np.multiply.outer(ar, bi) + np.multiply.outer(ai, br))
        return re, im
    amp = (A * coef) @ B.T
    return amp.real, amp.imag


def born_distribution(inst: ParadigmInstance) -> JointDistribution:
    """Standard-basis outcome distribution of ``(U (x) V) phi_0``.

    ``P[x, y] = |sum_i (lambda_i/N') U[x, a_i] V[y, b_i]|^2``.
    """
    re, im = _amplitudes(inst)
    probs = re * re + im * im
    return JointDistribution(inst.n, probs, inst.alice_rows, inst.bob_rows)


def schmidt_qubit_count(inst_or_terms) -> int:
    """Qubits per side needed for the Schmidt state: ``ceil(log2(terms))``."""
    terms = inst_or_terms.terms if isinstance(inst_or_terms, ParadigmInstance) else int(inst_or_terms)
    if terms < 1:
        raise ValueError("at least one Schmidt term is required")
    return (terms - 1).bit_length()
