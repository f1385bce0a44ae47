"""Dense state-vector engine for finite occupation-number Hilbert spaces.

A :class:`ModeLayout` declares an ordered collection of bosonic modes, each
with a finite occupation cutoff, followed by an ordered collection of
qutrits.  Basis indexing is row-major over that order (first declared site
varies slowest).  A mode with cutoff ``c`` contributes a digit in
``0..c``; a qutrit contributes a digit in ``0..2`` storing spin ``s`` as
``s + 1`` for ``s`` in ``{-1, 0, +1}``.  This bijection is part of the
public contract: serialized states are portable between processes as long
as the layout travels with them.

All operations are value-semantic: they take states in and return new
states, so states can be handed freely between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .errors import (
    BasisError,
    CutoffError,
    DegenerateStateError,
    EntangledStateError,
    IncompleteBasisError,
    InvariantViolation,
    LayoutError,
)

#: Hard ceiling on total Hilbert-space dimension (amplitude count).
DIM_LIMIT = 2**24

#: Tolerance tiers: algebraic identities, orthonormality, eigenvalue recovery.
NORM_TOL = 1e-12
ORTHO_TOL = 1e-10
RESIDUAL_TOL = 1e-9

SERIAL_INDEX_ORDER = "row-major"

SPIN_VALUES = (-1, 0, 1)


@dataclass(frozen=True)
class ModeLayout:
    """Subsystem structure: bosonic modes (label, cutoff) then qutrit labels."""

    bosonic_modes: tuple[tuple[str, int], ...]
    qutrits: tuple[str, ...] = ()
    dim_limit: int = DIM_LIMIT

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "bosonic_modes",
            tuple((str(label), int(cutoff)) for label, cutoff in self.bosonic_modes),
        )
        object.__setattr__(self, "qutrits", tuple(str(q) for q in self.qutrits))
        labels = [label for label, _ in self.bosonic_modes] + list(self.qutrits)
        if not labels:
            raise LayoutError("layout must declare at least one site")
        if len(set(labels)) != len(labels):
            raise LayoutError(f"duplicate site labels in {labels}")
        for label, cutoff in self.bosonic_modes:
            if cutoff < 0:
                raise CutoffError(f"mode {label!r} has negative cutoff {cutoff}")
        if self.dim > self.dim_limit:
            raise CutoffError(
                f"Hilbert dimension {self.dim} exceeds limit {self.dim_limit}"
            )

    @cached_property
    def site_labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.bosonic_modes) + self.qutrits

    @cached_property
    def shape(self) -> tuple[int, ...]:
        return tuple(c + 1 for _, c in self.bosonic_modes) + (3,) * len(self.qutrits)

    @cached_property
    def dim(self) -> int:
        return int(math.prod(self.shape))

    @cached_property
    def _axis(self) -> dict[str, int]:
        return {label: i for i, label in enumerate(self.site_labels)}

    @cached_property
    def _cutoffs(self) -> dict[str, int]:
        return dict(self.bosonic_modes)

    def is_mode(self, label: str) -> bool:
        return label in self._cutoffs

    def is_qutrit(self, label: str) -> bool:
        return label in self.qutrits

    def axis_of(self, label: str) -> int:
        try:
            return self._axis[label]
        except KeyError:
            raise LayoutError(f"unknown site {label!r}") from None

    def cutoff(self, label: str) -> int:
        if not self.is_mode(label):
            raise LayoutError(f"{label!r} is not a bosonic mode")
        return self._cutoffs[label]

    def index_of(self, b: "BasisState") -> int:
        """Row-major index of a basis state (the documented bijection)."""
        if len(b.occupations) != len(self.bosonic_modes) or len(b.spins) != len(
            self.qutrits
        ):
            raise LayoutError(
                f"basis state shape {(len(b.occupations), len(b.spins))} does not "
                f"match layout {(len(self.bosonic_modes), len(self.qutrits))}"
            )
        digits = []
        for (label, cutoff), n in zip(self.bosonic_modes, b.occupations):
            if not 0 <= n <= cutoff:
                raise CutoffError(
                    f"occupation {n} outside [0, {cutoff}] for mode {label!r}"
                )
            digits.append(n)
        for label, s in zip(self.qutrits, b.spins):
            if s not in SPIN_VALUES:
                raise CutoffError(f"spin {s} for qutrit {label!r} not in {{-1,0,1}}")
            digits.append(s + 1)
        return int(np.ravel_multi_index(digits, self.shape))

    def basis_of(self, index: int) -> "BasisState":
        """Inverse of :meth:`index_of`."""
        digits = np.unravel_index(index, self.shape)
        n_modes = len(self.bosonic_modes)
        return BasisState(
            occupations=tuple(int(d) for d in digits[:n_modes]),
            spins=tuple(int(d) - 1 for d in digits[n_modes:]),
        )

    def sublayout(self, labels: Iterable[str]) -> "ModeLayout":
        """Layout restricted to the given sites, kept in canonical order."""
        wanted = set(labels)
        unknown = wanted - set(self.site_labels)
        if unknown:
            raise LayoutError(f"unknown sites {sorted(unknown)}")
        if not wanted:
            raise LayoutError("empty site selection")
        return ModeLayout(
            bosonic_modes=tuple(m for m in self.bosonic_modes if m[0] in wanted),
            qutrits=tuple(q for q in self.qutrits if q in wanted),
            dim_limit=self.dim_limit,
        )

    def all_basis_states(self) -> Iterable["BasisState"]:
        for index in range(self.dim):
            yield self.basis_of(index)


@dataclass(frozen=True)
class BasisState:
    """Occupation per bosonic mode plus spin (-1, 0, +1) per qutrit."""

    occupations: tuple[int, ...]
    spins: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "occupations", tuple(int(n) for n in self.occupations))
        object.__setattr__(self, "spins", tuple(int(s) for s in self.spins))


@dataclass(eq=False)
class PureState:
    """Complex amplitude vector over a layout's occupation-number basis."""

    layout: ModeLayout
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.size != self.layout.dim:
            raise LayoutError(
                f"amplitude count {amps.size} does not match layout dim {self.layout.dim}"
            )
        self.amplitudes = amps

    def _view(self) -> np.ndarray:
        return self.amplitudes.reshape(self.layout.shape)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "PureState":
        n = self.norm()
        if n < 1e-15:
            raise DegenerateStateError("cannot normalize a zero state")
        return PureState(self.layout, self.amplitudes / n)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def amplitude(self, b: BasisState) -> complex:
        return complex(self.amplitudes[self.layout.index_of(b)])

    def canonical(self) -> "PureState":
        """Fix the global phase: divide by the phase of the largest-magnitude
        amplitude (ties broken by lowest index)."""
        idx = int(np.argmax(np.abs(self.amplitudes)))
        a = self.amplitudes[idx]
        if abs(a) < 1e-15:
            raise DegenerateStateError("cannot canonicalize a zero state")
        return PureState(self.layout, self.amplitudes * (abs(a) / a))

    def equals_up_to_phase(self, other: "PureState", tol: float = ORTHO_TOL) -> bool:
        """The canonical state-comparison predicate."""
        if self.layout != other.layout:
            return False
        a = self.canonical().amplitudes
        b = other.canonical().amplitudes
        return bool(np.max(np.abs(a - b)) <= tol)

    def tensor(self, other: "PureState") -> "PureState":
        """Tensor product; combined layout keeps modes-then-qutrits order."""
        combined = ModeLayout(
            self.layout.bosonic_modes + other.layout.bosonic_modes,
            self.layout.qutrits + other.layout.qutrits,
            dim_limit=max(self.layout.dim_limit, other.layout.dim_limit),
        )
        outer = np.multiply.outer(self._view(), other._view())
        n_ma, n_qa = len(self.layout.bosonic_modes), len(self.layout.qutrits)
        n_mb, n_qb = len(other.layout.bosonic_modes), len(other.layout.qutrits)
        # outer axes: modes_a, qutrits_a, modes_b, qutrits_b -> canonical order
        perm = (
            list(range(n_ma))
            + [n_ma + n_qa + i for i in range(n_mb)]
            + [n_ma + i for i in range(n_qa)]
            + [n_ma + n_qa + n_mb + i for i in range(n_qb)]
        )
        return PureState(combined, outer.transpose(perm).reshape(-1))

    def to_json(self) -> dict:
        return {
            "layout": {
                "bosonic_modes": [[label, cutoff] for label, cutoff in self.layout.bosonic_modes],
                "qutrits": list(self.layout.qutrits),
            },
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
            "index_order": SERIAL_INDEX_ORDER,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "PureState":
        if doc.get("index_order") != SERIAL_INDEX_ORDER:
            raise LayoutError(f"unsupported index order {doc.get('index_order')!r}")
        layout = ModeLayout(
            bosonic_modes=tuple((m[0], m[1]) for m in doc["layout"]["bosonic_modes"]),
            qutrits=tuple(doc["layout"]["qutrits"]),
        )
        amps = np.array([complex(re, im) for re, im in doc["amplitudes"]])
        return cls(layout, amps)


@dataclass(eq=False)
class DensityMatrix:
    """Reduced density operator on a sub-layout."""

    layout: ModeLayout
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.shape != (self.layout.dim, self.layout.dim):
            raise LayoutError(
                f"matrix shape {m.shape} does not match layout dim {self.layout.dim}"
            )
        self.matrix = m

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def eigenvalues(self) -> np.ndarray:
        """Real spectrum, sorted descending."""
        vals = np.linalg.eigvalsh((self.matrix + self.matrix.conj().T) / 2)
        return vals[::-1]

    def entropy(self) -> float:
        """Von Neumann entropy, natural log."""
        vals = self.eigenvalues()
        vals = vals[vals > 1e-15]
        return float(-np.sum(vals * np.log(vals)))

    def trace_distance(self, other: "DensityMatrix") -> float:
        if self.layout != other.layout:
            raise LayoutError("layout mismatch in trace distance")
        diff = self.matrix - other.matrix
        vals = np.linalg.eigvalsh((diff + diff.conj().T) / 2)
        return float(0.5 * np.sum(np.abs(vals)))

    def check(self) -> None:
        """Assert hermiticity, unit trace, and positivity within tolerances."""
        herm = float(np.max(np.abs(self.matrix - self.matrix.conj().T)))
        if herm > NORM_TOL:
            raise InvariantViolation(f"density matrix not hermitian (deviation {herm:.2e})")
        tr = self.trace()
        if abs(tr - 1.0) > NORM_TOL:
            raise InvariantViolation(f"density matrix trace {tr} != 1")
        if float(self.eigenvalues()[-1]) < -1e-10:
            raise InvariantViolation("density matrix has a negative eigenvalue")


@dataclass(eq=False)
class Observable:
    """Eigenbasis spanning a declared subspace plus a complement policy.

    Components of the state outside the eigenbasis span contribute the
    ``complement_value`` eigenvalue (label ``complement_label``).  Honest
    protocol states never leave the declared subspace; attacked states may.
    """

    layout: ModeLayout
    eigenbasis: tuple[tuple[float, PureState], ...]
    complement_value: float = 0.0
    complement_label: Any = "outside"

    def __post_init__(self) -> None:
        self.eigenbasis = tuple((float(v), s) for v, s in self.eigenbasis)
        for _, vec in self.eigenbasis:
            if vec.layout != self.layout:
                raise LayoutError("eigenvector layout does not match observable layout")
        _check_orthonormal([vec for _, vec in self.eigenbasis])


@dataclass
class MeasurementOutcome:
    """One sampled projective-measurement result."""

    label: Any
    post_state: PureState
    probability: float
    distribution: dict[Any, float] = field(default_factory=dict)


def _check_orthonormal(vectors: Sequence[PureState], tol: float = ORTHO_TOL) -> np.ndarray:
    mat = np.stack([v.amplitudes for v in vectors])
    gram = mat.conj() @ mat.T
    dev = float(np.max(np.abs(gram - np.eye(len(vectors)))))
    if dev > tol:
        raise BasisError(f"basis not orthonormal (deviation {dev:.2e})")
    return mat


def make_basis_state(layout: ModeLayout, b: BasisState) -> PureState:
    """State with amplitude 1 on the given occupation pattern."""
    amps = np.zeros(layout.dim, dtype=np.complex128)
    amps[layout.index_of(b)] = 1.0
    return PureState(layout, amps)


def superpose(
    terms: Sequence[tuple[complex, BasisState]], layout: ModeLayout
) -> PureState:
    """Normalized superposition of basis states; coefficients may repeat."""
    amps = np.zeros(layout.dim, dtype=np.complex128)
    for coeff, b in terms:
        amps[layout.index_of(b)] += coeff
    n = np.linalg.norm(amps)
    if n < 1e-15:
        raise DegenerateStateError("superposition has zero norm")
    return PureState(layout, amps / n)


def apply_number_phase(
    state: PureState, site: str, phase_fn: Callable[[int], float]
) -> PureState:
    """Multiply each basis amplitude by exp(i * phase_fn(n)) for the
    occupation n of ``site``.  Norm-preserving."""
    layout = state.layout
    if not layout.is_mode(site):
        raise LayoutError(f"{site!r} is not a bosonic mode")
    axis = layout.axis_of(site)
    d = layout.cutoff(site) + 1
    phases = np.exp(1j * np.array([float(phase_fn(n)) for n in range(d)]))
    shape = [1] * len(layout.shape)
    shape[axis] = d
    view = state._view() * phases.reshape(shape)
    return PureState(layout, view.reshape(-1))


def apply_conditional_spin_phase(
    state: PureState, mode_site: str, qutrit_site: str, a: float, b: float
) -> PureState:
    """Phase n * (a + b*s) per basis state, with n the occupation of
    ``mode_site`` and s the spin of ``qutrit_site``.

    Callers fold any overall angle (e.g. the per-vote angle) into ``a``
    and ``b`` before calling.
    """
    layout = state.layout
    if not layout.is_mode(mode_site):
        raise LayoutError(f"{mode_site!r} is not a bosonic mode")
    if not layout.is_qutrit(qutrit_site):
        raise LayoutError(f"{qutrit_site!r} is not a qutrit")
    n_axis = layout.axis_of(mode_site)
    s_axis = layout.axis_of(qutrit_site)
    d = layout.cutoff(mode_site) + 1
    n_vals = np.arange(d, dtype=float)
    s_vals = np.array(SPIN_VALUES, dtype=float)
    phases = np.exp(1j * np.outer(n_vals, a + b * s_vals))
    shape = [1] * len(layout.shape)
    shape[n_axis] = d
    shape[s_axis] = 3
    # outer() axes are (n, s); with n_axis < s_axis always true here since
    # modes precede qutrits in the canonical order.
    view = state._view() * phases.reshape(shape)
    return PureState(layout, view.reshape(-1))


def inner_product(a: PureState, b: PureState) -> complex:
    """<a|b> (conjugate-linear in the first argument)."""
    if a.layout != b.layout:
        raise LayoutError("inner product requires matching layouts")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a: PureState, b: PureState) -> float:
    """|<a|b>|^2 for pure states."""
    return float(abs(inner_product(a, b)) ** 2)


def _subsystem_matrix(
    state: PureState, keep_labels: Sequence[str]
) -> tuple[np.ndarray, ModeLayout, list[int], list[int]]:
    """Reshape amplitudes to (kept sites, rest) with kept axes in canonical
    order.  Returns (matrix, kept sub-layout, kept axes, rest axes)."""
    layout = state.layout
    sub = layout.sublayout(keep_labels)
    keep_axes = [layout.axis_of(label) for label in sub.site_labels]
    rest_axes = [i for i in range(len(layout.shape)) if i not in keep_axes]
    perm = keep_axes + rest_axes
    d_keep = int(math.prod(layout.shape[i] for i in keep_axes))
    d_rest = layout.dim // d_keep
    mat = state._view().transpose(perm).reshape(d_keep, d_rest)
    return mat, sub, keep_axes, rest_axes


def partial_trace(state: PureState, keep: Iterable[str]) -> DensityMatrix:
    """Reduced density operator on the kept sites (canonical site order)."""
    keep = list(keep)
    if not keep:
        raise LayoutError("partial trace needs a nonempty set of kept sites")
    mat, sub, _, _ = _subsystem_matrix(state, keep)
    rho = mat @ mat.conj().T
    return DensityMatrix(sub, rho)


def _sample(labels: list, probs: np.ndarray, rng: np.random.Generator) -> int:
    p = np.clip(probs, 0.0, None)
    total = p.sum()
    if total <= 0:
        raise DegenerateStateError("no outcome has positive probability")
    return int(rng.choice(len(labels), p=p / total))


def measure_projective(
    state: PureState,
    basis: Sequence[tuple[Any, PureState]],
    rng: np.random.Generator,
    *,
    allow_residual: bool = False,
    residual_label: Any = "outside",
) -> MeasurementOutcome:
    """Projective measurement in an orthonormal (possibly incomplete) basis.

    The basis need not span the whole space.  With ``allow_residual`` the
    leftover probability becomes an extra outcome under ``residual_label``;
    without it, residual probability above ``RESIDUAL_TOL`` raises
    :class:`IncompleteBasisError`.
    """
    labels = [label for label, _ in basis]
    if len(set(labels)) != len(labels):
        raise BasisError("duplicate outcome labels")
    for _, vec in basis:
        if vec.layout != state.layout:
            raise LayoutError("basis vector layout does not match state layout")
    mat = _check_orthonormal([vec for _, vec in basis])
    overlaps = mat.conj() @ state.amplitudes
    probs = np.abs(overlaps) ** 2
    norm_sq = float(np.vdot(state.amplitudes, state.amplitudes).real)
    residual = max(0.0, norm_sq - float(probs.sum()))
    if residual > RESIDUAL_TOL and not allow_residual:
        raise IncompleteBasisError(
            f"residual probability {residual:.3e} outside declared basis"
        )
    out_labels = list(labels)
    out_probs = list(probs)
    if allow_residual:
        out_labels.append(residual_label)
        out_probs.append(residual)
    out_probs_arr = np.array(out_probs)
    k = _sample(out_labels, out_probs_arr, rng)
    if allow_residual and k == len(labels):
        post_amps = state.amplitudes - mat.T @ overlaps
    else:
        post_amps = overlaps[k] * mat[k]
    post = PureState(state.layout, post_amps).normalized()
    distribution = {lab: float(p) for lab, p in zip(out_labels, out_probs_arr)}
    return MeasurementOutcome(out_labels[k], post, float(out_probs_arr[k]), distribution)


def measure_subsystem(
    state: PureState,
    sites: Sequence[str],
    basis: Sequence[tuple[Any, PureState]],
    rng: np.random.Generator,
    *,
    allow_residual: bool = False,
    residual_label: Any = "outside",
) -> MeasurementOutcome:
    """Projective measurement of a site subset in a local orthonormal basis.

    Basis vectors live on the sub-layout of ``sites``; the returned
    post-state lives on the full layout (the unmeasured sites keep their
    correlations).
    """
    mat, sub, keep_axes, rest_axes = _subsystem_matrix(state, sites)
    labels = [label for label, _ in basis]
    if len(set(labels)) != len(labels):
        raise BasisError("duplicate outcome labels")
    for _, vec in basis:
        if vec.layout != sub:
            raise LayoutError(
                "basis vector layout does not match the measured sub-layout"
            )
    bmat = _check_orthonormal([vec for _, vec in basis])
    partial = bmat.conj() @ mat  # (n_basis, d_rest)
    probs = np.abs(partial) ** 2
    probs = probs.sum(axis=1)
    norm_sq = float(np.vdot(state.amplitudes, state.amplitudes).real)
    residual = max(0.0, norm_sq - float(probs.sum()))
    if residual > RESIDUAL_TOL and not allow_residual:
        raise IncompleteBasisError(
            f"residual probability {residual:.3e} outside declared basis"
        )
    out_labels = list(labels)
    out_probs = list(probs)
    if allow_residual:
        out_labels.append(residual_label)
        out_probs.append(residual)
    out_probs_arr = np.array(out_probs)
    k = _sample(out_labels, out_probs_arr, rng)
    layout = state.layout
    full_shape = [layout.shape[i] for i in keep_axes] + [
        layout.shape[i] for i in rest_axes
    ]
    inv_perm = np.argsort(keep_axes + rest_axes)
    if allow_residual and k == len(labels):
        post_mat = mat - bmat.T @ partial
    else:
        post_mat = np.multiply.outer(bmat[k], partial[k])
    post_view = post_mat.reshape(full_shape).transpose(inv_perm)
    post = PureState(layout, post_view.reshape(-1)).normalized()
    distribution = {lab: float(p) for lab, p in zip(out_labels, out_probs_arr)}
    return MeasurementOutcome(out_labels[k], post, float(out_probs_arr[k]), distribution)


def subsystem_projection(
    state: PureState, sites: Sequence[str], vector: PureState
) -> tuple[float, PureState | None]:
    """Probability and post-state of projecting a site subset onto one
    local vector, without sampling.  Returns (p, None) when p is
    negligible."""
    mat, sub, keep_axes, rest_axes = _subsystem_matrix(state, sites)
    if vector.layout != sub:
        raise LayoutError("projection vector layout does not match the sub-layout")
    partial = vector.amplitudes.conj() @ mat  # (d_rest,)
    prob = float(np.sum(np.abs(partial) ** 2))
    if prob < 1e-300:
        return 0.0, None
    layout = state.layout
    full_shape = [layout.shape[i] for i in keep_axes] + [
        layout.shape[i] for i in rest_axes
    ]
    inv_perm = np.argsort(keep_axes + rest_axes)
    post_mat = np.multiply.outer(vector.amplitudes, partial)
    post_view = post_mat.reshape(full_shape).transpose(inv_perm)
    post = PureState(layout, post_view.reshape(-1)).normalized()
    return prob, post


def expectation(state: PureState, obs: Observable) -> float:
    """Sum of eigenvalue * |<eigvec|state>|^2; the complement subspace
    contributes the observable's complement eigenvalue."""
    if obs.layout != state.layout:
        raise LayoutError("state layout does not match observable layout")
    total = 0.0
    covered = 0.0
    for val, vec in obs.eigenbasis:
        p = float(abs(np.vdot(vec.amplitudes, state.amplitudes)) ** 2)
        total += val * p
        covered += p
    norm_sq = float(np.vdot(state.amplitudes, state.amplitudes).real)
    residual = max(0.0, norm_sq - covered)
    return total + obs.complement_value * residual


def total_number_distribution(state: PureState) -> dict[int, float]:
    """Probability of each total occupation summed over all bosonic modes."""
    layout = state.layout
    if not layout.bosonic_modes:
        raise LayoutError("state has no bosonic modes")
    probs = state.probabilities().reshape(layout.shape)
    totals = np.zeros(layout.shape, dtype=np.int64)
    for label, cutoff in layout.bosonic_modes:
        axis = layout.axis_of(label)
        shape = [1] * len(layout.shape)
        shape[axis] = cutoff + 1
        totals = totals + np.arange(cutoff + 1, dtype=np.int64).reshape(shape)
    weights = np.bincount(totals.reshape(-1), weights=probs.reshape(-1))
    return {int(t): float(p) for t, p in enumerate(weights) if p > 1e-15}


def factor_sites(
    state: PureState, sites: Sequence[str], tol: float = ORTHO_TOL
) -> tuple[PureState, PureState]:
    """Split a product state across (sites | rest).

    Returns (state on ``sites``, state on the remaining sites); the first
    factor is phase-canonical and the second carries the joint phase.
    Raises :class:`EntangledStateError` when the Schmidt rank exceeds one
    within ``tol``.
    """
    mat, sub, keep_axes, rest_axes = _subsystem_matrix(state, sites)
    u, s, vh = np.linalg.svd(mat, full_matrices=False)
    if s[0] < 1e-12:
        raise DegenerateStateError("cannot factor a zero state")
    if len(s) > 1 and s[1] > tol * s[0]:
        raise EntangledStateError(
            f"state does not factorize: Schmidt values {s[0]:.3e}, {s[1]:.3e}"
        )
    left = u[:, 0]
    right = s[0] * vh[0, :]
    idx = int(np.argmax(np.abs(left)))
    phase = left[idx] / abs(left[idx])
    left = left / phase
    right = right * phase
    rest_labels = [state.layout.site_labels[i] for i in rest_axes]
    rest = state.layout.sublayout(rest_labels)
    return PureState(sub, left), PureState(rest, right)
