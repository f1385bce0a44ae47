"""Constructors for ballot states, vote states, phase states, and tally bases.

Every ballot family shares one shape: a tallyman mode ``T`` entangled with
one or more voting-site modes so that branch ``k`` holds ``k`` particles at
each voting site and ``mult * (N - k)`` at the tallyman, where ``mult`` is
the number of voting sites.  Votes enter as occupation-dependent phases and
are read out in the discrete phase (tally) basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LayoutError
from .fock import (
    BasisState,
    ModeLayout,
    Observable,
    PureState,
    make_basis_state,
    superpose,
)


@dataclass(frozen=True)
class BallotParams:
    """Sizing of a ballot session.

    N: particle budget; the tally modulus is N + 1.
    K: number of voting sites (1 for the two-site survey).
    """

    N: int
    K: int = 1

    def __post_init__(self) -> None:
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")

    @property
    def delta(self) -> float:
        """Phase angle of a single unit vote: 2*pi / (N + 1)."""
        return 2.0 * math.pi / (self.N + 1)

    @property
    def theta(self) -> float:
        """Grid spacing of the tally/phase basis (equal to delta)."""
        return 2.0 * math.pi / (self.N + 1)


def comparative_layout() -> ModeLayout:
    return ModeLayout((("A", 1), ("B", 1)))


def comparative_state() -> PureState:
    """One particle shared coherently between sites A and B."""
    layout = comparative_layout()
    return superpose(
        [(1.0, BasisState((1, 0))), (1.0, BasisState((0, 1)))], layout
    )


def comparative_basis() -> tuple[PureState, PureState]:
    """The symmetric/antisymmetric pair the tallyman measures in."""
    layout = comparative_layout()
    same = superpose([(1.0, BasisState((1, 0))), (1.0, BasisState((0, 1)))], layout)
    diff = superpose([(1.0, BasisState((1, 0))), (-1.0, BasisState((0, 1)))], layout)
    return same, diff


def survey_layout(params: BallotParams) -> ModeLayout:
    return ModeLayout((("T", params.N), ("V", params.N)))


def survey_state(params: BallotParams) -> PureState:
    """Uniform superposition of |N-n, n> over the tallyman/voter pair."""
    layout = survey_layout(params)
    terms = [(1.0, BasisState((params.N - n, n))) for n in range(params.N + 1)]
    return superpose(terms, layout)


def multiparty_layout(params: BallotParams) -> ModeLayout:
    modes = [("T", params.K * params.N)]
    modes += [(f"V{i}", params.N) for i in range(1, params.K + 1)]
    return ModeLayout(tuple(modes))


def multiparty_survey_state(params: BallotParams) -> PureState:
    """Uniform superposition of |K(N-n), n, ..., n> over K voting sites.

    K = 1 degenerates to the two-site survey state (site named V1).
    """
    layout = multiparty_layout(params)
    terms = []
    for n in range(params.N + 1):
        occ = (params.K * (params.N - n),) + (n,) * params.K
        terms.append((1.0, BasisState(occ)))
    return superpose(terms, layout)


def agent_layout(params: BallotParams, agents: int) -> ModeLayout:
    modes = [("T", agents * params.N)]
    modes += [(f"V{i}", params.N) for i in range(1, agents + 1)]
    return ModeLayout(tuple(modes))


def agent_ballot_state(params: BallotParams, agents: int) -> PureState:
    """Ballot state whose voting sites are held by ballot agents."""
    if agents not in (2, 3):
        raise ValueError(f"agents must be 2 or 3, got {agents}")
    layout = agent_layout(params, agents)
    terms = []
    for n in range(params.N + 1):
        occ = (agents * (params.N - n),) + (n,) * agents
        terms.append((1.0, BasisState(occ)))
    return superpose(terms, layout)


def vote_layout(width: int) -> ModeLayout:
    if width not in (2, 3):
        raise ValueError(f"vote width must be 2 or 3, got {width}")
    return ModeLayout((), tuple(f"q{i}" for i in range(1, width + 1)))


def qutrit_vote_state(vote: str, width: int) -> PureState:
    """Vote recorded in a qutrit register: a uniform superposition placing
    spin +1 (yes) or -1 (no) on exactly one of the qutrits."""
    if vote not in ("yes", "no"):
        raise ValueError(f"vote must be 'yes' or 'no', got {vote!r}")
    layout = vote_layout(width)
    mark = 1 if vote == "yes" else -1
    terms = []
    for pos in range(width):
        spins = [0] * width
        spins[pos] = mark
        terms.append((1.0, BasisState((), tuple(spins))))
    return superpose(terms, layout)


def cheat_state(width: int = 2) -> PureState:
    """All-qutrits-spin-up register: inflates the vote value but is left
    unchanged by any agent's spin measurement."""
    layout = vote_layout(width)
    return make_basis_state(layout, BasisState((), (1,) * width))


def ballot_branches(params: BallotParams, layout: ModeLayout) -> list[BasisState]:
    """The N+1 occupation patterns spanning a ballot family's subspace.

    Requires a layout built by one of the ballot constructors: first mode
    is the tallyman with cutoff mult*N, the remaining modes are voting
    sites with cutoff N.
    """
    modes = layout.bosonic_modes
    if len(modes) < 2:
        raise LayoutError("ballot layout needs a tallyman mode plus voting sites")
    mult = len(modes) - 1
    t_label, t_cutoff = modes[0]
    if t_cutoff != mult * params.N:
        raise LayoutError(
            f"tallyman cutoff {t_cutoff} does not match {mult}*N = {mult * params.N}"
        )
    for label, cutoff in modes[1:]:
        if cutoff != params.N:
            raise LayoutError(f"voting site {label!r} cutoff {cutoff} != N = {params.N}")
    branches = []
    for k in range(params.N + 1):
        occ = (mult * (params.N - k),) + (k,) * mult
        branches.append(BasisState(occ, (0,) * len(layout.qutrits)))
    return branches


def tally_basis(params: BallotParams, layout: ModeLayout) -> list[tuple[int, PureState]]:
    """Discrete phase basis over the ballot subspace; orthonormal, and the
    honest state after votes summing to M equals entry M mod (N+1)."""
    branches = ballot_branches(params, layout)
    theta = params.theta
    basis = []
    for n in range(params.N + 1):
        terms = [
            (np.exp(1j * n * k * theta), b) for k, b in enumerate(branches)
        ]
        basis.append((n, superpose(terms, layout)))
    return basis


def tally_observable(params: BallotParams, layout: ModeLayout) -> Observable:
    """Tally readout operator: eigenvalue n on tally-basis entry n, 0 on
    the complement."""
    eigenbasis = tuple((float(n), v) for n, v in tally_basis(params, layout))
    return Observable(layout, eigenbasis, complement_value=0.0)


def single_mode_phase_state(
    n_particles: int, theta: float, conjugate: bool = False, label: str | None = None
) -> PureState:
    """Single-mode phase state with a linear phase ramp.

    ``conjugate=False`` gives the voter-side state (amplitudes e^{i n theta}
    on |n>, default label V); ``conjugate=True`` gives the tallyman-side
    partner (amplitudes e^{-i n theta} on |N-n>, default label T).
    """
    if label is None:
        label = "T" if conjugate else "V"
    layout = ModeLayout(((label, n_particles),))
    if conjugate:
        terms = [
            (np.exp(-1j * n * theta), BasisState((n_particles - n,)))
            for n in range(n_particles + 1)
        ]
    else:
        terms = [
            (np.exp(1j * n * theta), BasisState((n,)))
            for n in range(n_particles + 1)
        ]
    return superpose(terms, layout)


def phase_grid_basis(
    n_particles: int, label: str = "V", conjugate: bool = False
) -> list[tuple[int, PureState]]:
    """The N+1 phase states on the grid theta_k = 2*pi*k/(N+1): an
    orthonormal basis for a single mode with cutoff N."""
    step = 2.0 * math.pi / (n_particles + 1)
    return [
        (k, single_mode_phase_state(n_particles, k * step, conjugate, label))
        for k in range(n_particles + 1)
    ]
