"""Protocol state machines: cast votes locally, transfer, read out tallies.

Sessions are single logical threads of execution; independent sessions can
run concurrently.  Vote values are retained only when a session is created
in audit mode (tests and transcript export); the default drops them, which
is the honest model of the protocol's privacy.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .errors import InvariantViolation, LayoutError, ProtocolError
from .fock import (
    ORTHO_TOL,
    ModeLayout,
    PureState,
    apply_conditional_spin_phase,
    apply_number_phase,
    expectation,
    factor_sites,
    inner_product,
    measure_projective,
    partial_trace,
)
from .states import (
    BallotParams,
    agent_ballot_state,
    ballot_branches,
    cheat_state,
    comparative_basis,
    comparative_state,
    multiparty_survey_state,
    qutrit_vote_state,
    survey_state,
    tally_basis,
    tally_observable,
    vote_layout,
)

VOTE_YES = "yes"
VOTE_NO = "no"

#: Fraction multiplying the spin-independent part of an agent's conditional
#: phase, per number of agents: the full coefficient pair is
#: (delta * AGENT_BASE[agents], delta / 2).
AGENT_BASE = {2: 0.25, 3: 1.0 / 6.0}


@dataclass
class TallyResult:
    """Outcome of a tally readout.

    ``tally`` is None when the sampled outcome fell outside the ballot
    subspace (possible only for attacked states measured non-strictly).
    """

    tally: int | None
    raw_expectation: float
    outcome_distribution: dict[Any, float]


@dataclass(eq=False)
class BallotSession:
    kind: str
    params: BallotParams
    state: PureState
    agents: int | None = None
    audit: bool = False
    max_voters: int = 0
    voters: list[str] = field(default_factory=list)
    vote_log: list[tuple[str, Any]] = field(default_factory=list)
    phase_accumulator: float = 0.0
    transferred: bool = False
    events: list[dict] = field(default_factory=list)
    fingerprints: list[dict] = field(default_factory=list)
    final_tally: int | None = None

    def _record(self, action: str, voter: str | None = None, value: Any = None) -> None:
        event: dict[str, Any] = {"step": len(self.events), "action": action}
        if self.audit and voter is not None:
            event["voter"] = voter
            event["value"] = value
        self.events.append(event)
        if self.audit:
            for label, _ in self.state.layout.bosonic_modes:
                rho = partial_trace(self.state, [label])
                self.fingerprints.append(
                    {
                        "step": event["step"],
                        "site": label,
                        "eigenvalues": [float(v) for v in rho.eigenvalues()],
                    }
                )


def new_survey_session(params: BallotParams, audit: bool = False) -> BallotSession:
    if params.K != 1:
        raise ProtocolError("two-site survey requires K = 1 (use a multiparty session)")
    session = BallotSession(
        kind="survey",
        params=params,
        state=survey_state(params),
        audit=audit,
        max_voters=params.N,
    )
    session._record("create")
    return session


def new_multiparty_session(params: BallotParams, audit: bool = False) -> BallotSession:
    if params.K < 2:
        raise ProtocolError("multiparty session requires K >= 2")
    session = BallotSession(
        kind="multiparty-survey",
        params=params,
        state=multiparty_survey_state(params),
        audit=audit,
        max_voters=min(params.N, params.K),
    )
    session._record("create")
    return session


def new_binary_agent_session(
    params: BallotParams, agents: int, audit: bool = False
) -> BallotSession:
    if agents not in AGENT_BASE:
        raise ProtocolError(f"agents must be 2 or 3, got {agents}")
    session = BallotSession(
        kind="binary-agent",
        params=params,
        state=agent_ballot_state(params, agents),
        agents=agents,
        audit=audit,
        max_voters=params.N,
    )
    session._record("create")
    return session


def _check_can_cast(session: BallotSession, voter_id: str) -> None:
    if session.transferred:
        raise ProtocolError("cannot cast after transfer to the tallyman")
    if voter_id in session.voters:
        raise ProtocolError(f"voter {voter_id!r} already cast a vote")
    if len(session.voters) >= session.max_voters:
        raise ProtocolError(
            f"session capacity {session.max_voters} voters reached"
        )


def survey_cast(session: BallotSession, voter_id: str, nu: int) -> BallotSession:
    """Register an integer-valued vote as a local phase shift.

    The voter's site is V for the two-site survey; multiparty sessions
    assign each voter the next unused voting site.
    """
    if session.kind not in ("survey", "multiparty-survey"):
        raise ProtocolError(f"survey_cast not valid for kind {session.kind!r}")
    _check_can_cast(session, voter_id)
    delta_i = nu * session.params.delta
    site = "V" if session.kind == "survey" else f"V{len(session.voters) + 1}"
    session.state = apply_number_phase(session.state, site, lambda n: n * delta_i)
    session.voters.append(voter_id)
    if session.audit:
        session.vote_log.append((voter_id, nu))
        session.phase_accumulator += delta_i
    session._record("cast", voter_id, nu)
    return session


def transfer_to_tallyman(session: BallotSession) -> BallotSession:
    """Hand every mode to the tallyman.

    Transfer is modeled as a lossless relabeling of sites, so amplitudes
    are unchanged; the session just stops accepting casts.
    """
    if session.transferred:
        raise ProtocolError("session already transferred")
    session.transferred = True
    session._record("transfer")
    return session


def survey_tally(
    session: BallotSession,
    rng: np.random.Generator,
    *,
    allow_residual: bool = False,
) -> TallyResult:
    """Projective readout in the tally basis.

    Honest sessions are eigenstates, so the single shot is deterministic
    and equals the vote sum mod N+1; the raw expectation value is reported
    alongside.
    """
    if session.kind not in ("survey", "multiparty-survey", "binary-agent"):
        raise ProtocolError(f"survey_tally not valid for kind {session.kind!r}")
    if not session.transferred:
        raise ProtocolError("tally requires transfer_to_tallyman first")
    params = session.params
    basis = tally_basis(params, session.state.layout)
    obs = tally_observable(params, session.state.layout)
    raw = expectation(session.state, obs)
    outcome = measure_projective(
        session.state, basis, rng, allow_residual=allow_residual
    )
    session.state = outcome.post_state
    tally = outcome.label if isinstance(outcome.label, int) else None
    session.final_tally = tally
    session._record("tally", value=tally)
    return TallyResult(tally, raw, outcome.distribution)


def comparative_run(vote_a: str, vote_b: str, rng: np.random.Generator) -> str:
    """Two-voter agreement test: returns "same" or "different".

    Deterministic: a yes-vote flips the sign of the one-particle branch at
    the voter's own site, and the tallyman measures in the basis that
    separates the symmetric and antisymmetric combinations.
    """
    state = comparative_state()
    if vote_a == VOTE_YES:
        state = apply_number_phase(state, "A", lambda n: n * math.pi)
    if vote_b == VOTE_YES:
        state = apply_number_phase(state, "B", lambda n: n * math.pi)
    same, diff = comparative_basis()
    outcome = measure_projective(state, [("same", same), ("different", diff)], rng)
    return outcome.label


def binary_agent_cast(
    session: BallotSession,
    voter_id: str,
    vote_state: PureState,
    rng: np.random.Generator,
) -> tuple[BallotSession, PureState]:
    """One voter's turn in the agent-mediated binary ballot.

    The voter's qutrit register joins the ballot, each agent applies its
    conditional phase to (its mode, its qutrit), and the register is
    returned to the voter.  For vote states supported on a single total-
    spin value (honest yes/no and the cheat register) the qutrits
    disentangle exactly; anything else raises EntangledStateError.
    """
    if session.kind != "binary-agent":
        raise ProtocolError(f"binary_agent_cast not valid for kind {session.kind!r}")
    agents = session.agents
    expected_layout = vote_layout(agents)
    if vote_state.layout != expected_layout:
        raise ProtocolError(
            f"vote state must live on {agents} qutrits q1..q{agents}"
        )
    _check_can_cast(session, voter_id)
    delta = session.params.delta
    a = delta * AGENT_BASE[agents]
    b = delta / 2.0
    before = session.state
    joint = before.tensor(vote_state)
    for i in range(1, agents + 1):
        joint = apply_conditional_spin_phase(joint, f"V{i}", f"q{i}", a, b)
    qutrit_labels = [f"q{i}" for i in range(1, agents + 1)]
    returned, ballot = factor_sites(joint, qutrit_labels)
    session.state = ballot
    session.voters.append(voter_id)
    if session.audit:
        advance = phase_advance_per_quantum(before, ballot, session.params)
        session.phase_accumulator += advance
        session.vote_log.append((voter_id, _classify_vote(vote_state, agents)))
    session._record("cast", voter_id, session.vote_log[-1][1] if session.audit else None)
    return session, returned


def _classify_vote(vote_state: PureState, width: int) -> str:
    for name in (VOTE_YES, VOTE_NO):
        if vote_state.equals_up_to_phase(qutrit_vote_state(name, width)):
            return name
    if vote_state.equals_up_to_phase(cheat_state(width)):
        return "cheat"
    return "custom"


def tamper_check(
    returned_qutrits: PureState,
    original_vote: str | PureState,
    width: int,
    rng: np.random.Generator,
) -> str:
    """Voter-side check of a returned qutrit register.

    Measures in an orthonormal basis containing both vote states (plus the
    reference itself when the voter sent something else, e.g. the cheat
    register) and reports "tampered" iff the outcome differs from what was
    sent.
    """
    if returned_qutrits.layout != vote_layout(width):
        raise ProtocolError(f"returned register does not match width {width}")
    yes_s = qutrit_vote_state(VOTE_YES, width)
    no_s = qutrit_vote_state(VOTE_NO, width)
    basis: list[tuple[Any, PureState]] = [(VOTE_YES, yes_s), (VOTE_NO, no_s)]
    if isinstance(original_vote, PureState):
        for _, v in basis:
            if abs(inner_product(v, original_vote)) > ORTHO_TOL:
                raise ProtocolError(
                    "reference state must be orthogonal to both vote states"
                )
        basis.append(("reference", original_vote))
        ref_label = "reference"
    else:
        if original_vote not in (VOTE_YES, VOTE_NO):
            raise ProtocolError(f"unknown vote {original_vote!r}")
        ref_label = original_vote
    outcome = measure_projective(returned_qutrits, basis, rng, allow_residual=True)
    return "clean" if outcome.label == ref_label else "tampered"


def vote_operator(
    params: BallotParams, site: str, nu: int = 1
) -> Callable[[PureState], PureState]:
    """The unitary a voter applies for a vote of value nu at a site."""
    delta_i = nu * params.delta

    def op(state: PureState) -> PureState:
        return apply_number_phase(state, site, lambda n: n * delta_i)

    return op


def identity_operator() -> Callable[[PureState], PureState]:
    return lambda state: state


def anonymity_gap(
    y_a: Callable[[PureState], PureState],
    y_b: Callable[[PureState], PureState],
    ballot: PureState,
) -> float:
    """2-norm of (Y_a - Y_b) applied to the ballot state.

    Zero iff the two voters' operations are indistinguishable on the
    ballot, which is the operational anonymity condition.
    """
    return float(
        np.linalg.norm(y_a(ballot).amplitudes - y_b(ballot).amplitudes)
    )


def commutator_check(
    y_a: Callable[[PureState], PureState],
    y_b: Callable[[PureState], PureState],
    ballot: PureState,
) -> float:
    """2-norm of [Y_a, Y_b] applied to the ballot state."""
    ab = y_a(y_b(ballot)).amplitudes
    ba = y_b(y_a(ballot)).amplitudes
    return float(np.linalg.norm(ab - ba))


def phase_advance_per_quantum(
    before: PureState, after: PureState, params: BallotParams
) -> float:
    """Phase gained per occupation quantum between two ballot states.

    Both states must be supported on the ballot branches with nonvanishing
    amplitudes; the advance must be consistent across branches (it is for
    every protocol operation), else InvariantViolation.  Returned in
    [0, 2*pi), with values within 1e-9 of a full turn snapped to 0.
    """
    if before.layout != after.layout:
        raise LayoutError("phase advance requires matching layouts")
    branches = ballot_branches(params, before.layout)
    ratios = []
    for branch in branches:
        amp_b = before.amplitude(branch)
        amp_a = after.amplitude(branch)
        if abs(amp_b) < 1e-12 or abs(amp_a) < 1e-12:
            raise InvariantViolation("state not supported on ballot branches")
        ratios.append(amp_a / amp_b)
    units = []
    for k in range(len(ratios) - 1):
        u = ratios[k + 1] * ratios[k].conjugate()
        units.append(u / abs(u))
    mean_vec = sum(units) / len(units)
    if abs(mean_vec) < 1.0 - 1e-9:
        raise InvariantViolation("phase advance differs across branches")
    mean_unit = mean_vec / abs(mean_vec)
    deviation = max(abs(u - mean_unit) for u in units)
    if deviation > 1e-9:
        raise InvariantViolation(
            f"phase advance differs across branches (deviation {deviation:.2e})"
        )
    advance = cmath.phase(mean_unit) % (2 * math.pi)
    if advance > 2 * math.pi - 1e-9:
        advance = 0.0
    return float(advance)


def session_transcript(session: BallotSession) -> dict:
    """JSON-ready transcript: events, final tally, reduced-state
    fingerprints per step (eigenvalue lists)."""
    return {
        "kind": session.kind,
        "params": {
            "N": session.params.N,
            "K": session.params.K,
            "agents": session.agents,
        },
        "events": list(session.events),
        "final_tally": session.final_tally,
        "fingerprints": list(session.fingerprints),
    }
