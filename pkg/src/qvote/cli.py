"""Batch scenario runner: configure, execute, and report.

A scenario is described by one flat JSON document, e.g.

    {"scenario": "survey", "N": 10, "votes": [3, 4, 2], "seed": 7}
    {"scenario": "collude-detect", "N": 7, "trials": 10000, "seed": 42}

The same documents drive the command line: every subcommand accepts
``--config`` plus explicit options that override file values.  Reports are
JSON with stable key order; identical configs (seed included) reproduce
byte-identical reports except for the timestamp field.

Exit codes: 0 success, 2 configuration error, 3 Hilbert-dimension
overflow, 4 invariant violation during self-checks.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Any

import jsonschema

from .attacks import (
    cheat_vote_analysis,
    collusion_detection_suite,
    multiparty_collusion_attempt,
    spin_attack_suite,
)
from .dcnet import pad_complexity, run_round
from .errors import (
    BasisError,
    ConfigError,
    CutoffError,
    InvariantViolation,
    ProtocolError,
    QvoteError,
)
from .fock import DIM_LIMIT
from .protocols import (
    binary_agent_cast,
    comparative_run,
    new_binary_agent_session,
    new_multiparty_session,
    new_survey_session,
    session_transcript,
    survey_cast,
    survey_tally,
    tamper_check,
    transfer_to_tallyman,
)
from .reporting import ScenarioReport, binomial_estimate, trial_rng
from .states import BallotParams, cheat_state, qutrit_vote_state

ATTACK_KINDS = {
    "collude": "collude-detect",
    "agent-spin": "agent-spin",
    "cheat-voter": "cheat-voter",
    "multiparty-collude": "multiparty-collude",
}

_GLOBAL_PROPERTIES = {
    "scenario": {"type": "string"},
    "trials": {"type": "integer", "minimum": 1},
    "seed": {"type": "integer", "minimum": 0},
    "out": {"type": "string"},
    "signed_tally": {"type": "boolean"},
    "per_trial": {"type": "boolean"},
    "strict_basis": {"type": "boolean"},
}

_VOTE_ENUM = {"type": "string", "enum": ["yes", "no"]}

SCENARIO_SCHEMAS: dict[str, dict] = {
    "comparative": {
        "required": ["vote_a", "vote_b", "seed"],
        "properties": {"vote_a": _VOTE_ENUM, "vote_b": _VOTE_ENUM},
    },
    "survey": {
        "required": ["N", "votes", "seed"],
        "properties": {
            "N": {"type": "integer", "minimum": 1},
            "votes": {"type": "array", "items": {"type": "integer"}},
        },
    },
    "multiparty": {
        "required": ["N", "K", "votes", "seed"],
        "properties": {
            "N": {"type": "integer", "minimum": 1},
            "K": {"type": "integer", "minimum": 2},
            "votes": {"type": "array", "items": {"type": "integer"}},
        },
    },
    "binary-ballot": {
        "required": ["N", "agents", "votes", "seed"],
        "properties": {
            "N": {"type": "integer", "minimum": 1},
            "agents": {"type": "integer", "enum": [2, 3]},
            "votes": {
                "type": "array",
                "items": {"type": "string", "enum": ["yes", "no", "cheat"]},
            },
        },
    },
    "collude-detect": {
        "required": ["N", "seed"],
        "properties": {
            "N": {"type": "integer", "minimum": 1},
            "votes": {"type": "array", "items": {"type": "integer"}},
        },
    },
    "agent-spin": {
        "required": ["vote", "width", "seed"],
        "properties": {
            "vote": _VOTE_ENUM,
            "width": {"type": "integer", "enum": [2, 3]},
        },
    },
    "cheat-voter": {
        "required": ["N", "seed"],
        "properties": {
            "N": {"type": "integer", "minimum": 1},
            "width": {"type": "integer", "enum": [2, 3]},
        },
    },
    "multiparty-collude": {
        "required": ["N", "K", "seed"],
        "properties": {
            "N": {"type": "integer", "minimum": 1},
            "K": {"type": "integer", "minimum": 2},
        },
    },
    "dcnet": {
        "required": ["diners"],
        "properties": {
            "diners": {"type": "integer", "minimum": 3},
            "payer": {"type": ["integer", "null"], "minimum": 0},
            "pads": {
                "type": "object",
                "additionalProperties": {"type": "integer", "enum": [0, 1]},
            },
        },
    },
    "complexity": {
        "required": ["voters"],
        "properties": {
            "voters": {
                "anyOf": [
                    {"type": "integer", "minimum": 2},
                    {
                        "type": "array",
                        "items": {"type": "integer", "minimum": 2},
                        "minItems": 1,
                    },
                ]
            },
        },
    },
}


def _schema_for(scenario: str) -> dict:
    spec = SCENARIO_SCHEMAS[scenario]
    return {
        "type": "object",
        "properties": {**_GLOBAL_PROPERTIES, **spec["properties"]},
        "required": ["scenario"] + spec["required"],
        "additionalProperties": False,
    }


@dataclass
class ScenarioConfig:
    """Validated scenario description (flat JSON document)."""

    scenario: str
    params: dict[str, Any] = field(default_factory=dict)
    trials: int = 1
    seed: int | None = None
    out: str | None = None
    signed_tally: bool = False
    per_trial: bool = False
    strict_basis: bool = False

    @classmethod
    def from_dict(cls, doc: dict) -> "ScenarioConfig":
        scenario = doc.get("scenario")
        if scenario not in SCENARIO_SCHEMAS:
            raise ConfigError(
                f"scenario: unknown scenario {scenario!r}; expected one of "
                f"{sorted(SCENARIO_SCHEMAS)}"
            )
        # dcnet rounds with explicit pads are deterministic; otherwise the
        # reproducibility contract demands a seed.
        if scenario == "dcnet" and "pads" not in doc and "seed" not in doc:
            raise ConfigError("seed: required for dcnet with random pads")
        try:
            jsonschema.validate(doc, _schema_for(scenario))
        except jsonschema.ValidationError as err:
            path = "/".join(str(p) for p in err.absolute_path) or "<root>"
            raise ConfigError(f"{path}: {err.message}") from None
        globals_keys = set(_GLOBAL_PROPERTIES)
        params = {k: v for k, v in doc.items() if k not in globals_keys}
        return cls(
            scenario=scenario,
            params=params,
            trials=doc.get("trials", 1),
            seed=doc.get("seed"),
            out=doc.get("out"),
            signed_tally=doc.get("signed_tally", False),
            per_trial=doc.get("per_trial", False),
            strict_basis=doc.get("strict_basis", False),
        )


def signed_residue(tally: int, modulus: int) -> int:
    """Map a residue in [0, modulus) to the signed range, sending residues
    above (modulus-1)/2 to negatives."""
    return tally - modulus if tally > (modulus - 1) / 2 else tally


def run_scenario(config: ScenarioConfig) -> ScenarioReport:
    handler = _HANDLERS[config.scenario]
    report = handler(config)
    _self_check(report)
    return report


def _self_check(report: ScenarioReport) -> None:
    for name, est in report.estimates.items():
        if not -1e-12 <= est.p_hat <= 1 + 1e-12:
            raise InvariantViolation(f"estimate {name} outside [0, 1]: {est.p_hat}")
    total = sum(report.counts.values())
    if report.counts and total != report.trials:
        raise InvariantViolation(
            f"outcome counts sum {total} != trials {report.trials}"
        )


def _run_comparative(config: ScenarioConfig) -> ScenarioReport:
    vote_a = config.params["vote_a"]
    vote_b = config.params["vote_b"]
    expected = "same" if vote_a == vote_b else "different"
    counts: dict[str, int] = {}
    for t in range(config.trials):
        outcome = comparative_run(vote_a, vote_b, trial_rng(config.seed, t))
        counts[outcome] = counts.get(outcome, 0) + 1
        if outcome != expected:
            raise InvariantViolation(
                f"comparative outcome {outcome} != expected {expected}"
            )
    return ScenarioReport(
        scenario="comparative",
        params=config.params,
        trials=config.trials,
        seed=config.seed,
        counts=counts,
        estimates={
            "outcome_correct": binomial_estimate(
                counts.get(expected, 0), config.trials, analytic=1.0
            )
        },
        values={"expected": expected},
    )


def _run_survey_like(config: ScenarioConfig, multiparty: bool) -> ScenarioReport:
    n = config.params["N"]
    k = config.params["K"] if multiparty else 1
    votes = config.params["votes"]
    params = BallotParams(n, k)
    modulus = n + 1
    expected = sum(votes) % modulus
    counts: dict[str, int] = {}
    correct = 0
    last_session = None
    last_result = None
    for t in range(config.trials):
        rng = trial_rng(config.seed, t)
        session = (
            new_multiparty_session(params, audit=True)
            if multiparty
            else new_survey_session(params, audit=True)
        )
        for i, nu in enumerate(votes):
            survey_cast(session, f"voter{i + 1}", nu)
        transfer_to_tallyman(session)
        result = survey_tally(session, rng, allow_residual=not config.strict_basis)
        key = str(result.tally)
        counts[key] = counts.get(key, 0) + 1
        if result.tally == expected:
            correct += 1
        else:
            raise InvariantViolation(
                f"survey tally {result.tally} != expected {expected}"
            )
        last_session, last_result = session, result
    values: dict[str, Any] = {
        "tally": expected,
        "analytic_tally": expected,
        "raw_expectation": last_result.raw_expectation,
    }
    if config.signed_tally:
        values["signed_tally"] = signed_residue(expected, modulus)
    detail: dict[str, Any] = {"transcript": session_transcript(last_session)}
    if config.per_trial:
        detail["final_state"] = last_session.state.to_json()
    return ScenarioReport(
        scenario=config.scenario,
        params=config.params,
        trials=config.trials,
        seed=config.seed,
        counts=counts,
        estimates={
            "tally_correct": binomial_estimate(correct, config.trials, analytic=1.0)
        },
        values=values,
        detail=detail,
    )


def _run_binary_ballot(config: ScenarioConfig) -> ScenarioReport:
    n = config.params["N"]
    agents = config.params["agents"]
    votes = config.params["votes"]
    params = BallotParams(n)
    honest = all(v != "cheat" for v in votes)
    expected = sum(v == "yes" for v in votes) if honest else None
    counts: dict[str, int] = {}
    tamper_clean = 0
    tamper_total = 0
    last_session = None
    last_result = None
    for t in range(config.trials):
        rng = trial_rng(config.seed, t)
        session = new_binary_agent_session(params, agents, audit=True)
        for i, v in enumerate(votes):
            if v == "cheat":
                vote_state = cheat_state(agents)
                reference: Any = vote_state
            else:
                vote_state = qutrit_vote_state(v, agents)
                reference = v
            _, returned = binary_agent_cast(session, f"voter{i + 1}", vote_state, rng)
            verdict = tamper_check(returned, reference, agents, rng)
            tamper_total += 1
            tamper_clean += verdict == "clean"
        transfer_to_tallyman(session)
        result = survey_tally(session, rng, allow_residual=not config.strict_basis)
        key = str(result.tally)
        counts[key] = counts.get(key, 0) + 1
        if honest and result.tally != expected:
            raise InvariantViolation(
                f"binary ballot tally {result.tally} != expected {expected}"
            )
        last_session, last_result = session, result
    values: dict[str, Any] = {
        "analytic_tally": expected,
        "raw_expectation": last_result.raw_expectation,
        "outcome_distribution": {
            str(k): v for k, v in last_result.outcome_distribution.items()
        },
    }
    detail: dict[str, Any] = {"transcript": session_transcript(last_session)}
    if config.per_trial:
        detail["final_state"] = last_session.state.to_json()
    return ScenarioReport(
        scenario="binary-ballot",
        params=config.params,
        trials=config.trials,
        seed=config.seed,
        counts=counts,
        estimates={
            "tamper_check_clean": binomial_estimate(
                tamper_clean, tamper_total, analytic=1.0
            )
        },
        values=values,
        detail=detail,
    )


def _attack_report_to_scenario(config: ScenarioConfig, attack_report) -> ScenarioReport:
    return ScenarioReport(
        scenario=config.scenario,
        params=config.params,
        trials=attack_report.trials,
        seed=config.seed,
        estimates=dict(attack_report.estimates),
        values={"metrics": attack_report.metrics},
        detail={"attack_report": attack_report.to_json()},
    )


def _run_collude_detect(config: ScenarioConfig) -> ScenarioReport:
    params = BallotParams(config.params["N"])
    report = collusion_detection_suite(
        params,
        trials=config.trials,
        seed=config.seed,
        votes=config.params.get("votes"),
        per_trial=config.per_trial,
    )
    return _attack_report_to_scenario(config, report)


def _run_agent_spin(config: ScenarioConfig) -> ScenarioReport:
    report = spin_attack_suite(
        config.params["vote"],
        config.params["width"],
        trials=config.trials,
        seed=config.seed,
        per_trial=config.per_trial,
    )
    return _attack_report_to_scenario(config, report)


def _run_cheat_voter(config: ScenarioConfig) -> ScenarioReport:
    params = BallotParams(config.params["N"])
    report = cheat_vote_analysis(
        params,
        width=config.params.get("width", 2),
        seed=config.seed,
        trials=config.trials,
    )
    return _attack_report_to_scenario(config, report)


def _run_multiparty_collude(config: ScenarioConfig) -> ScenarioReport:
    params = BallotParams(config.params["N"], config.params["K"])
    report = multiparty_collusion_attempt(
        params,
        seed=config.seed,
        trials=config.trials,
        per_trial=config.per_trial,
    )
    return _attack_report_to_scenario(config, report)


def _run_dcnet(config: ScenarioConfig) -> ScenarioReport:
    diners = config.params["diners"]
    payer = config.params.get("payer")
    pads_doc = config.params.get("pads")
    explicit_pads = None
    if pads_doc is not None:
        explicit_pads = {}
        for key, bit in pads_doc.items():
            try:
                a, b = (int(x) for x in key.split("-"))
            except ValueError:
                raise ConfigError(f"pads/{key}: pad keys look like 'i-j'") from None
            explicit_pads[(a, b)] = bit
    counts: dict[str, int] = {}
    matches = 0
    expected_bit = 1 if payer is not None else 0
    last_round = None
    for t in range(config.trials):
        source = explicit_pads if explicit_pads is not None else trial_rng(config.seed, t)
        rnd = run_round(diners, payer, source)
        key = f"sum{rnd.broadcast}"
        counts[key] = counts.get(key, 0) + 1
        matches += rnd.broadcast == expected_bit
        last_round = rnd
    if matches != config.trials:
        raise InvariantViolation("dcnet broadcast sum mismatched the payer indicator")
    detail: dict[str, Any] = {}
    if config.per_trial:
        detail["last_round"] = {
            "pads": {f"{a}-{b}": bit for (a, b), bit in last_round.pads.items()},
            "announcements": list(last_round.announcements),
        }
    return ScenarioReport(
        scenario="dcnet",
        params=config.params,
        trials=config.trials,
        seed=config.seed,
        counts=counts,
        estimates={
            "broadcast_matches_payer": binomial_estimate(
                matches, config.trials, analytic=1.0
            )
        },
        values={"expected_broadcast": expected_bit},
        detail=detail,
    )


def _run_complexity(config: ScenarioConfig) -> ScenarioReport:
    voters = config.params["voters"]
    if isinstance(voters, int):
        voters = [voters]
    table = {}
    for n in voters:
        pads, quantum = pad_complexity(n)
        table[str(n)] = {
            "classical_pads_total": pads,
            "classical_pads_per_voter": n - 1,
            "entangled_states_per_voter": quantum,
        }
    return ScenarioReport(
        scenario="complexity",
        params=config.params,
        trials=1,
        seed=config.seed,
        values={"table": table},
    )


_HANDLERS = {
    "comparative": _run_comparative,
    "survey": lambda c: _run_survey_like(c, multiparty=False),
    "multiparty": lambda c: _run_survey_like(c, multiparty=True),
    "binary-ballot": _run_binary_ballot,
    "collude-detect": _run_collude_detect,
    "agent-spin": _run_agent_spin,
    "cheat-voter": _run_cheat_voter,
    "multiparty-collude": _run_multiparty_collude,
    "dcnet": _run_dcnet,
    "complexity": _run_complexity,
}


def _suggest_smaller_n(config_doc: dict) -> int | None:
    """Largest N keeping the scenario's Hilbert dimension under the limit."""
    scenario = config_doc.get("scenario")
    if scenario == "survey" or scenario == "collude-detect":
        return math.isqrt(DIM_LIMIT) - 1
    if scenario in ("multiparty", "multiparty-collude", "binary-ballot", "cheat-voter"):
        mult = config_doc.get("K") or config_doc.get("agents") or 2
        n = 1
        while (mult * (n + 1) + 1) * (n + 2) ** mult <= DIM_LIMIT:
            n += 1
        return n
    return None


def _parse_int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip() != ""]


def _parse_str_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip() != ""]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON scenario document")
    common.add_argument("--seed", type=int, help="master seed (u64)")
    common.add_argument("--trials", type=int, help="Monte Carlo trials")
    common.add_argument("--out", help="write the report to this path")
    common.add_argument(
        "--strict-basis",
        action="store_true",
        default=None,
        help="error on any residual probability outside declared bases",
    )
    common.add_argument(
        "--signed-tally",
        action="store_true",
        default=None,
        help="also report the tally mapped to a signed residue",
    )
    common.add_argument(
        "--per-trial",
        action="store_true",
        default=None,
        help="include per-trial records / state snapshots in the report",
    )

    parser = argparse.ArgumentParser(
        prog="qvote",
        description="Entangled-ballot voting scenarios, attacks, and baselines.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("comparative", parents=[common], help="two-voter agreement test")
    p.add_argument("--vote-a", choices=["yes", "no"])
    p.add_argument("--vote-b", choices=["yes", "no"])

    p = sub.add_parser("survey", parents=[common], help="integer-valued anonymous survey")
    p.add_argument("--n", type=int, help="particle budget N")
    p.add_argument("--votes", type=_parse_int_list, help="comma-separated integers")

    p = sub.add_parser("multiparty", parents=[common], help="one voting site per voter")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int, help="number of voting sites")
    p.add_argument("--votes", type=_parse_int_list)

    p = sub.add_parser("binary-ballot", parents=[common], help="agent-mediated yes/no ballot")
    p.add_argument("--n", type=int)
    p.add_argument("--agents", type=int, choices=[2, 3])
    p.add_argument("--votes", type=_parse_str_list, help="comma-separated yes/no/cheat")

    p = sub.add_parser("attack", parents=[common], help="adversary simulations")
    p.add_argument(
        "--kind",
        choices=sorted(ATTACK_KINDS),
        required=False,
        help="which adversary to run",
    )
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--votes", type=_parse_int_list, help="fixed intermediate votes")
    p.add_argument("--vote", choices=["yes", "no"])
    p.add_argument("--width", type=int, choices=[2, 3])

    p = sub.add_parser("dcnet", parents=[common], help="dining-cryptographers round")
    p.add_argument("--diners", type=int)
    p.add_argument("--payer", type=int)

    p = sub.add_parser("complexity", parents=[common], help="pad-count comparison")
    p.add_argument("--voters", type=_parse_int_list, help="comma-separated voter counts")

    return parser


_CLI_PARAM_KEYS = {
    "comparative": {"vote_a": "vote_a", "vote_b": "vote_b"},
    "survey": {"n": "N", "votes": "votes"},
    "multiparty": {"n": "N", "k": "K", "votes": "votes"},
    "binary-ballot": {"n": "N", "agents": "agents", "votes": "votes"},
    "attack": {"n": "N", "k": "K", "votes": "votes", "vote": "vote", "width": "width"},
    "dcnet": {"diners": "diners", "payer": "payer"},
    "complexity": {"voters": "voters"},
}


def config_from_args(args: argparse.Namespace) -> ScenarioConfig:
    doc: dict[str, Any] = {}
    if args.config:
        try:
            with open(args.config) as fh:
                doc = json.load(fh)
        except OSError as err:
            raise ConfigError(f"config: cannot read {args.config}: {err}") from None
        except json.JSONDecodeError as err:
            raise ConfigError(f"config: invalid JSON: {err}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config: document must be a JSON object")
    if args.command == "attack":
        kind = getattr(args, "kind", None)
        if kind is not None:
            doc["scenario"] = ATTACK_KINDS[kind]
        elif "scenario" not in doc:
            raise ConfigError("kind: attack subcommand needs --kind or a config scenario")
        if doc.get("scenario") not in ATTACK_KINDS.values():
            raise ConfigError(
                f"scenario: {doc.get('scenario')!r} is not an attack scenario"
            )
    else:
        doc["scenario"] = args.command
    for arg_name, key in _CLI_PARAM_KEYS.get(args.command, {}).items():
        value = getattr(args, arg_name, None)
        if value is not None:
            doc[key] = value
    for name in ("seed", "trials", "out"):
        value = getattr(args, name, None)
        if value is not None:
            doc[name] = value
    for flag in ("strict_basis", "signed_tally", "per_trial"):
        value = getattr(args, flag, None)
        if value is not None:
            doc[flag] = value
    if isinstance(doc.get("voters"), list) and len(doc["voters"]) == 1:
        doc["voters"] = doc["voters"][0]
    return ScenarioConfig.from_dict(doc)


def emit_report(report: ScenarioReport, out: str | None) -> None:
    text = report.dumps()
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
        print(f"report written to {out}")
    else:
        print(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    doc_for_hint: dict = {}
    try:
        config = config_from_args(args)
        doc_for_hint = {"scenario": config.scenario, **config.params}
        report = run_scenario(config)
        emit_report(report, config.out)
        return 0
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except ProtocolError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except CutoffError as err:
        hint = _suggest_smaller_n(doc_for_hint)
        suffix = f" (largest feasible N here is {hint})" if hint else ""
        print(f"dimension overflow: {err}{suffix}", file=sys.stderr)
        return 3
    except (InvariantViolation, BasisError) as err:
        print(f"invariant violation: {err}", file=sys.stderr)
        return 4
    except QvoteError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
