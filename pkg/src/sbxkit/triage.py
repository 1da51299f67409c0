"""Pre-participation self-assessment: questionnaire, rules and routing.

Questionnaires and rule sets are data, not code: they live in `.sbx`
documents (top-level ``questionnaire`` and ``rules`` blocks) so a competent
authority can revise them without touching the toolkit.  A bundled default
encodes the familiar risk taxonomy; see ``data/questionnaire.sbx``.

The outcome is non-binding guidance and every rendering says so.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from importlib import resources
from typing import Any

from .dsl.binding import BlockReader, check_unique, identifier_label
from .dsl.model import RiskClass
from .dsl.syntax import ParseError, RawBlock, parse_raw

NON_BINDING_NOTICE = "non-binding guidance"

_RISK_PRIORITY = {
    RiskClass.MINIMAL: 0,
    RiskClass.LIMITED: 1,
    RiskClass.HIGH: 2,
    RiskClass.PROHIBITED: 3,
}


class Route(enum.Enum):
    HELPDESK = "helpdesk"
    CORE_AIRS = "core_airs"
    EXTENDED_AIRS = "extended_airs"
    CEASE_OR_REDESIGN = "cease_or_redesign"


ROUTING_TABLE: dict[RiskClass, tuple[Route, ...]] = {
    RiskClass.MINIMAL: (Route.HELPDESK,),
    RiskClass.LIMITED: (Route.HELPDESK, Route.CORE_AIRS),
    RiskClass.HIGH: (Route.EXTENDED_AIRS,),
    RiskClass.PROHIBITED: (Route.CEASE_OR_REDESIGN,),
}


class TriageError(ValueError):
    pass


class AnswerKind(enum.Enum):
    BOOLEAN = "boolean"
    SINGLE_CHOICE = "single_choice"


@dataclass(frozen=True)
class Question:
    question_id: str
    text: str
    answer_kind: AnswerKind
    choices: tuple[str, ...] = ()


@dataclass
class Questionnaire:
    version: str
    questions: list[Question]

    def question_ids(self) -> list[str]:
        return [q.question_id for q in self.questions]


@dataclass(frozen=True)
class Rule:
    """Fires when every condition matches the corresponding answer."""

    rule_id: str
    risk_class: RiskClass
    conditions: tuple[tuple[str, Any], ...]


@dataclass
class RuleSet:
    version: str
    rules: list[Rule]


@dataclass
class AnswerSet:
    questionnaire_version: str
    answers: dict[str, Any]


@dataclass
class TriageOutcome:
    risk_class: RiskClass
    routes: tuple[Route, ...]
    rationale: list[str] = field(default_factory=list)

    def to_data(self) -> dict[str, Any]:
        return {
            "risk_class": self.risk_class.value,
            "routes": [r.value for r in self.routes],
            "rationale": list(self.rationale),
            "notice": NON_BINDING_NOTICE,
        }


# --- document loading -------------------------------------------------------


def load_triage_document(source: str) -> tuple[Questionnaire, RuleSet]:
    blocks = parse_raw(source)
    questionnaire = None
    ruleset = None
    for block in blocks:
        if block.keyword == "questionnaire":
            questionnaire = _bind_questionnaire(block)
        elif block.keyword == "rules":
            ruleset = _bind_rules(block)
    if questionnaire is None:
        raise TriageError("document has no 'questionnaire' block")
    if ruleset is None:
        raise TriageError("document has no 'rules' block")
    known = set(questionnaire.question_ids())
    for rule in ruleset.rules:
        for question_id, _ in rule.conditions:
            if question_id not in known:
                raise TriageError(
                    f"rule '{rule.rule_id}' references unknown question '{question_id}'")
    return questionnaire, ruleset


def _bind_questionnaire(block: RawBlock) -> Questionnaire:
    reader = BlockReader(block, "questionnaire")
    version = reader.string("version")
    questions: list[Question] = []
    labels = []
    for child in reader.children(["question"]):
        question_id = identifier_label(child, "question")
        labels.append((question_id, child.pos))
        body = BlockReader(child, f"questionnaire.{question_id}")
        kind = body.enum("answer_kind", AnswerKind)
        choices = tuple(body.atom_set("choices", default=()))
        if kind is AnswerKind.SINGLE_CHOICE and not choices:
            raise ParseError(f"single_choice question '{question_id}' needs choices", child.pos)
        questions.append(Question(question_id, body.string("text"), kind, choices))
    check_unique(labels, "question")
    return Questionnaire(version, questions)


def _bind_rules(block: RawBlock) -> RuleSet:
    reader = BlockReader(block, "rules")
    version = reader.string("version")
    rules: list[Rule] = []
    labels = []
    for child in reader.children(["rule"]):
        rule_id = identifier_label(child, "rule")
        labels.append((rule_id, child.pos))
        body = BlockReader(child, f"rules.{rule_id}")
        risk = body.enum("risk_class", RiskClass)
        when = body.child("when", required=True)
        conditions = tuple(sorted(BlockReader(when, f"rules.{rule_id}.when").literal_map().items()))
        rules.append(Rule(rule_id, risk, conditions))
    check_unique(labels, "rule")
    return RuleSet(version, rules)


def load_answers(source: str) -> AnswerSet:
    blocks = parse_raw(source)
    if len(blocks) != 1 or blocks[0].keyword != "answers":
        raise TriageError("expected one top-level 'answers' block")
    reader = BlockReader(blocks[0], "answers")
    version = reader.string("questionnaire_version")
    values_block = reader.child("values", required=True)
    values = BlockReader(values_block, "answers.values").literal_map()
    return AnswerSet(version, values)


def default_triage_document() -> tuple[Questionnaire, RuleSet]:
    source = resources.files("sbxkit.data").joinpath("questionnaire.sbx").read_text("utf-8")
    return load_triage_document(source)


# --- classification -----------------------------------------------------------


def classify(answers: AnswerSet, questionnaire: Questionnaire, rules: RuleSet) -> TriageOutcome:
    """Map a complete answer set to a risk class and participation routes.

    The risk class is the highest-priority class among fired rules (minimal
    when none fire); the rationale lists every fired rule id.
    """
    if answers.questionnaire_version != questionnaire.version:
        raise TriageError(
            f"answer set targets questionnaire version '{answers.questionnaire_version}' "
            f"but the questionnaire is version '{questionnaire.version}'")

    expected = set(questionnaire.question_ids())
    provided = set(answers.answers)
    missing = sorted(expected - provided)
    if missing:
        raise TriageError("answer set is incomplete; missing: " + ", ".join(missing))
    unknown = sorted(provided - expected)
    if unknown:
        raise TriageError("answer set has unknown question ids: " + ", ".join(unknown))

    by_id = {q.question_id: q for q in questionnaire.questions}
    for question_id, value in answers.answers.items():
        question = by_id[question_id]
        if question.answer_kind is AnswerKind.BOOLEAN and not isinstance(value, bool):
            raise TriageError(f"answer to '{question_id}' must be true or false")
        if question.answer_kind is AnswerKind.SINGLE_CHOICE and value not in question.choices:
            raise TriageError(
                f"answer to '{question_id}' must be one of: " + ", ".join(question.choices))

    fired = [rule for rule in rules.rules
             if all(answers.answers.get(q) == expected_value
                    for q, expected_value in rule.conditions)]
    risk = RiskClass.MINIMAL
    for rule in fired:
        if _RISK_PRIORITY[rule.risk_class] > _RISK_PRIORITY[risk]:
            risk = rule.risk_class
    return TriageOutcome(
        risk_class=risk,
        routes=route(risk),
        rationale=sorted(rule.rule_id for rule in fired),
    )


def route(risk_class: RiskClass) -> tuple[Route, ...]:
    return ROUTING_TABLE[risk_class]
