"""Recorded elicitation transcripts bundled for replay.

These are the canned prompt/completion exchanges used by the test suite and
by `elicit --backend replay` when no transcript file is supplied: the five
published pairwise exchanges, the whole-graph single-prompt response, and
the four-correction refinement session that produces draft versions V1
through V5.
"""

from __future__ import annotations

import json

from . import nsclc
from .llm import (
    ElicitationTranscript,
    ReplayBackend,
    elicit_graph,
    pairwise_prompts,
    refine,
    render_pairwise_prompt,
    render_single_prompt,
)

# (cause, effect, completion, expected verdict) for the five recorded
# pairwise exchanges.
PAIRWISE_FIXTURES = (
    (
        "AGE",
        "GENDER",
        "Age and gender can both independently influence the development and "
        "characteristics of non-small cell lung cancer (NSCLC), but they do "
        "not have a direct cause-and-effect relationship with each other",
        "no",
    ),
    (
        "AGE",
        "SURVIVALMONTHS",
        "Yes, age can have an impact on survival analysis",
        "yes",
    ),
    (
        "AGE",
        "SHORTNESSOFBREATH",
        "Age itself does not directly cause shortness of breath in NSCLC",
        "no",
    ),
    (
        "KRAS",
        "SURVIVALMONTHS",
        "KRAS mutation subtype: There are different subtypes of KRAS "
        "mutations and some studies have suggested that specific subtypes "
        "may have varying impacts on survival",
        "yes",
    ),
    (
        "TREATMENTPLAN",
        "SURVIVALMONTHS",
        "Therapy can have a significant impact on the survival outcomes of "
        "patients with NSCLC, particularly those with specific molecular "
        "alterations that are targeted by the therapy.",
        "yes",
    ),
)

_UNCERTAIN_COMPLETION = "The relationship between these variables is unclear."

SINGLE_PROMPT_RESPONSE = (
    "In order to create a cause-effect adjacency matrix, we need to "
    "understand the relationships between the given nodes. Here's a "
    "possible interpretation of the relationships between them: "
    "AGE can affect the TREATMENTPLAN and SURVIVALMONTHS. "
    "SMOKING can lead to CHESTPAIN, SHORTNESSOFBREATH, and can affect the "
    "TREATMENTPLAN, SURVIVALMONTHS, and STAGEGROUP. "
    "GENDER can affect the TREATMENTPLAN and SURVIVALMONTHS. "
    "SHORTNESSOFBREATH and CHESTPAIN can indicate the STAGEGROUP, which in "
    "turn influences the TREATMENTPLAN and SURVIVALMONTHS. "
    "WEIGHTLOSS can also indicate the STAGEGROUP and can affect the "
    "TREATMENTPLAN and SURVIVAL_MONTHS. "
    "Mutations (KRAS, EGFR, FGFR1, ALK, MET, PIK3CA, BRAF, ROS1, RET) do "
    "not cause symptoms (as per the user's instructions) but they can "
    "affect the TREATMENTPLAN, SURVIVALMONTHS, and STAGEGROUP."
)

# The four recorded correction turns and the edge lists of the drafts each
# canned reply restates.
REFINEMENT_CORRECTIONS = (
    "how age is not cause smoking please relook into the adjacency matrix "
    "and generate a correct one.",
    "the stage group and smoking should cause some mutation in nsclc",
    "please reinvestigate how mutation is effecting the treatment plan and "
    "survival months",
    "treatment plan should effect survival months",
)


def _v2_edges():
    return nsclc.v1_edges() + [("AGE", "SMOKING")]


def _v3_edges():
    edges = [e for e in _v2_edges() if not (e[0] in nsclc.GENES and e[1] == "STAGEGROUP")]
    for gene in nsclc.GENES:
        edges += [("SMOKING", gene), ("STAGEGROUP", gene)]
    return edges


def _v4_edges():
    return _v3_edges()


def _v5_edges():
    return _v4_edges() + [("TREATMENTPLAN", "SURVIVALMONTHS")]


REFINEMENT_DRAFT_EDGES = (_v2_edges, _v3_edges, _v4_edges, _v5_edges)


def edges_to_reply(edges) -> str:
    """Render an edge list as prose the adjacency parser accepts."""
    by_source: dict[str, list[str]] = {}
    for src, dst in edges:
        by_source.setdefault(src, []).append(dst)
    sentences = ["Here is the corrected adjacency matrix."]
    for src in sorted(by_source):
        targets = sorted(set(by_source[src]))
        sentences.append(f"{src} can affect the {', '.join(targets)}.")
    sentences.append(
        f"Mutations ({', '.join(nsclc.GENES)}) do not cause symptoms."
    )
    return " ".join(sentences)


def pairwise_replay_backend(context: str = "NSCLC") -> ReplayBackend:
    """All 153 symmetric-mode prompts: the five recorded completions for
    their pairs (in the recorded ask direction), a neutral completion for
    the rest."""
    recorded = {
        frozenset((cause, effect)): (cause, effect, completion)
        for cause, effect, completion, _ in PAIRWISE_FIXTURES
    }
    exchanges = {}
    for cause, effect, prompt in pairwise_prompts(nsclc.SCHEME, context):
        key = frozenset((cause, effect))
        if key in recorded:
            asked_cause, asked_effect, completion = recorded[key]
            prompt = render_pairwise_prompt(asked_cause, asked_effect, context)
            exchanges[prompt] = completion
        else:
            exchanges[prompt] = _UNCERTAIN_COMPLETION
    return ReplayBackend(exchanges)


def refinement_replay_backend() -> ReplayBackend:
    """Replay map covering the single prompt and all four correction turns."""
    scheme = nsclc.SCHEME
    exchanges = {
        render_single_prompt(
            scheme, ("mutation doesn't cause symptoms.",)
        ): SINGLE_PROMPT_RESPONSE
    }
    # Correction prompts embed the previous draft's edge list, so build the
    # session forward to reproduce the exact prompt bytes.
    backend = ReplayBackend(exchanges)
    _, session = elicit_graph("single", scheme, backend)
    for correction, edge_fn in zip(REFINEMENT_CORRECTIONS, REFINEMENT_DRAFT_EDGES):
        reply = edges_to_reply(edge_fn())
        _, current = session.latest_draft
        edge_text = "; ".join(
            f"{scheme.names[u]} -> {scheme.names[v]}" for u, v in current
        )
        prompt = f"{correction}\nCurrent edges: {edge_text}"
        exchanges[prompt] = reply
        backend = ReplayBackend(exchanges)
        session = refine(session, correction, backend, scheme)
    return ReplayBackend(exchanges)


def run_refinement_session(backend=None) -> ElicitationTranscript:
    """Single-prompt elicitation plus the four recorded corrections."""
    scheme = nsclc.SCHEME
    backend = backend or refinement_replay_backend()
    _, session = elicit_graph("single", scheme, backend)
    for correction in REFINEMENT_CORRECTIONS:
        session = refine(session, correction, backend, scheme)
    return session


def write_replay_file(path, backend_exchanges: dict[str, str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for prompt, completion in backend_exchanges.items():
            fh.write(
                json.dumps({"prompt": prompt, "completion": completion, "time": 0.0})
                + "\n"
            )
