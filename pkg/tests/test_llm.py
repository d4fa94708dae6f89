import json

import numpy as np
import pytest

from causalkit import fixtures, nsclc
from causalkit.errors import CyclicDraft, ReplayMiss, VariableAliasUnknown
from causalkit.graph import Dag
from causalkit.llm import (
    ElicitationTranscript,
    ReplayBackend,
    elicit_graph,
    pairwise_prompts,
    parse_adjacency_response,
    parse_verdict,
    refine,
    render_pairwise_prompt,
    render_single_prompt,
)

SCHEME = nsclc.SCHEME


class TestPrompts:
    def test_pairwise_prompt_uses_display_names(self):
        prompt = render_pairwise_prompt("AGE", "GENDER")
        assert prompt == "Does age effect Gender in NSCLC"
        prompt = render_pairwise_prompt("KRAS", "SURVIVALMONTHS")
        assert prompt == "Does KRAS mutation effect survival in NSCLC"

    def test_same_variable_rejected(self):
        with pytest.raises(ValueError):
            render_pairwise_prompt("AGE", "AGE")

    def test_symmetric_mode_counts(self):
        prompts = pairwise_prompts(SCHEME)
        assert len(prompts) == 18 * 17 // 2 == 153
        assert len({p for _, _, p in prompts}) == 153

    def test_ordered_mode_counts(self):
        prompts = pairwise_prompts(SCHEME, mode="ordered")
        assert len(prompts) == 18 * 17 == 306

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            pairwise_prompts(SCHEME, mode="both")

    def test_single_prompt_layout(self):
        prompt = render_single_prompt(SCHEME, ("mutation doesn't cause symptoms.",))
        assert prompt.startswith(
            "Generate me a cause effect adjacency matrix for these nodes "
        )
        assert "AGE, SMOKING" in prompt
        assert prompt.endswith("mutation doesn't cause symptoms.")


class TestParseVerdict:
    @pytest.mark.parametrize(
        "cause,effect,completion,expected", fixtures.PAIRWISE_FIXTURES
    )
    def test_recorded_fixtures(self, cause, effect, completion, expected):
        verdict = parse_verdict(completion, cause, effect)
        assert verdict.verdict == expected
        assert verdict.cause == cause and verdict.effect == effect

    def test_leading_yes(self):
        assert parse_verdict("Yes, it does.", "A", "B").verdict == "yes"
        assert parse_verdict("Yes it can.", "A", "B").verdict == "yes"

    def test_negation_beats_later_affirmation(self):
        text = "They do not have a direct cause, though age can have an impact on it."
        assert parse_verdict(text, "A", "B").verdict == "no"

    def test_uncertain_fallback(self):
        verdict = parse_verdict("It is hard to say.", "A", "B")
        assert verdict.verdict == "uncertain"
        assert verdict.matched is None


class TestAdjacencyParser:
    def test_recorded_single_response(self):
        matrix, unparsed = parse_adjacency_response(
            fixtures.SINGLE_PROMPT_RESPONSE, SCHEME
        )
        edges = {
            (SCHEME.names[u], SCHEME.names[v])
            for u, v in zip(*np.nonzero(matrix))
        }
        assert edges == set(nsclc.v1_edges())
        assert len(edges) == 43
        # Suppression clause: no gene causes a symptom.
        assert not any(
            u in nsclc.GENES and v in nsclc.SYMPTOMS for u, v in edges
        )

    def test_alias_resolves(self):
        matrix, _ = parse_adjacency_response(
            "WEIGHTLOSS can affect the SURVIVAL_MONTHS.", SCHEME
        )
        u = SCHEME.index("WEIGHTLOSS")
        v = SCHEME.index("SURVIVALMONTHS")
        assert matrix[u, v] == 1

    def test_unknown_uppercase_token_raises(self):
        with pytest.raises(VariableAliasUnknown):
            parse_adjacency_response("BLOODTYPE can affect the AGE.", SCHEME)

    def test_unparsed_sentences_reported(self):
        text = "This sentence states nothing causal. AGE can affect the STAGEGROUP."
        matrix, unparsed = parse_adjacency_response(text, SCHEME)
        assert unparsed == ["This sentence states nothing causal."]
        assert matrix.sum() == 1

    def test_cycle_raises_cyclic_draft(self):
        text = "AGE can affect the SMOKING. SMOKING can affect the AGE."
        with pytest.raises(CyclicDraft) as info:
            parse_adjacency_response(text, SCHEME)
        assert ("AGE", "SMOKING") in info.value.edges

    def test_chain_marker(self):
        text = "CHESTPAIN can indicate the STAGEGROUP, which in turn influences the TREATMENTPLAN."
        matrix, _ = parse_adjacency_response(text, SCHEME)
        assert matrix[SCHEME.index("CHESTPAIN"), SCHEME.index("STAGEGROUP")] == 1
        assert matrix[SCHEME.index("STAGEGROUP"), SCHEME.index("TREATMENTPLAN")] == 1
        assert matrix[SCHEME.index("CHESTPAIN"), SCHEME.index("TREATMENTPLAN")] == 0


class TestReplayBackend:
    def test_hit_and_miss(self):
        backend = ReplayBackend({"p": "c"})
        assert backend.send("p") == "c"
        with pytest.raises(ReplayMiss):
            backend.send("q")

    def test_jsonl_round_trip(self, tmp_path):
        path = tmp_path / "replay.jsonl"
        fixtures.write_replay_file(path, {"p1": "c1", "p2": "c2"})
        backend = ReplayBackend.from_jsonl(path)
        assert backend.send("p1") == "c1"
        assert backend.send("p2") == "c2"

    def test_transcript_jsonl_is_replayable(self):
        backend = fixtures.pairwise_replay_backend()
        _, transcript = elicit_graph("pairwise", SCHEME, backend)
        lines = transcript.to_jsonl().strip().splitlines()
        assert len(lines) == 153
        replay = ReplayBackend(
            {
                json.loads(line)["prompt"]: json.loads(line)["completion"]
                for line in lines
            }
        )
        dag2, _ = elicit_graph("pairwise", SCHEME, replay)
        dag1, _ = elicit_graph("pairwise", SCHEME, backend)
        assert dag1.edges == dag2.edges


class TestElicitation:
    def test_pairwise_yields_recorded_yes_edges(self):
        backend = fixtures.pairwise_replay_backend()
        dag, transcript = elicit_graph("pairwise", SCHEME, backend)
        edges = {
            (SCHEME.names[u], SCHEME.names[v]) for u, v in dag.edges
        }
        assert edges == {
            ("AGE", "SURVIVALMONTHS"),
            ("KRAS", "SURVIVALMONTHS"),
            ("TREATMENTPLAN", "SURVIVALMONTHS"),
        }
        assert len(transcript.exchanges) == 153
        assert transcript.latest_draft[0] == "V1"

    def test_single_yields_v1(self):
        backend = fixtures.refinement_replay_backend()
        dag, transcript = elicit_graph("single", SCHEME, backend)
        assert dag.edges == nsclc.v1_dag().edges
        assert transcript.latest_draft[0] == "V1"

    def test_unknown_strategy(self):
        with pytest.raises(ValueError):
            elicit_graph("vote", SCHEME, ReplayBackend({}))


class TestRefinement:
    def test_full_session_drafts(self):
        session = fixtures.run_refinement_session()
        labels = [label for label, _ in session.drafts]
        assert labels == ["V1", "V2", "V3", "V4", "V5"]
        final = {
            (SCHEME.names[u], SCHEME.names[v])
            for u, v in session.latest_draft[1]
        }
        assert final == set(nsclc.v5_edges())

    def test_diffs_record_stated_changes(self):
        session = fixtures.run_refinement_session()
        name = lambda e: (SCHEME.names[e[0]], SCHEME.names[e[1]])
        v2_added = {name(e) for e in session.diffs[1]["added"]}
        assert v2_added == {("AGE", "SMOKING")}
        v3_added = {name(e) for e in session.diffs[2]["added"]}
        assert ("SMOKING", "KRAS") in v3_added
        assert ("STAGEGROUP", "EGFR") in v3_added
        v3_removed = {name(e) for e in session.diffs[2]["removed"]}
        assert ("KRAS", "STAGEGROUP") in v3_removed
        v5_added = {name(e) for e in session.diffs[4]["added"]}
        assert v5_added == {("TREATMENTPLAN", "SURVIVALMONTHS")}

    def test_transcript_append_only(self):
        session = fixtures.run_refinement_session()
        assert len(session.exchanges) == 5  # 1 elicitation + 4 corrections
        assert isinstance(session, ElicitationTranscript)

    def test_refine_requires_draft(self):
        with pytest.raises(ValueError):
            refine(ElicitationTranscript(), "fix it", ReplayBackend({}), SCHEME)

    def test_final_draft_is_acyclic_dag(self):
        session = fixtures.run_refinement_session()
        Dag(SCHEME, frozenset(session.latest_draft[1]))  # must not raise


class TestNsclcDrafts:
    def test_v1_edge_count(self):
        assert len(nsclc.v1_edges()) == 43

    def test_v5_contains_stated_additions(self):
        v5 = set(nsclc.v5_edges())
        assert ("AGE", "SMOKING") in v5
        assert ("TREATMENTPLAN", "SURVIVALMONTHS") in v5
        for gene in nsclc.GENES:
            assert ("SMOKING", gene) in v5
            assert ("STAGEGROUP", gene) in v5
            assert (gene, "STAGEGROUP") not in v5

    def test_drafts_are_dags(self):
        nsclc.v1_dag()
        nsclc.v5_dag()
