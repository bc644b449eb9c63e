# =====================================================
# test/services/test_evaluation.py
# =====================================================
import pytest

from src.schemas.evaluation import EvalTask, MatchingArc, MatchingResult
from src.schemas.goal_model import Actor, Goal, GoalLevel, GoalModel, GroundTruthDataset, RunProvenance
from src.schemas.run_config import MetricConvention
from src.services.embeddings import HashingEmbedder
from src.services.evaluation import build_report, compute_metrics, evaluate_run
from src.services.ground_truth import load_ground_truth


def _matching(*weights: float) -> MatchingResult:
    return MatchingResult(arcs=[MatchingArc(generated=i, reference=i, similarity=w) for i, w in enumerate(weights)])


class TestComputeMetrics:

    def test_perfect_match(self):
        metrics = compute_metrics(_matching(1.0, 1.0), 2, 2)

        assert (metrics.precision, metrics.recall, metrics.f1) == (1.0, 1.0, 1.0)

    def test_rectangular_generated_recall_convention(self):
        # due generati, tre di riferimento, entrambi identici a un riferimento
        metrics = compute_metrics(_matching(1.0, 1.0), 2, 3)

        assert metrics.recall == pytest.approx(1.0)
        assert metrics.precision == pytest.approx(0.6667, abs=1e-4)
        assert metrics.f1 == pytest.approx(0.8)

    def test_bertscore_swaps_denominators(self):
        metrics = compute_metrics(_matching(1.0, 1.0), 2, 3, MetricConvention.BERTSCORE)

        assert metrics.precision == pytest.approx(1.0)
        assert metrics.recall == pytest.approx(0.6667, abs=1e-4)
        assert metrics.f1 == pytest.approx(0.8)

    @pytest.mark.parametrize("size_x,size_y", [(0, 3), (3, 0), (0, 0)])
    def test_empty_side_is_zero(self, size_x, size_y):
        metrics = compute_metrics(MatchingResult(), size_x, size_y)

        assert (metrics.precision, metrics.recall, metrics.f1) == (0.0, 0.0, 0.0)

    def test_zero_weight(self):
        assert compute_metrics(_matching(0.0), 1, 1).f1 == 0.0

    def test_too_many_arcs(self):
        with pytest.raises(ValueError):
            compute_metrics(_matching(1.0, 1.0, 1.0), 2, 5)


class TestEvaluateRun:

    @pytest.fixture
    def truth(self, data_dir) -> GroundTruthDataset:
        return load_ground_truth(data_dir / "datasets" / "london_ambulance.json")

    def test_identity_scores_one(self, truth):
        rows = evaluate_run(truth.as_goal_model(), truth, HashingEmbedder(), strategy="few-shot", critic_enabled=True)

        assert [r.task for r in rows] == [EvalTask.ACTORS, EvalTask.HIGH_LEVEL, EvalTask.LOW_LEVEL]
        for row in rows:
            assert row.metrics.f1 == pytest.approx(1.0)
            assert row.size_generated == row.size_reference

    def test_rows_carry_provenance(self, truth):
        model = truth.as_goal_model().model_copy(update={"provenance": RunProvenance(
            strategy="one-shot", critic_enabled=False, quality_threshold=8.5, max_iterations=3,
        )})

        rows = evaluate_run(model, truth, HashingEmbedder())

        assert {(r.strategy, r.critic_enabled) for r in rows} == {("one-shot", False)}
        assert rows[1].reference == [g.text for g in truth.high_level]

    def test_rectangular_goal_sets(self):
        truth = GroundTruthDataset(
            dataset_id="tiny",
            actors=[Actor(name="Clerk")],
            high_level=[
                Goal(text="Register customers", level=GoalLevel.HIGH, actor_ref="Clerk"),
                Goal(text="Print invoices", level=GoalLevel.HIGH, actor_ref="Clerk"),
                Goal(text="Archive contracts", level=GoalLevel.HIGH, actor_ref="Clerk"),
            ],
            low_level=[Goal(text="Open the form", level=GoalLevel.LOW, parent_ref=0)],
        )
        model = GoalModel(
            project_id="tiny",
            actors=[Actor(name="Clerk")],
            high_level=[
                Goal(text="Register customers", level=GoalLevel.HIGH, actor_ref="Clerk"),
                Goal(text="Print invoices", level=GoalLevel.HIGH, actor_ref="Clerk"),
            ],
        )

        rows = evaluate_run(model, truth, HashingEmbedder(), strategy="zero-shot")
        high_level = rows[1].metrics

        assert high_level.recall == pytest.approx(1.0)
        assert high_level.precision == pytest.approx(2 / 3)
        assert high_level.f1 == pytest.approx(0.8)
        assert rows[2].metrics.f1 == 0.0

    def test_actor_names_compared_raw(self):
        truth = GroundTruthDataset(
            dataset_id="tiny",
            actors=[Actor(name="Call Handler")],
            high_level=[Goal(text="Answer calls", level=GoalLevel.HIGH, actor_ref="Call Handler")],
            low_level=[Goal(text="Pick up", level=GoalLevel.LOW, parent_ref=0)],
        )
        model = GoalModel(project_id="tiny", actors=[Actor(name="call handler")])

        rows = evaluate_run(model, truth, HashingEmbedder())

        assert rows[0].generated == ["call handler"]
        assert rows[0].metrics.f1 == pytest.approx(1.0)


class TestBuildReport:

    def test_ordering(self, data_dir):
        truth = load_ground_truth(data_dir / "datasets" / "london_ambulance.json")
        off = evaluate_run(truth.as_goal_model(), truth, HashingEmbedder(), strategy="few-shot", critic_enabled=False)
        on = evaluate_run(truth.as_goal_model(), truth, HashingEmbedder(), strategy="few-shot", critic_enabled=True)

        report = build_report(list(reversed(off + on)), MetricConvention.GENERATED_RECALL, "hashing")

        assert [r.critic_enabled for r in report.rows] == [True] * 3 + [False] * 3
        assert [r.task for r in report.rows[:3]] == [EvalTask.ACTORS, EvalTask.HIGH_LEVEL, EvalTask.LOW_LEVEL]
        assert report.metric_convention == "generated-recall"
