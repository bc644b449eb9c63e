# =====================================================
# src/services/metrics.py - Prometheus instruments
# =====================================================
from prometheus_client import Counter, Histogram

CHAT_REQUESTS = Counter(
    "gore_chat_requests_total",
    "Chat-completion requests sent through the gateway",
    ["role", "mode"],
)

CHAT_FAILURES = Counter(
    "gore_chat_failures_total",
    "Chat-completion requests that ended with an error",
    ["role", "reason"],
)

STAGE_ITERATIONS = Histogram(
    "gore_stage_iterations",
    "Generator-critic iterations used per stage",
    ["stage"],
    buckets=(1, 2, 3, 4, 5, 10),
)

CRITIC_SCORE = Histogram(
    "gore_critic_score",
    "Scores returned by the critic",
    ["stage"],
    buckets=(1, 2, 3, 4, 5, 6, 7, 8, 8.5, 9, 10),
)
