# src/services/exceptions.py
"""
Custom exceptions per la pipeline di estrazione dei goal.

Ogni area (ground truth, prompting, gateway, orchestrator, evaluation,
reporting) ha la sua base class, così il CLI può mappare gli errori
sugli exit code senza conoscere i dettagli.
"""
import functools
import logging

import httpx

logger = logging.getLogger(__name__)


class GoreError(Exception):
    """Base exception per tutti gli errori applicativi."""
    pass


# ==========================================
# DOMAIN MODEL
# ==========================================

class SchemaError(GoreError):
    """
    Documento malformato rispetto allo schema JSON atteso.

    Examples:
        - JSON non valido
        - dataset con zero actors
        - campi mancanti o sconosciuti
    """
    pass


class IntegrityError(GoreError):
    """
    Riferimenti pendenti tra elementi del modello.

    Examples:
        - low-level goal con parent inesistente
        - high-level goal che nomina un actor assente
    """
    pass


# ==========================================
# PROMPTING
# ==========================================

class PromptingError(GoreError):
    pass


class MissingPlaceholder(PromptingError):
    """Il context non contiene un campo richiesto dal template."""

    def __init__(self, placeholder: str, template: str = ""):
        self.placeholder = placeholder
        where = f" in template '{template}'" if template else ""
        super().__init__(f"Missing placeholder '{placeholder}'{where}")


class StoreIncomplete(PromptingError):
    """Lo store non ha abbastanza shot examples per la strategia richiesta."""
    pass


# ==========================================
# LLM GATEWAY
# ==========================================

class GatewayError(GoreError):
    pass


class ProviderUnreachable(GatewayError):
    """Endpoint non raggiungibile dopo i retry."""
    pass


class RateLimited(GatewayError):
    """Provider ancora in 429 dopo i retry."""
    pass


class ReplayMiss(GatewayError):
    """Nessuna entry registrata per il digest richiesto."""

    def __init__(self, role: str, digest: str):
        self.role = role
        self.digest = digest
        super().__init__(f"No recorded {role} response for digest {digest[:12]}")


class NonZeroTemperature(GatewayError):
    """Richiesta rifiutata prima dell'invio: temperature deve essere 0."""
    pass


class OutputParseFailure(GatewayError):
    """Nessun documento JSON conforme allo schema nella risposta."""
    pass


class CritiqueParseFailure(GatewayError):
    """Risposta del critic senza score valido in [0, 10]."""
    pass


# ==========================================
# ORCHESTRATOR
# ==========================================

class PipelineError(GoreError):
    pass


class PreconditionViolation(PipelineError):
    pass


class StageFailed(PipelineError):
    """
    Fallimento non recuperabile di una fase della pipeline.

    L'attributo phase identifica la fase (preprocess, actors, high_level,
    low_level, api_mapping); gli output delle fasi precedenti sono già
    stati persistiti dal checkpoint.
    """

    def __init__(self, phase: str, message: str):
        self.phase = phase
        super().__init__(f"Stage '{phase}' failed: {message}")


# ==========================================
# EVALUATION
# ==========================================

class EvaluationError(GoreError):
    pass


class DimensionMismatch(EvaluationError):
    pass


class ZeroVector(EvaluationError):
    pass


class BackendUnreachable(EvaluationError):
    pass


# ==========================================
# REPORTING
# ==========================================

class ReportingError(GoreError):
    pass


class CellMismatch(ReportingError):
    """Report di ablation che non coprono le stesse celle."""

    def __init__(self, missing_in_a, missing_in_b):
        self.missing_in_a = sorted(missing_in_a)
        self.missing_in_b = sorted(missing_in_b)
        parts = []
        if self.missing_in_b:
            parts.append("absent in B: " + ", ".join("/".join(c) for c in self.missing_in_b))
        if self.missing_in_a:
            parts.append("absent in A: " + ", ".join("/".join(c) for c in self.missing_in_a))
        super().__init__("Cell mismatch; " + "; ".join(parts))


class MissingArtifact(ReportingError):
    pass


class DuplicateCell(ReportingError):
    """Un report di ablation con più righe per la stessa cella."""

    def __init__(self, side: str, cells):
        self.side = side
        self.cells = sorted(cells)
        super().__init__(f"Report {side} has more than one row for: " + ", ".join("/".join(c) for c in self.cells))


class CriticSettingMismatch(ReportingError):
    """Report A deve avere solo righe con critic, B solo righe senza."""

    def __init__(self, side: str, expected_critic: bool, cells):
        self.side = side
        self.cells = sorted(cells)
        expected = "on" if expected_critic else "off"
        super().__init__(
            f"Report {side} must hold critic-{expected} rows only; offending cells: "
            + ", ".join("/".join(c) for c in self.cells)
        )


# ==========================================
# DECORATORS
# ==========================================

def handle_provider_errors(role_attr: str = "role"):
    """
    Decorator che converte gli errori httpx in eccezioni del gateway.

    Usage:
        @handle_provider_errors()
        def complete(self, request):
            # HTTP call
    """
    def decorator(func):
        @functools.wraps(func)
        def wrapper(self, *args, **kwargs):
            role = getattr(self, role_attr, "provider")
            try:
                return func(self, *args, **kwargs)
            except GatewayError:
                raise
            except httpx.HTTPStatusError as e:
                if e.response.status_code == 429:
                    logger.warning(f"{role}: rate limited after retries")
                    raise RateLimited(f"{role} endpoint still rate limited after retries") from e
                raise ProviderUnreachable(f"{role} endpoint returned HTTP {e.response.status_code}") from e
            except httpx.HTTPError as e:
                logger.warning(f"{role}: transport failure after retries: {e!r}")
                raise ProviderUnreachable(f"{role} endpoint unreachable: {e}") from e

        return wrapper
    return decorator
