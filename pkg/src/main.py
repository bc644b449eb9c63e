# main.py - Gore Extract run registry API
from fastapi import Depends, FastAPI, HTTPException, Query
from fastapi.responses import JSONResponse
from fastapi.middleware.cors import CORSMiddleware
from prometheus_client import make_asgi_app
from sqlalchemy.orm import Session
from typing import List, Optional
import os
import uvicorn

from src.database.connection import (
    check_database_connection,
    create_registry_engine,
    create_session_factory,
    ensure_schema,
    get_registry_url,
    session_dependency,
)
from src.schemas.registry import AblationPairOut, BestEvaluationOut, EvaluationOut, RunDetail, RunList, RunSummary
from src.services.repository_factory import RepositoryFactory

VERSION = os.getenv("VERSION", "0.1.0")


def create_app(registry_url: Optional[str] = None) -> FastAPI:
    """
    API in sola lettura sul run registry.

    Nessuna scrittura: run e valutazioni vengono registrate dal CLI.
    """
    url = registry_url or get_registry_url()
    engine = create_registry_engine(url)
    ensure_schema(engine)
    session_factory = create_session_factory(engine)

    app = FastAPI(
        title="Gore Extract Registry API",
        description="Read-only access to goal-model extraction runs and their evaluations",
        version=VERSION,
    )
    app.state.registry_url = url
    app.state.engine = engine

    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_credentials=True,
        allow_methods=["GET"],
        allow_headers=["*"],
    )
    app.mount("/metrics", make_asgi_app())

    get_db = session_dependency(session_factory)

    def get_repositories(db: Session = Depends(get_db)) -> RepositoryFactory:
        return RepositoryFactory(db)

    @app.get("/health")
    def health_check():
        if not check_database_connection(engine):
            return JSONResponse(status_code=503, content={"version": VERSION, "registry": "unreachable"})
        return JSONResponse(status_code=200, content={"version": VERSION, "registry": "ok"})

    @app.get("/api/v1/status")
    def api_status(repos: RepositoryFactory = Depends(get_repositories)):
        return {
            "api": "gore-extract",
            "status": "operational",
            "version": VERSION,
            "registry": url.split(":", 1)[0],
            "runs": repos.runs.count(),
            "evaluations": repos.evaluations.count(),
        }

    @app.get("/api/v1/runs", response_model=RunList)
    def list_runs(
        dataset_id: Optional[str] = Query(None),
        strategy: Optional[str] = Query(None),
        limit: int = Query(100, ge=1, le=1000),
        repos: RepositoryFactory = Depends(get_repositories),
    ):
        records = repos.runs.list_runs(dataset_id=dataset_id, strategy=strategy, limit=limit)
        runs = [RunSummary.model_validate(r) for r in records]
        return RunList(runs=runs, count=len(runs))

    @app.get("/api/v1/runs/{run_id}", response_model=RunDetail)
    def get_run(run_id: str, repos: RepositoryFactory = Depends(get_repositories)):
        record = repos.runs.get_by_run_id(run_id)
        if record is None:
            raise HTTPException(status_code=404, detail=f"Run {run_id} not found")
        return RunDetail.model_validate(record)

    @app.get("/api/v1/runs/{run_id}/evaluations", response_model=List[EvaluationOut])
    def get_run_evaluations(run_id: str, repos: RepositoryFactory = Depends(get_repositories)):
        if repos.runs.get_by_run_id(run_id) is None:
            raise HTTPException(status_code=404, detail=f"Run {run_id} not found")
        return [EvaluationOut.model_validate(e) for e in repos.evaluations.get_by_run(run_id)]

    @app.get("/api/v1/evaluations/best", response_model=BestEvaluationOut)
    def best_evaluation(
        task: str = Query(..., pattern="^(Actors|HL|LL)$"),
        dataset_id: Optional[str] = Query(None),
        repos: RepositoryFactory = Depends(get_repositories),
    ):
        record = repos.evaluations.get_best_by_task(task, dataset_id=dataset_id)
        if record is None:
            raise HTTPException(status_code=404, detail=f"No evaluation for task {task}")
        return BestEvaluationOut.model_validate(record)

    @app.get("/api/v1/datasets/{dataset_id}/ablation-pairs", response_model=List[AblationPairOut])
    def ablation_pairs(dataset_id: str, repos: RepositoryFactory = Depends(get_repositories)):
        pairs = repos.runs.get_ablation_pairs(dataset_id)
        return [
            AblationPairOut(
                strategy=strategy,
                with_critic=with_critic.run_id if with_critic else None,
                without_critic=without_critic.run_id if without_critic else None,
            )
            for strategy, (with_critic, without_critic) in sorted(pairs.items())
        ]

    return app


# Entry point per development locale
if __name__ == "__main__":
    uvicorn.run(
        "src.main:create_app",
        factory=True,
        host="0.0.0.0",
        port=int(os.getenv("PORT", 8000)),
        reload=os.getenv("ENVIRONMENT") == "development"
    )
