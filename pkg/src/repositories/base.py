# =====================================================
# src/repositories/base.py - Generic registry repository
# =====================================================
from typing import Any, Dict, Generic, Iterable, List, Optional, Type, TypeVar
from sqlalchemy.orm import Session
import uuid

from src.models.base import BaseModel

ModelType = TypeVar("ModelType", bound=BaseModel)


class BaseRepository(Generic[ModelType]):
    """
    Operazioni comuni sui record del registry.

    Le scritture fanno flush, non commit: il commit spetta alla
    UnitOfWork (o al chiamante).
    """

    def __init__(self, model: Type[ModelType], db: Session):
        self.model = model
        self.db = db

    # ==========================================
    # WRITE
    # ==========================================

    def create(self, obj_data: Dict[str, Any]) -> ModelType:
        db_obj = self.model(**obj_data)
        self.db.add(db_obj)
        self.db.flush()
        self.db.refresh(db_obj)
        return db_obj

    def create_many(self, items: Iterable[Dict[str, Any]]) -> List[ModelType]:
        objs = [self.model(**data) for data in items]
        self.db.add_all(objs)
        self.db.flush()
        return objs

    def update(self, id: uuid.UUID, update_data: Dict[str, Any]) -> Optional[ModelType]:
        db_obj = self.db.get(self.model, id)
        if db_obj is None:
            return None

        for field, value in update_data.items():
            if hasattr(db_obj, field):
                setattr(db_obj, field, value)

        self.db.flush()
        self.db.refresh(db_obj)
        return db_obj

    def delete_where(self, **filters: Any) -> int:
        """Cancella i record che corrispondono a tutti i filtri; ritorna quanti"""
        return self.db.query(self.model).filter_by(**filters).delete(synchronize_session=False)

    # ==========================================
    # READ
    # ==========================================

    def find_one(self, **filters: Any) -> Optional[ModelType]:
        return self.db.query(self.model).filter_by(**filters).first()

    def count(self) -> int:
        return self.db.query(self.model).count()
