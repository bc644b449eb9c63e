# src/database/exceptions.py
"""
Eccezioni per le operazioni sul run registry.

Convertono gli errori SQLAlchemy in errori di dominio con messaggi
leggibili dal CLI e dalla API.
"""
from functools import wraps


class DatabaseError(Exception):
    """
    Base exception per errori database generici.

    Usata per errori di connessione, transazioni fallite,
    constraint violations non specifiche.
    """
    pass


class EntityNotFoundError(DatabaseError):
    """
    Entity non presente nel registry.

    Examples:
        - mark_completed() su un run_id mai registrato
        - record_rows() per una run inesistente
    """
    pass


class DuplicateEntityError(DatabaseError):
    """
    Violazione di unicità.

    Examples:
        - register() con un run_id già presente
    """
    pass


class ValidationError(DatabaseError):
    """
    Dati che violano check constraint o foreign key.

    Examples:
        - status fuori da running/completed/failed
        - evaluation che punta a una run inesistente
    """
    pass


# ==========================================
# UTILITY FUNCTIONS
# ==========================================

def handle_integrity_error(error, entity_name: str = "Entity"):
    """
    Converte IntegrityError SQLAlchemy in exception più specifiche.

    Raises:
        DuplicateEntityError: Per unique constraint violations
        ValidationError: Per check constraint / foreign key violations
        DatabaseError: Per altri integrity errors
    """
    error_msg = str(getattr(error, "orig", error)).lower()

    if any(keyword in error_msg for keyword in ['unique', 'duplicate', 'already exists']):
        if 'run_id' in error_msg:
            raise DuplicateEntityError(f"{entity_name} with this run_id already exists") from error
        raise DuplicateEntityError(f"Duplicate {entity_name.lower()} found") from error

    elif any(keyword in error_msg for keyword in ['foreign key', 'referenced', 'does not exist']):
        raise ValidationError(f"Referenced {entity_name.lower()} does not exist") from error

    elif any(keyword in error_msg for keyword in ['check', 'constraint', 'violates']):
        raise ValidationError(f"Data validation failed for {entity_name.lower()}: {error_msg}") from error

    else:
        raise DatabaseError(f"Database integrity error for {entity_name.lower()}: {error_msg}") from error


def handle_sqlalchemy_error(error, operation: str = "operation", entity_name: str = "entity"):
    """Converte errori SQLAlchemy generici in DatabaseError"""
    from sqlalchemy.exc import IntegrityError, SQLAlchemyError

    if isinstance(error, IntegrityError):
        handle_integrity_error(error, entity_name)
    elif isinstance(error, SQLAlchemyError):
        raise DatabaseError(f"Database error during {operation} {entity_name.lower()}: {error}") from error
    else:
        raise DatabaseError(f"Unexpected error during {operation} {entity_name.lower()}: {error}") from error


# ==========================================
# DECORATORS
# ==========================================

def handle_database_errors(entity_name: str = "Entity"):
    """
    Decorator per error handling automatico nei repository methods.

    Usage:
        @handle_database_errors("Run")
        def register(self, manifest, artifact_dir):
            ...
    """
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except (EntityNotFoundError, DuplicateEntityError, ValidationError):
                raise
            except Exception as e:
                repository = args[0] if args else None
                db = getattr(repository, "db", None)
                if db is not None:
                    db.rollback()
                operation = func.__name__.replace('_', ' ')
                handle_sqlalchemy_error(e, operation, entity_name)

        return wrapper
    return decorator
