# alembic/env.py - migrations del run registry
from logging.config import fileConfig
from sqlalchemy import engine_from_config, pool
from alembic import context

from src.database.connection import get_registry_url
from src.models import BaseModel

config = context.config

# Non silenziare i logger già creati (CLI e test)
if config.config_file_name is not None:
    fileConfig(config.config_file_name, disable_existing_loggers=False)

# Le migration restano scritte a mano; i metadata servono a `alembic check`
target_metadata = BaseModel.metadata


def run_migrations_offline() -> None:
    """SQL su stdout, senza connessione"""
    context.configure(
        url=get_registry_url(),
        target_metadata=target_metadata,
        literal_binds=True,
        dialect_opts={"paramstyle": "named"},
        render_as_batch=get_registry_url().startswith("sqlite"),
    )

    with context.begin_transaction():
        context.run_migrations()


def run_migrations_online() -> None:
    # GORE_REGISTRY_URL (o <GORE_OUT_DIR>/runs.db) vince su alembic.ini
    section = config.get_section(config.config_ini_section) or {}
    section["sqlalchemy.url"] = get_registry_url()

    connectable = engine_from_config(section, prefix="sqlalchemy.", poolclass=pool.NullPool)

    with connectable.connect() as connection:
        context.configure(
            connection=connection,
            target_metadata=target_metadata,
            compare_type=True,
            render_as_batch=connection.dialect.name == "sqlite",
        )

        with context.begin_transaction():
            context.run_migrations()


if context.is_offline_mode():
    run_migrations_offline()
else:
    run_migrations_online()
