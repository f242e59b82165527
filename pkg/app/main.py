"""FastAPI application main module."""

import logging
import uvicorn
from contextlib import asynccontextmanager
from fastapi import FastAPI

from app.config import get_settings
from app.routes import atlas_routes, polytope_routes
from app.services.atlas_service import load_atlas

# Configure logging
logging.basicConfig(
    level=get_settings().log_level,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """
    Lifespan context manager for FastAPI application.

    Loads and validates the atlas once on startup.
    """
    logging.info("Loading atlas...")
    atlas = load_atlas()
    logging.info(f"Atlas loaded with {len(atlas)} entries")
    logging.info("Application started successfully")

    yield

    logging.info("Application shutdown complete")


app = FastAPI(
    title="Fine Interior Toolkit API",
    description="Fine interiors, canonical closures and hypersurface invariants of lattice 3-topes",
    version="0.1.0",
    lifespan=lifespan,
)

# Include routes
app.include_router(polytope_routes.router)
app.include_router(atlas_routes.router)


@app.get("/health")
async def health_check():
    """
    Health check endpoint that verifies the atlas is loadable.

    Returns:
        dict: Health status and atlas size
    """
    try:
        return {
            "status": "healthy",
            "atlas_entries": len(load_atlas()),
        }
    except Exception as e:
        return {
            "status": "unhealthy",
            "atlas_entries": 0,
            "error": str(e),
        }


if __name__ == "__main__":
    settings = get_settings()
    uvicorn.run("app.main:app", host=settings.api_host, port=settings.api_port, reload=False)
