"""API v1 router."""
from fastapi import APIRouter

from app.api.v1 import levels, metrics

router = APIRouter()

router.include_router(levels.router, prefix="/levels", tags=["levels"])
router.include_router(metrics.router, prefix="/metrics", tags=["metrics"])
