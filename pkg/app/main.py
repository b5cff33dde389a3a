# app/main.py
from fastapi import FastAPI, Request, status
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import ValidationError
import logging
import sys

from app.core.config import settings
from app.core.exceptions import EvidenceError, TrialNotFoundError
from app.api.routes import design, simulate, tables, trials

# Configure logging
logging.basicConfig(
    level=settings.LOG_LEVEL,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    handlers=[
        logging.StreamHandler(sys.stdout)
    ]
)

logger = logging.getLogger(__name__)

# Create FastAPI app
app = FastAPI(
    title=settings.APP_NAME,
    description="Likelihood-based design and monitoring of sequential time-to-event trials",
    version=settings.VERSION,
    docs_url="/docs",
    redoc_url="/redoc"
)

# Configure CORS
app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.cors_origins,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.on_event("startup")
async def startup_event():
    logger.info("=" * 50)
    logger.info(f"Starting {settings.APP_NAME} v{settings.VERSION}")
    logger.info(f"Environment: {settings.ENVIRONMENT}")
    logger.info(f"CORS Origins: {settings.cors_origins}")
    logger.info(f"Default seed: {settings.EVIDENCE_SEED}, workers: {settings.SIM_WORKERS}")
    logger.info("=" * 50)


@app.on_event("shutdown")
async def shutdown_event():
    logger.info(f"Shutting down {settings.APP_NAME}")


@app.get("/health")
async def health_check():
    """Health check endpoint"""
    return {
        "status": "healthy",
        "environment": settings.ENVIRONMENT,
        "version": settings.VERSION
    }


@app.get("/")
async def root():
    return {
        "message": f"Welcome to {settings.APP_NAME}",
        "version": settings.VERSION,
        "status": "operational",
        "docs": "/docs",
        "redoc": "/redoc",
        "health": "/health"
    }


# Include routers
app.include_router(design.router, prefix="/api/design", tags=["Design"])
app.include_router(tables.router, prefix="/api/tables", tags=["Tables"])
app.include_router(simulate.router, prefix="/api/simulate", tags=["Simulation"])
app.include_router(trials.router, prefix="/api/trials", tags=["Monitored Trials"])


@app.exception_handler(TrialNotFoundError)
async def trial_not_found_handler(request: Request, exc: TrialNotFoundError):
    return JSONResponse(status_code=status.HTTP_404_NOT_FOUND, content={"detail": str(exc)})


@app.exception_handler(EvidenceError)
async def evidence_error_handler(request: Request, exc: EvidenceError):
    """Domain errors are the caller's fault"""
    logger.warning(f"{type(exc).__name__} at {request.method} {request.url.path}: {exc}")
    content = {"detail": str(exc), "type": type(exc).__name__}
    row = getattr(exc, "row", None)
    if row is not None:
        content["row"] = row
    return JSONResponse(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, content=content)


@app.exception_handler(ValidationError)
async def validation_error_handler(request: Request, exc: ValidationError):
    return JSONResponse(
        status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
        content={"detail": [{"loc": e["loc"], "msg": e["msg"]} for e in exc.errors()]},
    )


# Global exception handler
@app.exception_handler(Exception)
async def global_exception_handler(request: Request, exc: Exception):
    """Handle all unhandled exceptions"""
    logger.error(
        f"Unhandled exception at {request.method} {request.url.path}: {str(exc)}",
        exc_info=True
    )

    # Return detailed error in development, generic in production
    error_detail = {
        "detail": "An internal server error occurred",
        "path": str(request.url.path),
        "method": request.method
    }

    if settings.ENVIRONMENT == "development":
        error_detail["error"] = str(exc)
        error_detail["type"] = type(exc).__name__

    return JSONResponse(
        status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
        content=error_detail
    )


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(
        "app.main:app",
        host=settings.HOST,
        port=settings.PORT,
        reload=settings.ENVIRONMENT == "development"
    )
