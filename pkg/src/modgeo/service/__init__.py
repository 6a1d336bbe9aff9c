"""HTTP service: pydantic request models and the FastAPI application."""
