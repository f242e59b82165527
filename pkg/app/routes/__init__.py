"""FastAPI routers for polytope analysis and the atlas."""
